#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unithood/errors.hpp"
#include "unithood/score.hpp"
#include "unithood/text.hpp"

namespace unithood::eval {

// Case and internal whitespace are canonicalized so that scored output joins
// gold files reliably. Fields are tab-separated; canonicalization removes
// any tabs from the fields themselves.
inline std::string pair_key(const std::string& ax, const std::string& b,
                            const std::string& ay) {
  return canonicalize(ax) + "\t" + canonicalize(b) + "\t" + canonicalize(ay);
}

struct GoldLabel {
  std::string pair_key;
  bool should_merge = false;
};

using GoldSet = std::unordered_map<std::string, bool>;

// Gold file: one {"ax","b","ay","merge"} object per line.
inline GoldSet load_gold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open gold file: " + path.string());
  GoldSet gold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.contains("ax") || !j.contains("ay") || !j.contains("merge")) {
      throw ParseError(line_no, "gold record needs \"ax\", \"ay\" and \"merge\"");
    }
    const std::string key = pair_key(j["ax"].get<std::string>(), j.value("b", ""),
                                     j["ay"].get<std::string>());
    if (!gold.emplace(key, j["merge"].get<bool>()).second) {
      throw ParseError(line_no, "duplicate gold pair key: " + key);
    }
  }
  return gold;
}

struct ContingencyTable {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  std::uint64_t merged() const { return tp + fp; }
};

// Precision, recall and accuracy. A missing value marks a 0/0 case and is
// reported as "n/a", never silently as 0 or 1.
struct Metrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> accuracy;
};

inline ContingencyTable build_contingency(
    const std::vector<std::pair<std::string, bool>>& decisions, const GoldSet& gold) {
  std::vector<std::string> missing;
  for (const auto& [key, merge] : decisions) {
    if (gold.find(key) == gold.end()) missing.push_back(key);
  }
  if (!missing.empty()) throw MissingGoldError(std::move(missing));

  ContingencyTable t;
  for (const auto& [key, merge] : decisions) {
    const bool should = gold.at(key);
    if (merge && should) ++t.tp;
    else if (merge && !should) ++t.fp;
    else if (!merge && should) ++t.fn;
    else ++t.tn;
  }
  return t;
}

inline Metrics compute_metrics(const ContingencyTable& t) {
  Metrics m;
  if (t.tp + t.fp > 0) {
    m.precision = static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp);
  }
  if (t.tp + t.fn > 0) {
    m.recall = static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn);
  }
  if (t.total() > 0) {
    m.accuracy = static_cast<double>(t.tp + t.tn) / static_cast<double>(t.total());
  }
  return m;
}

struct SweepPoint {
  double threshold = 0.0;
  Metrics metrics;
  ContingencyTable table;
};

// Re-decides every scored pair at each grid threshold (inclusive >=, the
// same rule as decide_merge_ou) and tallies it against gold.
inline std::vector<SweepPoint> threshold_sweep(
    const std::vector<std::pair<std::string, Score>>& scored, const GoldSet& gold,
    const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] < grid[i - 1]) throw ArgumentError("threshold grid must be sorted ascending");
  }
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (const double threshold : grid) {
    std::vector<std::pair<std::string, bool>> decisions;
    decisions.reserve(scored.size());
    for (const auto& [key, score] : scored) {
      decisions.emplace_back(key, score >= Score(threshold));
    }
    const auto table = build_contingency(decisions, gold);
    points.push_back({threshold, compute_metrics(table), table});
  }
  return points;
}

// ---------------------------------------------------------------------------
// Reports

// Text output rounds to 5 decimals; the JSON report keeps full precision.
inline std::string format_metric(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5f", *v);
  return buf;
}

inline std::string render_text_report(const ContingencyTable& t, const Metrics& m) {
  std::string out;
  out += "              gold=merge  gold=keep\n";
  char row[80];
  std::snprintf(row, sizeof(row), "  merge       %10llu %10llu\n",
                static_cast<unsigned long long>(t.tp), static_cast<unsigned long long>(t.fp));
  out += row;
  std::snprintf(row, sizeof(row), "  no-merge    %10llu %10llu\n",
                static_cast<unsigned long long>(t.fn), static_cast<unsigned long long>(t.tn));
  out += row;
  out += "precision " + format_metric(m.precision) + "\n";
  out += "recall    " + format_metric(m.recall) + "\n";
  out += "accuracy  " + format_metric(m.accuracy) + "\n";
  return out;
}

inline nlohmann::ordered_json report_json(const ContingencyTable& t, const Metrics& m) {
  auto metric = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["precision"] = metric(m.precision);
  j["recall"] = metric(m.recall);
  j["accuracy"] = metric(m.accuracy);
  j["table"] = {{"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}, {"tn", t.tn}};
  return j;
}

}  // namespace unithood::eval
