#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unithood/counts.hpp"
#include "unithood/errors.hpp"
#include "unithood/score.hpp"

namespace unithood::measures {

using counts::CountSnapshot;

// Which count estimates the joint probability in MI. Document co-occurrence
// (n_xy) is the default; n_s restricts the joint event to the conjoined form.
enum class JointSource { n_xy, n_s };

// The five thresholds gating the empirical UH function.
struct UhThresholds {
  double mi_plus = 0.9;
  double mi_minus = 0.02;
  double id_t = 6.0;
  double idr_plus = 1.35;
  double idr_minus = 0.93;
};

struct OuConfig {
  double log_base = 10.0;       // any base > 1
  double ou_threshold = -8.39;  // OU_T
  JointSource mi_joint_source = JointSource::n_xy;
};

struct Decision {
  bool merge = false;
  Score score;
  std::string measure_name;
};

// ---------------------------------------------------------------------------
// Pointwise mutual information

// MI(a,b) = log2( p(a,b) / (p(a) p(b)) ) with probabilities taken as count
// fractions of the sample space. The sample size cancels into
// log2(joint * N / (n_x * n_y)).
inline Score mutual_information(const CountSnapshot& s, JointSource joint_source) {
  if (s.sample_size == 0) throw InvalidSampleSpaceError("MI needs N > 0");
  if (s.n_x == 0 || s.n_y == 0) {
    throw UndefinedMarginalError("MI undefined: a marginal count is zero");
  }
  const std::uint64_t joint = joint_source == JointSource::n_xy ? s.n_xy : s.n_s;
  if (joint == 0) return Score::negative_infinity();
  const double num = static_cast<double>(joint) * static_cast<double>(s.sample_size);
  const double den = static_cast<double>(s.n_x) * static_cast<double>(s.n_y);
  return Score(std::log2(num / den));
}

// ---------------------------------------------------------------------------
// Lexical independence

// ID(z,s) = log10(n_z - n_s) when n_z > n_s, otherwise 0. Base 10 is fixed.
inline double lexical_independence(std::uint64_t n_z, std::uint64_t n_s) {
  if (n_z > n_s) return std::log10(static_cast<double>(n_z - n_s));
  return 0.0;
}

inline double independence_ratio(double id_x, double id_y) {
  if (id_y == 0.0) throw DivisionUndefinedError("IDR undefined: ID(a_y, s) is zero");
  return id_x / id_y;
}

// ---------------------------------------------------------------------------
// UH: the empirical five-threshold merge function

// Measure values feeding the UH branches. A missing value means the measure
// was undefined for this pair; it fails only the conjuncts that need it.
struct UhMeasures {
  std::optional<double> mi;
  double id_x = 0.0;
  double id_y = 0.0;
  std::optional<double> idr;
};

// Merge when MI is extremely high (branch 1), or when MI is within the
// accepted band and both units are sufficiently independent from s with a
// balanced independence ratio (branch 2).
inline bool uh_merge(const UhMeasures& m, const UhThresholds& t) {
  if (!m.mi) return false;
  if (*m.mi > t.mi_plus) return true;
  return t.mi_plus >= *m.mi && *m.mi >= t.mi_minus && m.id_x >= t.id_t &&
         m.id_y >= t.id_t && m.idr.has_value() && t.idr_plus >= *m.idr &&
         *m.idr >= t.idr_minus;
}

inline UhMeasures uh_measures(const CountSnapshot& s, const OuConfig& config) {
  UhMeasures m;
  try {
    m.mi = mutual_information(s, config.mi_joint_source).value();
  } catch (const UndefinedMarginalError&) {
  }
  m.id_x = lexical_independence(s.n_x, s.n_s);
  m.id_y = lexical_independence(s.n_y, s.n_s);
  try {
    m.idr = independence_ratio(m.id_x, m.id_y);
  } catch (const DivisionUndefinedError&) {
  }
  return m;
}

inline Decision unithood_uh(const CountSnapshot& s, const UhThresholds& thresholds,
                            const OuConfig& config) {
  const bool merge = uh_merge(uh_measures(s, config), thresholds);
  return {merge, Score(merge ? 1.0 : 0.0), "UH"};
}

// ---------------------------------------------------------------------------
// Odds of unithood

// Local occurrence odds: P(S) / P(X∩Y \ S), a measure of exclusivity. The
// sample size cancels, leaving n_s / (n_xy - n_s); when the co-occurrences
// are exclusively s the odds are defined as 1.
inline double odds_local(const CountSnapshot& s) {
  if (s.n_xy < s.n_s) throw ArgumentError("snapshot not normalized: n_xy < n_s");
  const std::uint64_t rest = s.n_xy - s.n_s;
  if (rest == 0) return 1.0;
  return static_cast<double>(s.n_s) / static_cast<double>(rest);
}

// Global occurrence odds: P(S) / (1 - P(S)), a measure of pervasiveness.
// Returns +infinity when s occurs in every document.
inline double odds_global(const CountSnapshot& s) {
  if (s.sample_size == 0) throw InvalidSampleSpaceError("odds_global needs N > 0");
  if (s.n_s > s.sample_size) throw ArgumentError("snapshot not normalized: n_s > N");
  const std::uint64_t rest = s.sample_size - s.n_s;
  if (rest == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(s.n_s) / static_cast<double>(rest);
}

// OU(s) = log O_L + log O_G in the configured base. Zero odds pull the score
// to -infinity and dominate, so a pair with no observed evidence never
// merges; O_G = +infinity (s in every document) pushes it to +infinity.
inline Score odds_of_unithood(const CountSnapshot& s, const OuConfig& config) {
  if (config.log_base <= 1.0) throw ArgumentError("log base must be greater than 1");
  if (s.sample_size == 0) throw InvalidSampleSpaceError("OU needs N > 0");
  const double ol = odds_local(s);
  const double og = odds_global(s);
  if (ol == 0.0 || og == 0.0) return Score::negative_infinity();
  if (std::isinf(og)) return Score::positive_infinity();
  const double base_log = std::log(config.log_base);
  return Score(std::log(ol) / base_log + std::log(og) / base_log);
}

// Merge when the score reaches the threshold. The comparison is inclusive:
// a score exactly at OU_T merges.
inline Decision decide_merge_ou(const Score& score, double ou_threshold) {
  return {score >= Score(ou_threshold), score, "OU"};
}

// ---------------------------------------------------------------------------
// C-value

struct CValueInput {
  std::vector<std::string> candidate;  // the word sequence a
  std::uint64_t f_a = 0;               // occurrence frequency of a
  // longer term candidates containing a, with their frequencies
  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> longer_set;
  std::size_t longest_ngram = 1;  // g
};

// Cvalue(a) = log2|a| * f_a for the longest n-grams, otherwise
// log2|a| * (f_a - mean frequency of the longer candidates containing a).
// An empty longer set in the second branch behaves as mean 0.
inline double c_value(const CValueInput& input) {
  if (input.candidate.empty()) throw ArgumentError("c_value candidate must not be empty");
  if (input.candidate.size() > input.longest_ngram) {
    throw ArgumentError("candidate length exceeds the longest n-gram considered");
  }
  for (const auto& [cand, freq] : input.longer_set) {
    if (cand == input.candidate) {
      throw ArgumentError("candidate must not appear in its own longer set");
    }
  }
  const double length_weight = std::log2(static_cast<double>(input.candidate.size()));
  if (input.candidate.size() == input.longest_ngram) {
    return length_weight * static_cast<double>(input.f_a);
  }
  double mean = 0.0;
  if (!input.longer_set.empty()) {
    double sum = 0.0;
    for (const auto& [cand, freq] : input.longer_set) sum += static_cast<double>(freq);
    mean = sum / static_cast<double>(input.longer_set.size());
  }
  return length_weight * (static_cast<double>(input.f_a) - mean);
}

// ---------------------------------------------------------------------------
// Scored records: one JSON object per scored pair

struct MeasureSet {
  Score ou;
  std::optional<Score> mi;  // missing when a marginal count is zero
  int uh = 0;               // UH function value, 1 or 0
  bool merge_ou = false;
  bool merge_uh = false;
};

inline MeasureSet compute_measures(const CountSnapshot& s, const UhThresholds& thresholds,
                                   const OuConfig& config) {
  MeasureSet m;
  m.ou = odds_of_unithood(s, config);
  m.merge_ou = decide_merge_ou(m.ou, config.ou_threshold).merge;
  try {
    m.mi = mutual_information(s, config.mi_joint_source);
  } catch (const UndefinedMarginalError&) {
  }
  const Decision uh = unithood_uh(s, thresholds, config);
  m.uh = uh.merge ? 1 : 0;
  m.merge_uh = uh.merge;
  return m;
}

struct ScoredRecord {
  std::string s;
  std::string ax;
  std::string ay;
  std::string b;
  CountSnapshot snapshot;
  MeasureSet measures;
};

inline nlohmann::ordered_json scored_to_json(const ScoredRecord& r) {
  nlohmann::ordered_json j;
  j["s"] = r.s;
  j["ax"] = r.ax;
  j["ay"] = r.ay;
  j["b"] = r.b;
  j["n_x"] = r.snapshot.n_x;
  j["n_y"] = r.snapshot.n_y;
  j["n_s"] = r.snapshot.n_s;
  j["n_xy"] = r.snapshot.n_xy;
  j["N"] = r.snapshot.sample_size;
  j["ou"] = score_to_json(r.measures.ou);
  j["uh"] = r.measures.uh;
  j["mi"] = r.measures.mi ? score_to_json(*r.measures.mi) : nlohmann::ordered_json(nullptr);
  j["merge_ou"] = r.measures.merge_ou;
  j["merge_uh"] = r.measures.merge_uh;
  return j;
}

inline ScoredRecord scored_from_json(const nlohmann::json& j) {
  ScoredRecord r;
  r.s = j.at("s").get<std::string>();
  r.ax = j.at("ax").get<std::string>();
  r.ay = j.at("ay").get<std::string>();
  r.b = j.value("b", "");
  r.snapshot.n_x = j.at("n_x").get<std::uint64_t>();
  r.snapshot.n_y = j.at("n_y").get<std::uint64_t>();
  r.snapshot.n_s = j.at("n_s").get<std::uint64_t>();
  r.snapshot.n_xy = j.at("n_xy").get<std::uint64_t>();
  r.snapshot.sample_size = j.at("N").get<std::uint64_t>();
  r.measures.ou = score_from_json(j.at("ou"));
  r.measures.uh = j.at("uh").get<int>();
  if (j.contains("mi") && !j["mi"].is_null()) r.measures.mi = score_from_json(j["mi"]);
  r.measures.merge_ou = j.at("merge_ou").get<bool>();
  r.measures.merge_uh = j.at("merge_uh").get<bool>();
  return r;
}

}  // namespace unithood::measures
