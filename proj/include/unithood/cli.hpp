#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unithood/counts.hpp"
#include "unithood/errors.hpp"
#include "unithood/eval.hpp"
#include "unithood/extract.hpp"
#include "unithood/measures.hpp"

namespace unithood::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Small I/O helpers

// Writes to a file when a path is given, otherwise to the fallback stream.
// "-" means the fallback stream explicitly.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : fallback_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw ArgumentError("cannot write output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : *fallback_; }

 private:
  std::ofstream file_;
  std::ostream* fallback_;
};

template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open file: " + path.string());
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
    fn(j, line_no);
  }
}

inline std::vector<extract::CandidatePair> read_pairs(const fs::path& path) {
  std::vector<extract::CandidatePair> pairs;
  for_each_jsonl(path, [&pairs](const nlohmann::json& j, std::size_t line_no) {
    try {
      pairs.push_back(extract::pair_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid pair record: ") + e.what());
    }
  });
  return pairs;
}

inline std::vector<measures::ScoredRecord> read_scored(const fs::path& path) {
  std::vector<measures::ScoredRecord> records;
  for_each_jsonl(path, [&records](const nlohmann::json& j, std::size_t line_no) {
    try {
      records.push_back(measures::scored_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid scored record: ") + e.what());
    }
  });
  return records;
}

// Function-word rates file: a JSON object of word -> fraction of documents
// containing the word on a reference corpus.
inline std::vector<std::pair<std::string, double>> load_rates(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open rates file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid rates file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError("rates file must hold a JSON object");
  std::vector<std::pair<std::string, double>> rates;
  for (const auto& [word, rate] : j.items()) {
    if (!rate.is_number()) throw FormatError("rate for \"" + word + "\" is not a number");
    rates.emplace_back(word, rate.get<double>());
  }
  return rates;
}

inline std::set<std::string> parse_preposition_list(const std::string& csv) {
  std::set<std::string> preps;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string canon = canonicalize(item);
    if (!canon.empty()) preps.insert(canon);
  }
  if (preps.empty()) throw ArgumentError("preposition list must not be empty");
  return preps;
}

// ---------------------------------------------------------------------------
// Provider assembly

struct ProviderOptions {
  std::string kind = "local";
  std::string index_path;
  std::string endpoint;
  std::string count_field;
  std::string cache_path;
  double rate_limit = 10.0;
  std::uint64_t fixed_n = 0;
  bool has_fixed_n = false;
  std::string rates_path;
};

inline std::unique_ptr<counts::CountProvider> make_provider(const ProviderOptions& opts) {
  if (opts.kind == "local") {
    if (opts.index_path.empty()) throw ArgumentError("local provider needs --index");
    return std::make_unique<counts::LocalCountProvider>(
        counts::load_local_index(opts.index_path));
  }
  counts::ProviderConfig config;
  config.kind = counts::ProviderKind::http;
  config.endpoint_template = opts.endpoint;
  config.count_field_path = opts.count_field;
  config.cache_path = opts.cache_path;
  config.rate_limit = opts.rate_limit;
  if (opts.has_fixed_n) config.fixed_sample_size = opts.fixed_n;
  std::vector<std::pair<std::string, double>> rates;
  if (!opts.rates_path.empty()) rates = load_rates(opts.rates_path);
  return std::make_unique<counts::WebCountProvider>(std::move(config), std::move(rates));
}

// ---------------------------------------------------------------------------
// Subcommand implementations

inline void run_index(const std::string& corpus_path, const std::string& out_dir,
                      std::ostream& out) {
  const auto docs = counts::load_corpus(corpus_path);
  const auto index = counts::build_local_index(docs);
  fs::create_directories(out_dir);
  counts::save_local_index(index, fs::path(out_dir) / "index.json");
  out << index.doc_count() << "\n";
}

inline void run_extract(const std::string& tagged_path, const std::string& out_path,
                        const std::set<std::string>& prepositions, std::ostream& fallback) {
  std::ifstream in(tagged_path);
  if (!in) throw ArgumentError("cannot open tagged file: " + tagged_path);
  const auto sentences = extract::parse_tagged_input(in);
  OutputTarget target(out_path, fallback);
  for (const auto& sentence : sentences) {
    const auto nps = extract::extract_noun_phrases(sentence);
    for (const auto& pair : extract::generate_pairs(sentence, nps, prepositions)) {
      target.stream() << extract::pair_to_json(pair).dump() << '\n';
    }
  }
}

inline measures::ScoredRecord score_pair(const counts::CountProvider& provider,
                                         const extract::CandidatePair& pair,
                                         const measures::UhThresholds& thresholds,
                                         const measures::OuConfig& config) {
  const auto snapshot = counts::take_snapshot(provider, pair.ax, pair.ay, pair.s);
  return {pair.s, pair.ax, pair.ay, pair.b, snapshot,
          measures::compute_measures(snapshot, thresholds, config)};
}

// Iterated scoring over tagged sentences: each round scores the pairs the
// current segmentation generates, then folds OU-accepted merges back into
// the unit lists so later rounds can build longer candidates. Stops early
// once a round scores nothing new.
inline std::vector<measures::ScoredRecord> score_rounds(
    const counts::CountProvider& provider, std::vector<extract::TaggedSentence> sentences,
    int rounds, const std::set<std::string>& prepositions,
    const measures::UhThresholds& thresholds, const measures::OuConfig& config) {
  struct SentenceState {
    extract::TaggedSentence sentence;
    std::vector<extract::NounPhrase> units;
  };
  std::vector<SentenceState> states;
  states.reserve(sentences.size());
  for (auto& s : sentences) {
    auto units = extract::extract_noun_phrases(s);
    states.push_back({std::move(s), std::move(units)});
  }

  std::vector<measures::ScoredRecord> results;
  std::set<std::string> seen;
  for (int round = 0; round < rounds; ++round) {
    bool any_new = false;
    for (auto& state : states) {
      const auto pairs = extract::generate_pairs(state.sentence, state.units, prepositions);
      std::set<std::pair<std::uint32_t, std::uint32_t>> merged;
      for (const auto& pair : pairs) {
        const std::string key = pair.sentence_id + "\t" + std::to_string(pair.x) + "\t" +
                                std::to_string(pair.y) + "\t" + pair.s;
        if (!seen.insert(key).second) continue;
        any_new = true;
        auto record = score_pair(provider, pair, thresholds, config);
        if (record.measures.merge_ou) merged.insert({pair.x, pair.y});
        results.push_back(std::move(record));
      }
      if (!merged.empty()) {
        state.units = extract::merge_pairs_into_units(state.sentence, state.units, merged);
      }
    }
    if (!any_new) break;
  }
  return results;
}

struct ScoreOptions {
  std::string pairs_path;
  std::string tagged_path;
  int rounds = 1;
  std::string prepositions_csv;
  ProviderOptions provider;
  double log_base = 10.0;
  double ou_threshold = -8.39;
  std::string mi_joint = "nxy";
  measures::UhThresholds uh;
  std::string out_path;
};

inline void run_score(const ScoreOptions& opts, std::ostream& fallback) {
  if (opts.pairs_path.empty() == opts.tagged_path.empty()) {
    throw ArgumentError("score needs exactly one of --pairs or --tagged");
  }
  if (opts.rounds > 1 && opts.tagged_path.empty()) {
    throw ArgumentError("--rounds above 1 needs --tagged input to regenerate pairs");
  }
  measures::OuConfig config;
  config.log_base = opts.log_base;
  config.ou_threshold = opts.ou_threshold;
  config.mi_joint_source =
      opts.mi_joint == "ns" ? measures::JointSource::n_s : measures::JointSource::n_xy;
  const auto prepositions = opts.prepositions_csv.empty()
                                ? extract::default_prepositions()
                                : parse_preposition_list(opts.prepositions_csv);
  const auto provider = make_provider(opts.provider);

  std::vector<measures::ScoredRecord> results;
  if (!opts.pairs_path.empty()) {
    for (const auto& pair : read_pairs(opts.pairs_path)) {
      results.push_back(score_pair(*provider, pair, opts.uh, config));
    }
  } else {
    std::ifstream in(opts.tagged_path);
    if (!in) throw ArgumentError("cannot open tagged file: " + opts.tagged_path);
    auto sentences = extract::parse_tagged_input(in);
    results = score_rounds(*provider, std::move(sentences), opts.rounds, prepositions,
                           opts.uh, config);
  }

  OutputTarget target(opts.out_path, fallback);
  for (const auto& record : results) {
    target.stream() << measures::scored_to_json(record).dump() << '\n';
  }
}

inline std::vector<std::pair<std::string, bool>> decisions_from_scored(
    const std::vector<measures::ScoredRecord>& records, const std::string& measure,
    double threshold) {
  std::vector<std::pair<std::string, bool>> decisions;
  decisions.reserve(records.size());
  for (const auto& r : records) {
    const std::string key = eval::pair_key(r.ax, r.b, r.ay);
    const bool merge = measure == "uh"
                           ? r.measures.merge_uh
                           : measures::decide_merge_ou(r.measures.ou, threshold).merge;
    decisions.emplace_back(key, merge);
  }
  return decisions;
}

inline void run_evaluate(const std::string& scored_path, const std::string& gold_path,
                         double threshold, const std::string& measure,
                         const std::string& report_path, std::ostream& out) {
  const auto records = read_scored(scored_path);
  const auto gold = eval::load_gold(gold_path);
  const auto decisions = decisions_from_scored(records, measure, threshold);
  const auto table = eval::build_contingency(decisions, gold);
  const auto metrics = eval::compute_metrics(table);
  out << eval::render_text_report(table, metrics);
  if (!report_path.empty()) {
    std::ofstream rep(report_path);
    if (!rep) throw ArgumentError("cannot write report file: " + report_path);
    rep << eval::report_json(table, metrics).dump(2) << '\n';
  }
}

inline void run_sweep(const std::string& scored_path, const std::string& gold_path,
                      const std::vector<double>& grid, const std::string& out_path,
                      std::ostream& fallback) {
  const auto records = read_scored(scored_path);
  const auto gold = eval::load_gold(gold_path);
  std::vector<std::pair<std::string, Score>> scored;
  scored.reserve(records.size());
  for (const auto& r : records) {
    scored.emplace_back(eval::pair_key(r.ax, r.b, r.ay), r.measures.ou);
  }
  const auto points = eval::threshold_sweep(scored, gold, grid);
  OutputTarget target(out_path, fallback);
  for (const auto& p : points) {
    nlohmann::ordered_json j;
    j["threshold"] = p.threshold;
    auto metric = [](const std::optional<double>& v) {
      return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["precision"] = metric(p.metrics.precision);
    j["recall"] = metric(p.metrics.recall);
    j["accuracy"] = metric(p.metrics.accuracy);
    j["table"] = {{"tp", p.table.tp}, {"fp", p.table.fp}, {"fn", p.table.fn}, {"tn", p.table.tn}};
    target.stream() << j.dump() << '\n';
  }
}

inline void run_estimate_n(const ProviderOptions& provider_opts, const std::string& rates_path,
                           std::ostream& out) {
  if (rates_path.empty()) throw ArgumentError("estimate-n needs --rates");
  const auto provider = make_provider(provider_opts);
  const auto rates = load_rates(rates_path);
  out << counts::estimate_index_size(*provider, rates) << "\n";
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch

inline void add_provider_options(CLI::App* sub, ProviderOptions& opts) {
  sub->add_option("--provider", opts.kind, "Count provider kind")
      ->check(CLI::IsMember({"local", "http"}))
      ->capture_default_str();
  sub->add_option("--index", opts.index_path,
                  "Local index directory or file (local provider)");
  sub->add_option("--endpoint", opts.endpoint,
                  "HTTP endpoint template with a {query} placeholder");
  sub->add_option("--count-field", opts.count_field,
                  "Dot-separated path to the count in the JSON response");
  sub->add_option("--cache", opts.cache_path, "Count cache file (JSONL, append-only)")
      ->envname("UNITHOOD_CACHE");
  sub->add_option("--rate-limit", opts.rate_limit, "Max requests per second")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--fixed-n", opts.fixed_n, "Override the sample-space size |N|")
      ->each([&opts](const std::string&) { opts.has_fixed_n = true; });
  sub->add_option("--rates", opts.rates_path,
                  "Function-word rates file for |N| estimation (JSON object)");
}

// Exit codes: 0 success, 1 usage error, 2 data error.
inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unithood scoring of candidate word pairs from corpus or web counts"};
  app.set_config("--config", "", "Read option defaults from an INI/TOML file");
  app.require_subcommand(1);

  // index
  std::string index_corpus, index_out;
  auto* index_cmd = app.add_subcommand(
      "index", "Build a local corpus index from text files or JSONL");
  index_cmd->add_option("--corpus", index_corpus, "Corpus directory or JSONL file")
      ->required()
      ->check(CLI::ExistingPath);
  index_cmd->add_option("--out", index_out, "Output directory for index.json")->required();
  index_cmd->callback([&]() { run_index(index_corpus, index_out, out); });

  // extract
  std::string extract_tagged, extract_out, extract_preps;
  auto* extract_cmd = app.add_subcommand(
      "extract", "Extract candidate pairs from POS-tagged sentences");
  extract_cmd->add_option("--tagged", extract_tagged, "Tagged input TSV")
      ->required()
      ->check(CLI::ExistingFile);
  extract_cmd->add_option("--out", extract_out, "Pairs output JSONL (default stdout)");
  extract_cmd->add_option("--prepositions", extract_preps,
                          "Comma-separated connector preposition whitelist");
  extract_cmd->callback([&]() {
    const auto preps = extract_preps.empty() ? extract::default_prepositions()
                                             : parse_preposition_list(extract_preps);
    run_extract(extract_tagged, extract_out, preps, out);
  });

  // score
  ScoreOptions score_opts;
  auto* score_cmd = app.add_subcommand("score", "Score candidate pairs for unithood");
  score_cmd->add_option("--pairs", score_opts.pairs_path, "Candidate pairs JSONL");
  score_cmd->add_option("--tagged", score_opts.tagged_path,
                        "Tagged input TSV (extract + score, enables --rounds)");
  score_cmd->add_option("--rounds", score_opts.rounds,
                        "Merge iteration rounds over the tagged input")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  score_cmd->add_option("--prepositions", score_opts.prepositions_csv,
                        "Comma-separated connector preposition whitelist");
  add_provider_options(score_cmd, score_opts.provider);
  score_cmd->add_option("--log-base", score_opts.log_base, "Log base for OU (> 1)")
      ->capture_default_str();
  score_cmd->add_option("--ou-threshold", score_opts.ou_threshold, "Merge threshold OU_T")
      ->capture_default_str();
  score_cmd->add_option("--mi-joint", score_opts.mi_joint,
                        "Joint count source for MI: nxy or ns")
      ->check(CLI::IsMember({"nxy", "ns"}))
      ->capture_default_str();
  score_cmd->add_option("--mi-plus", score_opts.uh.mi_plus, "UH threshold MI+")
      ->capture_default_str();
  score_cmd->add_option("--mi-minus", score_opts.uh.mi_minus, "UH threshold MI-")
      ->capture_default_str();
  score_cmd->add_option("--id-t", score_opts.uh.id_t, "UH threshold ID_T")
      ->capture_default_str();
  score_cmd->add_option("--idr-plus", score_opts.uh.idr_plus, "UH threshold IDR+")
      ->capture_default_str();
  score_cmd->add_option("--idr-minus", score_opts.uh.idr_minus, "UH threshold IDR-")
      ->capture_default_str();
  score_cmd->add_option("--out", score_opts.out_path, "Scored output JSONL (default stdout)");
  score_cmd->callback([&]() {
    if (score_opts.log_base <= 1.0) throw ArgumentError("--log-base must be greater than 1");
    run_score(score_opts, out);
  });

  // evaluate
  std::string eval_scored, eval_gold, eval_measure = "ou", eval_report;
  double eval_threshold = -8.39;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compare merge decisions against gold labels");
  eval_cmd->add_option("--scored", eval_scored, "Scored pairs JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", eval_gold, "Gold labels JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--threshold", eval_threshold, "OU merge threshold")
      ->capture_default_str();
  eval_cmd->add_option("--measure", eval_measure, "Which decision to evaluate: ou or uh")
      ->check(CLI::IsMember({"ou", "uh"}))
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_report, "Machine-readable JSON report path");
  eval_cmd->callback([&]() {
    run_evaluate(eval_scored, eval_gold, eval_threshold, eval_measure, eval_report, out);
  });

  // sweep
  std::string sweep_scored, sweep_gold, sweep_grid_csv, sweep_out;
  double sweep_min = -20.0, sweep_max = 10.0;
  int sweep_points = 50;
  auto* sweep_cmd = app.add_subcommand("sweep", "Metrics across an ascending threshold grid");
  sweep_cmd->add_option("--scored", sweep_scored, "Scored pairs JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--gold", sweep_gold, "Gold labels JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--min", sweep_min, "Lowest threshold")->capture_default_str();
  sweep_cmd->add_option("--max", sweep_max, "Highest threshold")->capture_default_str();
  sweep_cmd->add_option("--points", sweep_points, "Grid size")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  sweep_cmd->add_option("--grid", sweep_grid_csv,
                        "Explicit comma-separated ascending thresholds (overrides min/max)");
  sweep_cmd->add_option("--out", sweep_out, "Sweep output JSONL (default stdout)");
  sweep_cmd->callback([&]() {
    std::vector<double> grid;
    if (!sweep_grid_csv.empty()) {
      std::stringstream ss(sweep_grid_csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          grid.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ArgumentError("--grid entry is not a number: " + item);
        }
      }
    } else {
      if (sweep_max < sweep_min) throw ArgumentError("--max must not be below --min");
      if (sweep_points == 1) {
        grid.push_back(sweep_min);
      } else {
        const double step = (sweep_max - sweep_min) / (sweep_points - 1);
        for (int i = 0; i < sweep_points; ++i) grid.push_back(sweep_min + step * i);
      }
    }
    run_sweep(sweep_scored, sweep_gold, grid, sweep_out, out);
  });

  // estimate-n
  ProviderOptions estimate_provider;
  auto* estimate_cmd = app.add_subcommand(
      "estimate-n", "Estimate the sample-space size from function-word rates");
  add_provider_options(estimate_cmd, estimate_provider);
  estimate_cmd->get_option("--rates")->required()->check(CLI::ExistingFile);
  estimate_cmd->callback(
      [&]() { run_estimate_n(estimate_provider, estimate_provider.rates_path, out); });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace unithood::cli
