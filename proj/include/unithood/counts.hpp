#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "unithood/errors.hpp"
#include "unithood/text.hpp"

namespace unithood::counts {

// ---------------------------------------------------------------------------
// Queries

// An exact-phrase search query. Terms are canonicalized to lowercase so that
// matching is case-insensitive and cache keys stay stable.
class PhraseQuery {
 public:
  explicit PhraseQuery(std::vector<std::string> terms, bool exact_phrase = true)
      : exact_(exact_phrase) {
    if (terms.empty()) throw ArgumentError("phrase query needs at least one term");
    terms_.reserve(terms.size());
    for (const auto& t : terms) {
      if (t.empty()) throw ArgumentError("phrase query term must not be empty");
      for (char c : t) {
        if (is_space(c)) throw ArgumentError("phrase query term contains whitespace: " + t);
      }
      terms_.push_back(to_lower(t));
    }
  }

  static PhraseQuery from_text(std::string_view text) {
    return PhraseQuery(split_tokens(text));
  }

  const std::vector<std::string>& terms() const { return terms_; }
  bool exact_phrase() const { return exact_; }

  // Terms joined by single spaces; already lowercase.
  std::string rendered() const { return join(terms_, " "); }

  // Search-engine syntax: quotes are the phrase operator, '+' the required
  // operator.
  std::string search_expression() const {
    if (exact_) return "+\"" + rendered() + "\"";
    std::string out;
    for (const auto& t : terms_) {
      if (!out.empty()) out += ' ';
      out += '+' + t;
    }
    return out;
  }

 private:
  std::vector<std::string> terms_;
  bool exact_ = true;
};

// Conjunction of two exact phrases. The operands are sorted (and deduplicated
// when equal) so that the key is symmetric in its arguments.
inline std::string conjunctive_expression(const PhraseQuery& a, const PhraseQuery& b) {
  std::string ea = a.search_expression();
  std::string eb = b.search_expression();
  if (ea == eb) return ea;
  if (eb < ea) std::swap(ea, eb);
  return ea + " " + eb;
}

// ---------------------------------------------------------------------------
// Count snapshot

// The five counts grounding every probability: document counts for a_x, a_y
// and the conjoined surface s, the co-occurrence count of a_x with a_y, and
// the sample-space size. `clamped` records that normalization had to repair a
// provider inconsistency.
struct CountSnapshot {
  std::uint64_t n_x = 0;
  std::uint64_t n_y = 0;
  std::uint64_t n_s = 0;
  std::uint64_t n_xy = 0;
  std::uint64_t sample_size = 0;  // |N|
  bool clamped = false;
};

// S is a subset of X, of Y and of X ∩ Y, and nothing exceeds the sample
// space. Real search engines violate these relations routinely; violations
// are clamped rather than rejected, and the repair is flagged.
inline CountSnapshot normalize_snapshot(CountSnapshot s) {
  auto clamp_low = [&s](std::uint64_t& v, std::uint64_t lo) {
    if (v < lo) {
      v = lo;
      s.clamped = true;
    }
  };
  auto clamp_high = [&s](std::uint64_t& v, std::uint64_t hi) {
    if (v > hi) {
      v = hi;
      s.clamped = true;
    }
  };
  clamp_high(s.n_s, s.sample_size);
  clamp_low(s.n_xy, s.n_s);
  clamp_low(s.n_x, s.n_s);
  clamp_low(s.n_y, s.n_s);
  clamp_high(s.n_xy, s.sample_size);
  clamp_high(s.n_x, s.sample_size);
  clamp_high(s.n_y, s.sample_size);
  return s;
}

inline bool snapshot_is_normalized(const CountSnapshot& s) {
  return s.n_s <= s.n_xy && s.n_xy <= s.sample_size && s.n_s <= s.n_x &&
         s.n_x <= s.sample_size && s.n_s <= s.n_y && s.n_y <= s.sample_size;
}

// ---------------------------------------------------------------------------
// Local corpus index

struct Document {
  std::string id;
  std::vector<std::string> tokens;
};

// In-memory positional index over a tokenized corpus. Serves as the
// deterministic stand-in for a web-scale sample space: phrase queries count
// documents, occurrence queries count match offsets (overlapping matches
// included).
class LocalIndex {
 public:
  LocalIndex() = default;

  std::size_t doc_count() const { return docs_.size(); }
  const std::vector<Document>& documents() const { return docs_; }

  // Sorted indices of documents containing the contiguous phrase.
  std::vector<std::uint32_t> phrase_postings(const PhraseQuery& q) const {
    std::vector<std::uint32_t> out;
    scan(q, [&out](std::uint32_t doc, std::uint32_t) {
      if (out.empty() || out.back() != doc) out.push_back(doc);
    });
    return out;
  }

  std::uint64_t doc_frequency(const PhraseQuery& q) const {
    return phrase_postings(q).size();
  }

  // Total matches across the corpus, one per distinct start offset.
  std::uint64_t occurrence_frequency(const PhraseQuery& q) const {
    std::uint64_t n = 0;
    scan(q, [&n](std::uint32_t, std::uint32_t) { ++n; });
    return n;
  }

  std::uint64_t co_doc_frequency(const PhraseQuery& a, const PhraseQuery& b) const {
    const auto da = phrase_postings(a);
    const auto db = phrase_postings(b);
    std::vector<std::uint32_t> both;
    std::set_intersection(da.begin(), da.end(), db.begin(), db.end(),
                          std::back_inserter(both));
    return both.size();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["doc_count"] = docs_.size();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& d : docs_) {
      arr.push_back({{"id", d.id}, {"tokens", d.tokens}});
    }
    j["docs"] = std::move(arr);
    return j;
  }

  static LocalIndex from_json(const nlohmann::json& j);

  friend LocalIndex build_local_index(const std::vector<Document>& documents);

 private:
  template <typename Fn>
  void scan(const PhraseQuery& q, Fn&& on_match) const {
    const auto& terms = q.terms();
    auto it = postings_.find(terms.front());
    if (it == postings_.end()) return;
    for (const auto& [doc, pos] : it->second) {
      const auto& tokens = docs_[doc].tokens;
      if (pos + terms.size() > tokens.size()) continue;
      bool match = true;
      for (std::size_t k = 1; k < terms.size(); ++k) {
        if (tokens[pos + k] != terms[k]) {
          match = false;
          break;
        }
      }
      if (match) on_match(doc, pos);
    }
  }

  std::vector<Document> docs_;  // tokens stored lowercased
  // token -> (doc index, token offset), ordered by construction
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
};

inline LocalIndex build_local_index(const std::vector<Document>& documents) {
  LocalIndex index;
  std::unordered_map<std::string, std::uint32_t> seen;
  for (const auto& doc : documents) {
    if (!seen.emplace(doc.id, 0).second) throw DuplicateDocIdError(doc.id);
    Document canon;
    canon.id = doc.id;
    canon.tokens.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens) canon.tokens.push_back(to_lower(t));
    const auto doc_ix = static_cast<std::uint32_t>(index.docs_.size());
    for (std::uint32_t pos = 0; pos < canon.tokens.size(); ++pos) {
      index.postings_[canon.tokens[pos]].emplace_back(doc_ix, pos);
    }
    index.docs_.push_back(std::move(canon));
  }
  return index;
}

inline LocalIndex LocalIndex::from_json(const nlohmann::json& j) {
  std::vector<Document> docs;
  for (const auto& d : j.at("docs")) {
    Document doc;
    doc.id = d.at("id").get<std::string>();
    doc.tokens = d.at("tokens").get<std::vector<std::string>>();
    docs.push_back(std::move(doc));
  }
  return build_local_index(docs);
}

// ---------------------------------------------------------------------------
// Corpus input: a directory of plain-text files (doc_id = file name) or a
// single JSONL file of {"id": ..., "text": ...} objects.

inline std::vector<Document> load_corpus_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArgumentError("cannot open corpus file: " + file.string());
  std::vector<Document> docs;
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
    if (!j.contains("id") || !j.contains("text")) {
      throw ParseError(line_no, "corpus record needs \"id\" and \"text\"");
    }
    docs.push_back({j["id"].get<std::string>(),
                    split_tokens(j["text"].get<std::string>())});
  }
  return docs;
}

inline std::vector<Document> load_corpus(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Document> docs;
    for (const auto& f : files) {
      std::ifstream in(f);
      if (!in) throw ArgumentError("cannot open corpus file: " + f.string());
      std::stringstream buf;
      buf << in.rdbuf();
      docs.push_back({f.filename().string(), split_tokens(buf.str())});
    }
    return docs;
  }
  if (std::filesystem::is_regular_file(path)) return load_corpus_jsonl(path);
  throw ArgumentError("corpus path does not exist: " + path.string());
}

inline void save_local_index(const LocalIndex& index, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ArgumentError("cannot write index file: " + file.string());
  out << index.to_json().dump() << '\n';
}

inline LocalIndex load_local_index(std::filesystem::path path) {
  if (std::filesystem::is_directory(path)) path /= "index.json";
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open index file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid index file " + path.string() + ": " + e.what());
  }
  return LocalIndex::from_json(j);
}

// ---------------------------------------------------------------------------
// Providers

enum class ProviderKind { local, http };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::local;
  std::string endpoint_template;  // http only; must contain {query}
  std::string count_field_path;   // dot-separated path into the JSON response
  std::filesystem::path cache_path;
  double rate_limit = 10.0;  // max requests per second
  std::optional<std::uint64_t> fixed_sample_size;  // overrides |N| estimation

  void validate() const {
    if (rate_limit <= 0) throw ArgumentError("rate_limit must be positive");
    if (kind == ProviderKind::http) {
      if (endpoint_template.empty() || count_field_path.empty()) {
        throw ArgumentError("http provider needs endpoint_template and count_field_path");
      }
      if (endpoint_template.find("{query}") == std::string::npos) {
        throw ArgumentError("endpoint_template is missing the {query} placeholder");
      }
    }
  }
};

// Document counts for phrase and co-occurrence queries, plus the sample-space
// size those counts are measured against. Implementations must tolerate
// concurrent read queries.
class CountProvider {
 public:
  virtual ~CountProvider() = default;

  virtual std::uint64_t doc_count(const PhraseQuery& phrase) const = 0;

  // Documents containing both exact phrases, at any positions and in any
  // order. Symmetric in its arguments.
  virtual std::uint64_t co_doc_count(const PhraseQuery& a, const PhraseQuery& b) const = 0;

  // Total occurrence frequency (for C-value). Web page counts are document
  // counts, so only corpus-backed providers can answer this.
  virtual std::uint64_t occurrence_count(const PhraseQuery& phrase) const {
    (void)phrase;
    throw UnsupportedOperationError(
        "occurrence counts are only available from a local corpus provider");
  }

  virtual std::uint64_t sample_space_size() const = 0;
};

class LocalCountProvider : public CountProvider {
 public:
  explicit LocalCountProvider(LocalIndex index) : index_(std::move(index)) {}

  std::uint64_t doc_count(const PhraseQuery& phrase) const override {
    return index_.doc_frequency(phrase);
  }
  std::uint64_t co_doc_count(const PhraseQuery& a, const PhraseQuery& b) const override {
    return index_.co_doc_frequency(a, b);
  }
  std::uint64_t occurrence_count(const PhraseQuery& phrase) const override {
    return index_.occurrence_frequency(phrase);
  }
  std::uint64_t sample_space_size() const override { return index_.doc_count(); }

  const LocalIndex& index() const { return index_; }

 private:
  LocalIndex index_;
};

// ---------------------------------------------------------------------------
// HTTP provider with a persistent response cache

inline std::string percent_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size() * 3);
  for (unsigned char c : s) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                            c == '.' || c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Walks a dot-separated path into a JSON document. The count must be a
// non-negative integer; a string of digits (as several search APIs return)
// is accepted too.
inline std::uint64_t extract_count_field(const nlohmann::json& body,
                                         const std::string& field_path,
                                         const std::string& query_key) {
  const nlohmann::json* node = &body;
  std::size_t start = 0;
  while (start <= field_path.size()) {
    const std::size_t dot = field_path.find('.', start);
    const std::string part = field_path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ArgumentError("empty segment in count_field_path: " + field_path);
    if (!node->is_object() || !node->contains(part)) {
      throw TransportError(query_key, "response has no field \"" + part + "\"");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_number_unsigned()) return node->get<std::uint64_t>();
  if (node->is_number_integer()) {
    const auto v = node->get<std::int64_t>();
    if (v < 0) throw FormatError("count field is negative for query [" + query_key + "]");
    return static_cast<std::uint64_t>(v);
  }
  if (node->is_string()) {
    const std::string s = node->get<std::string>();
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
      return std::stoull(s);
    }
  }
  throw FormatError("count field at \"" + field_path + "\" is not an integer for query [" +
                    query_key + "]");
}

// Cached HTTP count client. Reads are concurrent against the in-memory map;
// misses are serialized through a single fetch path that rate-limits the
// request and appends to the cache file. The cache is append-only JSONL, last
// entry wins, no expiry, so a frozen cache pins every later run.
class WebCountProvider : public CountProvider {
 public:
  explicit WebCountProvider(ProviderConfig config,
                            std::vector<std::pair<std::string, double>> function_word_rates = {})
      : config_(std::move(config)), rates_(std::move(function_word_rates)) {
    config_.kind = ProviderKind::http;
    config_.validate();
    split_endpoint();
    if (!config_.cache_path.empty()) load_cache();
  }

  std::uint64_t doc_count(const PhraseQuery& phrase) const override {
    return cached_count(phrase.search_expression());
  }

  std::uint64_t co_doc_count(const PhraseQuery& a, const PhraseQuery& b) const override {
    return cached_count(conjunctive_expression(a, b));
  }

  std::uint64_t sample_space_size() const override;

  std::size_t network_requests() const { return network_requests_.load(); }

 private:
  void split_endpoint() {
    const auto scheme_end = config_.endpoint_template.find("://");
    if (scheme_end == std::string::npos) {
      throw ArgumentError("endpoint_template must be an absolute http(s) URL");
    }
    const auto path_start = config_.endpoint_template.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      throw ArgumentError("endpoint_template has no path component");
    }
    base_url_ = config_.endpoint_template.substr(0, path_start);
    path_template_ = config_.endpoint_template.substr(path_start);
  }

  void load_cache() {
    std::ifstream in(config_.cache_path);
    if (!in) return;  // no cache yet
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid cache entry: ") + e.what());
      }
      if (!j.contains("q") || !j.contains("c")) {
        throw ParseError(line_no, "cache entry needs \"q\" and \"c\"");
      }
      cache_[j["q"].get<std::string>()] = j["c"].get<std::uint64_t>();
    }
  }

  std::uint64_t cached_count(const std::string& key) const {
    {
      std::shared_lock lock(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    std::lock_guard fetch_lock(fetch_mutex_);
    {
      // Another thread may have fetched it while we waited.
      std::shared_lock lock(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const std::uint64_t count = fetch(key);
    {
      std::unique_lock lock(cache_mutex_);
      cache_[key] = count;
    }
    append_cache_entry(key, count);
    return count;
  }

  std::uint64_t fetch(const std::string& key) const {
    throttle();
    std::string path = path_template_;
    const auto pos = path.find("{query}");
    path.replace(pos, 7, percent_encode(key));

    httplib::Client client(base_url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    ++network_requests_;
    auto res = client.Get(path);
    if (!res) {
      throw TransportError(key, "request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError(key, "unexpected status " + std::to_string(res->status));
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(key, std::string("response is not JSON: ") + e.what());
    }
    return extract_count_field(body, config_.count_field_path, key);
  }

  void throttle() const {
    const auto min_gap = std::chrono::duration<double>(1.0 / config_.rate_limit);
    const auto now = std::chrono::steady_clock::now();
    if (last_request_.time_since_epoch().count() != 0) {
      const auto next_allowed = last_request_ + std::chrono::duration_cast<
          std::chrono::steady_clock::duration>(min_gap);
      if (now < next_allowed) std::this_thread::sleep_until(next_allowed);
    }
    last_request_ = std::chrono::steady_clock::now();
  }

  void append_cache_entry(const std::string& key, std::uint64_t count) const {
    if (config_.cache_path.empty()) return;
    std::ofstream out(config_.cache_path, std::ios::app);
    if (!out) throw ArgumentError("cannot append to cache file: " + config_.cache_path.string());
    nlohmann::ordered_json j;
    j["q"] = key;
    j["c"] = count;
    j["t"] = iso8601_utc_now();
    out << j.dump() << '\n';
  }

  ProviderConfig config_;
  std::vector<std::pair<std::string, double>> rates_;
  std::string base_url_;
  std::string path_template_;

  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::uint64_t> cache_;
  mutable std::mutex fetch_mutex_;  // single writer: network + cache file
  mutable std::chrono::steady_clock::time_point last_request_{};
  mutable std::atomic<std::size_t> network_requests_{0};
  mutable std::optional<std::uint64_t> estimated_sample_size_;
};

// ---------------------------------------------------------------------------
// Sample-space estimation from function words

// Function words appear in a stable fraction of documents across genres, so
// doc_count(word) / reference_rate predicts the index size. The median over
// the word list resists outliers; words the provider has never seen are
// excluded.
inline std::uint64_t estimate_index_size(
    const CountProvider& provider,
    const std::vector<std::pair<std::string, double>>& function_word_rates) {
  if (function_word_rates.empty()) {
    throw ArgumentError("estimate_index_size needs a non-empty function-word list");
  }
  std::vector<double> ratios;
  for (const auto& [word, rate] : function_word_rates) {
    if (!(rate > 0.0) || rate > 1.0) {
      throw ArgumentError("reference rate for \"" + word + "\" must be in (0, 1]");
    }
    const auto count = provider.doc_count(PhraseQuery::from_text(word));
    if (count == 0) continue;
    ratios.push_back(static_cast<double>(count) / rate);
  }
  if (ratios.empty()) {
    throw EstimationFailureError("no function word had a non-zero document count");
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t mid = ratios.size() / 2;
  const double median = (ratios.size() % 2 == 1)
                            ? ratios[mid]
                            : 0.5 * (ratios[mid - 1] + ratios[mid]);
  return static_cast<std::uint64_t>(std::llround(median));
}

inline std::uint64_t WebCountProvider::sample_space_size() const {
  if (config_.fixed_sample_size) return *config_.fixed_sample_size;
  {
    std::shared_lock lock(cache_mutex_);
    if (estimated_sample_size_) return *estimated_sample_size_;
  }
  if (rates_.empty()) {
    throw InvalidSampleSpaceError(
        "http provider needs fixed_N or function-word rates to size the sample space");
  }
  const auto estimate = estimate_index_size(*this, rates_);
  std::unique_lock lock(cache_mutex_);
  estimated_sample_size_ = estimate;
  return estimate;
}

// ---------------------------------------------------------------------------
// Snapshot assembly

// Gathers the five counts for a candidate pair. The caller supplies the
// rendered surface forms of a_x, a_y and s.
inline CountSnapshot take_snapshot(const CountProvider& provider, const std::string& ax,
                                   const std::string& ay, const std::string& s) {
  const auto qx = PhraseQuery::from_text(ax);
  const auto qy = PhraseQuery::from_text(ay);
  const auto qs = PhraseQuery::from_text(s);
  CountSnapshot snap;
  snap.n_x = provider.doc_count(qx);
  snap.n_y = provider.doc_count(qy);
  snap.n_s = provider.doc_count(qs);
  snap.n_xy = provider.co_doc_count(qx, qy);
  snap.sample_size = provider.sample_space_size();
  if (snap.sample_size == 0) {
    throw InvalidSampleSpaceError("sample space is empty (N = 0)");
  }
  return normalize_snapshot(snap);
}

}  // namespace unithood::counts
