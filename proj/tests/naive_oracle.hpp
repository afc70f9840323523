#pragma once

// Naive full-scan counting oracles and a seeded corpus generator. These stay
// deliberately independent of LocalIndex: they re-implement lowercasing and
// matching from scratch so index bugs cannot hide behind shared code.

#include <cctype>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

struct Doc {
  std::string id;
  std::vector<std::string> tokens;
};

inline std::string lower(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> lower_all(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lower(t));
  return out;
}

// Start offsets of contiguous matches of `phrase` in `tokens`, overlapping
// matches included.
inline std::size_t match_starts(const std::vector<std::string>& tokens,
                                const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return 0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + phrase.size() <= tokens.size(); ++start) {
    bool match = true;
    for (std::size_t k = 0; k < phrase.size(); ++k) {
      if (tokens[start + k] != phrase[k]) {
        match = false;
        break;
      }
    }
    if (match) ++count;
  }
  return count;
}

inline bool doc_contains(const Doc& doc, const std::vector<std::string>& phrase) {
  return match_starts(lower_all(doc.tokens), lower_all(phrase)) > 0;
}

inline std::uint64_t doc_count(const std::vector<Doc>& docs,
                               const std::vector<std::string>& phrase) {
  std::uint64_t n = 0;
  for (const auto& d : docs) {
    if (doc_contains(d, phrase)) ++n;
  }
  return n;
}

inline std::uint64_t co_doc_count(const std::vector<Doc>& docs,
                                  const std::vector<std::string>& a,
                                  const std::vector<std::string>& b) {
  std::uint64_t n = 0;
  for (const auto& d : docs) {
    if (doc_contains(d, a) && doc_contains(d, b)) ++n;
  }
  return n;
}

inline std::uint64_t occurrence_count(const std::vector<Doc>& docs,
                                      const std::vector<std::string>& phrase) {
  std::uint64_t n = 0;
  for (const auto& d : docs) {
    n += match_starts(lower_all(d.tokens), lower_all(phrase));
  }
  return n;
}

// Random corpora over a tiny vocabulary so that phrase collisions are common.
inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {"alpha", "beta",  "gamma", "delta",
                                                 "eps",   "zeta",  "eta",   "theta"};
  return words;
}

inline std::vector<Doc> random_corpus(std::mt19937& rng, std::size_t max_docs = 50,
                                      std::size_t max_tokens = 40) {
  std::uniform_int_distribution<std::size_t> n_docs(0, max_docs);
  std::uniform_int_distribution<std::size_t> n_tokens(0, max_tokens);
  std::uniform_int_distribution<std::size_t> word(0, vocabulary().size() - 1);
  std::vector<Doc> docs;
  const std::size_t count = n_docs(rng);
  for (std::size_t i = 0; i < count; ++i) {
    Doc d;
    d.id = "doc" + std::to_string(i);
    const std::size_t len = n_tokens(rng);
    for (std::size_t k = 0; k < len; ++k) d.tokens.push_back(vocabulary()[word(rng)]);
    docs.push_back(std::move(d));
  }
  return docs;
}

inline std::vector<std::string> random_phrase(std::mt19937& rng, std::size_t max_len = 3) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> word(0, vocabulary().size() - 1);
  std::vector<std::string> phrase;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) phrase.push_back(vocabulary()[word(rng)]);
  return phrase;
}

}  // namespace oracle
