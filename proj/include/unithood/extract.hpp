#pragma once

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unithood/errors.hpp"
#include "unithood/text.hpp"

namespace unithood::extract {

struct TaggedToken {
  std::string surface;
  std::string pos;          // Penn Treebank tag
  std::uint32_t offset = 0; // 0-based token index within the sentence
};

struct TaggedSentence {
  std::string sentence_id;
  std::vector<TaggedToken> tokens;
};

// A contiguous token span. Produced by the chunker as an Adj*N+ noun phrase;
// later pipeline passes may widen spans by merging accepted pairs, in which
// case the span is a previously merged lexical unit rather than a plain NP.
struct NounPhrase {
  std::uint32_t start_offset = 0;
  std::uint32_t end_offset = 0;  // inclusive
  std::string surface;           // token surfaces joined by single spaces
};

// (a_x, b, a_y) with the rendered candidate surface s = "a_x b a_y"
// (b omitted when empty). x and y are the start offsets of a_x and a_y.
struct CandidatePair {
  std::string sentence_id;
  std::string ax;
  std::string b;  // empty | preposition | "and"
  std::string ay;
  std::string s;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
};

// ---------------------------------------------------------------------------
// Tagged input: one token per line as `offset<TAB>surface<TAB>POS`, blank
// line ends a sentence, `#` starts a comment line.

inline std::vector<TaggedSentence> parse_tagged_input(std::istream& in) {
  std::vector<TaggedSentence> sentences;
  TaggedSentence current;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    current.sentence_id = "s" + std::to_string(sentences.size() + 1);
    sentences.push_back(std::move(current));
    current = TaggedSentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      flush();
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos
                                                                   : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[1].empty() || fields[2].empty()) {
      throw ParseError(line_no, "surface and POS must be non-empty");
    }
    std::uint32_t offset = 0;
    try {
      std::size_t consumed = 0;
      const unsigned long v = std::stoul(fields[0], &consumed);
      if (consumed != fields[0].size()) throw std::invalid_argument(fields[0]);
      offset = static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
      throw ParseError(line_no, "offset is not an integer: " + fields[0]);
    }
    if (offset != current.tokens.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": offset " +
                        std::to_string(offset) + " is not contiguous (expected " +
                        std::to_string(current.tokens.size()) + ")");
    }
    current.tokens.push_back({fields[1], fields[2], offset});
  }
  flush();
  return sentences;
}

// ---------------------------------------------------------------------------
// Noun-phrase chunking: maximal left-to-right matches of Adj*N+.

inline bool is_adjective_tag(std::string_view tag) {
  return tag == "JJ" || tag == "JJR" || tag == "JJS";
}

inline bool is_noun_tag(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
}

inline std::string render_span(const TaggedSentence& sentence, std::uint32_t start,
                               std::uint32_t end) {
  std::string out;
  for (std::uint32_t i = start; i <= end; ++i) {
    if (i > start) out += ' ';
    out += sentence.tokens[i].surface;
  }
  return out;
}

inline std::vector<NounPhrase> extract_noun_phrases(const TaggedSentence& sentence) {
  std::vector<NounPhrase> nps;
  const auto& tokens = sentence.tokens;
  const std::size_t n = tokens.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && is_adjective_tag(tokens[j].pos)) ++j;
    std::size_t k = j;
    while (k < n && is_noun_tag(tokens[k].pos)) ++k;
    if (k > j) {
      nps.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k - 1),
                     render_span(sentence, static_cast<std::uint32_t>(i),
                                 static_cast<std::uint32_t>(k - 1))});
      i = k;
    } else {
      ++i;
    }
  }
  return nps;
}

// ---------------------------------------------------------------------------
// Pair generation

// IN also tags subordinating conjunctions, so the connector b accepts only a
// whitelist of prepositions (plus the coordinating conjunction "and").
inline const std::set<std::string>& default_prepositions() {
  static const std::set<std::string> preps = {"of", "for", "in", "on",
                                              "to", "with", "by", "from"};
  return preps;
}

inline CandidatePair make_pair(const TaggedSentence& sentence, const NounPhrase& left,
                               const NounPhrase& right, const std::string& connector) {
  CandidatePair pair;
  pair.sentence_id = sentence.sentence_id;
  pair.ax = left.surface;
  pair.b = connector;
  pair.ay = right.surface;
  pair.s = connector.empty() ? left.surface + " " + right.surface
                             : left.surface + " " + connector + " " + right.surface;
  pair.x = left.start_offset;
  pair.y = right.start_offset;
  return pair;
}

// Emits a pair for each consecutive unit pair that is adjacent (gap 0) or
// separated by exactly one connector token: a whitelisted preposition tagged
// IN, or "and" tagged CC.
inline std::vector<CandidatePair> generate_pairs(
    const TaggedSentence& sentence, const std::vector<NounPhrase>& units,
    const std::set<std::string>& prepositions = default_prepositions()) {
  for (std::size_t i = 1; i < units.size(); ++i) {
    if (units[i].start_offset <= units[i - 1].end_offset) {
      throw ArgumentError("units must be sorted by start offset and non-overlapping");
    }
  }
  std::vector<CandidatePair> pairs;
  for (std::size_t i = 0; i + 1 < units.size(); ++i) {
    const auto& left = units[i];
    const auto& right = units[i + 1];
    const std::uint32_t gap = right.start_offset - left.end_offset - 1;
    if (gap == 0) {
      pairs.push_back(make_pair(sentence, left, right, ""));
    } else if (gap == 1) {
      const auto& t = sentence.tokens.at(left.end_offset + 1);
      const std::string lower = to_lower(t.surface);
      const bool preposition = t.pos == "IN" && prepositions.count(lower) > 0;
      const bool conjunction = t.pos == "CC" && lower == "and";
      if (preposition || conjunction) {
        pairs.push_back(make_pair(sentence, left, right, t.surface));
      }
    }
  }
  return pairs;
}

// Applies accepted merges to a unit list: a merged pair becomes one unit
// spanning both operands and the connector. Greedy left to right; a unit
// consumed by one merge cannot join another in the same pass.
inline std::vector<NounPhrase> merge_pairs_into_units(
    const TaggedSentence& sentence, const std::vector<NounPhrase>& units,
    const std::set<std::pair<std::uint32_t, std::uint32_t>>& merged_offsets) {
  std::vector<NounPhrase> out;
  std::size_t i = 0;
  while (i < units.size()) {
    if (i + 1 < units.size() &&
        merged_offsets.count({units[i].start_offset, units[i + 1].start_offset}) > 0) {
      const std::uint32_t start = units[i].start_offset;
      const std::uint32_t end = units[i + 1].end_offset;
      out.push_back({start, end, render_span(sentence, start, end)});
      i += 2;
    } else {
      out.push_back(units[i]);
      ++i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair records on the wire: {"sid","ax","b","ay","s","x","y"}

inline nlohmann::ordered_json pair_to_json(const CandidatePair& p) {
  nlohmann::ordered_json j;
  j["sid"] = p.sentence_id;
  j["ax"] = p.ax;
  j["b"] = p.b;
  j["ay"] = p.ay;
  j["s"] = p.s;
  j["x"] = p.x;
  j["y"] = p.y;
  return j;
}

inline CandidatePair pair_from_json(const nlohmann::json& j) {
  CandidatePair p;
  p.sentence_id = j.value("sid", "");
  p.ax = j.at("ax").get<std::string>();
  p.b = j.value("b", "");
  p.ay = j.at("ay").get<std::string>();
  if (j.contains("s")) {
    p.s = j["s"].get<std::string>();
  } else {
    p.s = p.b.empty() ? p.ax + " " + p.ay : p.ax + " " + p.b + " " + p.ay;
  }
  p.x = j.value("x", 0u);
  p.y = j.value("y", 0u);
  return p;
}

}  // namespace unithood::extract
