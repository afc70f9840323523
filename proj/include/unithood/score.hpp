#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "unithood/errors.hpp"

namespace unithood {

// A measure value: finite real or an infinity sentinel. NaN is rejected at
// construction so the usual comparisons form a total order
// (-inf < finite < +inf), which is what thresholding relies on.
class Score {
 public:
  Score() = default;
  explicit Score(double v) : v_(v) {
    if (std::isnan(v)) throw ArgumentError("score must not be NaN");
  }

  static Score positive_infinity() {
    return Score(std::numeric_limits<double>::infinity());
  }
  static Score negative_infinity() {
    return Score(-std::numeric_limits<double>::infinity());
  }

  double value() const { return v_; }
  bool is_finite() const { return std::isfinite(v_); }
  bool is_positive_infinity() const { return std::isinf(v_) && v_ > 0; }
  bool is_negative_infinity() const { return std::isinf(v_) && v_ < 0; }

  friend bool operator==(const Score& a, const Score& b) { return a.v_ == b.v_; }
  friend bool operator<(const Score& a, const Score& b) { return a.v_ < b.v_; }
  friend bool operator>(const Score& a, const Score& b) { return a.v_ > b.v_; }
  friend bool operator<=(const Score& a, const Score& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const Score& a, const Score& b) { return a.v_ >= b.v_; }

 private:
  double v_ = 0.0;
};

// Infinities travel through JSON as the strings "+inf" / "-inf".
inline nlohmann::ordered_json score_to_json(const Score& s) {
  if (s.is_positive_infinity()) return "+inf";
  if (s.is_negative_infinity()) return "-inf";
  return s.value();
}

inline Score score_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string v = j.get<std::string>();
    if (v == "+inf") return Score::positive_infinity();
    if (v == "-inf") return Score::negative_infinity();
    throw FormatError("unrecognized score string: " + v);
  }
  if (!j.is_number()) throw FormatError("score must be a number or \"+inf\"/\"-inf\"");
  return Score(j.get<double>());
}

}  // namespace unithood
