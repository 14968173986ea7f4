#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace equiosc {

/// A value in [-inf, inf): either a finite real or negative infinity.
///
/// Kernel values and sums of translates live here. Positive infinity and NaN
/// cannot be represented; constructing one is a logic error.
class ExtReal {
 public:
  constexpr ExtReal() = default;

  static ExtReal finite(double x) {
    if (!std::isfinite(x)) {
      throw std::domain_error("ExtReal::finite: non-finite value " + std::to_string(x));
    }
    return ExtReal(x);
  }

  static constexpr ExtReal neg_inf() { return ExtReal(-std::numeric_limits<double>::infinity()); }

  /// Accepts finite values and -inf.
  static ExtReal from_double(double x) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("ExtReal: value outside [-inf, inf)");
    }
    return ExtReal(x);
  }

  constexpr bool is_neg_inf() const { return value_ == -std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const { return !is_neg_inf(); }

  /// The value as a double; -inf maps to -infinity.
  constexpr double value() const { return value_; }

  friend constexpr ExtReal operator+(ExtReal a, ExtReal b) { return ExtReal(a.value_ + b.value_); }
  ExtReal& operator+=(ExtReal other) {
    value_ += other.value_;
    return *this;
  }
  friend ExtReal operator*(double r, ExtReal a) {
    if (!(r > 0.0)) throw std::domain_error("ExtReal: scaling factor must be positive");
    return ExtReal(r * a.value_);
  }

  friend constexpr auto operator<=>(ExtReal a, ExtReal b) { return a.value_ <=> b.value_; }
  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.value_ == b.value_; }

 private:
  constexpr explicit ExtReal(double x) : value_(x) {}
  double value_ = 0.0;
};

}  // namespace equiosc
