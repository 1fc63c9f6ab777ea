#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace voxshop {

/// Exact fraction with a positive denominator, always kept in lowest terms.
/// Metric arithmetic runs on this type so that printed percentages depend
/// only on rounding at display time.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t value);  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t numerator, std::int64_t denominator);

  /// Nearest multiple of 1/scale to `value`. Used to lift wire-format
  /// doubles (confidences, thresholds) into exact arithmetic.
  static Rational from_double(double value, std::int64_t scale = 1'000'000);

  std::int64_t numerator() const noexcept { return num_; }
  std::int64_t denominator() const noexcept { return den_; }

  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// Round half-up (towards +infinity on exact halves) to `decimals` places
  /// and return the result scaled by 10^decimals.
  std::int64_t round_scaled(int decimals) const;

  /// Fixed-point text with half-up rounding, e.g. "3.1", "-0.5", "100.0".
  std::string to_fixed(int decimals = 1) const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace voxshop
