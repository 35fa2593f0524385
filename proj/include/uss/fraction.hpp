#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace uss {

/// Exact rational number with a positive denominator, always in lowest terms.
///
/// Threshold comparisons in the protocol (h < s*m, count > N*f) go through
/// this type so results never depend on floating-point rounding.
class Fraction {
 public:
  constexpr Fraction() = default;
  Fraction(std::int64_t num, std::int64_t den = 1);

  /// Accepts "p/q", integers, and decimals such as "0.45" or "-1.5".
  static Fraction parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  friend Fraction operator+(const Fraction& a, const Fraction& b);
  friend Fraction operator-(const Fraction& a, const Fraction& b);
  friend Fraction operator*(const Fraction& a, const Fraction& b);
  friend Fraction operator/(const Fraction& a, const Fraction& b);

  friend bool operator==(const Fraction& a, const Fraction& b) = default;
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace uss
