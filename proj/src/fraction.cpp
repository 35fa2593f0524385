#include "uss/fraction.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uss/errors.hpp"

namespace uss {
namespace {

using Wide = __int128;

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Fraction make_reduced(Wide num, Wide den) {
  if (den == 0) {
    throw std::domain_error("fraction with zero denominator");
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr Wide kMax = std::numeric_limits<std::int64_t>::max();
  if (num > kMax || num < -kMax || den > kMax) {
    throw std::overflow_error("fraction exceeds 64-bit range");
  }
  return Fraction(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw FractionFormatError("cannot parse '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) {
  if (den == 0) {
    throw std::domain_error("fraction with zero denominator");
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

Fraction Fraction::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) {
    throw FractionFormatError("empty fraction");
  }

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const std::int64_t num = parse_int(text.substr(0, slash), text);
    const std::int64_t den = parse_int(text.substr(slash + 1), text);
    if (den == 0) {
      throw FractionFormatError("zero denominator in '" + std::string(text) + "'");
    }
    return Fraction(num, den);
  }

  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto dot = body.find('.');
  std::string_view int_part = body.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) {
    throw FractionFormatError("cannot parse '" + std::string(text) + "'");
  }
  if (frac_part.size() > 18) {
    throw FractionFormatError("too many decimal digits in '" + std::string(text) + "'");
  }
  for (char c : frac_part) {
    if (c < '0' || c > '9') throw FractionFormatError("cannot parse '" + std::string(text) + "'");
  }

  Wide num = int_part.empty() ? 0 : parse_int(int_part, text);
  Wide den = 1;
  for (char c : frac_part) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  return make_reduced(negative ? -num : num, den);
}

std::string Fraction::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Fraction operator+(const Fraction& a, const Fraction& b) {
  return make_reduced(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Fraction operator-(const Fraction& a, const Fraction& b) {
  return make_reduced(Wide(a.num_) * b.den_ - Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Fraction operator*(const Fraction& a, const Fraction& b) {
  return make_reduced(Wide(a.num_) * b.num_, Wide(a.den_) * b.den_);
}

Fraction operator/(const Fraction& a, const Fraction& b) {
  return make_reduced(Wide(a.num_) * b.den_, Wide(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
  const Wide lhs = Wide(a.num_) * b.den_;
  const Wide rhs = Wide(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace uss
