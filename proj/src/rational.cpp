#include "ergkit/rational.hpp"

#include <charconv>
#include <limits>

#include "ergkit/error.hpp"

namespace ergkit {
namespace {

__int128 gcd_wide(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

std::int64_t parse_integer(std::string_view text, std::string_view whole) {
  std::int64_t out = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ArgumentError("not a rational number: '" + std::string(whole) + "'");
  }
  return out;
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  *this = from_wide(numerator, denominator);
}

Rational Rational::from_wide(__int128 numerator, __int128 denominator) {
  if (denominator == 0) throw ArithmeticError("division by zero");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  __int128 g = gcd_wide(numerator, denominator);
  if (g > 1) {
    numerator /= g;
    denominator /= g;
  }
  if (!fits(numerator) || !fits(denominator)) {
    throw ArithmeticError("rational overflow");
  }
  Rational r;
  r.num_ = static_cast<std::int64_t>(numerator);
  r.den_ = static_cast<std::int64_t>(denominator);
  return r;
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  const std::string_view whole = text;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_integer(text.substr(0, slash), whole),
                    parse_integer(text.substr(slash + 1), whole));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    if (frac_part.empty() || frac_part.size() > 18 ||
        frac_part.find_first_not_of("0123456789") != std::string_view::npos) {
      throw ArgumentError("not a rational number: '" + std::string(whole) + "'");
    }
    bool negative = !int_part.empty() && int_part.front() == '-';
    std::int64_t ip = 0;
    if (!int_part.empty() && int_part != "-" && int_part != "+") {
      ip = parse_integer(int_part, whole);
    }
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    std::int64_t fp = parse_integer(frac_part, whole);
    Rational frac(fp, scale);
    Rational magnitude = Rational(ip < 0 ? -ip : ip) + frac;
    return negative ? -magnitude : magnitude;
  }
  return Rational(parse_integer(text, whole));
}

double Rational::to_double() const noexcept {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::int64_t Rational::floor() const noexcept {
  std::int64_t q = num_ / den_;
  if ((num_ % den_ != 0) && (num_ < 0)) --q;
  return q;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw ArithmeticError("division by zero");
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
  __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace ergkit
