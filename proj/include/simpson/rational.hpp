#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "simpson/error.hpp"

namespace simpson {

/// Exact rational on int64. Used for thresholds, sample distributions and
/// survival rates; all comparisons cross-multiply in 128 bits so no float
/// ever decides a threshold.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat() = default;
  Rat(std::int64_t n) : num(n), den(1) {}
  Rat(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) fail(errc::invalid_value, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend Rat operator+(const Rat& a, const Rat& b) {
    return Rat(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    return Rat(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rat operator*(const Rat& a, const Rat& b) { return Rat(a.num * b.num, a.den * b.den); }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.num == 0) fail(errc::invalid_value, "rational division by zero");
    return Rat(a.num * b.den, a.den * b.num);
  }

  friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }
};

/// a ? b·c with exact arithmetic; returns sign(a - b*c) where a,b,c >= 0.
inline int cmp_count_vs_fraction(std::int64_t count, std::int64_t total, const Rat& frac) {
  // count >= frac * total  <=>  count * frac.den >= frac.num * total
  __int128 lhs = static_cast<__int128>(count) * frac.den;
  __int128 rhs = static_cast<__int128>(frac.num) * total;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

/// Parses "0.001", ".5", "3", or "p/q" into an exact rational.
inline Rat parse_rational(const std::string& text) {
  if (text.empty()) fail(errc::invalid_value, "empty rational literal");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::int64_t n = std::stoll(text.substr(0, slash));
    std::int64_t d = std::stoll(text.substr(slash + 1));
    return Rat(n, d);
  }
  bool neg = false;
  std::size_t pos = 0;
  if (text[pos] == '+' || text[pos] == '-') {
    neg = text[pos] == '-';
    ++pos;
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool saw_digit = false, saw_dot = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c == '.') {
      if (saw_dot) fail(errc::invalid_value, "malformed rational: " + text);
      saw_dot = true;
      continue;
    }
    if (c < '0' || c > '9') fail(errc::invalid_value, "malformed rational: " + text);
    saw_digit = true;
    num = num * 10 + (c - '0');
    if (saw_dot) den *= 10;
    if (den > 1000000000000000000LL / 10 || num < 0)
      fail(errc::invalid_value, "rational literal out of range: " + text);
  }
  if (!saw_digit) fail(errc::invalid_value, "malformed rational: " + text);
  return Rat(neg ? -num : num, den);
}

} // namespace simpson
