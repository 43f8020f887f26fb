#include "foldcalc/number.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace foldcalc {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

std::optional<Rational> Rational::normalize(i128 num, i128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax || num < -kMax || den > kMax) return std::nullopt;
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

namespace {
auto make(i128 num, i128 den) { return Rational::normalize(num, den); }
}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  auto r = make(num, den);
  if (!r) throw std::overflow_error("rational out of range");
  num_ = r->num_;
  den_ = r->den_;
}

std::optional<Rational> Rational::add(const Rational& a, const Rational& b) {
  return make(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
              static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::mul(const Rational& a, const Rational& b) {
  return make(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::div(const Rational& a, const Rational& b) {
  if (b.num_ == 0) return std::nullopt;
  return make(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
}

Number Number::inexact(double d) {
  Number n;
  n.exact_ = false;
  n.d_ = d;
  return n;
}

Number Number::operator-() const {
  if (exact_) return Number(Rational(-q_.num(), q_.den()));
  return inexact(-d_);
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    if (auto r = Rational::add(a.q_, b.q_)) return Number(*r);
  }
  return Number::inexact(a.to_double() + b.to_double());
}

Number operator*(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    if (auto r = Rational::mul(a.q_, b.q_)) return Number(*r);
  }
  return Number::inexact(a.to_double() * b.to_double());
}

Number operator/(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    if (b.q_.is_zero()) throw std::domain_error("exact division by zero");
    if (auto r = Rational::div(a.q_, b.q_)) return Number(*r);
  }
  return Number::inexact(a.to_double() / b.to_double());
}

Number Number::pow(int k) const {
  if (k < 0) return Number(1) / pow(-k);
  Number result(1);
  Number base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

bool operator==(const Number& a, const Number& b) {
  if (a.exact_ != b.exact_) return false;
  return a.exact_ ? a.q_ == b.q_ : a.d_ == b.d_;
}

std::string Number::to_string() const {
  if (exact_) {
    if (q_.den() == 1) return std::to_string(q_.num());
    return std::to_string(q_.num()) + "/" + std::to_string(q_.den());
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d_);
  std::string s(buf);
  // Keep a marker so the literal reads back as a float-looking token.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

Number Number::parse_decimal(std::string_view text) {
  // digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
  std::size_t i = 0;
  i128 mant = 0;
  int scale = 0;
  bool overflow = false;
  auto digit = [&](char c) {
    if (mant > kMax / 10) {
      overflow = true;
      return;
    }
    mant = mant * 10 + (c - '0');
  };
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digit(text[i++]);
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digit(text[i++]);
      --scale;
    }
  }
  int exp10 = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    int sign = 1;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) sign = text[i++] == '-' ? -1 : 1;
    int e = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      e = std::min(e * 10 + (text[i++] - '0'), 100000);
    }
    exp10 = sign * e;
  }
  scale += exp10;
  auto fallback = [&]() {
    double d = 0.0;
    std::string s(text);
    std::sscanf(s.c_str(), "%lf", &d);
    return inexact(d);
  };
  if (overflow || scale > 18 || scale < -18) return fallback();
  i128 num = mant;
  i128 den = 1;
  for (int k = 0; k < std::abs(scale); ++k) (scale > 0 ? num : den) *= 10;
  auto r = make(num, den);
  if (!r) return fallback();
  return Number(*r);
}

}  // namespace foldcalc
