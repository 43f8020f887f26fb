#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace foldcalc {

/// Exact rational p/q with q > 0 and gcd(p, q) = 1. Arithmetic reports overflow
/// through std::nullopt instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  static std::optional<Rational> add(const Rational& a, const Rational& b);
  static std::optional<Rational> mul(const Rational& a, const Rational& b);
  static std::optional<Rational> div(const Rational& a, const Rational& b);

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b);

  /// Normalizes a 128-bit fraction; nullopt on zero denominator or overflow.
  static std::optional<Rational> normalize(__int128 num, __int128 den);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Scalar constant of an expression: exact rational when possible, otherwise an
/// inexact double. Exactness is sticky: any operation with an inexact operand
/// (or an overflowing exact one) yields an inexact result.
class Number {
 public:
  Number() = default;
  Number(int v) : q_(v) {}  // NOLINT(implicit)
  Number(std::int64_t v) : q_(v) {}  // NOLINT(implicit)
  Number(Rational q) : q_(q) {}  // NOLINT(implicit)
  static Number rational(std::int64_t num, std::int64_t den) { return Number(Rational(num, den)); }
  static Number inexact(double d);

  bool exact() const { return exact_; }
  const Rational& q() const { return q_; }
  double to_double() const { return exact_ ? q_.to_double() : d_; }

  bool is_zero() const { return exact_ ? q_.is_zero() : d_ == 0.0; }
  bool is_one() const { return exact_ && q_.num() == 1 && q_.den() == 1; }
  bool is_negative() const { return exact_ ? q_.num() < 0 : d_ < 0.0; }
  bool is_integer() const { return exact_ && q_.is_integer(); }

  Number operator-() const;
  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b) { return a + (-b); }
  friend Number operator*(const Number& a, const Number& b);
  /// Division by an exact zero is a logic error; callers check first.
  friend Number operator/(const Number& a, const Number& b);
  Number pow(int k) const;
  Number abs() const { return is_negative() ? -*this : *this; }

  /// Structural equality (an exact 1/2 differs from an inexact 0.5).
  friend bool operator==(const Number& a, const Number& b);

  std::string to_string() const;

  /// Parses a decimal literal such as "12", "0.125" or "1.5e-3" exactly when the
  /// value fits, falling back to an inexact double.
  static Number parse_decimal(std::string_view text);

 private:
  bool exact_ = true;
  Rational q_{};
  double d_ = 0.0;
};

}  // namespace foldcalc
