#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "foldcalc/number.hpp"

namespace foldcalc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax or name-resolution failure while reading an expression.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Domain failure during numerical evaluation (pole, ln/sqrt out of domain,
/// unbound variable). Never reported as NaN.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Piecewise polynomial in one real variable. Piece i is valid on
/// [breakpoints[i-1], breakpoints[i]) with the outer pieces extending to
/// -inf / +inf; each piece is sum_k coeffs[k] * (x - origin)^k.
class Spline {
 public:
  struct Piece {
    Number origin;
    std::vector<Number> coeffs;
  };

  Spline(std::string name, std::vector<Number> breakpoints, std::vector<Piece> pieces);

  const std::string& name() const { return name_; }
  const std::vector<Number>& breakpoints() const { return breakpoints_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  int degree() const;

  double operator()(double x) const;
  Number exact_at(const Number& x) const;
  /// Piecewise derivative, named `<name>_d`.
  std::shared_ptr<const Spline> derivative() const;

 private:
  std::size_t piece_index(double x) const;

  std::string name_;
  std::vector<Number> breakpoints_;
  std::vector<Piece> pieces_;
  std::vector<std::vector<double>> dcoeffs_;
  std::vector<double> dorigin_;
  std::vector<double> dbreaks_;
};

using SplinePtr = std::shared_ptr<const Spline>;
using ProfileTable = std::map<std::string, SplinePtr, std::less<>>;

enum class ExprKind {
  Constant,
  Variable,
  Sum,
  Product,
  Quotient,
  Power,
  Negate,
  Exp,
  Log,
  Sqrt,
  Sin,
  Cos,
  Profile,
};

/// Immutable closed-form real expression. Copies share structure; all
/// operations are pure and safe to call concurrently.
class Expr {
 public:
  struct Node;

  Expr();  // exact zero
  Expr(int v);  // NOLINT(implicit)
  Expr(Number v);  // NOLINT(implicit)
  static Expr variable(std::string name);
  static Expr make(ExprKind kind, std::vector<Expr> args);
  static Expr power(Expr base, int exponent);
  static Expr profile(SplinePtr spline, Expr arg);

  ExprKind kind() const;
  const std::vector<Expr>& args() const;
  const Number& value() const;
  const std::string& name() const;
  int exponent() const;
  const SplinePtr& spline() const;

  bool is_constant() const { return kind() == ExprKind::Constant; }
  bool is_zero() const { return is_constant() && value().is_zero(); }
  bool is_one() const { return is_constant() && value().is_one(); }
  const Node* raw() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Raw (unsimplified) constructors; combine with simplify() when a compact form
// is wanted.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr apply(const SplinePtr& spline, const Expr& arg);
Expr var(std::string name);
Expr rational(std::int64_t num, std::int64_t den);

/// Parses the infix grammar
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | base ('^' ['-'] integer)?
///   base   := number | ident | ident '(' expr ')' | '(' expr ')'
/// with functions exp, ln, sqrt, sin, cos plus any spline named in `profiles`.
Expr parse_expr(std::string_view text, std::span<const std::string> vars,
                const ProfileTable* profiles = nullptr);

/// Text form accepted by parse_expr.
std::string to_string(const Expr& e);

/// Exact symbolic derivative, simplified.
Expr diff(const Expr& e, std::string_view var);

/// Semantics-preserving normalization: constant folding, 0/1 identities,
/// like-term collection over a polynomial normal form whose atoms are
/// variables, function applications and inverted sums. Idempotent.
Expr simplify(const Expr& e);

/// Simultaneous substitution of variables by expressions (unsimplified).
Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements);

std::vector<std::string> free_variables(const Expr& e);

/// Every spline referenced by `e`, keyed by name.
void collect_profiles(const Expr& e, ProfileTable& out);

/// Node count, a rough size measure.
std::size_t expr_size(const Expr& e);

/// Expression flattened to a postfix program with variables resolved against a
/// fixed name list. Evaluation is reentrant.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::span<const std::string> vars);

  double operator()(std::span<const double> values) const;

 private:
  struct Op {
    enum Code : std::uint8_t { Const, Var, Add, Mul, Div, Pow, Neg, Exp, Log, Sqrt, Sin, Cos, Profile };
    Code code;
    int arg = 0;
    double value = 0.0;
    const Spline* spline = nullptr;
  };
  std::vector<Op> program_;
  std::vector<SplinePtr> splines_;
  std::size_t max_stack_ = 0;
};

/// Convenience: compile and evaluate once.
double eval(const Expr& e, std::span<const std::string> vars, std::span<const double> values);

}  // namespace foldcalc
