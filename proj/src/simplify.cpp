// Normal-form simplifier. An expression is read into a sparse polynomial whose
// monomials are products of atoms raised to integer powers:
//   variables, exp/ln/sqrt/sin/cos of a normalized argument, spline applications,
//   monic sums (only ever with negative exponent) and opaque x/0 quotients.
// Atoms are keyed by their printed form, so the output is independent of the
// traversal order and a second pass reproduces it.

#include <cmath>
#include <map>
#include <memory>

#include "foldcalc/expr.hpp"

namespace foldcalc {

namespace {

enum class AtomKind { Var, Fn, Prof, Sum, Raw };

struct Atom;

using Factor = std::pair<const Atom*, int>;
using Mono = std::vector<Factor>;

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const;
};

using Poly = std::map<Mono, Number, MonoLess>;

struct Atom {
  AtomKind kind;
  ExprKind fn = ExprKind::Constant;
  Poly arg;
  SplinePtr spline;
  Expr expr;
  std::string key;
};

bool MonoLess::operator()(const Mono& a, const Mono& b) const {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].first != b[i].first) return a[i].first->key < b[i].first->key;
    if (a[i].second != b[i].second) return a[i].second < b[i].second;
  }
  return a.size() < b.size();
}

bool is_const(const Poly& p) { return p.empty() || (p.size() == 1 && p.begin()->first.empty()); }

Number const_value(const Poly& p) { return p.empty() ? Number(0) : p.begin()->second; }

void add_term(Poly& p, const Mono& m, const Number& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = p.emplace(m, c);
  if (!inserted) {
    it->second = it->second + c;
    if (it->second.is_zero()) p.erase(it);
  }
}

Poly constant(const Number& c) {
  Poly p;
  add_term(p, {}, c);
  return p;
}

Poly scale(const Poly& p, const Number& c) {
  Poly out;
  if (c.is_zero()) return out;
  for (const auto& [m, k] : p) add_term(out, m, k * c);
  return out;
}

Poly add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, k] : b) add_term(out, m, k);
  return out;
}

bool perfect_square(std::int64_t v, std::int64_t& root) {
  if (v < 0) return false;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 1); c <= r + 1; ++c) {
    if (c * c == v) {
      root = c;
      return true;
    }
  }
  return false;
}

class Simplifier {
 public:
  Poly norm(const Expr& e);
  Expr to_expr(const Poly& p);

 private:
  Poly inv(const Expr& e);
  Poly inverse(const Poly& p);
  Poly mul(const Poly& a, const Poly& b);
  Poly pow_poly(const Poly& p, int k);
  Poly canon_term(const Number& c, const Mono& m);
  Poly function(ExprKind kind, Poly arg);
  Poly profile(const SplinePtr& s, Poly arg);
  Poly atom_poly(const Atom* a, int exponent = 1);
  const Atom* intern(std::unique_ptr<Atom> a);
  Expr term_expr(const Mono& m, const Number& c);

  std::map<std::string, std::unique_ptr<Atom>, std::less<>> atoms_;
};

const Atom* Simplifier::intern(std::unique_ptr<Atom> a) {
  a->key = to_string(a->expr);
  auto it = atoms_.find(a->key);
  if (it != atoms_.end()) return it->second.get();
  const Atom* raw = a.get();
  std::string key = a->key;
  atoms_.emplace(std::move(key), std::move(a));
  return raw;
}

Poly Simplifier::atom_poly(const Atom* a, int exponent) {
  Poly p;
  p.emplace(Mono{{a, exponent}}, Number(1));
  return p;
}

Poly Simplifier::mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      Mono m;
      m.reserve(ma.size() + mb.size());
      std::size_t i = 0;
      std::size_t j = 0;
      while (i < ma.size() || j < mb.size()) {
        if (j == mb.size() || (i < ma.size() && ma[i].first->key < mb[j].first->key)) {
          m.push_back(ma[i++]);
        } else if (i == ma.size() || mb[j].first->key < ma[i].first->key) {
          m.push_back(mb[j++]);
        } else {
          int e = ma[i].second + mb[j].second;
          if (e != 0) m.emplace_back(ma[i].first, e);
          ++i;
          ++j;
        }
      }
      Number c = ca * cb;
      bool plain = true;
      int exps = 0;
      for (const auto& [atom, e] : m) {
        bool is_exp = atom->kind == AtomKind::Fn && atom->fn == ExprKind::Exp;
        if (is_exp) ++exps;
        if ((is_exp && (e != 1 || exps > 1)) ||
            (atom->kind == AtomKind::Fn && atom->fn == ExprKind::Sqrt && (e > 1 || e < -1)) ||
            (atom->kind == AtomKind::Sum && e > 0)) {
          plain = false;
          break;
        }
      }
      if (plain) {
        add_term(out, m, c);
      } else {
        for (const auto& [mm, cc] : canon_term(c, m)) add_term(out, mm, cc);
      }
    }
  }
  return out;
}

// Resolves merged exponentials, even powers of roots and positive powers of sums.
Poly Simplifier::canon_term(const Number& c, const Mono& m) {
  Mono rest;
  Poly exp_arg;
  int exp_count = 0;
  bool exp_dirty = false;
  for (const auto& [atom, e] : m) {
    if (atom->kind == AtomKind::Fn && atom->fn == ExprKind::Exp) {
      ++exp_count;
      if (e != 1) exp_dirty = true;
    }
  }
  bool merge = exp_count > 1 || exp_dirty;
  std::vector<Poly> extra;
  for (const auto& [atom, e] : m) {
    if (merge && atom->kind == AtomKind::Fn && atom->fn == ExprKind::Exp) {
      exp_arg = add(exp_arg, scale(atom->arg, Number(e)));
    } else if (atom->kind == AtomKind::Fn && atom->fn == ExprKind::Sqrt && (e > 1 || e < -1)) {
      int q = e / 2;
      int r = e - 2 * q;
      if (r != 0) rest.emplace_back(atom, r);
      extra.push_back(q > 0 ? pow_poly(atom->arg, q) : pow_poly(inverse(atom->arg), -q));
    } else if (atom->kind == AtomKind::Sum && e > 0) {
      extra.push_back(pow_poly(atom->arg, e));
    } else {
      rest.emplace_back(atom, e);
    }
  }
  if (c.is_zero()) return {};
  Poly out;
  out.emplace(rest, c);
  if (merge) out = mul(out, function(ExprKind::Exp, exp_arg));
  for (const auto& x : extra) out = mul(out, x);
  return out;
}

Poly Simplifier::pow_poly(const Poly& p, int k) {
  Poly result = constant(Number(1));
  Poly base = p;
  while (k > 0) {
    if (k & 1) result = mul(result, base);
    k >>= 1;
    if (k > 0) base = mul(base, base);
  }
  return result;
}

Poly Simplifier::inverse(const Poly& p) {
  if (p.size() == 1) {
    const auto& [m, c] = *p.begin();
    Mono neg;
    for (const auto& [a, e] : m) neg.emplace_back(a, -e);
    return canon_term(Number(1) / c, neg);
  }
  if (p.empty()) {
    auto a = std::make_unique<Atom>();
    a->kind = AtomKind::Raw;
    a->expr = Expr(1) / Expr(0);
    return atom_poly(intern(std::move(a)));
  }
  Number lead = p.begin()->second;
  Poly monic = scale(p, Number(1) / lead);
  auto a = std::make_unique<Atom>();
  a->kind = AtomKind::Sum;
  a->arg = monic;
  a->expr = to_expr(monic);
  return scale(atom_poly(intern(std::move(a)), -1), Number(1) / lead);
}

Poly Simplifier::inv(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Product: {
      Poly out = constant(Number(1));
      for (const auto& a : e.args()) out = mul(out, inv(a));
      return out;
    }
    case ExprKind::Negate: return scale(inv(e.args()[0]), Number(-1));
    case ExprKind::Power: {
      int k = e.exponent();
      if (k >= 0) return pow_poly(inv(e.args()[0]), k);
      return pow_poly(norm(e.args()[0]), -k);
    }
    case ExprKind::Quotient: return mul(inv(e.args()[0]), norm(e.args()[1]));
    default: break;
  }
  return inverse(norm(e));
}

Poly Simplifier::function(ExprKind kind, Poly arg) {
  if (is_const(arg)) {
    Number v = const_value(arg);
    double d = v.to_double();
    switch (kind) {
      case ExprKind::Exp:
        if (v.is_zero()) return constant(Number(1));
        if (!v.exact()) return constant(Number::inexact(std::exp(d)));
        break;
      case ExprKind::Log:
        if (v.is_one()) return constant(Number(0));
        if (!v.exact() && d > 0) return constant(Number::inexact(std::log(d)));
        break;
      case ExprKind::Sqrt:
        if (v.exact()) {
          std::int64_t rn = 0;
          std::int64_t rd = 0;
          if (perfect_square(v.q().num(), rn) && perfect_square(v.q().den(), rd))
            return constant(Number(Rational(rn, rd)));
        } else if (d >= 0) {
          return constant(Number::inexact(std::sqrt(d)));
        }
        break;
      case ExprKind::Sin:
        if (v.is_zero()) return {};
        if (!v.exact()) return constant(Number::inexact(std::sin(d)));
        break;
      case ExprKind::Cos:
        if (v.is_zero()) return constant(Number(1));
        if (!v.exact()) return constant(Number::inexact(std::cos(d)));
        break;
      default: break;
    }
  }
  if (kind == ExprKind::Log && arg.size() == 1) {
    const auto& [m, c] = *arg.begin();
    if (c.is_one() && m.size() == 1 && m[0].second == 1 && m[0].first->kind == AtomKind::Fn &&
        m[0].first->fn == ExprKind::Exp)
      return m[0].first->arg;
  }
  auto a = std::make_unique<Atom>();
  a->kind = AtomKind::Fn;
  a->fn = kind;
  a->expr = Expr::make(kind, {to_expr(arg)});
  a->arg = std::move(arg);
  return atom_poly(intern(std::move(a)));
}

Poly Simplifier::profile(const SplinePtr& s, Poly arg) {
  if (is_const(arg)) {
    Number v = const_value(arg);
    if (v.exact()) return constant(s->exact_at(v));
    return constant(Number::inexact((*s)(v.to_double())));
  }
  auto a = std::make_unique<Atom>();
  a->kind = AtomKind::Prof;
  a->spline = s;
  a->expr = foldcalc::apply(s, to_expr(arg));
  a->arg = std::move(arg);
  return atom_poly(intern(std::move(a)));
}

Poly Simplifier::norm(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant: return constant(e.value());
    case ExprKind::Variable: {
      auto a = std::make_unique<Atom>();
      a->kind = AtomKind::Var;
      a->expr = e;
      return atom_poly(intern(std::move(a)));
    }
    case ExprKind::Sum: {
      Poly out;
      for (const auto& a : e.args()) {
        for (const auto& [m, c] : norm(a)) add_term(out, m, c);
      }
      return out;
    }
    case ExprKind::Product: {
      Poly out = constant(Number(1));
      for (const auto& a : e.args()) {
        out = mul(out, norm(a));
        if (out.empty()) break;
      }
      return out;
    }
    case ExprKind::Negate: return scale(norm(e.args()[0]), Number(-1));
    case ExprKind::Quotient: {
      Poly n = norm(e.args()[0]);
      Poly d = norm(e.args()[1]);
      if (d.empty()) {
        auto a = std::make_unique<Atom>();
        a->kind = AtomKind::Raw;
        a->expr = to_expr(n) / Expr(0);
        return atom_poly(intern(std::move(a)));
      }
      if (n.empty()) return {};
      if (d.size() > 1 && n.size() == d.size()) {
        Number ratio = n.begin()->second / d.begin()->second;
        bool prop = true;
        auto it = n.begin();
        for (const auto& [m, c] : d) {
          if (MonoLess{}(it->first, m) || MonoLess{}(m, it->first) || !(it->second == c * ratio)) {
            prop = false;
            break;
          }
          ++it;
        }
        if (prop) return constant(ratio);
      }
      return mul(n, inv(e.args()[1]));
    }
    case ExprKind::Power: {
      int k = e.exponent();
      if (k == 0) return constant(Number(1));
      if (k > 0) return pow_poly(norm(e.args()[0]), k);
      Poly b = norm(e.args()[0]);
      if (b.empty()) {
        auto a = std::make_unique<Atom>();
        a->kind = AtomKind::Raw;
        a->expr = Expr(1) / Expr(0);
        return atom_poly(intern(std::move(a)));
      }
      return pow_poly(inv(e.args()[0]), -k);
    }
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
    case ExprKind::Sin:
    case ExprKind::Cos: return function(e.kind(), norm(e.args()[0]));
    case ExprKind::Profile: return profile(e.spline(), norm(e.args()[0]));
  }
  return {};
}

Expr Simplifier::term_expr(const Mono& m, const Number& c) {
  std::vector<Expr> num;
  std::vector<Expr> den;
  Number mag = c.abs();
  if (mag.exact()) {
    if (mag.q().num() != 1) num.emplace_back(Number(mag.q().num()));
    if (mag.q().den() != 1) den.emplace_back(Number(mag.q().den()));
  } else {
    num.emplace_back(mag);
  }
  for (const auto& [a, e] : m) {
    auto& side = e > 0 ? num : den;
    int k = e > 0 ? e : -e;
    side.push_back(k == 1 ? a->expr : pow(a->expr, k));
  }
  auto product = [](std::vector<Expr> v) {
    if (v.empty()) return Expr(1);
    if (v.size() == 1) return v.front();
    return Expr::make(ExprKind::Product, std::move(v));
  };
  Expr t = product(std::move(num));
  if (!den.empty()) t = t / product(std::move(den));
  return c.is_negative() ? -t : t;
}

Expr Simplifier::to_expr(const Poly& p) {
  if (p.empty()) return Expr(0);
  std::vector<Expr> terms;
  for (const auto& [m, c] : p) {
    terms.push_back(m.empty() ? Expr(c) : term_expr(m, c));
  }
  if (terms.size() == 1) return terms.front();
  return Expr::make(ExprKind::Sum, std::move(terms));
}

}  // namespace

Expr simplify(const Expr& e) {
  Simplifier s;
  return s.to_expr(s.norm(e));
}

}  // namespace foldcalc
