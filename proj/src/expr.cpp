#include "foldcalc/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace foldcalc {

struct Expr::Node {
  ExprKind kind = ExprKind::Constant;
  Number value{};
  std::string name;
  std::vector<Expr> args;
  int exponent = 0;
  SplinePtr spline;
};

// ---------------------------------------------------------------------------
// Spline

Spline::Spline(std::string name, std::vector<Number> breakpoints, std::vector<Piece> pieces)
    : name_(std::move(name)), breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (pieces_.size() != breakpoints_.size() + 1)
    throw Error("spline '" + name_ + "': need one more piece than breakpoints");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i - 1].to_double() < breakpoints_[i].to_double()))
      throw Error("spline '" + name_ + "': breakpoints must increase");
  }
  for (const auto& b : breakpoints_) dbreaks_.push_back(b.to_double());
  for (const auto& p : pieces_) {
    dorigin_.push_back(p.origin.to_double());
    std::vector<double> c;
    for (const auto& k : p.coeffs) c.push_back(k.to_double());
    if (c.empty()) c.push_back(0.0);
    dcoeffs_.push_back(std::move(c));
  }
}

int Spline::degree() const {
  int d = 0;
  for (const auto& p : pieces_) d = std::max<int>(d, static_cast<int>(p.coeffs.size()) - 1);
  return d;
}

std::size_t Spline::piece_index(double x) const {
  return static_cast<std::size_t>(std::upper_bound(dbreaks_.begin(), dbreaks_.end(), x) -
                                  dbreaks_.begin());
}

double Spline::operator()(double x) const {
  std::size_t i = piece_index(x);
  const auto& c = dcoeffs_[i];
  double u = x - dorigin_[i];
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
  return acc;
}

Number Spline::exact_at(const Number& x) const {
  std::size_t i = 0;
  while (i < breakpoints_.size()) {
    const Number& b = breakpoints_[i];
    bool at_or_past = (x.exact() && b.exact()) ? !(x.q() < b.q()) : x.to_double() >= b.to_double();
    if (!at_or_past) break;
    ++i;
  }
  const auto& p = pieces_[i];
  Number u = x - p.origin;
  Number acc(0);
  for (std::size_t k = p.coeffs.size(); k-- > 0;) acc = acc * u + p.coeffs[k];
  return acc;
}

SplinePtr Spline::derivative() const {
  std::vector<Piece> d;
  for (const auto& p : pieces_) {
    Piece q{p.origin, {}};
    for (std::size_t k = 1; k < p.coeffs.size(); ++k)
      q.coeffs.push_back(p.coeffs[k] * Number(static_cast<std::int64_t>(k)));
    if (q.coeffs.empty()) q.coeffs.push_back(Number(0));
    d.push_back(std::move(q));
  }
  return std::make_shared<const Spline>(name_ + "_d", breakpoints_, std::move(d));
}

// ---------------------------------------------------------------------------
// Construction

Expr::Expr() : Expr(Number(0)) {}

Expr::Expr(int v) : Expr(Number(v)) {}

Expr::Expr(Number v) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->value = v;
  node_ = std::move(n);
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::make(ExprKind kind, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::power(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Power;
  n->args = {std::move(base)};
  n->exponent = exponent;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::profile(SplinePtr spline, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Profile;
  n->args = {std::move(arg)};
  n->spline = std::move(spline);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

ExprKind Expr::kind() const { return node_->kind; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
const Number& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
int Expr::exponent() const { return node_->exponent; }
const SplinePtr& Expr::spline() const { return node_->spline; }

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(ExprKind::Sum, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(ExprKind::Sum, {a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(ExprKind::Product, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(ExprKind::Quotient, {a, b}); }
Expr operator-(const Expr& a) { return Expr::make(ExprKind::Negate, {a}); }
Expr pow(const Expr& base, int exponent) { return Expr::power(base, exponent); }
Expr exp(const Expr& a) { return Expr::make(ExprKind::Exp, {a}); }
Expr log(const Expr& a) { return Expr::make(ExprKind::Log, {a}); }
Expr sqrt(const Expr& a) { return Expr::make(ExprKind::Sqrt, {a}); }
Expr sin(const Expr& a) { return Expr::make(ExprKind::Sin, {a}); }
Expr cos(const Expr& a) { return Expr::make(ExprKind::Cos, {a}); }
Expr apply(const SplinePtr& spline, const Expr& arg) { return Expr::profile(spline, arg); }
Expr var(std::string name) { return Expr::variable(std::move(name)); }
Expr rational(std::int64_t num, std::int64_t den) { return Expr(Number::rational(num, den)); }

// ---------------------------------------------------------------------------
// Parser

namespace {

const char* function_name(ExprKind k) {
  switch (k) {
    case ExprKind::Exp: return "exp";
    case ExprKind::Log: return "ln";
    case ExprKind::Sqrt: return "sqrt";
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    default: return nullptr;
  }
}

bool function_kind(std::string_view name, ExprKind& out) {
  static const std::pair<const char*, ExprKind> table[] = {
      {"exp", ExprKind::Exp}, {"ln", ExprKind::Log},  {"sqrt", ExprKind::Sqrt},
      {"sin", ExprKind::Sin}, {"cos", ExprKind::Cos},
  };
  for (const auto& [n, k] : table) {
    if (name == n) {
      out = k;
      return true;
    }
  }
  return false;
}

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> vars, const ProfileTable* profiles)
      : text_(text), vars_(vars), profiles_(profiles) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    for (;;) {
      if (accept('+')) {
        terms.push_back(term());
      } else if (accept('-')) {
        terms.push_back(-term());
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : Expr::make(ExprKind::Sum, std::move(terms));
  }

  Expr term() {
    Expr lhs = factor();
    std::vector<Expr> product{lhs};
    for (;;) {
      if (accept('*')) {
        product.push_back(factor());
      } else if (accept('/')) {
        Expr num = product.size() == 1 ? product.front() : Expr::make(ExprKind::Product, product);
        product = {num / factor()};
      } else {
        break;
      }
    }
    return product.size() == 1 ? product.front() : Expr::make(ExprKind::Product, std::move(product));
  }

  Expr factor() {
    if (accept('-')) return -factor();
    Expr b = base();
    if (accept('^')) {
      skip_ws();
      bool neg = false;
      bool paren = accept('(');
      if (accept('-')) neg = true;
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent after '^'");
      long k = std::stol(std::string(text_.substr(start, pos_ - start)));
      if (k > 1000) fail("exponent too large");
      if (paren && !accept(')')) fail("expected ')'");
      return pow(b, neg ? -static_cast<int>(k) : static_cast<int>(k));
    }
    return b;
  }

  Expr base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string_view tok = text_.substr(start, pos_ - start);
    if (tok == ".") fail("malformed number");
    return Expr(Number::parse_decimal(tok));
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    ExprKind fk = ExprKind::Exp;
    bool is_fn = function_kind(name, fk);
    SplinePtr spline;
    if (!is_fn && profiles_) {
      if (auto it = profiles_->find(name); it != profiles_->end()) spline = it->second;
    }
    skip_ws();
    bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (is_fn || spline) {
      if (!call) {
        pos_ = start;
        fail("function '" + name + "' expects 1 argument, got 0");
      }
      ++pos_;
      std::vector<Expr> args{expr()};
      while (accept(',')) args.push_back(expr());
      if (!accept(')')) fail("expected ')'");
      if (args.size() != 1) {
        fail("function '" + name + "' expects 1 argument, got " + std::to_string(args.size()));
      }
      return spline ? Expr::profile(spline, args.front()) : Expr::make(fk, std::move(args));
    }
    if (call) {
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    if (std::find(vars_.begin(), vars_.end(), name) == vars_.end()) {
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    return Expr::variable(name);
  }

  std::string_view text_;
  std::span<const std::string> vars_;
  const ProfileTable* profiles_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> vars, const ProfileTable* profiles) {
  return Parser(text, vars, profiles).parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

constexpr int kPrecSum = 1;
constexpr int kPrecProduct = 2;
constexpr int kPrecPower = 3;
constexpr int kPrecAtom = 4;

bool negative_constant(const Expr& e) { return e.is_constant() && e.value().is_negative(); }

int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant:
      if (e.value().is_negative()) return kPrecProduct;
      if (e.value().exact() && !e.value().is_integer()) return kPrecProduct;
      return kPrecAtom;
    case ExprKind::Variable:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Profile: return kPrecAtom;
    case ExprKind::Sum: return e.args().size() == 1 ? precedence(e.args()[0]) : kPrecSum;
    case ExprKind::Product:
      return e.args().size() == 1 ? precedence(e.args()[0]) : kPrecProduct;
    case ExprKind::Quotient:
    case ExprKind::Negate: return kPrecProduct;
    case ExprKind::Power: return e.exponent() < 0 ? kPrecProduct : kPrecPower;
  }
  return kPrecAtom;
}

void print(const Expr& e, int ctx, std::string& out);

void print_paren(const Expr& e, int ctx, std::string& out) {
  if (precedence(e) < ctx) {
    out += '(';
    print(e, 0, out);
    out += ')';
  } else {
    print(e, ctx, out);
  }
}

void print(const Expr& e, int ctx, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Constant: {
      const Number& v = e.value();
      if (v.is_negative()) {
        out += '-';
        print_paren(Expr(-v), kPrecProduct, out);
      } else {
        out += v.to_string();
      }
      return;
    }
    case ExprKind::Variable: out += e.name(); return;
    case ExprKind::Sum: {
      if (e.args().empty()) {
        out += '0';
        return;
      }
      bool first = true;
      for (const auto& a : e.args()) {
        if (first) {
          print_paren(a, kPrecSum, out);
        } else if (a.kind() == ExprKind::Negate) {
          out += " - ";
          print_paren(a.args()[0], kPrecProduct, out);
        } else if (negative_constant(a)) {
          out += " - ";
          print_paren(Expr(-a.value()), kPrecProduct, out);
        } else {
          out += " + ";
          print_paren(a, kPrecSum, out);
        }
        first = false;
      }
      return;
    }
    case ExprKind::Product: {
      if (e.args().empty()) {
        out += '1';
        return;
      }
      bool first = true;
      for (const auto& a : e.args()) {
        if (!first) out += '*';
        std::string piece;
        print_paren(a, kPrecProduct, piece);
        if (!first && piece.front() == '-') {
          out += '(';
          out += piece;
          out += ')';
        } else {
          out += piece;
        }
        first = false;
      }
      return;
    }
    case ExprKind::Quotient:
      print_paren(e.args()[0], kPrecProduct, out);
      out += '/';
      print_paren(e.args()[1], kPrecPower, out);
      return;
    case ExprKind::Power:
      if (e.exponent() < 0) {
        print(Expr(1) / pow(e.args()[0], -e.exponent()), ctx, out);
        return;
      }
      print_paren(e.args()[0], kPrecAtom, out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case ExprKind::Negate:
      out += '-';
      print_paren(e.args()[0], kPrecProduct, out);
      return;
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
    case ExprKind::Sin:
    case ExprKind::Cos:
      out += function_name(e.kind());
      out += '(';
      print(e.args()[0], 0, out);
      out += ')';
      return;
    case ExprKind::Profile:
      out += e.spline()->name();
      out += '(';
      print(e.args()[0], 0, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation, substitution, traversal

namespace {

Expr diff_raw(const Expr& e, std::string_view v) {
  const auto& a = e.args();
  switch (e.kind()) {
    case ExprKind::Constant: return Expr(0);
    case ExprKind::Variable: return Expr(e.name() == v ? 1 : 0);
    case ExprKind::Sum: {
      std::vector<Expr> parts;
      for (const auto& x : a) parts.push_back(diff_raw(x, v));
      return Expr::make(ExprKind::Sum, std::move(parts));
    }
    case ExprKind::Product: {
      std::vector<Expr> parts;
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::vector<Expr> factors = a;
        factors[i] = diff_raw(a[i], v);
        parts.push_back(Expr::make(ExprKind::Product, std::move(factors)));
      }
      return Expr::make(ExprKind::Sum, std::move(parts));
    }
    case ExprKind::Quotient: {
      const Expr& n = a[0];
      const Expr& d = a[1];
      return (diff_raw(n, v) * d - n * diff_raw(d, v)) / pow(d, 2);
    }
    case ExprKind::Power: {
      int k = e.exponent();
      if (k == 0) return Expr(0);
      return Expr(k) * pow(a[0], k - 1) * diff_raw(a[0], v);
    }
    case ExprKind::Negate: return -diff_raw(a[0], v);
    case ExprKind::Exp: return e * diff_raw(a[0], v);
    case ExprKind::Log: return diff_raw(a[0], v) / a[0];
    case ExprKind::Sqrt: return diff_raw(a[0], v) / (Expr(2) * e);
    case ExprKind::Sin: return cos(a[0]) * diff_raw(a[0], v);
    case ExprKind::Cos: return -(sin(a[0]) * diff_raw(a[0], v));
    case ExprKind::Profile: return foldcalc::apply(e.spline()->derivative(), a[0]) * diff_raw(a[0], v);
  }
  return Expr(0);
}

Expr rebuild(const Expr& e, std::vector<Expr> args) {
  switch (e.kind()) {
    case ExprKind::Power: return pow(args[0], e.exponent());
    case ExprKind::Profile: return foldcalc::apply(e.spline(), args[0]);
    default: return Expr::make(e.kind(), std::move(args));
  }
}

}  // namespace

Expr diff(const Expr& e, std::string_view var) { return simplify(diff_raw(e, var)); }

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements) {
  if (e.kind() == ExprKind::Variable) {
    auto it = replacements.find(e.name());
    return it == replacements.end() ? e : it->second;
  }
  if (e.args().empty()) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(substitute(a, replacements));
  return rebuild(e, std::move(args));
}

namespace {
void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == ExprKind::Variable) out.insert(e.name());
  for (const auto& a : e.args()) collect_vars(a, out);
}
}  // namespace

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> s;
  collect_vars(e, s);
  return {s.begin(), s.end()};
}

void collect_profiles(const Expr& e, ProfileTable& out) {
  if (e.kind() == ExprKind::Profile) out.emplace(e.spline()->name(), e.spline());
  for (const auto& a : e.args()) collect_profiles(a, out);
}

std::size_t expr_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args()) n += expr_size(a);
  return n;
}

// ---------------------------------------------------------------------------
// Evaluation

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> vars) {
  std::size_t depth = 0;
  auto emit = [&](Op op, long delta) {
    program_.push_back(op);
    depth = static_cast<std::size_t>(static_cast<long>(depth) + delta);
    max_stack_ = std::max(max_stack_, depth);
  };
  auto rec = [&](auto&& self, const Expr& x) -> void {
    switch (x.kind()) {
      case ExprKind::Constant: emit({Op::Const, 0, x.value().to_double()}, 1); return;
      case ExprKind::Variable: {
        auto it = std::find(vars.begin(), vars.end(), x.name());
        if (it == vars.end()) throw EvalError("unbound variable '" + x.name() + "'");
        emit({Op::Var, static_cast<int>(it - vars.begin())}, 1);
        return;
      }
      case ExprKind::Sum:
      case ExprKind::Product: {
        bool sum = x.kind() == ExprKind::Sum;
        if (x.args().empty()) {
          emit({Op::Const, 0, sum ? 0.0 : 1.0}, 1);
          return;
        }
        for (const auto& a : x.args()) self(self, a);
        int n = static_cast<int>(x.args().size());
        if (n > 1) emit({sum ? Op::Add : Op::Mul, n}, -(n - 1));
        return;
      }
      case ExprKind::Quotient:
        self(self, x.args()[0]);
        self(self, x.args()[1]);
        emit({Op::Div}, -1);
        return;
      case ExprKind::Power:
        self(self, x.args()[0]);
        emit({Op::Pow, x.exponent()}, 0);
        return;
      case ExprKind::Negate: self(self, x.args()[0]); emit({Op::Neg}, 0); return;
      case ExprKind::Exp: self(self, x.args()[0]); emit({Op::Exp}, 0); return;
      case ExprKind::Log: self(self, x.args()[0]); emit({Op::Log}, 0); return;
      case ExprKind::Sqrt: self(self, x.args()[0]); emit({Op::Sqrt}, 0); return;
      case ExprKind::Sin: self(self, x.args()[0]); emit({Op::Sin}, 0); return;
      case ExprKind::Cos: self(self, x.args()[0]); emit({Op::Cos}, 0); return;
      case ExprKind::Profile: {
        self(self, x.args()[0]);
        splines_.push_back(x.spline());
        Op op{Op::Profile};
        op.spline = x.spline().get();
        emit(op, 0);
        return;
      }
    }
  };
  rec(rec, e);
}

double CompiledExpr::operator()(std::span<const double> values) const {
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* st = inline_stack;
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    st = heap.data();
  }
  std::size_t sp = 0;
  for (const Op& op : program_) {
    switch (op.code) {
      case Op::Const: st[sp++] = op.value; break;
      case Op::Var:
        if (static_cast<std::size_t>(op.arg) >= values.size()) throw EvalError("missing variable value");
        st[sp++] = values[static_cast<std::size_t>(op.arg)];
        break;
      case Op::Add: {
        double acc = 0.0;
        for (int i = 0; i < op.arg; ++i) acc += st[sp - 1 - static_cast<std::size_t>(i)];
        sp -= static_cast<std::size_t>(op.arg);
        st[sp++] = acc;
        break;
      }
      case Op::Mul: {
        double acc = 1.0;
        for (int i = 0; i < op.arg; ++i) acc *= st[sp - 1 - static_cast<std::size_t>(i)];
        sp -= static_cast<std::size_t>(op.arg);
        st[sp++] = acc;
        break;
      }
      case Op::Div: {
        double d = st[--sp];
        if (d == 0.0) throw EvalError("division by zero");
        st[sp - 1] /= d;
        break;
      }
      case Op::Pow: {
        double b = st[sp - 1];
        if (op.arg < 0 && b == 0.0) throw EvalError("division by zero");
        int k = op.arg < 0 ? -op.arg : op.arg;
        double r = 1.0;
        double base = b;
        while (k > 0) {
          if (k & 1) r *= base;
          base *= base;
          k >>= 1;
        }
        st[sp - 1] = op.arg < 0 ? 1.0 / r : r;
        break;
      }
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
      case Op::Log:
        if (!(st[sp - 1] > 0.0)) throw EvalError("ln of non-positive argument");
        st[sp - 1] = std::log(st[sp - 1]);
        break;
      case Op::Sqrt:
        if (st[sp - 1] < 0.0) throw EvalError("sqrt of negative argument");
        st[sp - 1] = std::sqrt(st[sp - 1]);
        break;
      case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
      case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
      case Op::Profile: st[sp - 1] = (*op.spline)(st[sp - 1]); break;
    }
  }
  double r = sp ? st[sp - 1] : 0.0;
  if (!std::isfinite(r)) throw EvalError("non-finite value");
  return r;
}

double eval(const Expr& e, std::span<const std::string> vars, std::span<const double> values) {
  return CompiledExpr(e, vars)(values);
}

}  // namespace foldcalc
