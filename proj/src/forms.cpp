#include "foldcalc/forms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

namespace foldcalc {

int popcount(IndexMask m) { return std::popcount(m); }

std::vector<int> mask_indices(IndexMask m) {
  std::vector<int> out;
  for (int i = 0; m; ++i, m >>= 1) {
    if (m & 1u) out.push_back(i);
  }
  return out;
}

namespace {

void require_same_chart(const ChartPtr& a, const ChartPtr& b, const char* op) {
  if (a != b && (a->id() != b->id() || a->dim() != b->dim()))
    throw Error(std::string(op) + ": chart mismatch ('" + a->id() + "' vs '" + b->id() + "')");
}

Expr sum_of(std::vector<Expr> parts) {
  if (parts.empty()) return Expr(0);
  if (parts.size() == 1) return simplify(parts.front());
  return simplify(Expr::make(ExprKind::Sum, std::move(parts)));
}

// Sign of moving every dx_j of b past the dx_i of a with i > j.
int wedge_sign(IndexMask a, IndexMask b) {
  int swaps = 0;
  for (int j : mask_indices(b)) swaps += popcount(a >> (j + 1));
  return (swaps & 1) ? -1 : 1;
}

}  // namespace

Chart::Chart(std::string id, std::vector<std::string> vars, std::vector<Interval> box, int orientation)
    : id_(std::move(id)), vars_(std::move(vars)), box_(std::move(box)), orientation_(orientation) {
  if (vars_.empty()) throw Error("chart '" + id_ + "': no variables");
  if (vars_.size() > 16) throw Error("chart '" + id_ + "': dimension above 16");
  if (box_.size() != vars_.size()) throw Error("chart '" + id_ + "': box size differs from dimension");
  std::set<std::string> seen(vars_.begin(), vars_.end());
  if (seen.size() != vars_.size()) throw Error("chart '" + id_ + "': repeated variable name");
  for (const auto& iv : box_) {
    if (!(iv.lo < iv.hi)) throw Error("chart '" + id_ + "': degenerate box");
  }
  if (orientation_ != 1 && orientation_ != -1) throw Error("chart '" + id_ + "': orientation must be +1 or -1");
}

int Chart::index_of(std::string_view var) const {
  auto it = std::find(vars_.begin(), vars_.end(), var);
  return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
}

ChartPtr make_chart(std::string id, std::vector<std::string> vars, std::vector<Interval> box, int orientation) {
  return std::make_shared<const Chart>(std::move(id), std::move(vars), std::move(box), orientation);
}

// ---------------------------------------------------------------------------

DifferentialForm::DifferentialForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (degree_ < 0 || degree_ > chart_->dim()) throw Error("form degree out of range");
}

DifferentialForm DifferentialForm::scalar(ChartPtr chart, Expr f) {
  DifferentialForm out(std::move(chart), 0);
  out.add(IndexMask{0}, f);
  return out;
}

DifferentialForm DifferentialForm::basis(ChartPtr chart, int i) {
  if (i < 0 || i >= chart->dim()) throw Error("basis index out of range");
  DifferentialForm out(std::move(chart), 1);
  out.add(IndexMask{1} << i, Expr(1));
  return out;
}

DifferentialForm DifferentialForm::from_terms(ChartPtr chart, int degree,
                                              const std::vector<std::pair<std::vector<int>, Expr>>& terms) {
  DifferentialForm out(std::move(chart), degree);
  for (const auto& [idx, c] : terms) out.add(idx, c);
  return out;
}

Expr DifferentialForm::coeff(IndexMask mask) const {
  auto it = terms_.find(mask);
  return it == terms_.end() ? Expr(0) : it->second;
}

Expr DifferentialForm::coeff(const std::vector<int>& indices) const {
  DifferentialForm tmp(chart_, degree_);
  tmp.add(indices, Expr(1));
  if (tmp.terms_.empty()) return Expr(0);
  const auto& [mask, sign] = *tmp.terms_.begin();
  Expr c = coeff(mask);
  return sign.value().is_negative() ? simplify(-c) : c;
}

void DifferentialForm::add(const std::vector<int>& indices, const Expr& c) {
  if (static_cast<int>(indices.size()) != degree_) throw Error("index tuple length differs from degree");
  std::vector<int> idx = indices;
  int sign = 1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= chart_->dim()) throw Error("form index out of range");
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (idx[j] == idx[i]) return;
    }
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j + 1 < idx.size() - i; ++j) {
      if (idx[j] > idx[j + 1]) {
        std::swap(idx[j], idx[j + 1]);
        sign = -sign;
      }
    }
  }
  IndexMask mask = 0;
  for (int i : idx) mask |= IndexMask{1} << i;
  add(mask, sign > 0 ? c : -c);
}

void DifferentialForm::add(IndexMask mask, const Expr& c) {
  if (popcount(mask) != degree_) throw Error("mask degree mismatch");
  auto it = terms_.find(mask);
  Expr v = simplify(it == terms_.end() ? c : it->second + c);
  if (v.is_zero()) {
    if (it != terms_.end()) terms_.erase(it);
  } else if (it == terms_.end()) {
    terms_.emplace(mask, v);
  } else {
    it->second = v;
  }
}

DifferentialForm DifferentialForm::operator-() const {
  DifferentialForm out(chart_, degree_);
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, simplify(-c));
  return out;
}

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart_, b.chart_, "add");
  if (a.degree_ != b.degree_) throw Error("add: degree mismatch");
  DifferentialForm out = a;
  for (const auto& [m, c] : b.terms_) out.add(m, c);
  return out;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) { return a + (-b); }

DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
  DifferentialForm out(a.chart_, a.degree_);
  for (const auto& [m, c] : a.terms_) out.add(m, f * c);
  return out;
}

// ---------------------------------------------------------------------------

VectorField::VectorField(ChartPtr chart, std::vector<Expr> components)
    : chart_(std::move(chart)), comps_(std::move(components)) {
  if (static_cast<int>(comps_.size()) != chart_->dim()) throw Error("vector field component count differs from dimension");
}

VectorField VectorField::coordinate(ChartPtr chart, int i) {
  std::vector<Expr> c(static_cast<std::size_t>(chart->dim()), Expr(0));
  c.at(static_cast<std::size_t>(i)) = Expr(1);
  return VectorField(std::move(chart), std::move(c));
}

ChartMap::ChartMap(ChartPtr source, ChartPtr target, std::vector<Expr> components)
    : source_(std::move(source)), target_(std::move(target)), comps_(std::move(components)) {
  if (static_cast<int>(comps_.size()) != target_->dim()) throw Error("chart map component count differs from target dimension");
}

// ---------------------------------------------------------------------------

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  int deg = a.degree() + b.degree();
  if (deg > a.chart()->dim()) throw Error("wedge: degree overflow");
  std::map<IndexMask, std::vector<Expr>> parts;
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      if (ma & mb) continue;
      Expr t = ca * cb;
      parts[ma | mb].push_back(wedge_sign(ma, mb) > 0 ? t : -t);
    }
  }
  DifferentialForm out(a.chart(), deg);
  for (auto& [m, p] : parts) out.add(m, sum_of(std::move(p)));
  return out;
}

DifferentialForm nwedge(const DifferentialForm& a, int k) {
  if (k < 1) throw Error("nwedge: power must be positive");
  if (k * a.degree() > a.chart()->dim()) throw Error("nwedge: degree overflow");
  DifferentialForm out = a;
  for (int i = 1; i < k; ++i) out = wedge(out, a);
  return out;
}

DifferentialForm ext_d(const DifferentialForm& a) {
  const auto& chart = a.chart();
  int dim = chart->dim();
  if (a.degree() == dim) return DifferentialForm(chart, dim);
  std::map<IndexMask, std::vector<Expr>> parts;
  for (const auto& [m, c] : a.terms()) {
    auto fv = free_variables(c);
    for (int j = 0; j < dim; ++j) {
      IndexMask bit = IndexMask{1} << j;
      if (m & bit) continue;
      if (!std::binary_search(fv.begin(), fv.end(), chart->vars()[static_cast<std::size_t>(j)])) continue;
      Expr dc = diff(c, chart->vars()[static_cast<std::size_t>(j)]);
      if (dc.is_zero()) continue;
      bool odd = popcount(m & (bit - 1)) & 1;
      parts[m | bit].push_back(odd ? -dc : dc);
    }
  }
  DifferentialForm out(chart, a.degree() + 1);
  for (auto& [m, p] : parts) out.add(m, sum_of(std::move(p)));
  return out;
}

DifferentialForm interior(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(x.chart(), a.chart(), "interior");
  if (a.degree() == 0) throw Error("interior: degree 0 form");
  std::map<IndexMask, std::vector<Expr>> parts;
  for (const auto& [m, c] : a.terms()) {
    int pos = 0;
    for (int i : mask_indices(m)) {
      const Expr& xi = x[static_cast<std::size_t>(i)];
      if (!(xi.is_zero())) {
        Expr t = xi * c;
        parts[m & ~(IndexMask{1} << i)].push_back((pos & 1) ? -t : t);
      }
      ++pos;
    }
  }
  DifferentialForm out(a.chart(), a.degree() - 1);
  for (auto& [m, p] : parts) out.add(m, sum_of(std::move(p)));
  return out;
}

DifferentialForm lie(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(x.chart(), a.chart(), "lie");
  DifferentialForm inner = a.degree() < a.chart()->dim() ? interior(x, ext_d(a))
                                                          : DifferentialForm(a.chart(), a.degree());
  if (a.degree() == 0) return inner;
  return ext_d(interior(x, a)) + inner;
}

DifferentialForm pullback(const ChartMap& m, const DifferentialForm& a) {
  require_same_chart(m.target(), a.chart(), "pullback");
  const auto& src = m.source();
  const auto& tgt = m.target();
  std::map<std::string, Expr, std::less<>> repl;
  for (int i = 0; i < tgt->dim(); ++i) repl.emplace(tgt->vars()[static_cast<std::size_t>(i)], m.components()[static_cast<std::size_t>(i)]);
  std::vector<DifferentialForm> dphi;
  for (const auto& c : m.components()) dphi.push_back(ext_d(DifferentialForm::scalar(src, simplify(c))));
  if (a.degree() > src->dim()) throw Error("pullback: degree exceeds source dimension");
  DifferentialForm out(src, a.degree());
  for (const auto& [mask, c] : a.terms()) {
    DifferentialForm term = DifferentialForm::scalar(src, simplify(substitute(c, repl)));
    for (int i : mask_indices(mask)) {
      term = wedge(term, dphi[static_cast<std::size_t>(i)]);
      if (term.is_zero()) break;
    }
    if (!term.is_zero()) out = out + term;
  }
  return out;
}

Expr top_coeff(const DifferentialForm& a) {
  int dim = a.chart()->dim();
  if (a.degree() != dim) throw Error("top_coeff: form is not of top degree");
  Expr c = a.coeff((dim == 32 ? ~IndexMask{0} : (IndexMask{1} << dim) - 1));
  return a.chart()->orientation() > 0 ? c : simplify(-c);
}

Expr pair(const DifferentialForm& a, const VectorField& x) {
  if (a.degree() != 1) throw Error("pair: 1-form expected");
  require_same_chart(a.chart(), x.chart(), "pair");
  std::vector<Expr> parts;
  for (const auto& [m, c] : a.terms()) {
    const Expr& xi = x[static_cast<std::size_t>(std::countr_zero(m))];
    if (!xi.is_zero()) parts.push_back(c * xi);
  }
  return sum_of(std::move(parts));
}

std::string to_string(const DifferentialForm& a) {
  if (a.is_zero()) return "0";
  std::string out;
  const auto& vars = a.chart()->vars();
  for (const auto& [m, c] : a.terms()) {
    if (!out.empty()) out += " + ";
    std::string basis;
    for (int i : mask_indices(m)) {
      if (!basis.empty()) basis += "^";
      basis += "d" + vars[static_cast<std::size_t>(i)];
    }
    std::string cs = to_string(c);
    if (basis.empty()) {
      out += cs;
    } else {
      out += "(" + cs + ")*" + basis;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

CompiledForm::CompiledForm(const DifferentialForm& a)
    : degree_(a.degree()), dim_(a.chart()->dim()), orientation_(a.chart()->orientation()) {
  for (const auto& [m, c] : a.terms()) {
    masks_.push_back(m);
    coeffs_.emplace_back(c, a.chart()->vars());
  }
}

Eigen::VectorXd CompiledForm::covector(std::span<const double> p) const {
  if (degree_ != 1) throw Error("covector: 1-form expected");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  for (std::size_t t = 0; t < masks_.size(); ++t) v(std::countr_zero(masks_[t])) = coeffs_[t](p);
  return v;
}

Eigen::MatrixXd CompiledForm::skew_matrix(std::span<const double> p) const {
  if (degree_ != 2) throw Error("skew_matrix: 2-form expected");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t t = 0; t < masks_.size(); ++t) {
    auto idx = mask_indices(masks_[t]);
    double c = coeffs_[t](p);
    w(idx[0], idx[1]) = c;
    w(idx[1], idx[0]) = -c;
  }
  return w;
}

double CompiledForm::top(std::span<const double> p) const {
  if (degree_ != dim_) throw Error("top: form is not of top degree");
  if (masks_.empty()) return 0.0;
  return orientation_ * coeffs_.front()(p);
}

double CompiledForm::max_abs(std::span<const double> p) const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c(p)));
  return m;
}

}  // namespace foldcalc
