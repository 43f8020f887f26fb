#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "foldcalc/expr.hpp"

namespace foldcalc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Named coordinate box. The orientation sign says whether dx_0 ^ ... ^ dx_{d-1}
/// is positively oriented (+1) or not (-1) for the manifold this chart covers.
class Chart {
 public:
  Chart(std::string id, std::vector<std::string> vars, std::vector<Interval> box, int orientation = 1);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& vars() const { return vars_; }
  const std::vector<Interval>& box() const { return box_; }
  int dim() const { return static_cast<int>(vars_.size()); }
  int orientation() const { return orientation_; }
  int index_of(std::string_view var) const;  // -1 when absent

 private:
  std::string id_;
  std::vector<std::string> vars_;
  std::vector<Interval> box_;
  int orientation_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::string id, std::vector<std::string> vars, std::vector<Interval> box,
                    int orientation = 1);

struct Point {
  std::string chart;
  std::vector<double> x;
};

/// Bit i of a mask stands for dx_i; a k-form stores one coefficient per
/// increasing index tuple, i.e. per mask with k bits set.
using IndexMask = std::uint32_t;

class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(ChartPtr chart, int degree);

  static DifferentialForm scalar(ChartPtr chart, Expr f);
  /// dx_i.
  static DifferentialForm basis(ChartPtr chart, int i);
  /// Parses "expr" coefficients keyed by index tuples (any order; the sign of
  /// the sorting permutation is applied, repeated indices give zero).
  static DifferentialForm from_terms(ChartPtr chart, int degree,
                                     const std::vector<std::pair<std::vector<int>, Expr>>& terms);

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  const std::map<IndexMask, Expr>& terms() const { return terms_; }
  Expr coeff(IndexMask mask) const;
  Expr coeff(const std::vector<int>& indices) const;
  /// True when no stored coefficient remains after simplification.
  bool is_zero() const { return terms_.empty(); }

  /// Adds c * dx_indices, normalizing order and sign; simplifies the slot.
  void add(const std::vector<int>& indices, const Expr& c);
  void add(IndexMask mask, const Expr& c);

  DifferentialForm operator-() const;
  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a);

 private:
  ChartPtr chart_;
  int degree_ = 0;
  std::map<IndexMask, Expr> terms_;
};

class VectorField {
 public:
  VectorField() = default;
  VectorField(ChartPtr chart, std::vector<Expr> components);
  static VectorField coordinate(ChartPtr chart, int i);

  const ChartPtr& chart() const { return chart_; }
  const std::vector<Expr>& components() const { return comps_; }
  const Expr& operator[](std::size_t i) const { return comps_[i]; }

 private:
  ChartPtr chart_;
  std::vector<Expr> comps_;
};

/// Smooth map from source to target given by one source expression per target
/// coordinate.
class ChartMap {
 public:
  ChartMap() = default;
  ChartMap(ChartPtr source, ChartPtr target, std::vector<Expr> components);

  const ChartPtr& source() const { return source_; }
  const ChartPtr& target() const { return target_; }
  const std::vector<Expr>& components() const { return comps_; }

 private:
  ChartPtr source_;
  ChartPtr target_;
  std::vector<Expr> comps_;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm nwedge(const DifferentialForm& a, int k);
DifferentialForm ext_d(const DifferentialForm& a);
DifferentialForm interior(const VectorField& x, const DifferentialForm& a);
DifferentialForm lie(const VectorField& x, const DifferentialForm& a);
DifferentialForm pullback(const ChartMap& m, const DifferentialForm& a);
/// Coefficient of a top-degree form against the chart's orientation.
Expr top_coeff(const DifferentialForm& a);
/// a(x) for a 1-form, as a scalar expression.
Expr pair(const DifferentialForm& a, const VectorField& x);
std::string to_string(const DifferentialForm& a);

/// Numerical view of a form with all coefficients compiled against the chart
/// variables.
class CompiledForm {
 public:
  CompiledForm() = default;
  explicit CompiledForm(const DifferentialForm& a);

  int degree() const { return degree_; }
  int dim() const { return dim_; }

  /// Value of a(v_1, ..., v_k) at p, where the v_j are the columns of V.
  template <typename Derived>
  double on_vectors(std::span<const double> p, const Eigen::MatrixBase<Derived>& v) const;

  /// 1-form as a covector.
  Eigen::VectorXd covector(std::span<const double> p) const;
  /// 2-form as the skew matrix W(i, j) = a(d_i, d_j).
  Eigen::MatrixXd skew_matrix(std::span<const double> p) const;
  /// Top coefficient including the chart orientation.
  double top(std::span<const double> p) const;
  /// Largest absolute coefficient at p.
  double max_abs(std::span<const double> p) const;

 private:
  int degree_ = 0;
  int dim_ = 0;
  int orientation_ = 1;
  std::vector<IndexMask> masks_;
  std::vector<CompiledExpr> coeffs_;
};

template <typename Derived>
double CompiledForm::on_vectors(std::span<const double> p, const Eigen::MatrixBase<Derived>& v) const {
  using Scalar = typename Derived::Scalar;
  if (v.cols() != degree_ || v.rows() != dim_) throw Error("on_vectors: shape mismatch");
  Scalar total = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sub(degree_, degree_);
  for (std::size_t t = 0; t < masks_.size(); ++t) {
    int r = 0;
    for (int i = 0; i < dim_; ++i) {
      if (masks_[t] & (IndexMask{1} << i)) sub.row(r++) = v.row(i);
    }
    Scalar det = degree_ == 0 ? Scalar(1) : sub.determinant();
    total += static_cast<Scalar>(coeffs_[t](p)) * det;
  }
  return static_cast<double>(total);
}

int popcount(IndexMask m);
std::vector<int> mask_indices(IndexMask m);

}  // namespace foldcalc
