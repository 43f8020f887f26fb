#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foldcalc/forms.hpp"

namespace foldcalc {

enum class Verdict { Pass, Fail, Inconclusive };

const char* verdict_name(Verdict v);
Verdict verdict_from_name(std::string_view s);

struct StructureReport {
  Verdict verdict = Verdict::Inconclusive;
  std::string property;
  std::string chart;
  double margin = 0.0;
  std::vector<double> witness;
  std::size_t samples = 0;
  std::vector<std::string> notes;
  /// Named auxiliary quantities (fold orientation sign, normal derivative range, ...).
  std::map<std::string, double> values;
  /// Sampled fold locus, when the check locates one.
  std::vector<std::vector<double>> locus;

  friend bool operator==(const StructureReport&, const StructureReport&) = default;
};

/// Tensor grid over a chart box with optional excluded boxes.
struct SampleGrid {
  ChartPtr chart;
  std::vector<int> counts;
  std::vector<std::vector<Interval>> excluded;

  /// 17 points per axis up to dimension 4, 9 per axis for 5 and 6, 5 beyond.
  static SampleGrid defaults(ChartPtr chart);
  static SampleGrid uniform(ChartPtr chart, int per_axis);

  std::size_t size() const;
  std::vector<double> point(std::size_t flat) const;
  double spacing(int axis) const;
  bool is_excluded(std::span<const double> p) const;
};

struct FoldSpec {
  Expr h;
  double delta = 1e-6;
};

struct CheckOptions {
  double tol = 1e-9;
};

/// Worker count for grid sweeps: FOLDCALC_THREADS when set, else the hardware
/// concurrency.
unsigned thread_count();

/// Calls fn(i) for i in [0, n) across worker threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

StructureReport check_contact(const DifferentialForm& alpha, const SampleGrid& grid, CheckOptions opt = {});
StructureReport check_symplectic(const DifferentialForm& omega, const SampleGrid& grid, CheckOptions opt = {});
StructureReport check_folded(const DifferentialForm& omega, const FoldSpec& fold, const SampleGrid& grid,
                             CheckOptions opt = {});
StructureReport check_positive_contact_type(const DifferentialForm& lambda, const FoldSpec& fold,
                                            const SampleGrid& grid, CheckOptions opt = {});
/// dphi(X) > 0 on the grid away from balls of the given radius around the
/// declared critical points and away from the grid's excluded boxes.
StructureReport check_gradient_like(const VectorField& x, const Expr& phi,
                                    const std::vector<std::vector<double>>& critical_points,
                                    const SampleGrid& grid, double radius = 0.1, CheckOptions opt = {});
/// Symplectic check of d(lambda) plus the residual of i_X d(lambda) = lambda
/// for the numerically solved X (reported as residual_max, fails above 1e-9).
StructureReport check_liouville(const DifferentialForm& lambda, const SampleGrid& grid, CheckOptions opt = {});

/// Points where h changes sign along grid lines, refined by 60 bisection steps.
std::vector<std::vector<double>> fold_samples(const Expr& h, const SampleGrid& grid);

/// X with i_X d(lambda) = lambda, solved symbolically by Cramer's rule.
/// Empty when the chart is larger than 6 or det d(lambda) simplifies to 0.
std::optional<VectorField> liouville_field(const DifferentialForm& lambda);
/// Numeric solve at one point; throws EvalError where d(lambda) is singular.
Eigen::VectorXd liouville_at(const DifferentialForm& lambda, std::span<const double> p);

/// R with d(alpha)(R, .) = 0 and alpha(R) = 1; throws EvalError off the contact locus.
Eigen::VectorXd reeb_field(const DifferentialForm& alpha, std::span<const double> p);

/// Kernel direction of the restriction of omega to T(fold) at a fold point,
/// oriented so that (kernel, symplectic quotient) orients the fold as the
/// boundary of the closure of R+.
Eigen::VectorXd null_foliation(const DifferentialForm& omega, const FoldSpec& fold, std::span<const double> p);

/// Director Y of the characteristic foliation of Sigma = {t = 0} in
/// (Sigma x R, f dt + beta), defined by i_Y Omega_f = beta ^ (d beta)^{n-1}.
VectorField characteristic_director(const Expr& f, const DifferentialForm& beta);

struct CharacteristicDirection {
  bool singular = false;
  int sign = 0;  // singular points: sign of f
  Eigen::VectorXd direction;
};

/// Unit direction spanning ker(d beta) on ker(beta), oriented by the director.
class CharacteristicFoliation {
 public:
  CharacteristicFoliation(const Expr& f, const DifferentialForm& beta);
  /// Throws Error on the dividing set.
  CharacteristicDirection at(std::span<const double> p) const;
  const VectorField& director() const { return director_; }

 private:
  int dim_;
  CompiledExpr f_;
  CompiledForm beta_;
  CompiledForm dbeta_;
  VectorField director_;
  std::vector<CompiledExpr> y_;
};

CharacteristicDirection characteristic_foliation(const Expr& f, const DifferentialForm& beta,
                                                 std::span<const double> p);

/// Pfaffian of an even skew matrix.
template <typename Scalar>
Scalar pfaffian(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  const auto n = a.rows();
  if (n == 0) return Scalar(1);
  if (n % 2) return Scalar(0);
  Scalar total(0);
  for (Eigen::Index j = 1; j < n; ++j) {
    if (a(0, j) == Scalar(0)) continue;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> minor(n - 2, n - 2);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 1; k < n; ++k) {
      if (k != j) keep.push_back(k);
    }
    for (Eigen::Index r = 0; r < n - 2; ++r) {
      for (Eigen::Index c = 0; c < n - 2; ++c) minor(r, c) = a(keep[r], keep[c]);
    }
    Scalar term = a(0, j) * pfaffian<Scalar>(minor);
    total += (j % 2) ? term : Scalar(-term);
  }
  return total;
}

/// Orthonormal basis of the orthogonal complement of g (columns), ordered so
/// that det[g/|g|, basis] has the requested sign.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& g, int sign = 1);

/// Numeric gradient of a compiled expression via symbolic partials.
class CompiledGradient {
 public:
  CompiledGradient(const Expr& e, const std::vector<std::string>& vars);
  Eigen::VectorXd operator()(std::span<const double> p) const;

 private:
  std::vector<CompiledExpr> parts_;
};

}  // namespace foldcalc
