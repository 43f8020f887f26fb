#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "foldcalc/forms.hpp"
#include "foldcalc/structures.hpp"

namespace foldcalc {

// ---------------------------------------------------------------------------
// Profiles

enum class ProfileKind { FoldStep, Normalizer, IdealU, BridgeF };

const char* profile_kind_name(ProfileKind k);
ProfileKind profile_kind_from_name(std::string_view s);

enum class Bridge { Plus, Minus, Asymmetric };

struct ProfileParams {
  /// Collar half-width (lemma41-f, lemma42-mu) or collar length (ideal-u).
  Number eps = Number::rational(1, 2);
  /// Inner collar radius of lemma42-mu; defaults to eps/4.
  std::optional<Number> delta;
  /// Plateau value of lemma42-mu; defaults to eps/2.
  std::optional<Number> eps_prime;
  Bridge bridge = Bridge::Plus;
  /// Bridge profiles live on |z| <= half_width.
  Number half_width = Number::rational(9, 10);
  /// Spline name; empty picks a default per kind.
  std::string name;
};

/// value of the order-th derivative at `at` must equal `value` exactly.
struct EndpointCondition {
  Number at;
  int order = 0;
  Number value;
};

/// lo < d^order p < hi (strict) or lo <= ... <= hi on the open interval `where`.
struct RangeCondition {
  Interval where;
  int order = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool strict = true;
  std::string label;
  /// Tests d^order p - abs_weight * |x| instead.
  double abs_weight = 0.0;
};

struct ProfileFn {
  ProfileKind kind = ProfileKind::FoldStep;
  SplinePtr spline;
  Interval domain;
  std::vector<EndpointCondition> endpoints;
  std::vector<RangeCondition> ranges;
  /// +1 even, -1 odd, 0 no symmetry claimed.
  int parity = 0;
  /// Minimum smoothness across breakpoints that verify() demands.
  int smoothness = 1;

  Expr operator()(const Expr& arg) const { return foldcalc::apply(spline, arg); }
  double value(double x, int order = 0) const;
};

struct ProfileCheck {
  bool ok = true;
  /// Largest k such that all pieces agree to order k at every breakpoint.
  int smoothness = 0;
  std::vector<std::string> failures;
};

/// Re-verifies every declared condition: endpoints in exact arithmetic, ranges
/// and parity on `samples` interior points, smoothness at the breakpoints.
ProfileCheck verify_profile(const ProfileFn& p, int samples = 10000);

/// Builds a verified profile; throws Error on infeasible parameters.
ProfileFn make_profile(ProfileKind kind, const ProfileParams& params = {});

// ---------------------------------------------------------------------------
// Models

enum class CollarKind { Fold, Liouville, DividingSet };

struct CollarPresentation {
  ChartPtr gamma;
  DifferentialForm alpha;  // contact form on gamma
  std::string collar_var = "s";
  Interval collar{-0.5, 0.0};
  CollarKind kind = CollarKind::Liouville;
};

/// The default contact chart (q1, q2, q3) in [-1, 1]^3 with alpha = dq3 - q2 dq1.
CollarPresentation standard_collar(CollarKind kind = CollarKind::Liouville, Interval collar = {-0.5, 0.0},
                                   std::string collar_var = "s");

/// Product chart (collar_var first, then the gamma variables) and the gamma
/// contact form lifted to it.
ChartPtr collar_chart(const CollarPresentation& c, std::string id);
DifferentialForm lift(const DifferentialForm& a, const ChartPtr& to);

/// Certification the generator advertises for one of its forms.
struct Expectation {
  std::string property;  // contact, symplectic, folded, positive-contact-type, ...
  std::string form;      // name of the form in the model
  std::string chart;
  Verdict verdict = Verdict::Pass;
};

struct DarbouxModel {
  ChartPtr chart;
  DifferentialForm omega;
  DifferentialForm lambda_tilde;
  DifferentialForm lambda;
  FoldSpec fold;
  std::vector<Expectation> expected;
};

DarbouxModel darboux_folded(int n);

struct SphereChart {
  ChartPtr chart;
  /// Embedding into R^{2n+1} with coordinates (x1, y1, ..., xn, yn, z).
  ChartMap embedding;
  DifferentialForm omega;
  DifferentialForm lambda;
  /// The height z as a function on the chart.
  Expr height;
};

struct FoldedSphere {
  int n = 1;
  ChartPtr ambient;
  /// charts[0], charts[1]: graphs over the (x, y) ball for z > 0 and z < 0;
  /// charts[2]: the band chart around the equator.
  std::vector<SphereChart> charts;
  FoldSpec fold;  // on the band chart
  /// Stereographic chart of the equator and its inclusion into the band chart.
  ChartPtr equator;
  ChartMap equator_inclusion;
  std::vector<Expectation> expected;

  const SphereChart& band() const { return charts[2]; }
  /// Transition map between two charts, valid on their overlap.
  ChartMap transition(std::size_t from, std::size_t to) const;
};

FoldedSphere folded_sphere(int n);

struct ConvexSphere {
  int n = 1;
  ChartPtr chart;  // R^{2n+1}
  DifferentialForm alpha;
  VectorField x;
  /// Sphere charts with the germ data f = alpha(X) and beta = i^* alpha.
  FoldedSphere atlas;
  std::vector<Expr> f;
  std::vector<DifferentialForm> beta;
  std::vector<Expectation> expected;
};

ConvexSphere convex_sphere(int n);

struct IdealCompletion {
  ChartPtr chart;  // (s, gamma variables), s in the open collar
  ProfileFn u;
  DifferentialForm lambda;
  DifferentialForm omega;
  /// e^{-s} u^2/(u - u') d_s, as displayed for the ideal completion.
  VectorField displayed_field;
  /// u/(u - u') d_s, the solution of i_X d(lambda) = lambda.
  VectorField field;
  /// n e^{ns}(u - u')/u^{n+1} times the coefficient of alpha_0 ^ (d alpha_0)^{n-1}.
  Expr top_expected;
  std::vector<Expectation> expected;
};

IdealCompletion ideal_completion_collar(const CollarPresentation& gamma, const ProfileFn& u);

struct BridgeSide {
  ChartPtr chart;  // (gamma variables, z)
  ProfileFn profile;
  DifferentialForm lambda;
  DifferentialForm omega;
  FoldSpec fold;
};

struct DoubleCobordism {
  BridgeSide plus;
  BridgeSide minus;
  std::vector<Expectation> expected;
};

DoubleCobordism double_cobordism(const CollarPresentation& plus_end, const CollarPresentation& minus_end,
                                 const ProfileFn& f_plus, const ProfileFn& f_minus);

struct AsymmetricDouble {
  ChartPtr collar_minus;  // (s, gamma variables), s in [-eps, 0]
  ChartPtr collar_plus;   // (s, gamma variables), s in [-C, C]
  DifferentialForm lambda_minus;
  DifferentialForm lambda_plus;
  /// (s, p) -> (s - ln mu(p), psi(p)).
  ChartMap psi_bar;
  BridgeSide bridge;
  /// Pullback of lambda_0 to the fold {z = 0}, on the gamma chart.
  DifferentialForm fold_form;
  double shift_bound = 0.0;  // the constant C
  double gluing_defect = 0.0;
  std::vector<Expectation> expected;
};

/// psi defaults to the identity with alpha_plus = mu * alpha_minus.
AsymmetricDouble asymmetric_double(const CollarPresentation& minus_end, const Expr& mu, const ProfileFn& f,
                                   const std::optional<std::pair<ChartMap, DifferentialForm>>& psi_alpha_plus = {});

/// Largest coefficient of a - b over grid samples, scaled by 1 + |a|.
double sampled_difference(const DifferentialForm& a, const DifferentialForm& b, const SampleGrid& grid);

}  // namespace foldcalc
