#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foldcalc/models.hpp"
#include "foldcalc/structures.hpp"

namespace foldcalc {

struct GermOptions {
  Number eps = Number::rational(1, 2);
  std::optional<Number> delta;      // defaults to eps/4
  std::optional<Number> eps_prime;  // defaults to eps/2
  /// Points per axis on the surface chart; empty uses SampleGrid::defaults.
  std::vector<int> counts;
  /// Points along t for germ contact checks (the germ is t-invariant).
  int t_count = 3;
  CheckOptions check;
};

struct FoldedPresentation {
  DifferentialForm lambda;
  DifferentialForm omega;
  FoldSpec fold;
  /// lambda = (1 - tau^2) lambda_Gamma on the chart, tau = collar_var.
  bool collar_normal_form = false;
  std::string collar_var;
  StructureReport folded;
  StructureReport contact_type;

  const ChartPtr& chart() const { return lambda.chart(); }
  bool certified() const {
    return folded.verdict == Verdict::Pass && contact_type.verdict == Verdict::Pass;
  }
  /// sign(top(omega^n)) = sigma sign(h) off the fold.
  int sigma() const;
};

struct ContactGerm {
  ChartPtr chart;  // the surface
  Expr f;
  DifferentialForm beta;
  bool certified = false;
  StructureReport contact;
  /// Auxiliary numbers recorded by the stage that produced the germ.
  std::map<std::string, double> values;
};

/// f omega^n - n df ^ lambda ^ omega^{n-1}.
DifferentialForm omega_f(const Expr& f, const DifferentialForm& lambda, const DifferentialForm& omega);

SampleGrid surface_grid(const ChartPtr& chart, const GermOptions& opt);

/// Surface x R_t chart (variable "t" unless taken) and the form f dt + beta on it.
ChartPtr germ_chart(const ChartPtr& surface);
DifferentialForm germ_form(const ContactGerm& g);

/// Runs check_contact on the germ over surface grid x t_count points.
StructureReport certify_germ(ContactGerm& g, const GermOptions& opt = {});

/// Builds omega = d lambda and certifies the folded and positive contact-type
/// conditions.
FoldedPresentation make_presentation(const DifferentialForm& lambda, const FoldSpec& fold,
                                     const GermOptions& opt = {});

/// (Gamma variables, tau) chart with lambda = (1 - tau^2) lambda_Gamma and fold tau = 0.
FoldedPresentation fold_collar_model(const CollarPresentation& gamma, double tau_max = 0.9,
                                     const GermOptions& opt = {});
/// (Gamma variables, tau) chart with f = tau and beta = beta_Gamma.
ContactGerm dividing_collar_germ(const CollarPresentation& gamma, double tau_max = 0.9,
                                 const GermOptions& opt = {});

/// f = P(sigma h) with P the fold step profile, beta = lambda. Throws Error on
/// an uncertified presentation or when the germ fails the contact check.
ContactGerm fold_to_germ(const FoldedPresentation& fp, const GermOptions& opt = {});

/// (f/mu, beta/mu) with mu = M(f), M the normalizer profile. Records the
/// constant C = 1/eps' and checks the three normalization properties.
ContactGerm normalize_contact_pair(const ContactGerm& g, const GermOptions& opt = {});

/// lambda = e^{-f^2} beta, certified folded with fold {f = 0} and positive
/// contact type.
FoldedPresentation germ_to_fold(const ContactGerm& g, const GermOptions& opt = {});

/// (1/f) beta; it is the Liouville form lambda_+ on {f > 0} and lambda_- on {f < 0}.
DifferentialForm ideal_liouville_form(const ContactGerm& g);

struct DirectionReport {
  std::size_t plus_samples = 0;
  std::size_t minus_samples = 0;
  /// Normalized dot products of the characteristic direction with X_lambda.
  double plus_min = 1.0;
  double plus_max = -1.0;
  double minus_min = 1.0;
  double minus_max = -1.0;
  std::vector<double> plus_witness;
  std::vector<double> minus_witness;
};

/// Compares the characteristic foliation with the Liouville field of (1/f) beta
/// at surface grid points off the dividing set and off singular points.
DirectionReport compare_directions(const ContactGerm& g, const SampleGrid& grid);

struct RoundtripReport {
  Verdict verdict = Verdict::Inconclusive;
  double hausdorff = 0.0;
  double spacing = 0.0;
  std::size_t sign_samples = 0;
  std::size_t sign_mismatches = 0;
  std::vector<double> mismatch_witness;
  ContactGerm germ;
  ContactGerm normalized;
  FoldedPresentation out;
};

RoundtripReport roundtrip_fold(const FoldedPresentation& fp, const GermOptions& opt = {});

/// Symmetric Hausdorff distance between point sets; infinity when one is empty.
double hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

}  // namespace foldcalc
