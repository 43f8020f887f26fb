#include "foldcalc/germs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace foldcalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DifferentialForm power(const DifferentialForm& a, int k) {
  if (k == 0) return DifferentialForm::scalar(a.chart(), Expr(1));
  return nwedge(a, k);
}

int half(const Chart& c) {
  if (c.dim() % 2) throw Error("chart '" + c.id() + "' must be even-dimensional");
  return c.dim() / 2;
}

std::string point_text(const std::vector<double>& p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

ProfileParams mu_params(const GermOptions& opt) {
  ProfileParams p;
  p.eps = opt.eps;
  p.delta = opt.delta;
  p.eps_prime = opt.eps_prime;
  return p;
}

double max_spacing(const SampleGrid& g) {
  double s = 0.0;
  for (std::size_t a = 0; a < g.counts.size(); ++a) s = std::max(s, g.spacing(static_cast<int>(a)));
  return s;
}

ChartPtr collar_surface(const CollarPresentation& gamma, double tau_max) {
  auto vars = gamma.gamma->vars();
  auto box = gamma.gamma->box();
  vars.push_back("tau");
  box.push_back({-tau_max, tau_max});
  return make_chart("collar", vars, box, gamma.gamma->orientation());
}

}  // namespace

int FoldedPresentation::sigma() const {
  auto it = folded.values.find("sigma");
  return it == folded.values.end() ? 1 : (it->second < 0 ? -1 : 1);
}

DifferentialForm omega_f(const Expr& f, const DifferentialForm& lambda, const DifferentialForm& omega) {
  if (lambda.degree() != 1 || omega.degree() != 2) throw Error("omega_f: need a 1-form and a 2-form");
  int n = half(*omega.chart());
  DifferentialForm df = ext_d(DifferentialForm::scalar(omega.chart(), f));
  return f * power(omega, n) - Expr(n) * wedge(df, wedge(lambda, power(omega, n - 1)));
}

SampleGrid surface_grid(const ChartPtr& chart, const GermOptions& opt) {
  if (opt.counts.empty()) return SampleGrid::defaults(chart);
  SampleGrid g = SampleGrid::uniform(chart, 2);
  if (opt.counts.size() == 1) {
    g.counts.assign(chart->dim(), opt.counts[0]);
  } else {
    if (static_cast<int>(opt.counts.size()) != chart->dim()) throw Error("grid counts do not match the chart");
    g.counts = opt.counts;
  }
  return g;
}

ChartPtr germ_chart(const ChartPtr& surface) {
  std::string t = "t";
  while (surface->index_of(t) >= 0) t += "_";
  auto vars = surface->vars();
  auto box = surface->box();
  vars.push_back(t);
  box.push_back({-1.0, 1.0});
  return make_chart(surface->id() + "xR", vars, box, surface->orientation());
}

DifferentialForm germ_form(const ContactGerm& g) {
  auto c = germ_chart(g.chart);
  return g.f * DifferentialForm::basis(c, c->dim() - 1) + lift(g.beta, c);
}

StructureReport certify_germ(ContactGerm& g, const GermOptions& opt) {
  DifferentialForm a = germ_form(g);
  SampleGrid sg = surface_grid(g.chart, opt);
  SampleGrid grid = SampleGrid::uniform(a.chart(), 2);
  grid.counts = sg.counts;
  grid.counts.push_back(opt.t_count);
  g.contact = check_contact(a, grid, opt.check);
  g.certified = g.contact.verdict == Verdict::Pass;
  return g.contact;
}

FoldedPresentation make_presentation(const DifferentialForm& lambda, const FoldSpec& fold, const GermOptions& opt) {
  FoldedPresentation fp;
  fp.lambda = lambda;
  fp.omega = ext_d(lambda);
  fp.fold = fold;
  auto grid = surface_grid(lambda.chart(), opt);
  fp.folded = check_folded(fp.omega, fold, grid, opt.check);
  fp.contact_type = check_positive_contact_type(lambda, fold, grid, opt.check);
  return fp;
}

FoldedPresentation fold_collar_model(const CollarPresentation& gamma, double tau_max, const GermOptions& opt) {
  auto c = collar_surface(gamma, tau_max);
  Expr tau = var("tau");
  auto fp = make_presentation((Expr(1) - pow(tau, 2)) * lift(gamma.alpha, c), FoldSpec{tau}, opt);
  fp.collar_normal_form = true;
  fp.collar_var = "tau";
  return fp;
}

ContactGerm dividing_collar_germ(const CollarPresentation& gamma, double tau_max, const GermOptions& opt) {
  auto c = collar_surface(gamma, tau_max);
  ContactGerm g{c, var("tau"), lift(gamma.alpha, c), false, {}, {}};
  certify_germ(g, opt);
  return g;
}

// ---------------------------------------------------------------------------
// Folded -> germ

ContactGerm fold_to_germ(const FoldedPresentation& fp, const GermOptions& opt) {
  if (!fp.certified()) {
    throw Error(std::string("fold_to_germ: presentation not certified (folded: ") + verdict_name(fp.folded.verdict) +
                ", positive contact type: " + verdict_name(fp.contact_type.verdict) + ")");
  }
  ProfileParams pp;
  pp.eps = opt.eps;
  auto prof = make_profile(ProfileKind::FoldStep, pp);
  Expr h = fp.collar_normal_form ? var(fp.collar_var) : fp.fold.h;
  ContactGerm g;
  g.chart = fp.chart();
  g.f = prof(simplify(Expr(fp.sigma()) * h));
  g.beta = fp.lambda;
  certify_germ(g, opt);
  if (!g.certified) {
    throw Error("fold_to_germ: Omega_f margin " + std::to_string(g.contact.margin) + " at " +
                point_text(g.contact.witness));
  }
  auto grid = surface_grid(g.chart, opt);
  g.values["dividing_set_distance"] = hausdorff(fold_samples(g.f, grid), fold_samples(h, grid));
  g.values["eps"] = opt.eps.to_double();
  return g;
}

// ---------------------------------------------------------------------------
// Germ normalization

ContactGerm normalize_contact_pair(const ContactGerm& g, const GermOptions& opt) {
  auto mu_prof = make_profile(ProfileKind::Normalizer, mu_params(opt));
  double eps = opt.eps.to_double();
  double delta = opt.delta.value_or(opt.eps / Number(4)).to_double();
  double ep = opt.eps_prime.value_or(opt.eps / Number(2)).to_double();
  Expr mu = mu_prof(g.f);
  ContactGerm out;
  out.chart = g.chart;
  out.f = simplify(g.f / mu);
  out.beta = simplify(Expr(1) / mu) * g.beta;
  out.values["C"] = 1.0 / ep;

  const auto& vars = g.chart->vars();
  int n = half(*g.chart);
  CompiledExpr cf(g.f, vars);
  CompiledExpr cft(out.f, vars);
  CompiledGradient gft(out.f, vars);
  CompiledForm cb(g.beta);
  CompiledForm cbt(out.beta);
  CompiledForm top(power(ext_d(out.beta), n));
  auto grid = surface_grid(g.chart, opt);

  std::size_t off = 0;
  std::size_t inner = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto p = grid.point(i);
    double fv;
    try {
      fv = cf(p);
    } catch (const EvalError&) {
      continue;
    }
    if (std::abs(fv) >= eps) {
      // (1): f~ is locally constant and +-(d beta~)^n > 0.
      ++off;
      double gn = gft(p).cwiseAbs().maxCoeff();
      double t = top.top(p);
      if (gn > 1e-9) throw Error("normalize: d f~ != 0 off the collar at " + point_text(p));
      if (!(t * (fv > 0 ? 1 : -1) > 0)) throw Error("normalize: (d beta~)^n has the wrong sign at " + point_text(p));
    } else if (std::abs(fv) < delta) {
      // (2): f~ = C f and beta~ = C beta on the inner collar.
      ++inner;
      double want = fv / ep;
      if (std::abs(cft(p) - want) > 1e-12 * (1.0 + std::abs(want)))
        throw Error("normalize: f~ != C f on the inner collar at " + point_text(p));
      if ((cbt.covector(p) - cb.covector(p) / ep).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cb.max_abs(p) / ep))
        throw Error("normalize: beta~ != C beta on the inner collar at " + point_text(p));
    }
  }
  // (3): f~ is nondecreasing in f, checked on 10^4 collar samples of f.
  auto dmu = mu_prof.spline->derivative();
  double worst = kInf;
  for (int j = 0; j < 10000; ++j) {
    double x = -eps + (j + 0.5) / 10000.0 * 2.0 * eps;
    double m = (*mu_prof.spline)(x);
    double d = (m - x * (*dmu)(x)) / (m * m);
    worst = std::min(worst, d);
  }
  if (worst < 0.0) throw Error("normalize: d f~/d f < 0 on the collar");
  out.values["offcollar_samples"] = static_cast<double>(off);
  out.values["inner_samples"] = static_cast<double>(inner);
  out.values["min_dfdf"] = worst;
  certify_germ(out, opt);
  if (!out.certified) throw Error("normalize: rescaled germ fails the contact check");
  return out;
}

// ---------------------------------------------------------------------------
// Germ -> folded

FoldedPresentation germ_to_fold(const ContactGerm& g, const GermOptions& opt) {
  auto grid = surface_grid(g.chart, opt);
  auto locus = fold_samples(g.f, grid);
  if (locus.empty()) throw Error("germ_to_fold: empty fold, f does not change sign on the chart");
  DifferentialForm lambda = exp(-pow(g.f, 2)) * g.beta;
  FoldedPresentation fp = make_presentation(lambda, FoldSpec{g.f}, opt);
  if (fp.folded.verdict != Verdict::Pass) {
    throw Error("germ_to_fold: transversality failure (margin " + std::to_string(fp.folded.margin) + " at " +
                point_text(fp.folded.witness) + ")");
  }
  if (fp.contact_type.verdict != Verdict::Pass)
    throw Error("germ_to_fold: restriction to the fold is not a positive contact form");

  CompiledForm cl(lambda);
  CompiledForm cb(g.beta);
  double restrict_defect = 0.0;
  for (const auto& p : fp.folded.locus) {
    restrict_defect = std::max(restrict_defect, (cl.covector(p) - cb.covector(p)).cwiseAbs().maxCoeff());
  }
  fp.folded.values["fold_restriction_defect"] = restrict_defect;

  int n = half(*g.chart);
  CompiledExpr cf(g.f, g.chart->vars());
  CompiledForm top_out(power(fp.omega, n));
  CompiledForm top_b(power(ext_d(g.beta), n));
  double off_defect = 0.0;
  std::size_t off = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto p = grid.point(i);
    try {
      if (std::abs(cf(p)) != 1.0) continue;
      double want = std::exp(-n) * top_b.top(p);
      off_defect = std::max(off_defect, std::abs(top_out.top(p) - want) / (1.0 + std::abs(want)));
      ++off;
    } catch (const EvalError&) {
    }
  }
  fp.folded.values["offcollar_identity_defect"] = off_defect;
  fp.folded.values["offcollar_samples"] = static_cast<double>(off);
  return fp;
}

DifferentialForm ideal_liouville_form(const ContactGerm& g) { return simplify(Expr(1) / g.f) * g.beta; }

DirectionReport compare_directions(const ContactGerm& g, const SampleGrid& grid) {
  CharacteristicFoliation fol(g.f, g.beta);
  DifferentialForm lambda = ideal_liouville_form(g);
  CompiledExpr cf(g.f, g.chart->vars());
  DirectionReport r;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto p = grid.point(i);
    if (grid.is_excluded(p)) continue;
    try {
      double fv = cf(p);
      if (std::abs(fv) < 1e-9) continue;
      auto d = fol.at(p);
      if (d.singular) continue;
      Eigen::VectorXd x = liouville_at(lambda, p);
      double dot = d.direction.dot(x) / (d.direction.norm() * x.norm());
      if (fv > 0) {
        ++r.plus_samples;
        if (dot < r.plus_min) r.plus_witness = p;
        r.plus_min = std::min(r.plus_min, dot);
        r.plus_max = std::max(r.plus_max, dot);
      } else {
        ++r.minus_samples;
        if (dot > r.minus_max) r.minus_witness = p;
        r.minus_min = std::min(r.minus_min, dot);
        r.minus_max = std::max(r.minus_max, dot);
      }
    } catch (const Error&) {
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Roundtrip

double hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  if (a.empty() || b.empty()) return kInf;
  auto one_side = [](const auto& x, const auto& y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = kInf;
      for (const auto& q : y) {
        double d = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) d += (p[k] - q[k]) * (p[k] - q[k]);
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(one_side(a, b), one_side(b, a));
}

RoundtripReport roundtrip_fold(const FoldedPresentation& fp, const GermOptions& opt) {
  RoundtripReport r;
  r.germ = fold_to_germ(fp, opt);
  r.normalized = normalize_contact_pair(r.germ, opt);
  r.out = germ_to_fold(r.normalized, opt);

  auto grid = surface_grid(fp.chart(), opt);
  r.spacing = max_spacing(grid);
  r.hausdorff = hausdorff(fold_samples(fp.fold.h, grid), fold_samples(r.out.fold.h, grid));

  int n = half(*fp.chart());
  CompiledForm tin(power(fp.omega, n));
  CompiledForm tout(power(r.out.omega, n));
  CompiledExpr h(fp.fold.h, fp.chart()->vars());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto p = grid.point(i);
    try {
      if (std::abs(h(p)) <= 1e-9) continue;
      double a = tin.top(p);
      double b = tout.top(p);
      ++r.sign_samples;
      if ((a > 0) != (b > 0) || a == 0.0 || b == 0.0) {
        if (r.sign_mismatches++ == 0) r.mismatch_witness = p;
      }
    } catch (const EvalError&) {
    }
  }
  r.verdict = (r.hausdorff < 2.0 * r.spacing && r.sign_mismatches == 0) ? Verdict::Pass : Verdict::Fail;
  return r;
}

}  // namespace foldcalc
