// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.
// Expected values come from closed forms derived by hand in the comments.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "foldcalc/germs.hpp"
#include "foldcalc/lefschetz.hpp"
#include "support.hpp"

using namespace foldcalc;
using namespace foldcalc::testing;

namespace {

constexpr double kKernelTol = 1e-9;      // 1
constexpr double kDarbouxTopTol = 1e-12;  // 2
constexpr double kNormalTol = 1e-9;       // 2
constexpr double kFieldTol = 1e-9;        // 3, 8
constexpr double kIdentityTol = 1e-9;     // 5, 6
constexpr double kGluingTol = 1e-10;      // 9
constexpr double kDirectionTol = 1e-6;    // 10
constexpr double kEvalZero = 1e-12;       // 4, 6, 9: "eval-zero"/"eval-exact"
constexpr int kPoints = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::vector<double> sample(std::mt19937& rng, const Chart& c) { return random_point(rng, c); }

// 1 -------------------------------------------------------------------------
Outcome kernel() {
  std::mt19937 rng(1);
  double worst = 0.0;
  std::size_t forms = 0;
  for (int dim = 2; dim <= 5; ++dim) {
    auto c = cube_chart(dim);
    for (int p = 0; p <= dim; ++p) {
      for (int trial = 0; trial < 100; ++trial) {
        ++forms;
        auto a = random_form(rng, c, p, 1);
        if (p + 2 <= dim) worst = std::max(worst, max_rel_diff(ext_d(ext_d(a)), DifferentialForm(c, p + 2), rng, 4));
        int q = static_cast<int>(rng() % static_cast<unsigned>(dim - p + 1));
        auto b = random_form(rng, c, q, 1);
        auto ba = wedge(b, a);
        worst = std::max(worst, max_rel_diff(wedge(a, b), ((p * q) % 2) ? -ba : ba, rng, 4));
        auto x = random_field(rng, c, 1);
        auto cartan = DifferentialForm(c, p);
        if (p >= 1) cartan = cartan + ext_d(interior(x, a));
        if (p < dim) cartan = cartan + interior(x, ext_d(a));
        worst = std::max(worst, max_rel_diff(lie(x, a), cartan, rng, 4));
        std::vector<Expr> comps;
        for (int i = 0; i < dim; ++i) comps.push_back(random_coeff(rng, c->vars(), 1));
        ChartMap m(c, c, comps);
        if (p < dim) worst = std::max(worst, max_rel_diff(pullback(m, ext_d(a)), ext_d(pullback(m, a)), rng, 4));
      }
    }
  }
  return {worst < kKernelTol, std::to_string(forms) + " forms, worst relative defect " + fmt(worst)};
}

// 2 -------------------------------------------------------------------------
Outcome darboux() {
  auto m = darboux_folded(2);
  CompiledForm top(nwedge(m.omega, 2));
  std::mt19937 rng(2);
  double worst = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *m.chart);
    worst = std::max(worst, std::abs(top.top(p) - 2 * p[1]));  // omega^2 = 2 y1 vol
  }
  auto r = check_folded(m.omega, m.fold, SampleGrid::uniform(m.chart, 9));
  double lo = r.values.at("normal_derivative_min");
  double hi = r.values.at("normal_derivative_max");
  bool ok = worst <= kDarbouxTopTol && r.verdict == Verdict::Pass && std::abs(lo - 2) <= kNormalTol &&
            std::abs(hi - 2) <= kNormalTol;
  return {ok, "top defect " + fmt(worst) + ", folded " + verdict_name(r.verdict) + ", normal derivative [" +
                  fmt(lo) + ", " + fmt(hi) + "]"};
}

// 3 -------------------------------------------------------------------------
Outcome liouville_example() {
  auto m = darboux_folded(2);
  std::mt19937 rng(3);
  double worst = 0.0;
  int used = 0;
  while (used < kPoints) {
    auto p = sample(rng, *m.chart);
    if (std::abs(p[1]) < 1e-3) continue;  // off the fold
    ++used;
    double y1 = p[1], y2 = p[3];
    Eigen::VectorXd want(4), want_t(4);
    // i_X omega = lambda with omega = y1 dx1 dy1 + dx2 dy2:
    // X = ((y1^2 - 2)/(2 y1)) d_y1 + y2 d_y2, and for lambda~ X = (y1/2) d_y1 + y2 d_y2.
    want << 0, (y1 * y1 - 2) / (2 * y1), 0, y2;
    want_t << 0, y1 / 2, 0, y2;
    Eigen::VectorXd got = liouville_at(m.lambda, p);
    Eigen::VectorXd got_t = liouville_at(m.lambda_tilde, p);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff() / (1 + want.cwiseAbs().maxCoeff()));
    worst = std::max(worst, (got_t - want_t).cwiseAbs().maxCoeff() / (1 + want_t.cwiseAbs().maxCoeff()));
  }
  auto grid = SampleGrid::uniform(m.chart, 9);
  auto a = check_positive_contact_type(m.lambda, m.fold, grid);
  auto b = check_positive_contact_type(m.lambda_tilde, m.fold, grid);
  bool ok = worst <= kFieldTol && a.verdict == Verdict::Pass && b.verdict == Verdict::Fail;
  return {ok, "field defect " + fmt(worst) + ", pct(lambda) " + verdict_name(a.verdict) + ", pct(lambda~) " +
                  verdict_name(b.verdict)};
}

// 4 -------------------------------------------------------------------------
Outcome convex_sphere_check() {
  auto cs = convex_sphere(1);
  std::mt19937 rng(4);
  double lie_defect = max_rel_diff(lie(cs.x, cs.alpha), cs.alpha, rng, kPoints);
  // Points on S^2 from normalized Gaussians; alpha(X) - z there.
  CompiledExpr ax(pair(cs.alpha, cs.x), cs.chart->vars());
  std::normal_distribution<double> g;
  double ax_defect = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    std::vector<double> p{g(rng), g(rng), g(rng)};
    double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (auto& v : p) v /= n;
    ax_defect = std::max(ax_defect, std::abs(ax(p) - p[2]));
  }
  // The same on each sphere chart: f = alpha(X) restricted against the height.
  for (std::size_t i = 0; i < cs.atlas.charts.size(); ++i) {
    const auto& sc = cs.atlas.charts[i];
    CompiledExpr f(cs.f[i], sc.chart->vars());
    CompiledExpr h(sc.height, sc.chart->vars());
    for (int k = 0; k < kPoints / 3; ++k) {
      auto p = sample(rng, *sc.chart);
      ax_defect = std::max(ax_defect, std::abs(f(p) - h(p)));
    }
  }
  const auto& band = cs.atlas.band();
  auto grid = SampleGrid::uniform(band.chart, 17);
  double zmax = 0.0;
  auto gamma = fold_samples(cs.f[2], grid);
  for (const auto& p : gamma) zmax = std::max(zmax, std::abs(p.back()));
  double grid_tol = grid.spacing(band.chart->dim() - 1);
  auto gl = check_gradient_like(characteristic_director(cs.f[2], cs.beta[2]), -band.height, {}, grid);
  bool ok = lie_defect <= kEvalZero && ax_defect <= kEvalZero && !gamma.empty() && zmax < grid_tol &&
            gl.verdict == Verdict::Pass;
  return {ok, "L_X a - a " + fmt(lie_defect) + ", a(X) - z " + fmt(ax_defect) + ", max |z| on dividing set " +
                  fmt(zmax) + ", gradient-like(-z) " + verdict_name(gl.verdict)};
}

// 5 -------------------------------------------------------------------------
Outcome fold_to_germ_identity() {
  GermOptions opt;
  opt.counts = {7};
  auto gamma = standard_collar(CollarKind::Fold);
  auto fp = fold_collar_model(gamma, 0.9, opt);
  auto prof = make_profile(ProfileKind::FoldStep);
  Expr tau = var("tau");
  Expr f = prof(tau);
  auto c = fp.chart();
  CompiledForm om(omega_f(f, fp.lambda, fp.omega));
  // lambda_Gamma ^ omega_Gamma ^ dtau on (q1, q2, q3, tau): alpha ^ d alpha = dq1 dq2 dq3.
  CompiledForm vol(wedge(wedge(lift(gamma.alpha, c), lift(ext_d(gamma.alpha), c)), DifferentialForm::basis(c, 3)));
  auto dprof = prof.spline->derivative();
  std::mt19937 rng(5);
  double worst = 0.0;
  const int n = 2;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *c);
    double t = p[3];
    double fv = (*prof.spline)(t);
    double want = n * std::pow(1 - t * t, n - 1) * (2 * t * fv + (*dprof)(t) * (1 - t * t)) * vol.top(p);
    worst = std::max(worst, std::abs(om.top(p) - want) / (1 + std::abs(want)));
  }
  auto germ = fold_to_germ(fp, opt);
  bool ok = worst <= kIdentityTol && germ.certified && germ.contact.margin > 0;
  return {ok, "Omega_f defect " + fmt(worst) + ", germ contact margin " + fmt(germ.contact.margin)};
}

// 6 -------------------------------------------------------------------------
Outcome germ_to_fold_identity() {
  GermOptions opt;
  opt.counts = {7};
  auto gamma = standard_collar(CollarKind::DividingSet);
  auto germ = dividing_collar_germ(gamma, 0.9, opt);
  auto c = germ.chart;
  auto out = germ_to_fold(germ, opt);
  const int n = 2;
  // Model collar germ f = tau, beta = beta_Gamma:
  // omega^n = 2 n f e^{-n f^2} beta_Gamma ^ (d beta_Gamma)^{n-1} ^ dtau.
  CompiledForm top(nwedge(out.omega, n));
  CompiledForm vol(wedge(wedge(germ.beta, ext_d(germ.beta)), DifferentialForm::basis(c, 3)));
  std::mt19937 rng(6);
  double worst = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *c);
    double f = p[3];
    double want = 2 * n * f * std::exp(-n * f * f) * vol.top(p);
    worst = std::max(worst, std::abs(top.top(p) - want) / (1 + std::abs(want)));
  }

  // Normalized germ: d f~/d tau >= 0 on samples, and on the inner collar
  // |tau| < delta the chain-rule form 2 n f~ f~' e^{-n f~^2} (C beta)^... holds.
  auto nrm = normalize_contact_pair(germ, opt);
  auto nout = germ_to_fold(nrm, opt);
  CompiledExpr dft(diff(nrm.f, "tau"), c->vars());
  CompiledExpr ft(nrm.f, c->vars());
  CompiledForm ntop(nwedge(nout.omega, n));
  double C = nrm.values.at("C");
  double delta = opt.eps.to_double() / 4;
  double min_slope = 1e300;
  double inner = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *c);
    min_slope = std::min(min_slope, dft(p));
    p[3] = (2.0 * (k + 0.5) / kPoints - 1.0) * delta * 0.999;
    double fv = ft(p);
    double want = 2 * n * fv * dft(p) * std::exp(-n * fv * fv) * std::pow(C, n) * vol.top(p);
    inner = std::max(inner, std::abs(ntop.top(p) - want) / (1 + std::abs(want)));
  }

  // Fold of the output against {f = 0}, and the restriction of g beta there.
  auto grid = surface_grid(c, opt);
  double spacing = 0.0;
  for (int a = 0; a < c->dim(); ++a) spacing = std::max(spacing, grid.spacing(a));
  double hd = hausdorff(out.folded.locus, fold_samples(germ.f, grid));
  std::vector<Expr> inc{var("q1"), var("q2"), var("q3"), Expr(0)};
  auto restricted = pullback(ChartMap(gamma.gamma, c, inc), out.lambda);
  bool exact = (restricted - gamma.alpha).is_zero();
  double defect = out.folded.values.at("fold_restriction_defect");

  bool ok = worst <= kIdentityTol && inner <= kIdentityTol && min_slope >= -kEvalZero && nrm.values.at("min_dfdf") >= -kEvalZero &&
            out.certified() && hd < spacing && exact && defect <= kEvalZero;
  return {ok, "collar identity " + fmt(worst) + ", inner-collar identity " + fmt(inner) + ", min f~' " +
                  fmt(min_slope) + ", fold distance " + fmt(hd) + ", i*(g beta) = beta_Gamma " +
                  (exact ? "exact" : "inexact")};
}

// 7 -------------------------------------------------------------------------
Outcome roundtrips() {
  auto m = darboux_folded(2);
  GermOptions o9;
  o9.counts = {9};
  auto a = roundtrip_fold(make_presentation(m.lambda, m.fold, o9), o9);
  auto s = folded_sphere(1);
  GermOptions o17;
  o17.counts = {17};
  auto b = roundtrip_fold(make_presentation(s.band().lambda, s.fold, o17), o17);
  bool ok = a.verdict == Verdict::Pass && b.verdict == Verdict::Pass;
  return {ok, "darboux hausdorff " + fmt(a.hausdorff) + "/" + fmt(2 * a.spacing) + " sign mismatches " +
                  std::to_string(a.sign_mismatches) + "; sphere hausdorff " + fmt(b.hausdorff) + "/" +
                  fmt(2 * b.spacing) + " sign mismatches " + std::to_string(b.sign_mismatches)};
}

// 8 -------------------------------------------------------------------------
Outcome ideal_completion() {
  auto u = make_profile(ProfileKind::IdealU);
  auto ic = ideal_completion_collar(standard_collar(), u);
  auto du = u.spline->derivative();
  std::mt19937 rng(8);
  double displayed = 0.0;
  double corrected = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *ic.chart);
    double s = p[0];
    double uv = (*u.spline)(s), dv = (*du)(s);
    Eigen::VectorXd got = liouville_at(ic.lambda, p);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(4);
    want[0] = std::exp(-s) * uv * uv / (uv - dv);  // as displayed
    displayed = std::max(displayed, (got - want).cwiseAbs().maxCoeff() / (1 + std::abs(want[0])));
    want[0] = uv / (uv - dv);  // solves i_X d(lambda) = lambda
    corrected = std::max(corrected, (got - want).cwiseAbs().maxCoeff() / (1 + std::abs(want[0])));
  }
  auto sym = check_symplectic(ic.omega, SampleGrid::uniform(ic.chart, 9));
  bool ok = displayed <= kFieldTol && sym.verdict == Verdict::Pass && sym.margin > 0;
  return {ok, "displayed field defect " + fmt(displayed) + " (u/(u - u') field defect " + fmt(corrected) +
                  "), omega^n margin " + fmt(sym.margin)};
}

// 9 -------------------------------------------------------------------------
Outcome asymmetric() {
  auto minus = standard_collar(CollarKind::Liouville, {-0.5, 0.0});
  ProfileParams pp;
  pp.bridge = Bridge::Asymmetric;
  auto f = make_profile(ProfileKind::BridgeF, pp);
  auto ad = asymmetric_double(minus, parse_expr("1 + q1^2/2", minus.gamma->vars()), f);
  CompiledForm lhs(pullback(ad.psi_bar, ad.lambda_plus));
  CompiledForm rhs(ad.lambda_minus);
  std::mt19937 rng(9);
  double worst = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *ad.collar_minus);
    worst = std::max(worst, (lhs.covector(p) - rhs.covector(p)).cwiseAbs().maxCoeff());
  }
  CompiledForm ff(ad.fold_form);
  CompiledForm e1(exp(Expr(1)) * minus.alpha);
  double fold_defect = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    auto p = sample(rng, *minus.gamma);
    fold_defect = std::max(fold_defect, (ff.covector(p) - e1.covector(p)).cwiseAbs().maxCoeff());
  }
  bool ok = worst <= kGluingTol && fold_defect <= kEvalZero;
  return {ok, "gluing defect " + fmt(worst) + ", fold form - e alpha " + fmt(fold_defect)};
}

// 10 ------------------------------------------------------------------------
Outcome directions() {
  auto cs = convex_sphere(1);
  const auto& band = cs.atlas.band();
  CharacteristicFoliation fol(cs.f[2], cs.beta[2]);
  ContactGerm g{band.chart, cs.f[2], cs.beta[2], false, {}, {}};
  DifferentialForm lam = ideal_liouville_form(g);
  CompiledExpr fv(cs.f[2], band.chart->vars());
  std::mt19937 rng(10);
  double plus_worst = 0.0;
  double minus_worst = 0.0;
  int plus = 0, minus = 0;
  while (plus + minus < 200) {
    auto p = sample(rng, *band.chart);
    double f = fv(p);
    if (std::abs(f) < 1e-3) continue;
    CharacteristicDirection d;
    try {
      d = fol.at(p);
    } catch (const Error&) {
      continue;
    }
    if (d.singular) continue;
    Eigen::VectorXd x = liouville_at(lam, p);
    double dot = d.direction.dot(x) / (d.direction.norm() * x.norm());
    if (f > 0) {
      ++plus;
      plus_worst = std::max(plus_worst, std::abs(dot - 1));
    } else {
      ++minus;
      minus_worst = std::max(minus_worst, std::abs(dot + 1));
    }
  }
  bool ok = plus > 0 && minus > 0 && plus_worst <= kDirectionTol && minus_worst <= kDirectionTol;
  return {ok, std::to_string(plus) + " samples on R+ (|dot - 1| <= " + fmt(plus_worst) + "), " +
                  std::to_string(minus) + " on R- (|dot + 1| <= " + fmt(minus_worst) + ")"};
}

// 11 ------------------------------------------------------------------------
Outcome lefschetz() {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> e(-2, 2);
  int preserved = 0;
  for (int k = 0; k < 100; ++k) {
    int r = 1 + static_cast<int>(rng() % 8);
    IntMatrix j = IntMatrix::Zero(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) {
        j(a, b) = e(rng);
        j(b, a) = -j(a, b);
      }
    Page p{"random", j, 1};
    VanishingCycle c;
    do {
      std::vector<std::int64_t> v(r);
      for (auto& x : v) x = e(rng);
      c = cycle("c", v);
    } while (!c.primitive);
    IntMatrix t = twist_matrix(p, c);
    if (IntMatrix(t.transpose() * j * t) == j) ++preserved;
  }
  auto t = torus_page();
  auto a = cycle("a", {1, 0});
  auto b = cycle("b", {0, 1});
  bool braid = check_folded_wlf({t, {a, b, a}, {b, a, b}}).verdict == WlfVerdict::EqualOnHomology;
  bool distinct = check_folded_wlf({t, {a}, {b}}).verdict == WlfVerdict::Distinct;
  int doubled = 0;
  for (int k = 0; k < 50; ++k) {
    std::vector<VanishingCycle> w;
    int len = static_cast<int>(rng() % 6);
    for (int i = 0; i < len; ++i) w.push_back(rng() % 2 ? a : b);
    if (check_folded_wlf({t, w, w}).verdict == WlfVerdict::EqualOnHomology) ++doubled;
  }
  bool ok = preserved == 100 && braid && distinct && doubled == 50;
  return {ok, std::to_string(preserved) + "/100 transvections preserve the form, braid " +
                  (braid ? "EqualOnHomology" : "not equal") + ", doubles " + std::to_string(doubled) +
                  "/50 equal, single twists " + (distinct ? "Distinct" : "not distinct")};
}

}  // namespace

int main() {
  std::vector<std::function<Outcome()>> criteria{kernel,  darboux,   liouville_example, convex_sphere_check,
                                                 fold_to_germ_identity, germ_to_fold_identity, roundtrips,
                                                 ideal_completion, asymmetric, directions, lefschetz};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %s  %s  (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
