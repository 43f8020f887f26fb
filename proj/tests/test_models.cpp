#include <cmath>

#include "doctest.h"
#include "foldcalc/models.hpp"
#include "support.hpp"

using namespace foldcalc;
using namespace foldcalc::testing;

namespace {

// Simpson's rule, used as an independent oracle for profile values.
template <typename F>
double simpson(F f, double a, double b, int n = 2000) {
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

std::vector<double> at(const Chart& c, std::mt19937& rng) { return random_point(rng, c); }

}  // namespace

TEST_CASE("lemma41-f profile") {
  auto f = make_profile(ProfileKind::FoldStep);
  const auto& s = *f.spline;
  CHECK(s.exact_at(Number(0)).is_zero());
  CHECK(s.exact_at(Number::rational(1, 2)) == Number(1));
  CHECK(s.exact_at(Number::rational(-1, 2)) == Number(-1));
  CHECK(s.derivative()->exact_at(Number::rational(1, 2)).is_zero());
  CHECK(s.degree() <= 7);
  for (double t : {-0.4, -0.1, 0.05, 0.3, 0.49}) {
    double want = simpson([](double x) { return 35.0 / 8.0 * std::pow(1 - 4 * x * x, 3); }, 0.0, t);
    CHECK(s(t) == doctest::Approx(want).epsilon(1e-10));
    CHECK(s(-t) == doctest::Approx(-s(t)));
  }
  CHECK(s(0.8) == 1.0);
  CHECK(s(-3.0) == -1.0);
  auto check = verify_profile(f);
  CHECK(check.ok);
  CHECK(check.smoothness >= 3);
  CHECK_THROWS_AS(make_profile(ProfileKind::FoldStep, {.eps = Number(2)}), Error);
}

TEST_CASE("lemma42-mu profile") {
  auto mu = make_profile(ProfileKind::Normalizer);
  const auto& s = *mu.spline;
  auto d = s.derivative();
  // eps = 1/2, delta = 1/8, eps' = 1/4.
  CHECK(s.exact_at(Number(0)) == Number::rational(1, 4));
  CHECK(s.exact_at(Number::rational(1, 8)) == Number::rational(1, 4));
  CHECK(s.exact_at(Number::rational(1, 2)) == Number::rational(1, 2));
  CHECK(s.exact_at(Number::rational(-2, 5)) == Number::rational(2, 5));
  for (int i = 0; i <= 1000; ++i) {
    double t = -0.5 + i / 1000.0;
    CHECK(s(t) >= std::abs(t) - 1e-15);
    CHECK(std::abs(t * (*d)(t)) <= std::abs(t) + 1e-15);
    CHECK(s(t) == doctest::Approx(s(-t)));
  }
  // mu = eps' + integral of mu' from the plateau edge.
  double t = 0.26;
  CHECK(s(t) == doctest::Approx(0.25 + simpson([&](double x) { return (*d)(x); }, 0.2, t)).epsilon(1e-12));
  CHECK(verify_profile(mu).ok);
  ProfileParams bad;
  bad.eps_prime = Number::rational(1, 10);
  CHECK_THROWS_AS(make_profile(ProfileKind::Normalizer, bad), Error);
}

TEST_CASE("ideal-u and bridge profiles") {
  auto u = make_profile(ProfileKind::IdealU);
  const auto& s = *u.spline;
  CHECK(s.exact_at(Number::rational(-1, 2)) == Number(1));
  CHECK(s.exact_at(Number(0)).is_zero());
  CHECK(s.derivative()->exact_at(Number::rational(-1, 2)).is_zero());
  double prev = 2.0;
  for (int i = 1; i <= 100; ++i) {
    double x = -0.5 + 0.5 * i / 100.0;
    CHECK(s(x) < prev);
    prev = s(x);
  }
  ProfileParams p;
  for (auto b : {Bridge::Plus, Bridge::Minus, Bridge::Asymmetric}) {
    p.bridge = b;
    auto f = make_profile(ProfileKind::BridgeF, p);
    CHECK(verify_profile(f).ok);
    CHECK(f.value(0.3) == doctest::Approx(f.value(-0.3)));
  }
  CHECK(profile_kind_from_name("ideal-u") == ProfileKind::IdealU);
  CHECK_THROWS_AS(profile_kind_from_name("nope"), Error);
}

TEST_CASE("profile verification reports violations") {
  auto f = make_profile(ProfileKind::FoldStep);
  f.endpoints.push_back({Number(0), 1, Number(7)});
  auto r = verify_profile(f);
  CHECK_FALSE(r.ok);
  CHECK(r.failures.size() == 1);
  auto g = make_profile(ProfileKind::IdealU);
  g.ranges.push_back({g.domain, 1, 0.0, 1.0, true, "increasing"});
  CHECK_FALSE(verify_profile(g).ok);
}

TEST_CASE("darboux folded model") {
  auto m = darboux_folded(2);
  CHECK(m.omega.terms().size() == 2);
  CHECK(to_string(m.omega.coeff(std::vector<int>{0, 1})) == "y1");
  CHECK(to_string(m.omega.coeff(std::vector<int>{2, 3})) == "1");
  CHECK((ext_d(m.lambda) - m.omega).is_zero());
  CHECK((ext_d(m.lambda_tilde) - m.omega).is_zero());
  auto grid = SampleGrid::uniform(m.chart, 9);
  CHECK(check_folded(m.omega, m.fold, grid).verdict == Verdict::Pass);
  CHECK(check_positive_contact_type(m.lambda, m.fold, grid).verdict == Verdict::Pass);
  CHECK(check_positive_contact_type(m.lambda_tilde, m.fold, grid).verdict == Verdict::Fail);

  auto one = darboux_folded(1);
  CHECK(one.omega.terms().size() == 1);
  CHECK(one.chart->dim() == 2);
  CHECK(check_folded(one.omega, one.fold, SampleGrid::uniform(one.chart, 17)).verdict == Verdict::Pass);
  CHECK_THROWS_AS(darboux_folded(0), Error);
}

TEST_CASE("folded sphere") {
  for (int n : {1, 2}) {
    auto s = folded_sphere(n);
    const auto& band = s.band();
    CHECK(band.chart->dim() == 2 * n);
    std::mt19937 drng(n);
    CHECK(max_rel_diff(ext_d(band.lambda), band.omega, drng) < 1e-9);
    auto grid = SampleGrid::uniform(band.chart, n == 1 ? 17 : 9);
    auto r = check_folded(band.omega, s.fold, grid);
    CHECK(r.verdict == Verdict::Pass);
    for (const auto& p : r.locus) CHECK(std::abs(p.back()) < 1e-12);
    CHECK(check_positive_contact_type(band.lambda, s.fold, grid).verdict == Verdict::Pass);
    CHECK(check_symplectic(s.charts[0].omega, SampleGrid::uniform(s.charts[0].chart, 5)).verdict == Verdict::Pass);

    // The equator carries the pullback of (1/2) sum x dy - y dx under the
    // inverse stereographic map, which is a contact form.
    auto eq = pullback(s.equator_inclusion, band.lambda);
    CHECK(check_contact(eq, SampleGrid::uniform(s.equator, n == 1 ? 17 : 9)).verdict == Verdict::Pass);

    // Overlap consistency: band -> north transition pulls omega back to omega.
    std::mt19937 rng(7 + n);
    auto t = s.transition(2, 0);
    DifferentialForm pulled = pullback(t, s.charts[0].omega);
    DifferentialForm pulled_l = pullback(t, s.charts[0].lambda);
    CompiledForm a(pulled), b(band.omega), la(pulled_l), lb(band.lambda);
    CompiledExpr height(band.height, band.chart->vars());
    std::vector<CompiledExpr> tc;
    for (const auto& e : t.components()) tc.emplace_back(e, band.chart->vars());
    double lim = s.charts[0].chart->box()[0].hi;
    int hits = 0;
    while (hits < 100) {
      auto p = at(*band.chart, rng);
      p.back() = 0.45 + 0.3 * (p.back() + 0.8) / 1.6;  // z in the northern overlap
      bool inside = true;
      for (auto& c : tc) inside = inside && std::abs(c(p)) < lim;
      if (!inside) continue;
      ++hits;
      CHECK(height(p) > 0);
      CHECK((a.skew_matrix(p) - b.skew_matrix(p)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((la.covector(p) - lb.covector(p)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("convex sphere") {
  auto cs = convex_sphere(1);
  CHECK((lie(cs.x, cs.alpha) - cs.alpha).is_zero());
  CHECK(to_string(pair(cs.alpha, cs.x)) == "z");
  CHECK(check_contact(cs.alpha, SampleGrid::uniform(cs.chart, 9)).verdict == Verdict::Pass);
  // alpha(X) equals the height at sphere points in every chart.
  std::mt19937 rng(5);
  for (std::size_t i = 0; i < cs.atlas.charts.size(); ++i) {
    const auto& sc = cs.atlas.charts[i];
    CompiledExpr f(cs.f[i], sc.chart->vars());
    CompiledExpr h(sc.height, sc.chart->vars());
    for (int k = 0; k < 34; ++k) {
      auto p = at(*sc.chart, rng);
      CHECK(f(p) == doctest::Approx(h(p)).epsilon(1e-14));
    }
  }
  const auto& band = cs.atlas.band();
  auto grid = SampleGrid::uniform(band.chart, 17);
  auto gamma = fold_samples(cs.f[2], grid);
  CHECK_FALSE(gamma.empty());
  for (const auto& p : gamma) CHECK(std::abs(p.back()) < 1e-12);
  auto y = characteristic_director(cs.f[2], cs.beta[2]);
  auto r = check_gradient_like(y, -band.height, {}, grid);
  CHECK(r.verdict == Verdict::Pass);
  auto rev = check_gradient_like(y, band.height, {}, grid);
  CHECK(rev.verdict == Verdict::Fail);
}

TEST_CASE("ideal completion collar") {
  auto g = standard_collar();
  auto u = make_profile(ProfileKind::IdealU);
  auto ic = ideal_completion_collar(g, u);
  CHECK(ic.chart->dim() == 4);
  std::mt19937 rng(11);
  CompiledForm top(nwedge(ic.omega, 2));
  CompiledExpr want(ic.top_expected, ic.chart->vars());
  auto x = liouville_field(ic.lambda);
  REQUIRE(x.has_value());
  std::vector<CompiledExpr> xs, fs, ps;
  for (int i = 0; i < 4; ++i) {
    xs.emplace_back((*x)[i], ic.chart->vars());
    fs.emplace_back(ic.field[i], ic.chart->vars());
    ps.emplace_back(ic.displayed_field[i], ic.chart->vars());
  }
  double displayed_gap = 0.0;
  for (int k = 0; k < 200; ++k) {
    auto p = at(*ic.chart, rng);
    double s = p[0];
    double uu = u.value(s), du = u.value(s, 1);
    CHECK(top.top(p) > 0);
    CHECK(top.top(p) == doctest::Approx(want(p)).epsilon(1e-9));
    CHECK(top.top(p) == doctest::Approx(2 * std::exp(2 * s) * (uu - du) / std::pow(uu, 3)).epsilon(1e-9));
    for (int i = 0; i < 4; ++i) CHECK(xs[i](p) == doctest::Approx(fs[i](p)).epsilon(1e-9));
    CHECK(fs[0](p) == doctest::Approx(uu / (uu - du)));
    displayed_gap = std::max(displayed_gap, std::abs(ps[0](p) - fs[0](p)));
  }
  // The displayed e^{-s}u^2/(u - u') field is not the solution.
  CHECK(displayed_gap > 1e-3);
  // Cylindrical end: u = 1 before -eps, so lambda = e^s alpha_0 and X = d_s.
  std::vector<double> p{-0.7, 0.2, 0.1, -0.3};
  CHECK(fs[0](p) == doctest::Approx(1.0));
  CHECK(xs[0](p) == doctest::Approx(1.0));
  auto bad = u;
  bad.spline = make_profile(ProfileKind::FoldStep).spline;
  CHECK_THROWS_AS(ideal_completion_collar(g, bad), Error);
}

TEST_CASE("double of a cobordism") {
  auto plus = standard_collar(CollarKind::Liouville, {-0.5, 0.0});
  auto minus = standard_collar(CollarKind::Liouville, {0.0, 0.5});
  ProfileParams pp;
  pp.bridge = Bridge::Plus;
  auto fp = make_profile(ProfileKind::BridgeF, pp);
  pp.bridge = Bridge::Minus;
  auto fm = make_profile(ProfileKind::BridgeF, pp);
  auto d = double_cobordism(plus, minus, fp, fm);
  auto gp = SampleGrid::uniform(d.plus.chart, 9);
  auto gm = SampleGrid::uniform(d.minus.chart, 9);
  CHECK(check_folded(d.plus.omega, d.plus.fold, gp).verdict == Verdict::Pass);
  CHECK(check_folded(d.minus.omega, d.minus.fold, gm).verdict == Verdict::Pass);
  CHECK(check_positive_contact_type(d.plus.lambda, d.plus.fold, gp).verdict == Verdict::Pass);
  CHECK(check_positive_contact_type(d.minus.lambda, d.minus.fold, gm).verdict == Verdict::Fail);

  // z -> -z leaves the bridge forms unchanged.
  std::vector<Expr> refl;
  for (const auto& v : d.plus.chart->vars()) refl.push_back(v == "z" ? -var("z") : var(v));
  ChartMap r(d.plus.chart, d.plus.chart, refl);
  CHECK(sampled_difference(pullback(r, d.plus.lambda), d.plus.lambda, gp) < 1e-12);
  CHECK(sampled_difference(pullback(r, d.plus.omega), -d.plus.omega, gp) > 0.1);

  CHECK_THROWS_AS(double_cobordism(plus, minus, fm, fm), Error);
}

TEST_CASE("asymmetric double") {
  auto minus = standard_collar(CollarKind::Liouville, {-0.5, 0.0});
  ProfileParams pp;
  pp.bridge = Bridge::Asymmetric;
  auto f = make_profile(ProfileKind::BridgeF, pp);
  auto mu = parse_expr("1 + q1^2/2", minus.gamma->vars());
  auto ad = asymmetric_double(minus, mu, f);
  CHECK(ad.gluing_defect < 1e-10);
  CHECK(ad.shift_bound > 0.5 + std::log(1.5));
  auto grid = SampleGrid::uniform(ad.collar_minus, 9);
  CHECK(sampled_difference(pullback(ad.psi_bar, ad.lambda_plus), ad.lambda_minus, grid) < 1e-10);
  auto e1 = exp(Expr(1)) * minus.alpha;
  CHECK(sampled_difference(ad.fold_form, e1, SampleGrid::uniform(minus.gamma, 9)) < 1e-15);
  auto bg = SampleGrid::uniform(ad.bridge.chart, 9);
  CHECK(check_folded(ad.bridge.omega, ad.bridge.fold, bg).verdict == Verdict::Pass);
  CHECK(check_positive_contact_type(ad.bridge.lambda, ad.bridge.fold, bg).verdict == Verdict::Pass);

  auto strict = asymmetric_double(minus, Expr(1), f);
  CHECK(to_string(strict.psi_bar.components()[0]) == "s");

  // Explicit contactomorphism (q1, q2, q3) -> (q1, 2 q2, 2 q3) with alpha+ = dq3 - q2 dq1.
  auto g = minus.gamma;
  ChartMap psi(g, g, {var("q1"), Expr(2) * var("q2"), Expr(2) * var("q3")});
  auto ad2 = asymmetric_double(minus, Expr(2), f, std::make_pair(psi, minus.alpha));
  CHECK(ad2.gluing_defect < 1e-10);
  CHECK_THROWS_AS(asymmetric_double(minus, Expr(3), f, std::make_pair(psi, minus.alpha)), Error);

  CHECK_THROWS_AS(asymmetric_double(minus, parse_expr("q1", g->vars()), f), Error);
  pp.bridge = Bridge::Plus;
  CHECK_THROWS_AS(asymmetric_double(minus, Expr(1), make_profile(ProfileKind::BridgeF, pp)), Error);
}
