#include "foldcalc/models.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace foldcalc {

namespace {

Number q(std::int64_t a, std::int64_t b = 1) { return Number::rational(a, b); }

bool lt(const Number& a, const Number& b) { return a.to_double() < b.to_double(); }

bool same(const Number& a, const Number& b) {
  if (a.exact() && b.exact()) return a == b;
  return std::abs(a.to_double() - b.to_double()) <= 1e-12 * (1.0 + std::abs(b.to_double()));
}

Number horner(const Spline::Piece& p, const Number& x) {
  Number u = x - p.origin;
  Number acc(0);
  for (std::size_t k = p.coeffs.size(); k-- > 0;) acc = acc * u + p.coeffs[k];
  return acc;
}

std::vector<SplinePtr> derivative_chain(const SplinePtr& s, int order) {
  std::vector<SplinePtr> out{s};
  for (int k = 0; k < order; ++k) out.push_back(out.back()->derivative());
  return out;
}

Spline::Piece constant_piece(const Number& c) { return {Number(0), {c}}; }

std::string join_name(const ProfileParams& p, const char* fallback) {
  return p.name.empty() ? std::string(fallback) : p.name;
}

ProfileFn fold_step_profile(const ProfileParams& p) {
  const Number& e = p.eps;
  if (!(e.to_double() > 0.0 && e.to_double() < 1.0)) throw Error("lemma41-f: need 0 < eps < 1");
  // f' = (35/16 eps)(1 - (t/eps)^2)^3 integrated from 0.
  Number c = q(35, 16);
  std::vector<Number> coeffs{Number(0), c / e,           Number(0), -c / e.pow(3), Number(0),
                             q(21, 16) / e.pow(5), Number(0), -q(5, 16) / e.pow(7)};
  auto spline = std::make_shared<const Spline>(
      join_name(p, "f41"), std::vector<Number>{-e, e},
      std::vector<Spline::Piece>{constant_piece(-1), {Number(0), coeffs}, constant_piece(1)});
  ProfileFn f;
  f.kind = ProfileKind::FoldStep;
  f.spline = spline;
  f.domain = {-e.to_double(), e.to_double()};
  f.endpoints = {{-e, 0, -1}, {e, 0, 1}, {Number(0), 0, Number(0)}, {-e, 1, Number(0)}, {e, 1, Number(0)}};
  f.ranges = {{f.domain, 1, 0.0, std::numeric_limits<double>::infinity(), true, "f' > 0"}};
  f.parity = -1;
  f.smoothness = 3;
  return f;
}

ProfileFn normalizer_profile(const ProfileParams& p) {
  const Number& e = p.eps;
  Number delta = p.delta.value_or(e / q(4));
  Number ep = p.eps_prime.value_or(e / q(2));
  Number w = delta / q(4);
  Number a = ep - w / q(2);
  Number b = ep + w / q(2);
  if (!(e.to_double() > 0.0 && e.to_double() < 1.0)) throw Error("lemma42-mu: need 0 < eps < 1");
  if (!(delta.to_double() > 0.0) || lt(a, delta) || !lt(b, e))
    throw Error("lemma42-mu: infeasible radii (need delta <= eps' - delta/8 and eps' + delta/8 < eps)");
  // mu' is the quintic smoothstep of (|t| - a)/w, so mu = eps' + w I((|t| - a)/w) with
  // I(x) = x^6 - 3x^5 + 5x^4/2.
  std::vector<Number> right{ep, Number(0), Number(0), Number(0), q(5, 2) / w.pow(3), -q(3) / w.pow(4),
                            Number(1) / w.pow(5)};
  std::vector<Number> left{ep, Number(0), Number(0), Number(0), q(5, 2) / w.pow(3), q(3) / w.pow(4),
                           Number(1) / w.pow(5)};
  auto spline = std::make_shared<const Spline>(
      join_name(p, "mu42"), std::vector<Number>{-b, -a, a, b},
      std::vector<Spline::Piece>{{Number(0), {Number(0), Number(-1)}},
                                 {-a, left},
                                 constant_piece(ep),
                                 {a, right},
                                 {Number(0), {Number(0), Number(1)}}});
  ProfileFn f;
  f.kind = ProfileKind::Normalizer;
  f.spline = spline;
  double ed = e.to_double();
  double dd = delta.to_double();
  f.domain = {-ed, ed};
  f.endpoints = {{Number(0), 0, ep}, {delta, 0, ep}, {-delta, 0, ep}, {e, 0, e},
                 {-e, 0, e},         {e, 1, 1},     {-e, 1, -1}};
  f.ranges = {
      {{-ed, ed}, 0, 0.0, std::numeric_limits<double>::infinity(), true, "mu > 0"},
      {{-dd, dd}, 1, 0.0, 0.0, false, "mu constant on the inner collar"},
      {{dd, ed}, 1, 0.0, 1.0, false, "0 <= mu' <= 1"},
      {{-ed, -dd}, 1, -1.0, 0.0, false, "-1 <= mu' <= 0"},
  };
  RangeCondition above{{-ed, ed}, 0, 0.0, std::numeric_limits<double>::infinity(), false, "mu >= |t|"};
  above.abs_weight = 1.0;
  f.ranges.push_back(above);
  f.parity = 1;
  f.smoothness = 3;
  return f;
}

ProfileFn ideal_u(const ProfileParams& p) {
  const Number& e = p.eps;
  if (!(e.to_double() > 0.0)) throw Error("ideal-u: need eps > 0");
  // u = 1 - ((s + eps)/eps)^4 on [-eps, 0], 1 before.
  auto spline = std::make_shared<const Spline>(
      join_name(p, "u"), std::vector<Number>{-e},
      std::vector<Spline::Piece>{constant_piece(1),
                                 {-e, {Number(1), Number(0), Number(0), Number(0), -Number(1) / e.pow(4)}}});
  ProfileFn f;
  f.kind = ProfileKind::IdealU;
  f.spline = spline;
  double ed = e.to_double();
  f.domain = {-ed, 0.0};
  f.endpoints = {{-e, 0, 1}, {-e, 1, Number(0)}, {Number(0), 0, Number(0)}, {Number(0), 1, -q(4) / e}};
  f.ranges = {{{-ed, 0.0}, 1, -std::numeric_limits<double>::infinity(), 0.0, true, "u' < 0"},
              {{-ed, 0.0}, 0, 0.0, 1.0, false, "0 <= u <= 1"}};
  f.smoothness = 3;
  return f;
}

ProfileFn bridge_f(const ProfileParams& p) {
  const Number& e = p.eps;
  const Number& hw = p.half_width;
  if (!(hw.to_double() > 0.0 && hw.to_double() < 1.0)) throw Error("bridge-f: need 0 < half_width < 1");
  double h = hw.to_double();
  ProfileFn f;
  f.kind = ProfileKind::BridgeF;
  f.domain = {-h, h};
  f.parity = 1;
  f.smoothness = 0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (p.bridge) {
    case Bridge::Plus:
      f.spline = std::make_shared<const Spline>(join_name(p, "fplus"), std::vector<Number>{},
                                                std::vector<Spline::Piece>{{Number(0), {Number(0), Number(0), -e}}});
      f.endpoints = {{Number(0), 0, Number(0)}, {Number(0), 1, Number(0)}};
      f.ranges = {{f.domain, 2, -inf, 0.0, true, "f'' < 0"},
                  {f.domain, 0, -e.to_double(), 0.0, false, "-eps < f <= 0"}};
      if (!lt(-e, -e * hw * hw)) throw Error("bridge-f: profile leaves the collar");
      break;
    case Bridge::Minus:
      f.spline = std::make_shared<const Spline>(join_name(p, "fminus"), std::vector<Number>{},
                                                std::vector<Spline::Piece>{{Number(0), {Number(0), Number(0), e}}});
      f.endpoints = {{Number(0), 0, Number(0)}, {Number(0), 1, Number(0)}};
      f.ranges = {{f.domain, 2, 0.0, inf, true, "f'' > 0"},
                  {f.domain, 0, 0.0, e.to_double(), false, "0 <= f < eps"}};
      break;
    case Bridge::Asymmetric:
      f.spline = std::make_shared<const Spline>(
          join_name(p, "fbridge"), std::vector<Number>{},
          std::vector<Spline::Piece>{{Number(0), {Number(1), Number(0), Number(-1)}}});
      f.endpoints = {{Number(0), 0, Number(1)}, {Number(0), 1, Number(0)}};
      f.ranges = {{f.domain, 2, -inf, 0.0, true, "f'' < 0"}, {f.domain, 0, 0.0, 1.0, false, "0 <= f <= 1"}};
      break;
  }
  return f;
}

}  // namespace

const char* profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::FoldStep: return "lemma41-f";
    case ProfileKind::Normalizer: return "lemma42-mu";
    case ProfileKind::IdealU: return "ideal-u";
    case ProfileKind::BridgeF: return "bridge-f";
  }
  return "?";
}

ProfileKind profile_kind_from_name(std::string_view s) {
  for (auto k : {ProfileKind::FoldStep, ProfileKind::Normalizer, ProfileKind::IdealU, ProfileKind::BridgeF}) {
    if (s == profile_kind_name(k)) return k;
  }
  throw Error("unknown profile kind '" + std::string(s) + "'");
}

double ProfileFn::value(double x, int order) const {
  SplinePtr s = spline;
  for (int k = 0; k < order; ++k) s = s->derivative();
  return (*s)(x);
}

ProfileCheck verify_profile(const ProfileFn& p, int samples) {
  ProfileCheck out;
  int max_order = 3;
  for (const auto& e : p.endpoints) max_order = std::max(max_order, e.order);
  for (const auto& r : p.ranges) max_order = std::max(max_order, r.order);
  auto ders = derivative_chain(p.spline, std::max(max_order, 8));
  auto fail = [&](std::string msg) {
    out.ok = false;
    out.failures.push_back(std::move(msg));
  };

  for (const auto& e : p.endpoints) {
    Number v = ders[e.order]->exact_at(e.at);
    if (!same(v, e.value)) {
      fail("d^" + std::to_string(e.order) + " at " + e.at.to_string() + " is " + v.to_string() + ", expected " +
           e.value.to_string());
    }
  }

  const auto& bps = p.spline->breakpoints();
  out.smoothness = bps.empty() ? 99 : -1;
  if (!bps.empty()) {
    int k = 0;
    for (; k < static_cast<int>(ders.size()); ++k) {
      bool agree = true;
      for (std::size_t i = 0; i < bps.size(); ++i) {
        const auto& pcs = ders[k]->pieces();
        if (!same(horner(pcs[i], bps[i]), horner(pcs[i + 1], bps[i]))) agree = false;
      }
      if (!agree) break;
    }
    out.smoothness = k - 1;
  }
  if (out.smoothness < p.smoothness)
    fail("smoothness C^" + std::to_string(out.smoothness) + " below C^" + std::to_string(p.smoothness));

  for (const auto& r : p.ranges) {
    double worst_x = 0.0;
    bool bad = false;
    for (int j = 0; j < samples && !bad; ++j) {
      double x = r.where.lo + (j + 0.5) / samples * r.where.width();
      double v = (*ders[r.order])(x) - r.abs_weight * std::abs(x);
      double slack = r.strict ? 0.0 : 1e-12 * (1.0 + std::abs(v));
      bool ok = r.strict ? (v > r.lo && v < r.hi) : (v >= r.lo - slack && v <= r.hi + slack);
      if (!ok) {
        bad = true;
        worst_x = x;
      }
    }
    if (bad) fail(r.label + " violated at " + std::to_string(worst_x));
  }

  if (p.parity != 0) {
    for (int j = 0; j < samples; ++j) {
      double x = p.domain.lo + (j + 0.5) / samples * p.domain.width();
      double a = (*p.spline)(x);
      double b = (*p.spline)(-x);
      if (std::abs(b - p.parity * a) > 1e-12 * (1.0 + std::abs(a))) {
        fail(std::string(p.parity > 0 ? "even" : "odd") + " symmetry violated at " + std::to_string(x));
        break;
      }
    }
  }
  return out;
}

ProfileFn make_profile(ProfileKind kind, const ProfileParams& params) {
  ProfileFn f;
  switch (kind) {
    case ProfileKind::FoldStep: f = fold_step_profile(params); break;
    case ProfileKind::Normalizer: f = normalizer_profile(params); break;
    case ProfileKind::IdealU: f = ideal_u(params); break;
    case ProfileKind::BridgeF: f = bridge_f(params); break;
  }
  auto check = verify_profile(f);
  if (!check.ok) throw Error(std::string(profile_kind_name(kind)) + ": " + check.failures.front());
  return f;
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

DifferentialForm terms(const ChartPtr& c, int deg, const std::vector<std::pair<std::vector<int>, std::string>>& t) {
  std::vector<std::pair<std::vector<int>, Expr>> out;
  for (const auto& [idx, s] : t) out.emplace_back(idx, parse_expr(s, c->vars()));
  return DifferentialForm::from_terms(c, deg, out);
}

std::vector<std::string> darboux_vars(int n) {
  std::vector<std::string> v;
  for (int j = 1; j <= n; ++j) {
    v.push_back("x" + std::to_string(j));
    v.push_back("y" + std::to_string(j));
  }
  return v;
}

Expr simple(const Expr& e) { return simplify(e); }

std::vector<double> center(const Chart& c) {
  std::vector<double> p;
  for (const auto& iv : c.box()) p.push_back(0.5 * (iv.lo + iv.hi));
  return p;
}

// Orientation of a parametrized hypersurface piece of the unit sphere against
// the outward normal, read off at the box centre.
int sphere_orientation(const ChartPtr& c, const std::vector<Expr>& comps) {
  auto p = center(*c);
  int m = static_cast<int>(comps.size());
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = eval(comps[i], c->vars(), p);
    for (int j = 0; j < c->dim(); ++j) a(i, j + 1) = eval(diff(comps[i], c->vars()[j]), c->vars(), p);
  }
  return a.determinant() > 0 ? 1 : -1;
}

ChartPtr rebuild(const ChartPtr& c, int orientation) {
  return make_chart(c->id(), c->vars(), c->box(), orientation);
}

SampleGrid inner_grid(const ChartPtr& c, int per_axis) { return SampleGrid::uniform(c, per_axis); }

}  // namespace

double sampled_difference(const DifferentialForm& a, const DifferentialForm& b, const SampleGrid& grid) {
  DifferentialForm d = a - b;
  if (d.is_zero()) return 0.0;
  CompiledForm cd(d);
  CompiledForm ca(a);
  double worst = 0.0;
  std::mutex m;
  parallel_for(grid.size(), [&](std::size_t i) {
    auto p = grid.point(i);
    if (grid.is_excluded(p)) return;
    double v = cd.max_abs(p) / (1.0 + ca.max_abs(p));
    std::lock_guard lock(m);
    worst = std::max(worst, v);
  });
  return worst;
}

CollarPresentation standard_collar(CollarKind kind, Interval collar, std::string collar_var) {
  auto g = make_chart("gamma", {"q1", "q2", "q3"}, {{-1, 1}, {-1, 1}, {-1, 1}});
  return CollarPresentation{g, terms(g, 1, {{{2}, "1"}, {{0}, "-q2"}}), std::move(collar_var), collar, kind};
}

ChartPtr collar_chart(const CollarPresentation& c, std::string id) {
  std::vector<std::string> vars{c.collar_var};
  std::vector<Interval> box{c.collar};
  for (int i = 0; i < c.gamma->dim(); ++i) {
    vars.push_back(c.gamma->vars()[i]);
    box.push_back(c.gamma->box()[i]);
  }
  return make_chart(std::move(id), vars, box, c.gamma->orientation());
}

DifferentialForm lift(const DifferentialForm& a, const ChartPtr& to) {
  std::vector<Expr> comps;
  for (const auto& v : a.chart()->vars()) {
    if (to->index_of(v) < 0) throw Error("lift: chart '" + to->id() + "' lacks variable '" + v + "'");
    comps.push_back(var(v));
  }
  return pullback(ChartMap(to, a.chart(), comps), a);
}

// ---------------------------------------------------------------------------
// Darboux model

DarbouxModel darboux_folded(int n) {
  if (n < 1) throw Error("darboux_folded: n >= 1");
  auto vars = darboux_vars(n);
  auto c = make_chart("darboux", vars, std::vector<Interval>(2 * n, {-1, 1}));
  std::vector<std::pair<std::vector<int>, std::string>> w{{{0, 1}, "y1"}};
  std::vector<std::pair<std::vector<int>, std::string>> lt{{{0}, "-y1^2/2"}};
  std::vector<std::pair<std::vector<int>, std::string>> l{{{0}, "1 - y1^2/2"}};
  for (int j = 1; j < n; ++j) {
    w.push_back({{2 * j, 2 * j + 1}, "1"});
    lt.push_back({{2 * j}, "-" + vars[2 * j + 1]});
    l.push_back({{2 * j}, "-" + vars[2 * j + 1]});
  }
  DarbouxModel m{c, terms(c, 2, w), terms(c, 1, lt), terms(c, 1, l), {var("y1")}, {}};
  m.expected = {{"folded", "omega", c->id(), Verdict::Pass},
                {"positive-contact-type", "lambda", c->id(), Verdict::Pass},
                {"positive-contact-type", "lambda_tilde", c->id(), Verdict::Fail}};
  return m;
}

// ---------------------------------------------------------------------------
// Spheres

namespace {

struct SphereParts {
  ChartPtr chart;
  std::vector<Expr> comps;
  std::vector<Expr> inverse;  // chart coordinates in terms of the ambient ones
};

}  // namespace

ChartMap FoldedSphere::transition(std::size_t from, std::size_t to) const {
  const auto& src = charts.at(from);
  const auto& dst = charts.at(to);
  std::map<std::string, Expr, std::less<>> sub;
  for (int i = 0; i < ambient->dim(); ++i) sub[ambient->vars()[i]] = src.embedding.components()[i];
  std::vector<Expr> comps;
  const auto& amb = ambient->vars();
  int m = 2 * n;
  Expr z = var(amb[m]);
  if (to < 2) {
    for (int i = 0; i < m; ++i) comps.push_back(var(amb[i]));
  } else {
    Expr r = sqrt(Expr(1) - pow(z, 2));
    for (int i = 0; i + 1 < m; ++i) comps.push_back(var(amb[i]) / (r - var(amb[m - 1])));
    comps.push_back(z);
  }
  for (auto& e : comps) e = simplify(substitute(e, sub));
  return ChartMap(src.chart, dst.chart, comps);
}

FoldedSphere folded_sphere(int n) {
  if (n < 1) throw Error("folded_sphere: n >= 1");
  FoldedSphere s;
  s.n = n;
  int m = 2 * n;
  auto amb_vars = darboux_vars(n);
  amb_vars.push_back("z");
  s.ambient = make_chart("ambient", amb_vars, std::vector<Interval>(m + 1, {-1.2, 1.2}));
  std::vector<std::pair<std::vector<int>, std::string>> w;
  std::vector<std::pair<std::vector<int>, std::string>> l;
  for (int j = 0; j < n; ++j) {
    w.push_back({{2 * j, 2 * j + 1}, "1"});
    l.push_back({{2 * j + 1}, amb_vars[2 * j] + "/2"});
    l.push_back({{2 * j}, "-" + amb_vars[2 * j + 1] + "/2"});
  }
  DifferentialForm w_amb = terms(s.ambient, 2, w);
  DifferentialForm l_amb = terms(s.ambient, 1, l);

  auto add = [&](ChartPtr c, std::vector<Expr> comps, Expr height) {
    c = rebuild(c, sphere_orientation(c, comps));
    for (auto& e : comps) e = simple(e);
    ChartMap emb(c, s.ambient, comps);
    s.charts.push_back({c, emb, pullback(emb, w_amb), pullback(emb, l_amb), simple(height)});
  };

  // Graph charts over the (x, y) ball, kept 10% inside the unit sphere.
  double a = 0.9 / std::sqrt(static_cast<double>(m));
  std::vector<std::string> gv(amb_vars.begin(), amb_vars.begin() + m);
  Expr rho(0);
  for (const auto& v : gv) rho = rho + pow(var(v), 2);
  for (int sign : {1, -1}) {
    auto c = make_chart(sign > 0 ? "north" : "south", gv, std::vector<Interval>(m, {-a, a}));
    std::vector<Expr> comps;
    for (const auto& v : gv) comps.push_back(var(v));
    Expr h = Expr(sign) * sqrt(Expr(1) - rho);
    comps.push_back(h);
    add(c, comps, h);
  }

  // Band chart: (u, z) -> (sqrt(1 - z^2) sigma(u), z), sigma the inverse
  // stereographic projection of the unit sphere in R^{2n} from y_n = 1.
  std::vector<std::string> bv;
  for (int i = 1; i < m; ++i) bv.push_back("u" + std::to_string(i));
  std::vector<Interval> ubox(m - 1, {-1.5, 1.5});
  auto box = ubox;
  box.push_back({-0.8, 0.8});
  auto bvz = bv;
  bvz.push_back("z");
  auto band = make_chart("band", bvz, box);
  Expr u2(0);
  for (const auto& v : bv) u2 = u2 + pow(var(v), 2);
  Expr r = sqrt(Expr(1) - pow(var("z"), 2));
  std::vector<Expr> comps;
  for (const auto& v : bv) comps.push_back(r * (Expr(2) * var(v) / (Expr(1) + u2)));
  comps.push_back(r * ((u2 - Expr(1)) / (u2 + Expr(1))));
  comps.push_back(var("z"));
  add(band, comps, var("z"));

  s.fold = FoldSpec{var("z")};
  s.equator = make_chart("equator", bv, ubox);
  std::vector<Expr> inc;
  for (const auto& v : bv) inc.push_back(var(v));
  inc.push_back(Expr(0));
  s.equator_inclusion = ChartMap(s.equator, s.charts[2].chart, inc);
  s.expected = {{"symplectic", "omega", "north", Verdict::Pass},
                {"symplectic", "omega", "south", Verdict::Pass},
                {"folded", "omega", "band", Verdict::Pass},
                {"positive-contact-type", "lambda", "band", Verdict::Pass}};
  return s;
}

ConvexSphere convex_sphere(int n) {
  if (n < 1) throw Error("convex_sphere: n >= 1");
  ConvexSphere cs;
  cs.n = n;
  cs.atlas = folded_sphere(n);
  cs.chart = cs.atlas.ambient;
  const auto& v = cs.chart->vars();
  int m = 2 * n;
  std::vector<std::pair<std::vector<int>, std::string>> a{{{m}, "1"}};
  std::vector<Expr> x;
  for (int j = 0; j < n; ++j) {
    a.push_back({{2 * j + 1}, v[2 * j] + "/2"});
    a.push_back({{2 * j}, "-" + v[2 * j + 1] + "/2"});
    x.push_back(var(v[2 * j]) / Expr(2));
    x.push_back(var(v[2 * j + 1]) / Expr(2));
  }
  x.push_back(var("z"));
  for (auto& e : x) e = simple(e);
  cs.alpha = terms(cs.chart, 1, a);
  cs.x = VectorField(cs.chart, x);
  Expr fz = pair(cs.alpha, cs.x);
  for (const auto& sc : cs.atlas.charts) {
    std::map<std::string, Expr, std::less<>> sub;
    for (int i = 0; i < cs.chart->dim(); ++i) sub[v[i]] = sc.embedding.components()[i];
    cs.f.push_back(simplify(substitute(fz, sub)));
    cs.beta.push_back(pullback(sc.embedding, cs.alpha));
  }
  cs.expected = {{"contact", "alpha", cs.chart->id(), Verdict::Pass},
                 {"gradient-like", "characteristic", "band", Verdict::Pass}};
  return cs;
}

// ---------------------------------------------------------------------------
// Ideal completion

IdealCompletion ideal_completion_collar(const CollarPresentation& gamma, const ProfileFn& u) {
  int g = gamma.gamma->dim();
  if (g % 2 == 0) throw Error("ideal_completion_collar: contact chart must be odd-dimensional");
  int n = (g + 1) / 2;
  double eps = -u.domain.lo;
  const auto& sp = *u.spline;
  auto du = sp.derivative();
  Number lo = Number::inexact(u.domain.lo);
  for (const auto& e : u.endpoints) {
    if (e.order == 0 && e.value.is_one()) lo = e.at;
  }
  bool ok = sp.exact_at(Number(0)).is_zero() && sp.exact_at(lo).is_one() && du->exact_at(lo).is_zero() &&
            du->exact_at(Number(0)).is_negative() && std::abs(lo.to_double() + eps) < 1e-15;
  auto check = verify_profile(u);
  if (!ok || !check.ok) throw Error("ideal_completion_collar: u violates u(0)=0, u(-eps)=1, u'(-eps)=0, u'<0");

  CollarPresentation c = gamma;
  c.collar = {-eps, -eps / 20.0};
  IdealCompletion out;
  out.chart = collar_chart(c, "ideal-collar");
  out.u = u;
  Expr s = var(c.collar_var);
  Expr us = u(s);
  Expr dus = foldcalc::apply(du, s);
  DifferentialForm a0 = lift(gamma.alpha, out.chart);
  out.lambda = simple(exp(s) / us) * a0;
  out.omega = ext_d(out.lambda);
  std::vector<Expr> pf(out.chart->dim(), Expr(0));
  std::vector<Expr> tf(out.chart->dim(), Expr(0));
  pf[0] = simple(exp(-s) * pow(us, 2) / (us - dus));
  tf[0] = simple(us / (us - dus));
  out.displayed_field = VectorField(out.chart, pf);
  out.field = VectorField(out.chart, tf);
  DifferentialForm vol_g = wedge(gamma.alpha, nwedge(ext_d(gamma.alpha), n - 1));
  out.top_expected = simple(Expr(n) * exp(Expr(n) * s) * (us - dus) / pow(us, n + 1) * top_coeff(vol_g));
  out.expected = {{"symplectic", "omega", out.chart->id(), Verdict::Pass},
                  {"liouville", "lambda", out.chart->id(), Verdict::Pass}};
  return out;
}

// ---------------------------------------------------------------------------
// Bridges

namespace {

BridgeSide make_bridge(const CollarPresentation& end, const ProfileFn& f, std::string id, int orientation) {
  std::vector<std::string> vars = end.gamma->vars();
  std::vector<Interval> box = end.gamma->box();
  vars.push_back("z");
  box.push_back({f.domain.lo, f.domain.hi});
  BridgeSide b;
  b.chart = make_chart(std::move(id), vars, box, orientation * end.gamma->orientation());
  b.profile = f;
  b.lambda = exp(f(var("z"))) * lift(end.alpha, b.chart);
  b.omega = ext_d(b.lambda);
  b.fold = FoldSpec{var("z")};
  return b;
}

void require(const ProfileFn& f, int order, int sign, const char* what) {
  auto d = derivative_chain(f.spline, order);
  for (int j = 0; j < 10000; ++j) {
    double x = f.domain.lo + (j + 0.5) / 10000.0 * f.domain.width();
    if ((*d[order])(x) * sign <= 0.0) throw Error(std::string(what) + " violated at z = " + std::to_string(x));
  }
}

void require_value(const ProfileFn& f, int order, const Number& want, const char* what) {
  auto d = derivative_chain(f.spline, order);
  if (!same(d[order]->exact_at(Number(0)), want)) throw Error(what);
}

}  // namespace

DoubleCobordism double_cobordism(const CollarPresentation& plus_end, const CollarPresentation& minus_end,
                                 const ProfileFn& f_plus, const ProfileFn& f_minus) {
  require_value(f_plus, 0, Number(0), "double: f+(0) != 0");
  require_value(f_plus, 1, Number(0), "double: f+'(0) != 0");
  require(f_plus, 2, -1, "double: f+'' < 0");
  require_value(f_minus, 0, Number(0), "double: f-(0) != 0");
  require_value(f_minus, 1, Number(0), "double: f-'(0) != 0");
  require(f_minus, 2, 1, "double: f-'' > 0");
  for (double z : {f_plus.domain.lo, f_plus.domain.hi}) {
    double v = f_plus.value(z);
    if (!(v > plus_end.collar.lo && v <= plus_end.collar.hi)) throw Error("double: f+ leaves the collar of the + end");
  }
  for (double z : {f_minus.domain.lo, f_minus.domain.hi}) {
    double v = f_minus.value(z);
    if (!(v >= minus_end.collar.lo && v < minus_end.collar.hi))
      throw Error("double: f- leaves the collar of the - end");
  }
  DoubleCobordism d;
  d.plus = make_bridge(plus_end, f_plus, "bridge+", 1);
  // The - end sits in Sigma with the orientation reversed.
  d.minus = make_bridge(minus_end, f_minus, "bridge-", -1);
  d.expected = {{"folded", "omega+", "bridge+", Verdict::Pass},
                {"positive-contact-type", "lambda+", "bridge+", Verdict::Pass},
                {"folded", "omega-", "bridge-", Verdict::Pass},
                {"positive-contact-type", "lambda-", "bridge-", Verdict::Fail}};
  return d;
}

AsymmetricDouble asymmetric_double(const CollarPresentation& minus_end, const Expr& mu, const ProfileFn& f,
                                   const std::optional<std::pair<ChartMap, DifferentialForm>>& psi_alpha_plus) {
  require_value(f, 0, Number(1), "asymmetric double: f(0) != 1");
  require_value(f, 1, Number(0), "asymmetric double: f'(0) != 0");
  require(f, 2, -1, "asymmetric double: f'' < 0");
  auto g = minus_end.gamma;
  double eps = -minus_end.collar.lo;
  if (!(eps > 0.0)) throw Error("asymmetric double: collar must be [-eps, 0]");

  auto grid = inner_grid(g, 9);
  CompiledExpr cm(mu, g->vars());
  double log_sup = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = cm(grid.point(i));
    if (!(v > 0.0)) throw Error("asymmetric double: mu <= 0 at a sample");
    log_sup = std::max(log_sup, std::abs(std::log(v)));
  }

  std::vector<Expr> id;
  for (const auto& v : g->vars()) id.push_back(var(v));
  ChartMap psi(g, g, id);
  DifferentialForm alpha_plus = mu * minus_end.alpha;
  if (psi_alpha_plus) {
    psi = psi_alpha_plus->first;
    alpha_plus = psi_alpha_plus->second;
    if (psi.source()->id() != g->id()) throw Error("asymmetric double: psi must start on the gamma chart");
    double d = sampled_difference(pullback(psi, alpha_plus), mu * minus_end.alpha, grid);
    if (d > 1e-10) throw Error("asymmetric double: psi^* alpha+ != mu alpha-");
  }

  AsymmetricDouble out;
  out.shift_bound = eps + log_sup + 1.0;
  CollarPresentation cm_end = minus_end;
  cm_end.collar = {-eps, 0.0};
  out.collar_minus = collar_chart(cm_end, "collar-");
  CollarPresentation cp_end{psi.target(), alpha_plus, minus_end.collar_var,
                            {-out.shift_bound, out.shift_bound}, CollarKind::Liouville};
  out.collar_plus = collar_chart(cp_end, "collar+");
  Expr s = var(minus_end.collar_var);
  out.lambda_minus = exp(s) * lift(minus_end.alpha, out.collar_minus);
  out.lambda_plus = exp(var(cp_end.collar_var)) * lift(alpha_plus, out.collar_plus);
  std::vector<Expr> comps{simple(s - log(mu))};
  for (const auto& e : psi.components()) comps.push_back(e);
  out.psi_bar = ChartMap(out.collar_minus, out.collar_plus, comps);
  out.gluing_defect =
      sampled_difference(pullback(out.psi_bar, out.lambda_plus), out.lambda_minus, inner_grid(out.collar_minus, 9));
  if (out.gluing_defect > 1e-10) throw Error("asymmetric double: psi_bar^* lambda+ != lambda-");

  out.bridge = make_bridge(minus_end, f, "bridge", 1);
  std::vector<Expr> inc = id;
  inc.push_back(Expr(0));
  out.fold_form = pullback(ChartMap(g, out.bridge.chart, inc), out.bridge.lambda);
  out.expected = {{"folded", "omega", "bridge", Verdict::Pass},
                  {"positive-contact-type", "lambda", "bridge", Verdict::Pass},
                  {"contact", "fold_form", g->id(), Verdict::Pass}};
  return out;
}

}  // namespace foldcalc
