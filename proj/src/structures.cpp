#include "foldcalc/structures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace foldcalc {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict verdict_from_name(std::string_view s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "fail") return Verdict::Fail;
  if (s == "inconclusive") return Verdict::Inconclusive;
  throw Error("unknown verdict '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Grids and threads

SampleGrid SampleGrid::defaults(ChartPtr chart) {
  int d = chart->dim();
  int per = d <= 4 ? 17 : (d <= 6 ? 9 : 5);
  return uniform(std::move(chart), per);
}

SampleGrid SampleGrid::uniform(ChartPtr chart, int per_axis) {
  if (per_axis < 2) throw Error("grid needs at least 2 points per axis");
  SampleGrid g;
  g.counts.assign(static_cast<std::size_t>(chart->dim()), per_axis);
  g.chart = std::move(chart);
  return g;
}

std::size_t SampleGrid::size() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

std::vector<double> SampleGrid::point(std::size_t flat) const {
  std::vector<double> p(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) {
    auto c = static_cast<std::size_t>(counts[a]);
    std::size_t i = flat % c;
    flat /= c;
    const Interval& iv = chart->box()[a];
    p[a] = i + 1 == c ? iv.hi : iv.lo + iv.width() * static_cast<double>(i) / static_cast<double>(c - 1);
  }
  return p;
}

double SampleGrid::spacing(int axis) const {
  const Interval& iv = chart->box()[static_cast<std::size_t>(axis)];
  return iv.width() / (counts[static_cast<std::size_t>(axis)] - 1);
}

bool SampleGrid::is_excluded(std::span<const double> p) const {
  for (const auto& box : excluded) {
    bool inside = true;
    for (std::size_t a = 0; a < box.size() && inside; ++a) inside = box[a].contains(p[a]);
    if (inside) return true;
  }
  return false;
}

unsigned thread_count() {
  if (const char* env = std::getenv("FOLDCALC_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n / 64 + 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Helpers

CompiledGradient::CompiledGradient(const Expr& e, const std::vector<std::string>& vars) {
  for (const auto& v : vars) parts_.emplace_back(diff(e, v), vars);
}

Eigen::VectorXd CompiledGradient::operator()(std::span<const double> p) const {
  Eigen::VectorXd g(static_cast<Eigen::Index>(parts_.size()));
  for (std::size_t i = 0; i < parts_.size(); ++i) g(static_cast<Eigen::Index>(i)) = parts_[i](p);
  return g;
}

Eigen::MatrixXd complement_basis(const Eigen::VectorXd& g, int sign) {
  const auto n = g.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd basis = q.rightCols(n - 1);
  if (n > 1) {
    Eigen::MatrixXd full(n, n);
    full.col(0) = g.normalized();
    full.rightCols(n - 1) = basis;
    if ((full.determinant() > 0 ? 1 : -1) != (sign >= 0 ? 1 : -1)) basis.col(n - 2) *= -1.0;
  }
  return basis;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  bool ok = false;
  bool skipped = false;
  double value = 0.0;
  std::string error;
};

struct Sweep {
  double margin = kInf;
  std::vector<double> witness;
  std::size_t samples = 0;
  std::size_t errors = 0;
  std::string first_error;
  std::vector<double> error_point;
};

// Evaluates fn at every non-excluded grid point and keeps the minimum.
Sweep sweep_min(const SampleGrid& grid, const std::function<double(std::span<const double>)>& fn) {
  std::size_t n = grid.size();
  std::vector<Sample> out(n);
  parallel_for(n, [&](std::size_t i) {
    auto p = grid.point(i);
    if (grid.is_excluded(p)) {
      out[i].skipped = true;
      return;
    }
    try {
      out[i].value = fn(p);
      out[i].ok = true;
    } catch (const EvalError& e) {
      out[i].error = e.what();
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  });
  Sweep s;
  for (std::size_t i = 0; i < n; ++i) {
    if (out[i].skipped) continue;
    if (!out[i].ok) {
      if (s.errors++ == 0) {
        s.first_error = out[i].error;
        s.error_point = grid.point(i);
      }
      continue;
    }
    ++s.samples;
    if (out[i].value < s.margin) {
      s.margin = out[i].value;
      s.witness = grid.point(i);
    }
  }
  return s;
}

std::string format_point(const std::vector<double>& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p[i]);
    s += buf;
  }
  return s + ")";
}

void finish(StructureReport& r, const Sweep& s, double tol) {
  r.margin = s.samples ? s.margin : 0.0;
  r.witness = s.witness;
  r.samples = s.samples;
  if (s.errors) {
    r.notes.push_back(std::to_string(s.errors) + " evaluation error(s), first at " + format_point(s.error_point) +
                      ": " + s.first_error);
  }
  if (s.samples == 0) {
    r.verdict = Verdict::Inconclusive;
    r.notes.push_back("no evaluable samples");
  } else if (!(r.margin > tol)) {
    r.verdict = Verdict::Fail;
  } else {
    r.verdict = s.errors ? Verdict::Inconclusive : Verdict::Pass;
  }
}

int half_dim(const Chart& c, bool odd, const char* op) {
  if ((c.dim() % 2 == 1) != odd)
    throw Error(std::string(op) + ": chart dimension must be " + (odd ? "odd" : "even"));
  return c.dim() / 2;
}

DifferentialForm power_or_one(const DifferentialForm& a, int k) {
  if (k == 0) return DifferentialForm::scalar(a.chart(), Expr(1));
  return nwedge(a, k);
}

// Max |d omega| over the grid; 0 when it vanishes symbolically.
double closedness_defect(const DifferentialForm& omega, const SampleGrid& grid) {
  if (omega.degree() == omega.chart()->dim()) return 0.0;
  DifferentialForm d = ext_d(omega);
  if (d.is_zero()) return 0.0;
  CompiledForm cd(d);
  CompiledForm cw(omega);
  Sweep s = sweep_min(grid, [&](std::span<const double> p) { return -cd.max_abs(p) / (1.0 + cw.max_abs(p)); });
  return s.samples ? -s.margin : kInf;
}

int sgn(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace

// ---------------------------------------------------------------------------
// Certifiers

StructureReport check_contact(const DifferentialForm& alpha, const SampleGrid& grid, CheckOptions opt) {
  if (alpha.degree() != 1) throw Error("check_contact: 1-form expected");
  int n = half_dim(*alpha.chart(), true, "check_contact");
  DifferentialForm vol = wedge(alpha, power_or_one(ext_d(alpha), n));
  CompiledForm cv(vol);
  StructureReport r;
  r.property = "contact";
  r.chart = alpha.chart()->id();
  finish(r, sweep_min(grid, [&](std::span<const double> p) { return cv.top(p); }), opt.tol);
  return r;
}

StructureReport check_symplectic(const DifferentialForm& omega, const SampleGrid& grid, CheckOptions opt) {
  if (omega.degree() != 2) throw Error("check_symplectic: 2-form expected");
  int n = half_dim(*omega.chart(), false, "check_symplectic");
  StructureReport r;
  r.property = "symplectic";
  r.chart = omega.chart()->id();
  double defect = closedness_defect(omega, grid);
  r.values["closed_defect"] = defect;
  CompiledForm top(nwedge(omega, n));
  // margin = min |top|; negated when the sign of top is not constant.
  std::atomic<int> seen_pos{0};
  std::atomic<int> seen_neg{0};
  Sweep s = sweep_min(grid, [&](std::span<const double> p) {
    double v = top.top(p);
    if (v > 0) seen_pos = 1;
    if (v < 0) seen_neg = 1;
    return std::abs(v);
  });
  bool mixed = seen_pos && seen_neg;
  r.values["sign"] = mixed ? 0 : (seen_neg ? -1 : 1);
  if (mixed) s.margin = -s.margin;
  finish(r, s, opt.tol);
  if (mixed) r.notes.push_back("top power changes sign");
  if (defect > opt.tol) {
    r.verdict = Verdict::Fail;
    r.margin = -defect;
    r.notes.push_back("d(omega) does not vanish");
  }
  return r;
}

std::vector<std::vector<double>> fold_samples(const Expr& h, const SampleGrid& grid) {
  const auto& vars = grid.chart->vars();
  CompiledExpr ch(h, vars);
  std::size_t n = grid.size();
  std::vector<double> hv(n, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n, [&](std::size_t i) {
    auto p = grid.point(i);
    try {
      hv[i] = ch(p);
    } catch (const EvalError&) {
    }
  });
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (hv[i] == 0.0) {
      auto p = grid.point(i);
      if (!grid.is_excluded(p)) out.push_back(std::move(p));
    }
  }
  std::size_t stride = 1;
  for (std::size_t a = 0; a < grid.counts.size(); ++a) {
    auto c = static_cast<std::size_t>(grid.counts[a]);
    for (std::size_t i = 0; i < n; ++i) {
      if ((i / stride) % c == c - 1) continue;
      std::size_t j = i + stride;
      double h0 = hv[i];
      double h1 = hv[j];
      if (!(h0 * h1 < 0)) continue;
      auto lo = grid.point(i);
      auto hi = grid.point(j);
      double a0 = lo[a];
      double a1 = hi[a];
      double f0 = h0;
      auto mid = lo;
      try {
        for (int step = 0; step < 60; ++step) {
          mid[a] = 0.5 * (a0 + a1);
          double fm = ch(mid);
          if (fm == 0.0) break;
          if ((fm < 0) == (f0 < 0)) {
            a0 = mid[a];
            f0 = fm;
          } else {
            a1 = mid[a];
          }
        }
      } catch (const EvalError&) {
        continue;
      }
      if (!grid.is_excluded(mid)) out.push_back(std::move(mid));
    }
    stride *= c;
  }
  return out;
}

StructureReport check_folded(const DifferentialForm& omega, const FoldSpec& fold, const SampleGrid& grid,
                             CheckOptions opt) {
  if (omega.degree() != 2) throw Error("check_folded: 2-form expected");
  int n = half_dim(*omega.chart(), false, "check_folded");
  Expr h = simplify(fold.h);
  if (h.is_zero()) throw Error("check_folded: fold function vanishes identically");
  const auto& chart = *omega.chart();
  StructureReport r;
  r.property = "folded";
  r.chart = chart.id();

  double defect = closedness_defect(omega, grid);
  r.values["closed_defect"] = defect;

  Expr t = top_coeff(nwedge(omega, n));
  CompiledExpr ct(t, chart.vars());
  CompiledExpr chh(h, chart.vars());
  CompiledGradient gt(t, chart.vars());
  CompiledGradient gh(h, chart.vars());
  CompiledForm cw(omega);

  // Off-fold sign pattern sign(T) = sigma * sign(h).
  int sigma = 0;
  Sweep orient = sweep_min(grid, [&](std::span<const double> p) {
    double hv = chh(p);
    if (std::abs(hv) <= fold.delta) return kInf;
    return -std::abs(ct(p)) * 1.0;
  });
  if (!orient.witness.empty()) sigma = sgn(ct(orient.witness)) * sgn(chh(orient.witness));
  if (sigma == 0) sigma = 1;
  r.values["sigma"] = sigma;
  Sweep off = sweep_min(grid, [&](std::span<const double> p) {
    double hv = chh(p);
    if (std::abs(hv) <= fold.delta) return kInf;
    return sigma * sgn(hv) * ct(p);
  });

  auto locus = fold_samples(h, grid);
  if (locus.empty()) throw Error("check_folded: no fold samples found");
  double nd_min = kInf;
  double nd_max = -kInf;
  double t_max = 0.0;
  int bad_rank = 0;
  std::vector<double> nd_witness;
  std::vector<double> rank_witness;
  std::size_t fold_errors = 0;
  for (const auto& p : locus) {
    try {
      Eigen::VectorXd g = gh(p);
      double gn = g.norm();
      if (gn == 0.0) throw EvalError("grad h vanishes on the fold");
      Eigen::VectorXd grad_t = gt(p);
      double tv = std::abs(ct(p));
      double nd = sigma * grad_t.dot(g) / gn;
      t_max = std::max(t_max, tv / (1.0 + grad_t.norm()));
      if (nd < nd_min) {
        nd_min = nd;
        nd_witness = p;
      }
      nd_max = std::max(nd_max, nd);
      Eigen::MatrixXd v = complement_basis(g);
      Eigen::MatrixXd m = v.transpose() * cw.skew_matrix(p) * v;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      const auto& sv = svd.singularValues();
      double cut = 1e-8 * (sv.size() ? sv(0) : 0.0);
      int rank = 0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > cut && sv(k) > 0) ++rank;
      }
      if (rank != 2 * n - 2) {
        if (bad_rank++ == 0) rank_witness = p;
      }
    } catch (const EvalError&) {
      ++fold_errors;
    }
  }
  r.locus = locus;
  r.values["fold_samples"] = static_cast<double>(locus.size());
  r.values["normal_derivative_min"] = nd_min;
  r.values["normal_derivative_max"] = nd_max;
  r.values["fold_top_max"] = t_max;
  r.values["offfold_margin"] = off.samples ? off.margin : 0.0;

  Sweep combined = off;
  if (nd_min < combined.margin) {
    combined.margin = nd_min;
    combined.witness = nd_witness;
  }
  combined.errors += fold_errors;
  finish(r, combined, opt.tol);
  auto gate = [&](const std::string& why, const std::vector<double>& at) {
    r.verdict = Verdict::Fail;
    r.notes.push_back(why);
    if (r.margin > 0) r.margin = -r.margin;
    if (r.margin == 0) r.margin = -1.0;
    if (!at.empty()) r.witness = at;
  };
  if (defect > opt.tol) gate("d(omega) does not vanish", {});
  if (!(nd_min > fold.delta)) gate("top power not transverse along the fold", nd_witness);
  if (t_max > 1e-8) gate("top power does not vanish on the fold", {});
  if (bad_rank) gate("restriction to the fold lacks maximal rank at " + std::to_string(bad_rank) + " sample(s)",
                     rank_witness);
  return r;
}

StructureReport check_positive_contact_type(const DifferentialForm& lambda, const FoldSpec& fold,
                                            const SampleGrid& grid, CheckOptions opt) {
  if (lambda.degree() != 1) throw Error("check_positive_contact_type: 1-form expected");
  int n = half_dim(*lambda.chart(), false, "check_positive_contact_type");
  const auto& chart = *lambda.chart();
  DifferentialForm omega = ext_d(lambda);
  CompiledExpr ct(top_coeff(nwedge(omega, n)), chart.vars());
  CompiledGradient gh(fold.h, chart.vars());
  CompiledForm cl(wedge(lambda, power_or_one(omega, n - 1)));
  double eta = 0.0;
  for (int a = 0; a < chart.dim(); ++a) eta = std::max(eta, grid.spacing(a));
  eta *= 1e-4;
  StructureReport r;
  r.property = "positive-contact-type";
  r.chart = chart.id();
  auto locus = fold_samples(fold.h, grid);
  if (locus.empty()) throw Error("check_positive_contact_type: no fold samples found");
  Sweep s;
  for (const auto& p : locus) {
    try {
      Eigen::VectorXd g = gh(p);
      // Side of R+ from a central difference of the top power along grad h.
      Eigen::VectorXd step = eta * g / g.norm();
      std::vector<double> pp(p), pm(p);
      for (int a = 0; a < chart.dim(); ++a) {
        pp[a] += step(a);
        pm[a] -= step(a);
      }
      int sigma = sgn(ct(pp) - ct(pm));
      if (sigma == 0) throw EvalError("R+ side undetermined (top power not transverse)");
      // Outward normal of R+ is -sigma grad h; (normal, basis) must be positive.
      Eigen::MatrixXd v = complement_basis(g, -sigma * chart.orientation());
      double val = cl.on_vectors(p, v);
      ++s.samples;
      if (val < s.margin) {
        s.margin = val;
        s.witness = p;
      }
    } catch (const EvalError& e) {
      if (s.errors++ == 0) {
        s.first_error = e.what();
        s.error_point = p;
      }
    }
  }
  r.locus = locus;
  finish(r, s, opt.tol);
  return r;
}

StructureReport check_gradient_like(const VectorField& x, const Expr& phi,
                                    const std::vector<std::vector<double>>& critical_points,
                                    const SampleGrid& grid, double radius, CheckOptions opt) {
  const auto& chart = *x.chart();
  CompiledGradient gphi(phi, chart.vars());
  std::vector<CompiledExpr> cx;
  for (const auto& c : x.components()) cx.emplace_back(c, chart.vars());
  for (const auto& c : critical_points) {
    if (static_cast<int>(c.size()) != chart.dim()) throw Error("critical point dimension mismatch");
    if (gphi(c).norm() > 1e-8) throw Error("declared critical point " + format_point(c) + " is not a zero of dphi");
  }
  auto near_critical = [&](std::span<const double> p) {
    for (const auto& c : critical_points) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) d2 += (p[i] - c[i]) * (p[i] - c[i]);
      if (d2 < radius * radius) return true;
    }
    return false;
  };
  std::mutex mu;
  std::vector<double> undeclared;
  Sweep s = sweep_min(grid, [&](std::span<const double> p) {
    if (near_critical(p)) return kInf;
    Eigen::VectorXd g = gphi(p);
    if (g.norm() <= 1e-12) {
      std::lock_guard lock(mu);
      if (undeclared.empty()) undeclared.assign(p.begin(), p.end());
    }
    double v = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i) v += g(static_cast<Eigen::Index>(i)) * cx[i](p);
    return v;
  });
  if (!undeclared.empty()) throw Error("undeclared zero of dphi at " + format_point(undeclared));
  StructureReport r;
  r.property = "gradient-like";
  r.chart = chart.id();
  finish(r, s, opt.tol);
  return r;
}

StructureReport check_liouville(const DifferentialForm& lambda, const SampleGrid& grid, CheckOptions opt) {
  if (lambda.degree() != 1) throw Error("check_liouville: 1-form expected");
  DifferentialForm omega = ext_d(lambda);
  StructureReport r = check_symplectic(omega, grid, opt);
  r.property = "liouville";
  CompiledForm cw(omega);
  CompiledForm cl(lambda);
  double worst = 0.0;
  std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto p = grid.point(i);
    if (grid.is_excluded(p)) continue;
    try {
      Eigen::VectorXd xv = liouville_at(lambda, p);
      Eigen::VectorXd res = cw.skew_matrix(p).transpose() * xv - cl.covector(p);
      worst = std::max(worst, res.norm() / (1.0 + cl.covector(p).norm()));
    } catch (const EvalError&) {
    }
  }
  r.values["residual_max"] = worst;
  if (worst > 1e-9 && r.verdict == Verdict::Pass) {
    r.verdict = Verdict::Fail;
    r.notes.push_back("Liouville residual above 1e-9");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fields

namespace {

// Determinant of rows [row, n) restricted to the columns in mask.
Expr symbolic_det(const std::vector<std::vector<Expr>>& a, int row, std::uint32_t mask,
                  std::map<std::uint32_t, Expr>& memo) {
  int n = static_cast<int>(a.size());
  if (row == n) return Expr(1);
  if (auto it = memo.find(mask); it != memo.end()) return it->second;
  std::vector<Expr> parts;
  int pos = 0;
  for (int c = 0; c < n; ++c) {
    if (!(mask & (1u << c))) continue;
    const Expr& entry = a[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)];
    if (!entry.is_zero()) {
      Expr minor = symbolic_det(a, row + 1, mask & ~(1u << c), memo);
      if (!minor.is_zero()) {
        Expr t = entry * minor;
        parts.push_back((pos & 1) ? -t : t);
      }
    }
    ++pos;
  }
  Expr v = parts.empty() ? Expr(0) : simplify(Expr::make(ExprKind::Sum, std::move(parts)));
  memo.emplace(mask, v);
  return v;
}

}  // namespace

std::optional<VectorField> liouville_field(const DifferentialForm& lambda) {
  if (lambda.degree() != 1) throw Error("liouville_field: 1-form expected");
  int dim = lambda.chart()->dim();
  if (dim > 6 || dim % 2) return std::nullopt;
  DifferentialForm omega = ext_d(lambda);
  // A X = lambda with A(j, i) = omega(d_i, d_j).
  std::vector<std::vector<Expr>> a(static_cast<std::size_t>(dim), std::vector<Expr>(static_cast<std::size_t>(dim), Expr(0)));
  for (const auto& [m, c] : omega.terms()) {
    auto idx = mask_indices(m);
    a[static_cast<std::size_t>(idx[1])][static_cast<std::size_t>(idx[0])] = c;
    a[static_cast<std::size_t>(idx[0])][static_cast<std::size_t>(idx[1])] = simplify(-c);
  }
  std::uint32_t full = (1u << dim) - 1;
  std::map<std::uint32_t, Expr> memo;
  Expr det = symbolic_det(a, 0, full, memo);
  if (det.is_zero()) return std::nullopt;
  std::vector<Expr> comps;
  for (int i = 0; i < dim; ++i) {
    auto ai = a;
    for (int j = 0; j < dim; ++j) ai[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = lambda.coeff(IndexMask{1} << j);
    std::map<std::uint32_t, Expr> mi;
    comps.push_back(simplify(symbolic_det(ai, 0, full, mi) / det));
  }
  return VectorField(lambda.chart(), comps);
}

Eigen::VectorXd liouville_at(const DifferentialForm& lambda, std::span<const double> p) {
  CompiledForm cw(ext_d(lambda));
  CompiledForm cl(lambda);
  Eigen::MatrixXd a = cw.skew_matrix(p).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (lu.rank() < a.rows()) throw EvalError("d(lambda) is singular at this point");
  return lu.solve(cl.covector(p));
}

Eigen::VectorXd reeb_field(const DifferentialForm& alpha, std::span<const double> p) {
  if (alpha.degree() != 1) throw Error("reeb_field: 1-form expected");
  CompiledForm cw(ext_d(alpha));
  CompiledForm ca(alpha);
  Eigen::MatrixXd w = cw.skew_matrix(p);
  Eigen::VectorXd a = ca.covector(p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  auto d = sv.size();
  if (d >= 2 && !(sv(d - 2) > 1e-8 * std::max(sv(0), 1e-300))) throw EvalError("d(alpha) has kernel dimension above 1");
  Eigen::VectorXd k = svd.matrixV().col(d - 1);
  double ak = a.dot(k);
  if (std::abs(ak) <= 1e-12 * (1.0 + a.norm())) throw EvalError("alpha vanishes on ker d(alpha): not contact");
  return k / ak;
}

Eigen::VectorXd null_foliation(const DifferentialForm& omega, const FoldSpec& fold, std::span<const double> p) {
  if (omega.degree() != 2) throw Error("null_foliation: 2-form expected");
  int n = half_dim(*omega.chart(), false, "null_foliation");
  const auto& chart = *omega.chart();
  CompiledForm cw(omega);
  CompiledGradient gh(fold.h, chart.vars());
  CompiledGradient gt(top_coeff(nwedge(omega, n)), chart.vars());
  Eigen::VectorXd g = gh(p);
  Eigen::MatrixXd w = cw.skew_matrix(p);
  Eigen::MatrixXd v = complement_basis(g);
  Eigen::MatrixXd m = v.transpose() * w * v;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cut = 1e-8 * (sv.size() ? sv(0) : 0.0);
  int nullity = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (!(sv(k) > cut) || sv(k) == 0.0) ++nullity;
  }
  if (nullity != 1) throw Error("null_foliation: kernel dimension " + std::to_string(nullity) + " (expected 1)");
  auto d = sv.size();
  Eigen::VectorXd k = v * svd.matrixV().col(d - 1);
  Eigen::MatrixXd rest = v * svd.matrixV().leftCols(d - 1);
  int sigma = sgn(gt(p).dot(g));
  if (sigma == 0) throw Error("null_foliation: top power not transverse at this point");
  Eigen::MatrixXd frame(chart.dim(), chart.dim());
  frame.col(0) = -sigma * g;
  frame.col(1) = k;
  frame.rightCols(chart.dim() - 2) = rest;
  Eigen::MatrixXd sub = rest.transpose() * w * rest;
  double orient = frame.determinant() * chart.orientation() * pfaffian<double>(sub);
  if (orient < 0) k = -k;
  return k.normalized();
}

VectorField characteristic_director(const Expr& f, const DifferentialForm& beta) {
  if (beta.degree() != 1) throw Error("characteristic_director: 1-form expected");
  int n = half_dim(*beta.chart(), false, "characteristic_director");
  const auto& chart = beta.chart();
  DifferentialForm db = ext_d(beta);
  DifferentialForm dbn1 = power_or_one(db, n - 1);
  DifferentialForm b = wedge(beta, dbn1);
  DifferentialForm df = ext_d(DifferentialForm::scalar(chart, f));
  DifferentialForm omega_f = f * nwedge(db, n) - Expr(n) * wedge(df, b);
  IndexMask full = (IndexMask{1} << chart->dim()) - 1;
  Expr c = omega_f.coeff(full);
  if (c.is_zero()) throw Error("characteristic_director: Omega_f vanishes identically");
  std::vector<Expr> comps;
  for (int i = 0; i < chart->dim(); ++i) {
    Expr bi = b.coeff(full & ~(IndexMask{1} << i));
    comps.push_back(simplify((i % 2 ? -bi : bi) / c));
  }
  return VectorField(chart, comps);
}

CharacteristicFoliation::CharacteristicFoliation(const Expr& f, const DifferentialForm& beta)
    : dim_(beta.chart()->dim()),
      f_(f, beta.chart()->vars()),
      beta_(beta),
      dbeta_(ext_d(beta)),
      director_(characteristic_director(f, beta)) {
  for (const auto& c : director_.components()) y_.emplace_back(c, beta.chart()->vars());
}

CharacteristicDirection CharacteristicFoliation::at(std::span<const double> p) const {
  double fv = f_(p);
  if (std::abs(fv) <= 1e-12) throw Error("characteristic_foliation: point lies on the dividing set");
  Eigen::VectorXd b = beta_.covector(p);
  CharacteristicDirection out;
  if (b.norm() <= 1e-12) {
    out.singular = true;
    out.sign = sgn(fv);
    return out;
  }
  Eigen::MatrixXd k = complement_basis(b);
  Eigen::MatrixXd m = k.transpose() * dbeta_.skew_matrix(p) * k;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::VectorXd dir = k * svd.matrixV().col(svd.singularValues().size() - 1);
  Eigen::VectorXd yv(dim_);
  for (int i = 0; i < dim_; ++i) yv(i) = y_[static_cast<std::size_t>(i)](p);
  if (dir.dot(yv) < 0) dir = -dir;
  out.direction = dir.normalized();
  return out;
}

CharacteristicDirection characteristic_foliation(const Expr& f, const DifferentialForm& beta,
                                                 std::span<const double> p) {
  return CharacteristicFoliation(f, beta).at(p);
}

}  // namespace foldcalc
