#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "foldcalc/forms.hpp"

namespace foldcalc::testing {

inline ChartPtr cube_chart(int dim, const std::string& prefix = "x") {
  std::vector<std::string> vars;
  std::vector<Interval> box;
  for (int i = 0; i < dim; ++i) {
    vars.push_back(prefix + std::to_string(i + 1));
    box.push_back({-1.0, 1.0});
  }
  return make_chart("cube" + std::to_string(dim), vars, box);
}

// Smooth, everywhere-defined coefficient on [-1, 1]^d.
inline Expr random_coeff(std::mt19937& rng, const std::vector<std::string>& vars, int depth) {
  std::uniform_int_distribution<int> small(-3, 3);
  auto leaf = [&]() -> Expr {
    if (rng() % 3 == 0) return rational(small(rng), 1 + static_cast<int>(rng() % 2));
    return var(vars[rng() % vars.size()]);
  };
  if (depth <= 0) return leaf();
  switch (rng() % 7) {
    case 0: return leaf();
    case 1: return random_coeff(rng, vars, depth - 1) + random_coeff(rng, vars, depth - 1);
    case 2: return random_coeff(rng, vars, depth - 1) * random_coeff(rng, vars, depth - 1);
    case 3: return sin(random_coeff(rng, vars, depth - 1));
    case 4: return exp(random_coeff(rng, vars, depth - 1) / Expr(3));
    case 5: return random_coeff(rng, vars, depth - 1) / (Expr(2) + cos(random_coeff(rng, vars, depth - 1)));
    default: return pow(random_coeff(rng, vars, depth - 1), 2);
  }
}

inline DifferentialForm random_form(std::mt19937& rng, const ChartPtr& chart, int degree, int depth = 2) {
  DifferentialForm out(chart, degree);
  int dim = chart->dim();
  for (IndexMask m = 0; m < (IndexMask{1} << dim); ++m) {
    if (popcount(m) != degree) continue;
    if (rng() % 3 == 0) continue;
    out.add(m, random_coeff(rng, chart->vars(), depth));
  }
  return out;
}

inline VectorField random_field(std::mt19937& rng, const ChartPtr& chart, int depth = 2) {
  std::vector<Expr> c;
  for (int i = 0; i < chart->dim(); ++i) c.push_back(random_coeff(rng, chart->vars(), depth));
  return VectorField(chart, c);
}

inline std::vector<double> random_point(std::mt19937& rng, const Chart& chart) {
  std::vector<double> p;
  for (const auto& iv : chart.box()) {
    std::uniform_real_distribution<double> u(iv.lo, iv.hi);
    p.push_back(u(rng));
  }
  return p;
}

/// Largest |coefficient| of a - b over random points, relative to 1 + |a|.
inline double max_rel_diff(const DifferentialForm& a, const DifferentialForm& b, std::mt19937& rng,
                           int samples = 20) {
  DifferentialForm d = a - b;
  if (d.is_zero()) return 0.0;
  CompiledForm cd(d);
  CompiledForm ca(a);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    auto p = random_point(rng, *a.chart());
    worst = std::max(worst, cd.max_abs(p) / (1.0 + ca.max_abs(p)));
  }
  return worst;
}

}  // namespace foldcalc::testing
