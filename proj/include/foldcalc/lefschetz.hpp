#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "foldcalc/expr.hpp"

namespace foldcalc {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// A page with its first homology: `form` is the intersection pairing in the
/// chosen basis, <e_i, e_j> = form(i, j).
struct Page {
  std::string label;
  IntMatrix form;
  int boundary_components = 1;

  int rank() const { return static_cast<int>(form.rows()); }
};

/// Basis {a, b} with <a, b> = 1, one boundary component.
Page torus_page();
/// Rank 0, one boundary component.
Page disk_page();

/// Throws Error unless the form is square, skew and the boundary count positive.
void validate(const Page& p);

struct VanishingCycle {
  std::string label;
  IntVector cls;
  bool primitive = true;
};

VanishingCycle cycle(std::string label, std::vector<std::int64_t> cls);

struct AbstractWLF {
  Page page;
  std::vector<VanishingCycle> cycles;
};

struct FoldedWLF {
  Page page;
  std::vector<VanishingCycle> plus;
  std::vector<VanishingCycle> minus;
};

template <typename S>
S gcd_of(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v) {
  S g = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) g = std::gcd(g, v[i] < 0 ? -v[i] : v[i]);
  return g;
}

/// T_c(x) = x + <x, c> c, i.e. I + c (J c)^T with <x, c> = x^T J c.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> transvection(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& j,
                                                            const Eigen::Matrix<S, Eigen::Dynamic, 1>& c) {
  using M = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  return M::Identity(j.rows(), j.rows()) + c * (j * c).transpose();
}

/// The positive twist about c on H_1 of the page; throws on a class of the
/// wrong length or a non-primitive class.
IntMatrix twist_matrix(const Page& page, const VanishingCycle& c);

/// T_{L_k} ... T_{L_1}: the first cycle acts first.
IntMatrix monodromy_h1(const AbstractWLF& w);

enum class WlfVerdict { EqualOnHomology, Distinct, Inconclusive };
const char* wlf_verdict_name(WlfVerdict v);

struct WlfReport {
  WlfVerdict verdict = WlfVerdict::Inconclusive;
  /// Always true on EqualOnHomology: equal H_1 monodromy does not give
  /// symplectic isotopy.
  bool necessary_only = false;
  IntMatrix plus;
  IntMatrix minus;
  std::string note;
};

WlfReport check_folded_wlf(const FoldedWLF& fw);

/// A critical handle: rank + 1, new basis element e with <e_i, e> = pairings[i],
/// boundary count changed by boundary_delta (+1 or -1). The new cycle's class
/// lives in the extended basis and must have coefficient +-1 on e.
struct StabilizationSpec {
  std::vector<std::int64_t> pairings;
  int boundary_delta = 1;
  std::vector<std::int64_t> cls;
  std::string label = "L";
};

Page extend_page(const Page& p, const StabilizationSpec& d);
/// (W0 u h; L, old cycles): the new cycle is prepended.
AbstractWLF stabilize(const AbstractWLF& w, const StabilizationSpec& d);

/// Monodromy of w's cycles, included in the old basis of the extended page.
/// This is the H_1 action of the old monodromy extended by the identity over
/// the handle: the old block is unchanged and the old span is invariant, but
/// the new basis element picks up old components when it pairs with the cycles.
IntMatrix extended_monodromy(const AbstractWLF& w, const Page& extended);

struct SearchResult {
  std::optional<FoldedWLF> found;
  int stabilizations = 0;
  std::size_t explored = 0;
  /// Node cap reached before the budget was exhausted.
  bool truncated = false;
};

/// Bounded search over simultaneous stabilizations of a and b along the same
/// handle, with pairings and classes drawn from {-1, 0, 1}. A miss is not a
/// refutation.
SearchResult common_stabilization_search(const AbstractWLF& a, const AbstractWLF& b, int budget,
                                         std::size_t max_nodes = 2000000);

}  // namespace foldcalc
