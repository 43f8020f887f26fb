#include "foldcalc/lefschetz.hpp"

#include <atomic>

namespace foldcalc {

Page torus_page() {
  IntMatrix j(2, 2);
  j << 0, 1, -1, 0;
  return {"torus", j, 1};
}

Page disk_page() { return {"disk", IntMatrix(0, 0), 1}; }

void validate(const Page& p) {
  if (p.form.rows() != p.form.cols()) throw Error("page '" + p.label + "': intersection form is not square");
  if (p.form != IntMatrix(-p.form.transpose())) throw Error("page '" + p.label + "': intersection form is not skew");
  if (p.boundary_components < 1) throw Error("page '" + p.label + "': needs at least one boundary component");
}

VanishingCycle cycle(std::string label, std::vector<std::int64_t> cls) {
  VanishingCycle c;
  c.label = std::move(label);
  c.cls = Eigen::Map<IntVector>(cls.data(), static_cast<Eigen::Index>(cls.size()));
  c.primitive = gcd_of(c.cls) == 1;
  return c;
}

IntMatrix twist_matrix(const Page& page, const VanishingCycle& c) {
  if (c.cls.size() != page.rank()) {
    throw Error("cycle '" + c.label + "' has " + std::to_string(c.cls.size()) + " entries, page rank is " +
                std::to_string(page.rank()));
  }
  if (gcd_of(c.cls) != 1) throw Error("cycle '" + c.label + "' is not primitive");
  return transvection<std::int64_t>(page.form, c.cls);
}

IntMatrix monodromy_h1(const AbstractWLF& w) {
  IntMatrix m = IntMatrix::Identity(w.page.rank(), w.page.rank());
  for (const auto& c : w.cycles) m = twist_matrix(w.page, c) * m;
  return m;
}

const char* wlf_verdict_name(WlfVerdict v) {
  switch (v) {
    case WlfVerdict::EqualOnHomology: return "EqualOnHomology";
    case WlfVerdict::Distinct: return "Distinct";
    default: return "Inconclusive";
  }
}

WlfReport check_folded_wlf(const FoldedWLF& fw) {
  WlfReport r;
  try {
    validate(fw.page);
    r.plus = monodromy_h1({fw.page, fw.plus});
    r.minus = monodromy_h1({fw.page, fw.minus});
  } catch (const Error& e) {
    r.note = e.what();
    return r;
  }
  if (r.plus == r.minus) {
    r.verdict = WlfVerdict::EqualOnHomology;
    r.necessary_only = true;
    r.note = "monodromies agree on H_1; symplectic isotopy is not decided";
  } else {
    r.verdict = WlfVerdict::Distinct;
    r.note = "monodromies differ on H_1";
  }
  return r;
}

Page extend_page(const Page& p, const StabilizationSpec& d) {
  validate(p);
  int r = p.rank();
  if (static_cast<int>(d.pairings.size()) != r) {
    throw Error("stabilization: " + std::to_string(d.pairings.size()) + " pairings for a rank " + std::to_string(r) +
                " page");
  }
  if (d.boundary_delta != 1 && d.boundary_delta != -1) throw Error("stabilization: boundary change must be +1 or -1");
  Page out;
  out.label = p.label + "+h";
  out.boundary_components = p.boundary_components + d.boundary_delta;
  if (out.boundary_components < 1) throw Error("stabilization: boundary count would drop below one");
  out.form = IntMatrix::Zero(r + 1, r + 1);
  out.form.topLeftCorner(r, r) = p.form;
  for (int i = 0; i < r; ++i) {
    out.form(i, r) = d.pairings[i];
    out.form(r, i) = -d.pairings[i];
  }
  return out;
}

AbstractWLF stabilize(const AbstractWLF& w, const StabilizationSpec& d) {
  AbstractWLF out;
  out.page = extend_page(w.page, d);
  int r = w.page.rank();
  if (static_cast<int>(d.cls.size()) != r + 1) throw Error("stabilization: new class must have rank + 1 entries");
  if (d.cls.back() != 1 && d.cls.back() != -1) {
    throw Error("stabilization: new class must meet the handle core once (coefficient +-1 on the new element)");
  }
  out.cycles.push_back(cycle(d.label, d.cls));
  for (const auto& c : w.cycles) {
    VanishingCycle e = c;
    e.cls = IntVector::Zero(r + 1);
    e.cls.head(r) = c.cls;
    out.cycles.push_back(e);
  }
  return out;
}

IntMatrix extended_monodromy(const AbstractWLF& w, const Page& extended) {
  AbstractWLF e{extended, {}};
  for (const auto& c : w.cycles) {
    VanishingCycle x = c;
    x.cls = IntVector::Zero(extended.rank());
    x.cls.head(c.cls.size()) = c.cls;
    e.cycles.push_back(x);
  }
  return monodromy_h1(e);
}

// ---------------------------------------------------------------------------
// Search

namespace {

// Vectors in {-1, 0, 1}^r, indexed in base 3.
IntVector ternary(std::size_t k, int r) {
  IntVector v(r);
  for (int i = 0; i < r; ++i) {
    v[i] = static_cast<std::int64_t>(k % 3) - 1;
    k /= 3;
  }
  return v;
}

std::size_t pow3(int r) {
  std::size_t n = 1;
  for (int i = 0; i < r; ++i) n *= 3;
  return n;
}

struct Move {
  IntVector pairings;
  IntVector a;
  IntVector b;
};

IntMatrix word_monodromy(const IntMatrix& j, const std::vector<IntVector>& word) {
  IntMatrix m = IntMatrix::Identity(j.rows(), j.rows());
  for (const auto& c : word) m = transvection<std::int64_t>(j, c) * m;
  return m;
}

std::vector<IntVector> pad(const std::vector<IntVector>& word) {
  std::vector<IntVector> out;
  for (const auto& c : word) {
    IntVector x = IntVector::Zero(c.size() + 1);
    x.head(c.size()) = c;
    out.push_back(x);
  }
  return out;
}

struct Search {
  int depth;
  std::size_t max_nodes;
  std::atomic<std::size_t>& nodes;
  std::atomic<bool>& truncated;

  // Words wa, wb on the shared page j; new cycles are prepended.
  bool dfs(const IntMatrix& j, const std::vector<IntVector>& wa, const std::vector<IntVector>& wb, int level,
           std::vector<Move>& path) {
    if (word_monodromy(j, wa) == word_monodromy(j, wb)) return true;
    if (level == depth) return false;
    int r = static_cast<int>(j.rows());
    std::size_t n = pow3(r);
    for (std::size_t p = 0; p < n; ++p) {
      IntVector pr = ternary(p, r);
      IntMatrix j2 = IntMatrix::Zero(r + 1, r + 1);
      j2.topLeftCorner(r, r) = j;
      j2.col(r).head(r) = pr;
      j2.row(r).head(r) = -pr.transpose();
      auto wa2 = pad(wa);
      auto wb2 = pad(wb);
      wa2.insert(wa2.begin(), IntVector());
      wb2.insert(wb2.begin(), IntVector());
      for (std::size_t x = 0; x < n; ++x) {
        IntVector ca(r + 1);
        ca << ternary(x, r), 1;
        wa2.front() = ca;
        for (std::size_t y = 0; y < n; ++y) {
          if (nodes.fetch_add(1) >= max_nodes) {
            truncated = true;
            return false;
          }
          IntVector cb(r + 1);
          cb << ternary(y, r), 1;
          wb2.front() = cb;
          path.push_back({pr, ca, cb});
          if (dfs(j2, wa2, wb2, level + 1, path)) return true;
          path.pop_back();
        }
      }
    }
    return false;
  }
};

}  // namespace

SearchResult common_stabilization_search(const AbstractWLF& a, const AbstractWLF& b, int budget,
                                         std::size_t max_nodes) {
  validate(a.page);
  validate(b.page);
  bool same = a.page.rank() == b.page.rank() && a.page.form == b.page.form &&
              a.page.boundary_components == b.page.boundary_components;
  if (!same)
    throw Error("common_stabilization_search: the two fibrations must start on the same page");
  SearchResult out;
  std::vector<IntVector> wa;
  std::vector<IntVector> wb;
  for (const auto& c : a.cycles) wa.push_back(c.cls);
  for (const auto& c : b.cycles) wb.push_back(c.cls);
  monodromy_h1(a);  // rejects bad classes before searching
  monodromy_h1(b);
  std::atomic<std::size_t> nodes{0};
  std::atomic<bool> truncated{false};

  for (int depth = 0; depth <= budget && !out.found; ++depth) {
    std::vector<Move> path;
    Search s{depth, max_nodes, nodes, truncated};
    bool hit = s.dfs(a.page.form, wa, wb, 0, path);
    if (hit) {
      AbstractWLF sa = a;
      AbstractWLF sb = b;
      int k = 0;
      for (const auto& m : path) {
        StabilizationSpec da;
        da.pairings.assign(m.pairings.data(), m.pairings.data() + m.pairings.size());
        da.cls.assign(m.a.data(), m.a.data() + m.a.size());
        da.label = "S" + std::to_string(++k);
        StabilizationSpec db = da;
        db.cls.assign(m.b.data(), m.b.data() + m.b.size());
        sa = stabilize(sa, da);
        sb = stabilize(sb, db);
      }
      out.found = FoldedWLF{sa.page, sa.cycles, sb.cycles};
      out.stabilizations = depth;
    }
    if (truncated) break;
  }
  out.explored = nodes;
  out.truncated = truncated;
  return out;
}

}  // namespace foldcalc
