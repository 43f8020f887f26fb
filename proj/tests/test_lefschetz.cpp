#include <random>

#include "doctest.h"
#include "foldcalc/lefschetz.hpp"

using namespace foldcalc;

namespace {

IntMatrix mat(int r, std::initializer_list<std::int64_t> v) {
  IntMatrix m(r, r);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = *it++;
  return m;
}

// Random skew integer form of the given rank and a random primitive class.
Page random_page(std::mt19937& rng, int r) {
  std::uniform_int_distribution<int> e(-2, 2);
  IntMatrix j = IntMatrix::Zero(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      j(a, b) = e(rng);
      j(b, a) = -j(a, b);
    }
  return {"random", j, 1};
}

VanishingCycle random_primitive(std::mt19937& rng, int r) {
  std::uniform_int_distribution<int> e(-3, 3);
  while (true) {
    std::vector<std::int64_t> v(r);
    for (auto& x : v) x = e(rng);
    auto c = cycle("c", v);
    if (c.primitive) return c;
  }
}

}  // namespace

TEST_CASE("twist matrices on the torus page") {
  auto t = torus_page();
  auto a = cycle("a", {1, 0});
  auto b = cycle("b", {0, 1});
  // T_a(a) = a, T_a(b) = b + <b, a> a = b - a.
  CHECK(twist_matrix(t, a) == mat(2, {1, -1, 0, 1}));
  // T_b(a) = a + <a, b> b = a + b.
  CHECK(twist_matrix(t, b) == mat(2, {1, 0, 1, 1}));
  CHECK(twist_matrix(t, a).cast<double>().determinant() == 1.0);

  Page flat{"flat", IntMatrix::Zero(3, 3), 2};
  CHECK(twist_matrix(flat, cycle("c", {1, 2, 3})) == IntMatrix::Identity(3, 3));

  CHECK_THROWS_AS(twist_matrix(t, cycle("2a", {2, 0})), Error);
  CHECK_THROWS_AS(twist_matrix(t, cycle("z", {0, 0})), Error);
  CHECK_THROWS_AS(twist_matrix(t, cycle("long", {1, 0, 0})), Error);
  CHECK_FALSE(cycle("2a", {2, 0}).primitive);
}

TEST_CASE("transvections preserve the intersection form") {
  std::mt19937 rng(17);
  for (int k = 0; k < 100; ++k) {
    int r = 1 + static_cast<int>(rng() % 8);
    auto p = random_page(rng, r);
    auto c = random_primitive(rng, r);
    IntMatrix m = twist_matrix(p, c);
    CHECK(IntMatrix(m.transpose() * p.form * m) == p.form);
    CHECK(std::llround(m.cast<double>().determinant()) == 1);
  }
}

TEST_CASE("monodromy words") {
  auto t = torus_page();
  auto a = cycle("a", {1, 0});
  auto b = cycle("b", {0, 1});
  CHECK(monodromy_h1({t, {}}) == IntMatrix::Identity(2, 2));
  // a first, then b: T_b T_a.
  CHECK(monodromy_h1({t, {a, b}}) == mat(2, {1, -1, 1, 0}));
  CHECK(monodromy_h1({t, {a, b, a}}) == monodromy_h1({t, {b, a, b}}));
  CHECK(monodromy_h1({t, {a, b, a}}) == mat(2, {0, -1, 1, 0}));
  CHECK(monodromy_h1({t, {a, a, a}}) == mat(2, {1, -3, 0, 1}));
}

TEST_CASE("folded fibration verdicts") {
  auto t = torus_page();
  auto a = cycle("a", {1, 0});
  auto b = cycle("b", {0, 1});
  auto dbl = check_folded_wlf({t, {a, b, b}, {a, b, b}});
  CHECK(dbl.verdict == WlfVerdict::EqualOnHomology);
  CHECK(dbl.necessary_only);
  CHECK(check_folded_wlf({t, {a}, {b}}).verdict == WlfVerdict::Distinct);
  auto braid = check_folded_wlf({t, {a, b, a}, {b, a, b}});
  CHECK(braid.verdict == WlfVerdict::EqualOnHomology);
  CHECK(braid.necessary_only);
  CHECK(check_folded_wlf({t, {cycle("2a", {2, 0})}, {}}).verdict == WlfVerdict::Inconclusive);

  std::mt19937 rng(5);
  for (int k = 0; k < 20; ++k) {
    int r = 2 + static_cast<int>(rng() % 5);
    auto p = random_page(rng, r);
    std::vector<VanishingCycle> w;
    for (int i = 0; i < 4; ++i) w.push_back(random_primitive(rng, r));
    CHECK(check_folded_wlf({p, w, w}).verdict == WlfVerdict::EqualOnHomology);
  }
}

TEST_CASE("stabilization") {
  AbstractWLF disk{disk_page(), {}};
  auto s = stabilize(disk, {{}, 1, {1}, "L"});
  CHECK(s.page.rank() == 1);
  CHECK(s.page.boundary_components == 2);
  CHECK(s.cycles.size() == 1);

  auto t = torus_page();
  AbstractWLF w{t, {cycle("a", {1, 0}), cycle("b", {0, 1})}};
  StabilizationSpec d{{1, 0}, 1, {0, 1, 1}, "L1"};
  auto s1 = stabilize(w, d);
  CHECK(s1.page.form == mat(3, {0, 1, 1, -1, 0, 0, -1, 0, 0}));
  IntMatrix tl = twist_matrix(s1.page, s1.cycles.front());
  IntMatrix old = extended_monodromy(w, s1.page);
  IntMatrix m = monodromy_h1(s1);
  CHECK(m == IntMatrix(old * tl));
  // Conjugate by T_L to the boundary open book form T_L (old extended).
  IntMatrix tl_inv = IntMatrix(2 * IntMatrix::Identity(3, 3) - tl);
  CHECK(IntMatrix(tl * tl_inv) == IntMatrix::Identity(3, 3));
  CHECK(IntMatrix(tl * m * tl_inv) == IntMatrix(tl * old));
  // The old span is invariant and its block is the old monodromy.
  CHECK(old.topLeftCorner(2, 2) == monodromy_h1(w));
  CHECK(old.row(2).head(2).isZero());
  CHECK(old(2, 2) == 1);
  // e3 pairs with a: T_a(e3) = e3 + <e3, a> a = e3 - a, then T_b(e3 - a) = e3 - a - b.
  CHECK(old.col(2) == (IntVector(3) << -1, -1, 1).finished());
  // With no pairings the extension is old (+) id.
  auto s0 = stabilize(w, {{0, 0}, 1, {1, 0, 1}, "L0"});
  IntMatrix plain = IntMatrix::Identity(3, 3);
  plain.topLeftCorner(2, 2) = monodromy_h1(w);
  CHECK(extended_monodromy(w, s0.page) == plain);

  auto s2 = stabilize(s1, {{0, 0, 1}, -1, {1, 0, 0, 1}, "L2"});
  REQUIRE(s2.cycles.size() == 4);
  CHECK(s2.cycles[0].label == "L2");
  CHECK(s2.cycles[1].label == "L1");
  CHECK(s2.cycles[2].label == "a");
  CHECK(s2.page.boundary_components == 1);

  CHECK_THROWS_AS(stabilize(w, {{1}, 1, {0, 1, 1}}), Error);
  CHECK_THROWS_AS(stabilize(w, {{1, 0}, 1, {0, 1, 2}}), Error);
  CHECK_THROWS_AS(stabilize(w, {{1, 0}, 2, {0, 1, 1}}), Error);
  CHECK_THROWS_AS(stabilize(disk, {{}, -1, {1}}), Error);
}

TEST_CASE("common stabilization search") {
  auto t = torus_page();
  auto a = cycle("a", {1, 0});
  auto b = cycle("b", {0, 1});
  AbstractWLF x{t, {a, b}};
  auto same = common_stabilization_search(x, x, 2);
  REQUIRE(same.found);
  CHECK(same.stabilizations == 0);

  auto braid = common_stabilization_search({t, {a, b, a}}, {t, {b, a, b}}, 2);
  REQUIRE(braid.found);
  CHECK(braid.stabilizations == 0);

  CHECK_FALSE(common_stabilization_search({t, {a}}, {t, {}}, 0).found);

  // Budget 1 explores all 3^6 moves on the torus page without a hit.
  auto one = common_stabilization_search({t, {a}}, {t, {}}, 1);
  CHECK_FALSE(one.found);
  CHECK(one.explored == 729);
  CHECK_FALSE(one.truncated);

  // Two stabilizations make (a) and (b) agree on homology; the hit is
  // re-certified from its cycle lists alone.
  auto two = common_stabilization_search({t, {a}}, {t, {b}}, 2);
  REQUIRE(two.found);
  CHECK(two.stabilizations == 2);
  CHECK(two.found->page.rank() == 4);
  CHECK(two.found->plus.back().label == "a");
  CHECK(two.found->minus.back().label == "b");
  CHECK(check_folded_wlf(*two.found).verdict == WlfVerdict::EqualOnHomology);

  auto capped = common_stabilization_search({t, {a}}, {t, {b}}, 2, 1000);
  CHECK_FALSE(capped.found);
  CHECK(capped.truncated);

  CHECK_THROWS_AS(common_stabilization_search({t, {}}, {disk_page(), {}}, 1), Error);
}
