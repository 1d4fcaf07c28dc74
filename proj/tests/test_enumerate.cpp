#include <chrono>
#include <cmath>

#include "doctest.h"
#include "lenspec/enumerate.hpp"
#include "group_checks.hpp"
#include "oracle.hpp"

using namespace lenspec;
using namespace checks;

TEST_CASE("library generators match the closed forms") {
  for (const Signature& s : {Signature{2, 3, 7}, Signature{2, 5, 0}, Signature{2, 3, 0}, Signature{2, 6, 10}}) {
    const auto lib = generator_matrices(*TriangleGroup::build(s));
    const auto ref = oracle::generators(s);
    for (int l = 0; l < 4; ++l) {
      CHECK(std::abs(lib[l].a - static_cast<double>(ref[l].a)) < 1e-15);
      CHECK(std::abs(lib[l].b - static_cast<double>(ref[l].b)) < 1e-15);
      CHECK(std::abs(lib[l].c - static_cast<double>(ref[l].c)) < 1e-15);
      CHECK(std::abs(lib[l].d - static_cast<double>(ref[l].d)) < 1e-15);
    }
  }
}

TEST_CASE("small radius keeps only the stabilizer of i") {
  EnumerationConfig cfg;
  cfg.max_length = 1e-3;
  cfg.r_cut = 1e-3;
  const ElementStore store = enumerate_ball(TriangleGroup::build({2, 3, 7}), cfg);
  // identity, A (order 2 fixes i); nothing else fixes i
  for (std::size_t i = 0; i < store.size(); ++i) CHECK(store.cosh_displacement(i) < 1 + 1e-9);
  CHECK(store.size() == 2);
}

TEST_CASE("unpruned short words match brute force") {
  for (const auto& [s, cap] : {std::pair{Signature{2, 3, 0}, 2}, std::pair{Signature{2, 5, 0}, 6}}) {
    EnumerationConfig cfg;
    cfg.max_length = 1;
    cfg.prune = false;
    cfg.word_cap = cap;
    const ElementStore store = enumerate_ball(TriangleGroup::build(s), cfg);
    CHECK(store.size() == oracle::naive_ball(s, cap).mats.size());
  }
}

TEST_CASE("pruned elements equal the naive ball at word cap 8") {
  for (const auto& [s, L] : {std::pair{Signature{2, 3, 0}, 1.5}, std::pair{Signature{2, 5, 0}, 2.0},
                             std::pair{Signature{2, 3, 7}, 1.5}}) {
    CAPTURE(s.to_string());
    const ElementComparison r = compare_elements(s, L);
    MESSAGE(s.to_string() << ": store " << r.store << ", oracle in ball " << r.oracle_in_ball << ", boundary "
                          << r.boundary);
    CHECK(r.missing == 0);
    CHECK(r.extra == 0);
    CHECK(r.store == r.oracle_in_ball);
  }
}

TEST_CASE("classes of PSL2(Z) against cyclic L/R words") {
  for (double L : {4.0, 6.0, 9.0}) {
    CAPTURE(L);
    const ClassReport cr = library_classes({2, 3, 0}, L);
    const auto ref = oracle::modular_classes(L);
    const ClassComparison r = compare_classes(cr, ref, L);
    CHECK(r.library == r.oracle);
    CHECK(r.mismatched == 0);
    CHECK(r.undecided == 0);
    CHECK(r.missing == 0);
    if (L == 9.0) {
      std::size_t prim = 0;
      for (const auto& c : ref) prim += c.primitive;
      CHECK(prim == 517);
    }
  }
}

TEST_CASE("classes and primitive flags against the naive conjugacy oracle") {
  struct Case {
    Signature s;
    double L;
    int w0, w;
  };
  // word caps sit above the longest class representative; the second (2,3,7)
  // row checks that the oracle count is stable in the cap
  for (const Case& c : {Case{{2, 3, 7}, 6.0, 28, 32}, Case{{2, 3, 7}, 6.0, 30, 34}, Case{{2, 5, 0}, 5.0, 15, 19},
                        Case{{2, 3, 0}, 4.0, 14, 18}}) {
    CAPTURE(c.s.to_string());
    const ClassReport cr = library_classes(c.s, c.L);
    const oracle::Ball ball = oracle::naive_ball(c.s, c.w);
    const auto ref = oracle::naive_classes(ball, c.s, c.L, c.w0);
    const ClassComparison r = compare_classes(cr, ref, c.L);
    MESSAGE(c.s.to_string() << " L=" << c.L << ": library " << r.library << ", oracle " << r.oracle);
    CHECK(r.library == r.oracle);
    CHECK(r.mismatched == 0);
    CHECK(r.undecided == 0);
    CHECK(r.missing == 0);
  }
}

TEST_CASE("class invariants") {
  EnumerationConfig cfg;
  cfg.max_length = 6;
  const ElementStore store = enumerate_ball(TriangleGroup::build({2, 5, 0}), cfg);
  ClassReport cr = conjugacy_classes(store, 6);
  primitive_split(store, cr);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < cr.member_index.size(); ++k) {
    const uint32_t i = cr.member_index[k];
    const GeodesicClass& c = cr.classes[cr.member_class[k]];
    CHECK(canonical_trace_of(store, i) == c.trace);
    ++checked;
  }
  CHECK(checked > 0);
  for (const GeodesicClass& c : cr.classes) {
    CHECK(c.length <= 6 + 1e-12);
    if (c.primitive) continue;
    REQUIRE(c.root >= 0);
    const GeodesicClass& root = cr.classes[c.root];
    CHECK(root.primitive);
    // tr(g^n) from tr(g) via the Chebyshev recursion
    FieldElement prev = FieldElement::from_rational(root.trace.field(), 2), cur = root.trace;
    for (int k = 1; k < c.power; ++k) {
      FieldElement next = root.trace * cur - prev;
      prev = cur;
      cur = next;
    }
    CHECK(canonical_trace(cur) == c.trace);
    if (c.power == 2) CHECK(squared_trace(root.trace) == c.trace);
  }
  // the systole is the smallest trace above 2 among all stored elements
  FieldElement best;
  bool have = false;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const FieldElement t = canonical_trace(store.trace(i));
    if (compare(t, FieldElement::from_rational(t.field(), 2)) <= 0) continue;
    if (!have || compare(t, best) < 0) best = t, have = true;
  }
  REQUIRE(have);
  CHECK(cr.classes.front().trace == best);
  CHECK(std::abs(cr.classes.front().length - length_from_trace(best).mid()) < 1e-14);
}

TEST_CASE("doubled precision gives the same store") {
  EnumerationConfig cfg;
  cfg.max_length = 5;
  const ElementStore a = enumerate_ball(TriangleGroup::build({2, 6, 10}), cfg);
  cfg.bits = 256;
  const ElementStore b = enumerate_ball(TriangleGroup::build({2, 6, 10}, 256), cfg);
  REQUIRE(a.size() == b.size());
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += b.find(a.quad(i)).has_value();
  CHECK(same == a.size());
}

TEST_CASE("serial and parallel enumeration agree") {
  EnumerationConfig cfg;
  cfg.max_length = 5;
  const ElementStore a = enumerate_ball(TriangleGroup::build({2, 5, 0}), cfg);
  cfg.parallel = false;
  const ElementStore b = enumerate_ball(TriangleGroup::build({2, 5, 0}), cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.parent(i) == b.parent(i));
    REQUIRE(a.last_letter(i) == b.last_letter(i));
  }
}

TEST_CASE("counts at a smaller bound agree between runs") {
  const ClassReport six = library_classes({2, 3, 7}, 6);
  EnumerationConfig cfg;
  cfg.max_length = 7;
  const ElementStore big = enumerate_ball(TriangleGroup::build({2, 3, 7}), cfg);
  ClassReport at6 = conjugacy_classes(big, 6);
  primitive_split(big, at6);
  REQUIRE(six.classes.size() == at6.classes.size());
  for (std::size_t i = 0; i < six.classes.size(); ++i) {
    CHECK(six.classes[i].trace == at6.classes[i].trace);
    CHECK(six.classes[i].primitive == at6.classes[i].primitive);
  }
}

TEST_CASE("bad configurations are refused") {
  EnumerationConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.max_length = 3;
  cfg.max_trace = 10;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.max_trace.reset();
  cfg.word_cap = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
