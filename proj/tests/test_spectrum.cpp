#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "lenspec/spectrum.hpp"
#include "oracle.hpp"

using namespace lenspec;

namespace {

struct Run {
  ElementStore store;
  ClassReport classes;
  TraceSet all, squares;
};

// Runs are shared between test cases.
const Run& run(const Signature& s, double L) {
  static std::map<std::pair<std::string, double>, Run> cache;
  auto key = std::make_pair(s.to_string(), L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Run r;
  EnumerationConfig cfg;
  cfg.max_length = L;
  r.store = enumerate_ball(TriangleGroup::build(s), cfg);
  r.classes = conjugacy_classes(r.store, L);
  primitive_split(r.store, r.classes);
  r.all = build_trace_set(r.store, r.classes, SubgroupMode::Full);
  r.squares = build_trace_set(r.store, r.classes, SubgroupMode::Squares);
  return cache.emplace(key, std::move(r)).first->second;
}

TraceEntry entry(const FieldElement& t) {
  TraceEntry e;
  e.trace = t;
  e.value = t.approx();
  for (int i = 0; i < t.field()->degree; ++i) e.conjugates.push_back(t.approx(i));
  return e;
}

}  // namespace

TEST_CASE("trace counting") {
  const Run& r = run({2, 5, 0}, 5);
  CHECK(trace_counting(r.all, 2) == 0);
  std::size_t prev = 0;
  for (double T = 2; T <= 12; T += 0.125) {
    const std::size_t n = trace_counting(r.all, T);
    CHECK(n >= prev);
    prev = n;
  }
  CHECK_THROWS_AS(trace_counting(r.all, 100), IncompleteEnumeration);
  for (const TraceEntry& e : r.all.entries) CHECK(is_algebraic_integer(e.trace));
  for (std::size_t i = 1; i < r.all.entries.size(); ++i)
    CHECK(compare(r.all.entries[i - 1].trace, r.all.entries[i].trace) < 0);
}

TEST_CASE("distinct traces up to 10 in (2,5,inf) against the naive ball") {
  const Run& r = run({2, 5, 0}, 5);
  // every class with trace <= 10 has a representative of word length <= 15
  const oracle::Ball ball = oracle::naive_ball({2, 5, 0}, 16);
  std::vector<double> t;
  for (const oracle::M& m : ball.mats) {
    const double v = static_cast<double>(oracle::qabs(oracle::tr(m)));
    if (v > 2 + 1e-9 && v <= 10) t.push_back(v);
  }
  std::sort(t.begin(), t.end());
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i == 0 || t[i] - t[i - 1] > 1e-9 * t[i]) ++distinct;
  CHECK(trace_counting(r.all, 10) == distinct);
}

TEST_CASE("counting functions") {
  const Run& r = run({2, 3, 7}, 6);
  const double systole = r.classes.classes.front().length;
  const auto below = counting_functions(r.classes, r.all, {systole / 2});
  CHECK(below[0].N == 0);
  CHECK(below[0].Nprime == 0);
  CHECK_FALSE(below[0].mean.has_value());
  CHECK(below[0].pgt == 0);
  const auto one = counting_functions(r.classes, r.all, {systole + 1e-6});
  CHECK(one[0].N == 1);
  CHECK(one[0].Nprime == 1);
  CHECK(*one[0].mean == 1);
  CHECK_THROWS_AS(counting_functions(r.classes, r.all, {7.0}), IncompleteEnumeration);

  const auto grid = length_grid(r.classes, 0.25);
  REQUIRE_FALSE(grid.empty());
  CHECK(grid.front() >= systole);
  CHECK(grid.back() == 6.0);
  for (const GridRow& row : counting_functions(r.classes, r.all, grid)) {
    CHECK(row.Nprime <= row.N);
    CHECK(row.Nprime <= row.Lprime);
    if (row.mean) CHECK(*row.mean >= 1);
    CHECK(row.N_oriented >= row.N);
    CHECK(row.N_oriented <= 2 * row.N);
  }
}

TEST_CASE("N and N' of (2,3,7) at length 6 against the naive conjugacy oracle") {
  const Run& r = run({2, 3, 7}, 6);
  const oracle::Ball ball = oracle::naive_ball({2, 3, 7}, 32);
  const auto ref = oracle::naive_classes(ball, {2, 3, 7}, 6, 28);
  std::size_t N = 0;
  std::vector<double> traces;
  for (const auto& c : ref)
    if (c.primitive) {
      ++N;
      traces.push_back(c.trace);
    }
  std::sort(traces.begin(), traces.end());
  std::size_t Nprime = 0;
  for (std::size_t i = 0; i < traces.size(); ++i)
    if (i == 0 || traces[i] - traces[i - 1] > 1e-9 * traces[i]) ++Nprime;
  const auto rows = counting_functions(r.classes, r.all, {6.0});
  CHECK(rows[0].N == N);
  CHECK(rows[0].Nprime == Nprime);
  CHECK(pgt_ratio(r.classes, 6.0) == doctest::Approx(N * 6.0 / std::exp(6.0)).epsilon(1e-12));
  CHECK(pgt_ratio(r.classes, 0.1) == 0);
}

TEST_CASE("clustering histogram") {
  const Run& hecke = run({2, 5, 0}, 5);
  // the smallest hyperbolic trace of (2,5,inf) is 2 lambda_5 > 3
  const Clustering c = clustering_histogram(hecke.all, 12);
  CHECK(c.counts[0] == 0);
  std::size_t total = 0;
  for (std::size_t k : c.counts) total += k;
  CHECK(total <= hecke.all.entries.size());
  CHECK_THROWS_AS(clustering_histogram(hecke.all, 20), IncompleteEnumeration);

  const Run& e = run({2, 6, 10}, 6);
  const Clustering ce = clustering_histogram(e.all, static_cast<int>(e.all.max_trace));
  const double C = envelope_constant(ce, 0.5);
  for (std::size_t k = 0; k < ce.counts.size(); ++k)
    CHECK(ce.counts[k] <= C * std::pow(k + 3.0, 0.5) * (1 + 1e-12));
}

TEST_CASE("separation of distinct traces") {
  Field f = make_field(5);
  const FieldElement l = FieldElement::lambda(f);
  const FieldElement t = l * mpq_class(2) + FieldElement::from_rational(f, 2), s = l * mpq_class(2);
  CHECK(field_norm(t - s) == 4);
  TraceSet ts;
  ts.field = f;
  ts.max_trace = 10;
  ts.entries = {entry(s), entry(t)};
  const Separation sep = separation_check(ts, 10, 0.5, false);
  CHECK(sep.pairs == 1);
  CHECK(sep.min_abs_norm == 4);
  CHECK(sep.min_gap == doctest::Approx(2));

  // T = 15 needs lengths up to 2 arcosh(7.5)
  const Run& r = run({2, 6, 10}, 5.5);
  const Separation big = separation_check(r.all, 15, 0.5);
  CHECK(big.pairs == big.traces * (big.traces - 1) / 2);
  CHECK(big.min_abs_norm >= 1);
  CHECK(big.min_gap > 0);
  const Separation serial = separation_check(r.all, 15, 0.5, false);
  CHECK(serial.min_abs_norm == big.min_abs_norm);
  CHECK(serial.min_gap == big.min_gap);
}

TEST_CASE("Galois conjugate bounds") {
  const Group hecke = TriangleGroup::build({2, 5, 0});
  const ArithmeticDimension dim = arithmetic_dimension(*hecke);
  const FieldElement l5 = FieldElement::two_cos(hecke->field, hecke->ambient_N / 5);
  TraceSet ts;
  ts.field = hecke->field;
  ts.max_trace = 10;
  const FieldElement t = l5 * mpq_class(4) + FieldElement::from_rational(hecke->field, 2);
  ts.entries = {entry(t)};
  const GaloisAudit a = galois_bound_check(ts, dim, false);
  CHECK(a.bounded == 1);
  CHECK(a.unbounded == 0);
  CHECK(std::isnan(a.margins[0]));
  CHECK(std::abs(std::abs(t.approx(a.sigma)) - 0.4721359549995794) < 1e-12);

  const Run& r = run({2, 6, 10}, 5.5);
  const ArithmeticDimension d2 = arithmetic_dimension(*r.store.group);
  const GaloisAudit g = galois_bound_check(r.squares, d2, true);
  REQUIRE(g.delta_emp.has_value());
  CHECK(*g.delta_emp > 0);
  CHECK(g.audited > 0);
  CHECK(g.contraction_failures == 0);

  const Run& h = run({2, 5, 0}, 6);
  const GaloisAudit gh = galois_bound_check(h.squares, dim, false);
  REQUIRE(gh.delta_fit.has_value());
  CHECK(*gh.delta_fit > 0);
  CHECK(gh.min_residual >= 0);

  const ArithmeticDimension d1 = arithmetic_dimension(*TriangleGroup::build({2, 3, 7}));
  CHECK_THROWS_AS(galois_bound_check(ts, d1, true), std::invalid_argument);
}

TEST_CASE("norm bound") {
  Field f = make_field(5);
  const Subfield k = generated_subfield(f, {FieldElement::lambda(f)});
  REQUIRE(k.degree == 2);
  TraceSet three;
  three.field = f;
  three.entries = {entry(FieldElement::from_rational(f, 3))};
  // |N(3)| = 9 < 2 * 3^(2 - delta) holds only for delta < 2 - log 4.5 / log 3
  const double crit = 2 - std::log(4.5) / std::log(3.0);
  CHECK(norm_bound_check(three, k, crit - 0.01).pass == 1);
  CHECK(norm_bound_check(three, k, crit + 0.01).fail == 1);
  CHECK(norm_bound_check(three, k, 0.9).fail == 1);

  TraceSet four;
  four.field = f;
  four.entries = {entry(FieldElement::lambda(f) * mpq_class(4) + FieldElement::from_rational(f, 2))};
  for (double d : {0.01, 0.5, 0.99}) {
    const NormBound nb = norm_bound_check(four, k, d);
    CHECK(nb.pass == 1);
    CHECK(nb.rows[0].norm == "4");
  }

  const Run& r = run({2, 6, 10}, 5.5);
  const ArithmeticDimension d2 = arithmetic_dimension(*r.store.group);
  const GaloisAudit g = galois_bound_check(r.squares, d2, true);
  const NormBound nb = norm_bound_check(r.squares, d2.trace_field.field, *g.delta_emp - 1e-9);
  CHECK(nb.fail == 0);
  CHECK(nb.undecided == 0);
  CHECK(nb.pass == r.squares.entries.size());
}

TEST_CASE("EGMM fits") {
  std::vector<double> ell, mean, flat;
  for (double x = 4; x <= 9; x += 0.25) {
    ell.push_back(x);
    mean.push_back(std::exp(x / 2) / x);
    flat.push_back(3.5 / x);
  }
  const EgmmFit f = egmm_fit(ell, mean);
  CHECK(std::abs(f.beta - 0.5) < 1e-9);
  CHECK(std::abs(f.c - 1) < 1e-9);
  // no exponential growth beyond the 1/ell factor
  const EgmmFit z = egmm_fit(ell, flat);
  CHECK(std::abs(z.beta) < 1e-9);
  CHECK(std::abs(z.c - 3.5) < 1e-9);
  CHECK_THROWS_AS(egmm_fit(std::vector<double>{1, 2}, std::vector<double>{1, 1}), std::invalid_argument);
}

TEST_CASE("distinct length bound") {
  TraceSet empty;
  const DistinctLengthBound e = distinct_length_bound_check({}, empty, 0.5);
  CHECK(e.checked == 0);
  CHECK(e.violations == 0);

  const Run& r = run({2, 5, 0}, 8);
  const auto rows = counting_functions(r.classes, r.all, length_grid(r.classes, 0.25));
  const DistinctLengthBound b = distinct_length_bound_check(rows, r.all, 0.5);
  CHECK(b.checked == rows.size());
  CHECK(b.violations == 0);

  // the constant in L'(T) <= C T^(2 - delta) barely moves as T grows
  const Run& small = run({2, 6, 10}, 6);
  const Run& large = run({2, 6, 10}, 7);
  const auto c6 = distinct_length_bound_check(counting_functions(small.classes, small.all, {6.0}), small.all, 0.5);
  const auto c7 = distinct_length_bound_check(counting_functions(large.classes, large.all, {7.0}), large.all, 0.5);
  CHECK(c7.C / c6.C > 0.5);
  CHECK(c7.C / c6.C < 2);
}
