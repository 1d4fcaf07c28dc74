#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "algebra_checks.hpp"
#include "doctest.h"
#include "lenspec/realfield.hpp"

using namespace lenspec;
using checks::conjugate_roots;
using checks::eval_at;
using checks::Gen;
using checks::kFields;

namespace {

// Expand prod (x - r) and round: an independent minimal polynomial.
std::vector<long> minpoly_oracle(int N) {
  std::vector<long double> p{1};
  for (long double r : conjugate_roots(N)) {
    std::vector<long double> q(p.size() + 1, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i + 1] += p[i];
      q[i] -= r * p[i];
    }
    p = q;
  }
  std::vector<long> out;
  for (long double c : p) out.push_back(std::lround(c));
  return out;
}

}  // namespace

TEST_CASE("minimal polynomials of lambda_N") {
  CHECK(make_field(1)->minpoly_string() == "x + 2");
  CHECK(make_field(5)->minpoly_string() == "x^2 - x - 1");
  CHECK(make_field(7)->minpoly_string() == "x^3 - x^2 - 2x + 1");
  for (int N = 1; N <= 40; ++N) {
    Field f = make_field(N);
    const auto expect = minpoly_oracle(N);
    REQUIRE(f->minpoly.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(f->minpoly[i] == expect[i]);
    // root ordering: embedding 0 is the identity
    CHECK(std::abs(f->root_values[0] - 2 * std::cos(M_PI / N)) < 1e-14);
  }
  CHECK(make_field(30)->degree == 8);
}

TEST_CASE("2cos(pi/7) is a root to 50 digits") {
  Field f = make_field(7);
  mpfr_t x, acc, t;
  mpfr_inits2(200, x, acc, t, (mpfr_ptr)0);
  mpfr_const_pi(x, MPFR_RNDN);
  mpfr_div_ui(x, x, 7, MPFR_RNDN);
  mpfr_cos(x, x, MPFR_RNDN);
  mpfr_mul_ui(x, x, 2, MPFR_RNDN);
  mpfr_set_ui(acc, 0, MPFR_RNDN);
  for (int i = f->degree; i >= 0; --i) {
    mpfr_mul(acc, acc, x, MPFR_RNDN);
    mpfr_add_z(acc, acc, f->minpoly[i].get_mpz_t(), MPFR_RNDN);
  }
  mpfr_abs(t, acc, MPFR_RNDN);
  CHECK(mpfr_cmp_d(t, 1e-50) < 0);
  mpfr_clears(x, acc, t, (mpfr_ptr)0);
}

TEST_CASE("arithmetic in Q(sqrt 5)") {
  Field f = make_field(5);
  const FieldElement l = FieldElement::lambda(f);
  const FieldElement one = FieldElement::from_rational(f, 1), zero(f);
  CHECK(l + zero == l);
  CHECK(l * one == l);
  CHECK(l * l == FieldElement(f, {1, 1}));
  CHECK(l.inverse() == l - one);
  CHECK(l * l - l - one == zero);
}

TEST_CASE("embeddings of small elements") {
  Field f = make_field(5);
  const FieldElement l = FieldElement::lambda(f);
  const FieldElement q = FieldElement::from_rational(f, mpq_class(3, 2));
  for (int i = 0; i < f->degree; ++i) CHECK(q.embed(i).contains(mpq_class(3, 2)));
  CHECK(l.embed(1).width() < 1e-30);
  CHECK(std::abs(l.embed(1).mid() + 0.618034) < 1e-6);
  const FieldElement t = l * mpq_class(4) + FieldElement::from_rational(f, 2);
  CHECK(std::abs(t.embed(1).mid() + 0.472136) < 1e-6);
}

TEST_CASE("norms") {
  Field f = make_field(5);
  const FieldElement l = FieldElement::lambda(f);
  CHECK(field_norm(FieldElement::from_rational(f, 1)) == 1);
  CHECK(field_norm(FieldElement(f)) == 0);
  CHECK(field_norm(l) == -1);
  CHECK(field_norm(l * mpq_class(4) + FieldElement::from_rational(f, 2)) == -4);
}

TEST_CASE("algebraic integers") {
  Field f = make_field(5);
  const FieldElement l = FieldElement::lambda(f);
  CHECK(is_algebraic_integer(FieldElement::from_rational(f, 7)));
  CHECK_FALSE(is_algebraic_integer(FieldElement::from_rational(f, mpq_class(1, 2))));
  CHECK(is_algebraic_integer(l));
  CHECK_FALSE(is_algebraic_integer(l * mpq_class(1, 3)));
}

TEST_CASE("exact comparison") {
  Field f = make_field(5);
  const FieldElement l = FieldElement::lambda(f);
  CHECK(compare(l, l) == 0);
  CHECK(compare(l, FieldElement::from_rational(f, mpq_class(8, 5))) == 1);
  CHECK(compare(l * l - l - FieldElement::from_rational(f, 1), FieldElement(f)) == 0);
}

TEST_CASE("subfield elements 2cos(pi/a) for a dividing N") {
  for (int N : {6, 10, 12, 15, 30}) {
    Field f = make_field(N);
    for (int a = 1; a <= N; ++a) {
      if (N % a) continue;
      const FieldElement e = FieldElement::two_cos(f, N / a);
      CHECK(std::abs(e.approx() - 2 * std::cos(M_PI / a)) < 1e-12);
      const int deg = static_cast<int>(make_field(a)->degree);
      CHECK(f->degree % deg == 0);
      // e satisfies the minimal polynomial of lambda_a
      const Field fa = make_field(a);
      FieldElement acc(f);
      for (int i = fa->degree; i >= 0; --i) acc = acc * e + FieldElement::from_rational(f, mpq_class(fa->minpoly[i]));
      CHECK(acc.is_zero());
    }
  }
}

// 1000 randomized cases split over the four families.
TEST_CASE("randomized exact algebra") {
  const auto start = std::chrono::steady_clock::now();
  const checks::AlgebraRun run = checks::random_algebra(20261016);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE(run.cases << " cases in " << secs << " s");
  CHECK(run.cases == 1000);
  CHECK(run.failures == 0);
  CHECK(secs < 10);
}

TEST_CASE("distinct elements separate under refinement") {
  Gen g(7);
  for (int k = 0; k < 100; ++k) {
    Field f = make_field(kFields[g.range(0, 9)]);
    const FieldElement a = g.rational(f, 5);
    // a tiny perturbation forces refinement
    const FieldElement b = a + FieldElement::from_rational(f, mpq_class(1, mpz_class(1) << 150));
    CHECK(compare(a, b) == -1);
    CHECK(compare(b, a) == 1);
    CHECK(compare(a, a) == 0);
  }
}

TEST_CASE("interval basics") {
  const RealInterval p = RealInterval::pi(256);
  CHECK(std::abs(p.mid() - M_PI) < 1e-15);
  CHECK(p.width() < 1e-70);
  const RealInterval h = RealInterval::hull(RealInterval::from_int(1), RealInterval::from_int(3));
  CHECK(h.contains(2.0));
  CHECK(h.certainly_positive());
  CHECK(RealInterval::from_int(1).certainly_less(RealInterval::from_int(2)));
  CHECK_THROWS_AS(RealInterval(1L << 20), PrecisionCapExceeded);
}
