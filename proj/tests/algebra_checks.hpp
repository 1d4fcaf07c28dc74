#pragma once

// Randomized exact-algebra properties shared by the unit tests and the
// acceptance runner. Oracles are the defining products over 2cos(k pi / N)
// and 512-bit MPFR.

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "lenspec/realfield.hpp"

namespace checks {

using namespace lenspec;

// 2cos(k pi / N) for the Galois conjugates of lambda_N, from the definition.
inline std::vector<long double> conjugate_roots(int N) {
  std::vector<long double> r;
  const long double pi = std::acos(-1.0L);
  for (int k = 1; k <= std::max(1, N - 1); ++k)
    if (std::gcd(k, 2 * N) == 1) r.push_back(2 * std::cos(k * pi / N));
  return r;
}

inline long double eval_at(const FieldElement& x, long double root) {
  long double acc = 0, pw = 1;
  for (const mpq_class& c : x.coeffs()) {
    acc += pw * static_cast<long double>(c.get_d());
    pw *= root;
  }
  return acc;
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t seed) : rng(seed) {}
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  FieldElement integral(const Field& f, int mag) {
    std::vector<mpq_class> c(f->degree);
    for (auto& v : c) v = range(-mag, mag);
    return FieldElement(f, c);
  }
  FieldElement rational(const Field& f, int mag) {
    std::vector<mpq_class> c(f->degree);
    for (auto& v : c) {
      v = mpq_class(range(-mag, mag), range(1, 6));
      v.canonicalize();
    }
    return FieldElement(f, c);
  }
  FieldElement nonzero(const Field& f, int mag) {
    for (;;) {
      FieldElement x = rational(f, mag);
      if (!x.is_zero()) return x;
    }
  }
};

inline const int kFields[] = {1, 2, 3, 5, 7, 9, 12, 15, 20, 30};

struct AlgebraRun {
  int cases = 0;
  int failures = 0;  // failed checks, several per case
};

/// 300 ring-axiom, 250 norm, 250 integrality and 200 interval cases.
inline AlgebraRun random_algebra(uint64_t seed) {
  AlgebraRun run;
  auto ok = [&](bool c) { run.failures += c ? 0 : 1; };
  Gen g(seed);

  {  // ring axioms
    for (int k = 0; k < 300; ++k, ++run.cases) {
      Field f = make_field(kFields[g.range(0, 9)]);
      const FieldElement a = g.rational(f, 9), b = g.rational(f, 9), c = g.rational(f, 9);
      const FieldElement one = FieldElement::from_rational(f, 1), zero(f);
      ok((a * b) * c == a * (b * c));
      ok((a + b) + c == a + (b + c));
      ok(a * (b + c) == a * b + a * c);
      ok(a * b == b * a);
      ok(a + zero == a);
      ok(a * one == a);
      ok(a + (-a) == zero);
      if (!a.is_zero()) ok(a * a.inverse() == one);
      // the product agrees with the product of embeddings
      const long double r = conjugate_roots(f->N)[g.range(0, f->degree - 1)];
      ok(std::abs(eval_at(a * b, r) - eval_at(a, r) * eval_at(b, r)) < 1e-6L * (1 + std::abs(eval_at(a * b, r))));
    }
  }
  {  // norm multiplicativity and trace
    for (int k = 0; k < 250; ++k, ++run.cases) {
      Field f = make_field(kFields[g.range(0, 9)]);
      const FieldElement a = g.nonzero(f, 7), b = g.nonzero(f, 7);
      ok(field_norm(a * b) == field_norm(a) * field_norm(b));
      // norm and trace against products and sums over the conjugate roots
      long double prod = 1, sum = 0;
      for (long double r : conjugate_roots(f->N)) {
        prod *= eval_at(a, r);
        sum += eval_at(a, r);
      }
      const double n = field_norm(a).get_d(), t = a.trace().get_d();
      ok(std::abs(prod - n) < 1e-6L * (1 + std::abs(n)));
      ok(std::abs(sum - t) < 1e-9L * (1 + std::abs(t)));
      // the sum of embedding intervals contains the exact trace
      RealInterval acc = RealInterval::from_int(0);
      for (int i = 0; i < f->degree; ++i) acc = acc + a.embed(i);
      ok(acc.contains(a.trace()));
    }
  }
  {  // algebraic integer detection
    // The ring of integers of Q(2cos(pi/N)) is Z[2cos(pi/N)], so integrality
    // is integrality of power-basis coefficients.
    for (int k = 0; k < 250; ++k, ++run.cases) {
      Field f = make_field(kFields[g.range(0, 9)]);
      const FieldElement a = g.rational(f, 9);
      bool integral = true;
      for (const mpq_class& c : a.coeffs()) integral = integral && c.get_den() == 1;
      ok(is_algebraic_integer(a) == integral);
      const FieldElement b = g.integral(f, 9), c = g.integral(f, 9);
      ok(is_algebraic_integer(b * c));
    }
  }
  {  // interval containment
    mpfr_t x, y, r;
    mpfr_inits2(512, x, y, r, (mpfr_ptr)0);
    auto inside = [&](const RealInterval& iv) {
      mpq_class v;
      mpfr_get_q(v.get_mpq_t(), r);
      const mpq_class slack(1, mpz_class(1) << 400);
      return iv.lower() - slack <= v && v <= iv.upper() + slack;
    };
    for (int k = 0; k < 200; ++k, ++run.cases) {
      const double a = std::ldexp(static_cast<double>(g.range(-100000, 100000)), -g.range(0, 12));
      const double b = std::ldexp(static_cast<double>(g.range(1, 100000)), -g.range(0, 12));
      const RealInterval A = RealInterval::from_double(a), B = RealInterval::from_double(b);
      mpfr_set_d(x, a, MPFR_RNDN);
      mpfr_set_d(y, b, MPFR_RNDN);
      mpfr_add(r, x, y, MPFR_RNDN);
      ok(inside(A + B));
      mpfr_mul(r, x, y, MPFR_RNDN);
      ok(inside(A * B));
      mpfr_div(r, x, y, MPFR_RNDN);
      ok(inside(A / B));
      mpfr_sqrt(r, y, MPFR_RNDN);
      ok(inside(sqrt(B)));
      mpfr_cos(r, x, MPFR_RNDN);
      ok(inside(cos(A)));
      mpfr_log(r, y, MPFR_RNDN);
      ok(inside(log(B)));
      const double e = std::fmod(a, 40.0);
      mpfr_set_d(x, e, MPFR_RNDN);
      mpfr_cosh(r, x, MPFR_RNDN);
      ok(inside(cosh(RealInterval::from_double(e))));
      mpfr_set_d(x, 1 + b, MPFR_RNDN);
      mpfr_acosh(r, x, MPFR_RNDN);
      ok(inside(acosh(RealInterval::from_double(1 + b))));
    }
    mpfr_clears(x, y, r, (mpfr_ptr)0);
  }
  return run;
}

}  // namespace checks
