#include "lenspec/interval.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lenspec {

namespace {

long max_bits(const RealInterval& a, const RealInterval& b) { return std::max(a.bits(), b.bits()); }

}  // namespace

void RealInterval::init(long bits) {
  if (bits < MPFR_PREC_MIN || bits > kMaxBits) {
    throw PrecisionCapExceeded("requested precision " + std::to_string(bits) + " bits is outside [" +
                               std::to_string(MPFR_PREC_MIN) + ", " + std::to_string(kMaxBits) + "]");
  }
  bits_ = bits;
  mpfr_init2(lo_, bits);
  mpfr_init2(hi_, bits);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

RealInterval::RealInterval(long bits) { init(bits); }

RealInterval::RealInterval(const mpq_class& q, long bits) {
  init(bits);
  mpfr_set_q(lo_, q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi_, q.get_mpq_t(), MPFR_RNDU);
}

RealInterval::RealInterval(const mpq_class& lo, const mpq_class& hi, long bits) {
  if (lo > hi) throw DomainError("interval lower bound exceeds upper bound");
  init(bits);
  mpfr_set_q(lo_, lo.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi_, hi.get_mpq_t(), MPFR_RNDU);
}

RealInterval RealInterval::from_double(double v, long bits) {
  RealInterval r(std::max<long>(bits, 53));
  mpfr_set_d(r.lo_, v, MPFR_RNDD);
  mpfr_set_d(r.hi_, v, MPFR_RNDU);
  return r;
}

RealInterval RealInterval::from_int(long v, long bits) {
  RealInterval r(bits);
  mpfr_set_si(r.lo_, v, MPFR_RNDD);
  mpfr_set_si(r.hi_, v, MPFR_RNDU);
  return r;
}

RealInterval RealInterval::pi(long bits) {
  RealInterval r(bits);
  mpfr_const_pi(r.lo_, MPFR_RNDD);
  mpfr_const_pi(r.hi_, MPFR_RNDU);
  return r;
}

RealInterval RealInterval::hull(const RealInterval& a, const RealInterval& b) {
  RealInterval r(max_bits(a, b));
  mpfr_min(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_max(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return r;
}

RealInterval::RealInterval(const RealInterval& other) {
  init(other.bits_);
  mpfr_set(lo_, other.lo_, MPFR_RNDD);
  mpfr_set(hi_, other.hi_, MPFR_RNDU);
}

RealInterval::RealInterval(RealInterval&& other) noexcept {
  bits_ = other.bits_;
  mpfr_init2(lo_, bits_);
  mpfr_init2(hi_, bits_);
  mpfr_swap(lo_, other.lo_);
  mpfr_swap(hi_, other.hi_);
}

RealInterval& RealInterval::operator=(const RealInterval& other) {
  if (this == &other) return *this;
  if (bits_ != other.bits_) {
    mpfr_set_prec(lo_, other.bits_);
    mpfr_set_prec(hi_, other.bits_);
    bits_ = other.bits_;
  }
  mpfr_set(lo_, other.lo_, MPFR_RNDD);
  mpfr_set(hi_, other.hi_, MPFR_RNDU);
  return *this;
}

RealInterval& RealInterval::operator=(RealInterval&& other) noexcept {
  if (this == &other) return *this;
  mpfr_swap(lo_, other.lo_);
  mpfr_swap(hi_, other.hi_);
  std::swap(bits_, other.bits_);
  return *this;
}

RealInterval::~RealInterval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

mpq_class RealInterval::lower() const {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), lo_);
  return q;
}

mpq_class RealInterval::upper() const {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), hi_);
  return q;
}

double RealInterval::lower_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double RealInterval::upper_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }

double RealInterval::mid() const {
  mpfr_t m;
  mpfr_init2(m, bits_ + 1);
  mpfr_add(m, lo_, hi_, MPFR_RNDN);
  mpfr_div_2ui(m, m, 1, MPFR_RNDN);
  double v = mpfr_get_d(m, MPFR_RNDN);
  mpfr_clear(m);
  return v;
}

double RealInterval::width() const {
  mpfr_t w;
  mpfr_init2(w, bits_);
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  double v = mpfr_get_d(w, MPFR_RNDU);
  mpfr_clear(w);
  return v;
}

bool RealInterval::contains(const mpq_class& q) const {
  return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
}

bool RealInterval::contains(double v) const { return mpfr_cmp_d(lo_, v) <= 0 && mpfr_cmp_d(hi_, v) >= 0; }

bool RealInterval::contains(const RealInterval& inner) const {
  return mpfr_cmp(lo_, inner.lo_) <= 0 && mpfr_cmp(hi_, inner.hi_) >= 0;
}

bool RealInterval::intersects(const RealInterval& other) const {
  return mpfr_cmp(lo_, other.hi_) <= 0 && mpfr_cmp(other.lo_, hi_) <= 0;
}

bool RealInterval::certainly_less(const RealInterval& other) const { return mpfr_cmp(hi_, other.lo_) < 0; }
bool RealInterval::certainly_positive() const { return mpfr_sgn(lo_) > 0; }
bool RealInterval::certainly_negative() const { return mpfr_sgn(hi_) < 0; }

RealInterval RealInterval::abs() const {
  RealInterval r(bits_);
  if (mpfr_sgn(lo_) >= 0) {
    mpfr_set(r.lo_, lo_, MPFR_RNDD);
    mpfr_set(r.hi_, hi_, MPFR_RNDU);
  } else if (mpfr_sgn(hi_) <= 0) {
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  } else {
    mpfr_set_zero(r.lo_, 1);
    mpfr_t n;
    mpfr_init2(n, bits_);
    mpfr_neg(n, lo_, MPFR_RNDU);
    mpfr_max(r.hi_, n, hi_, MPFR_RNDU);
    mpfr_clear(n);
  }
  return r;
}

RealInterval RealInterval::square() const {
  RealInterval a = abs();
  RealInterval r(bits_);
  mpfr_sqr(r.lo_, a.lo_, MPFR_RNDD);
  mpfr_sqr(r.hi_, a.hi_, MPFR_RNDU);
  return r;
}

RealInterval operator+(const RealInterval& a, const RealInterval& b) {
  RealInterval r(max_bits(a, b));
  mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return r;
}

RealInterval operator-(const RealInterval& a, const RealInterval& b) {
  RealInterval r(max_bits(a, b));
  mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
  mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
  return r;
}

RealInterval operator-(const RealInterval& a) {
  RealInterval r(a.bits_);
  mpfr_neg(r.lo_, a.hi_, MPFR_RNDD);
  mpfr_neg(r.hi_, a.lo_, MPFR_RNDU);
  return r;
}

RealInterval operator*(const RealInterval& a, const RealInterval& b) {
  const long bits = max_bits(a, b);
  RealInterval r(bits);
  mpfr_t t;
  mpfr_init2(t, bits);
  bool first = true;
  for (const auto* x : {&a.lo_, &a.hi_}) {
    for (const auto* y : {&b.lo_, &b.hi_}) {
      mpfr_mul(t, *x, *y, MPFR_RNDD);
      if (first || mpfr_cmp(t, r.lo_) < 0) mpfr_set(r.lo_, t, MPFR_RNDD);
      mpfr_mul(t, *x, *y, MPFR_RNDU);
      if (first || mpfr_cmp(t, r.hi_) > 0) mpfr_set(r.hi_, t, MPFR_RNDU);
      first = false;
    }
  }
  mpfr_clear(t);
  return r;
}

RealInterval operator/(const RealInterval& a, const RealInterval& b) {
  if (mpfr_sgn(b.lo_) <= 0 && mpfr_sgn(b.hi_) >= 0) throw DomainError("interval division by an interval containing 0");
  const long bits = max_bits(a, b);
  RealInterval inv(bits);
  mpfr_ui_div(inv.lo_, 1, b.hi_, MPFR_RNDD);
  mpfr_ui_div(inv.hi_, 1, b.lo_, MPFR_RNDU);
  return a * inv;
}

RealInterval sqrt(const RealInterval& x) {
  if (mpfr_sgn(x.hi_) < 0) throw DomainError("sqrt of a negative interval");
  RealInterval r(x.bits_);
  if (mpfr_sgn(x.lo_) < 0) {
    mpfr_set_zero(r.lo_, 1);
  } else {
    mpfr_sqrt(r.lo_, x.lo_, MPFR_RNDD);
  }
  mpfr_sqrt(r.hi_, x.hi_, MPFR_RNDU);
  return r;
}

// Valid for intervals inside [-pi, pi]; wider input yields [-1, 1].
RealInterval cos(const RealInterval& x) {
  RealInterval r(x.bits_);
  RealInterval p = RealInterval::pi(x.bits_);
  const bool inside = mpfr_cmp(x.hi_, p.lo_) <= 0 && mpfr_cmpabs(x.lo_, p.lo_) <= 0;
  if (!inside) {
    mpfr_set_si(r.lo_, -1, MPFR_RNDD);
    mpfr_set_si(r.hi_, 1, MPFR_RNDU);
    return r;
  }
  mpfr_t t;
  mpfr_init2(t, x.bits_);
  if (mpfr_sgn(x.lo_) >= 0) {
    mpfr_cos(r.lo_, x.hi_, MPFR_RNDD);
    mpfr_cos(r.hi_, x.lo_, MPFR_RNDU);
  } else if (mpfr_sgn(x.hi_) <= 0) {
    mpfr_cos(r.lo_, x.lo_, MPFR_RNDD);
    mpfr_cos(r.hi_, x.hi_, MPFR_RNDU);
  } else {
    mpfr_cos(r.lo_, x.lo_, MPFR_RNDD);
    mpfr_cos(t, x.hi_, MPFR_RNDD);
    mpfr_min(r.lo_, r.lo_, t, MPFR_RNDD);
    mpfr_set_ui(r.hi_, 1, MPFR_RNDU);
  }
  mpfr_clear(t);
  // mpfr_cos is correctly rounded, but clamp in case of boundary effects
  if (mpfr_cmp_si(r.lo_, -1) < 0) mpfr_set_si(r.lo_, -1, MPFR_RNDD);
  if (mpfr_cmp_si(r.hi_, 1) > 0) mpfr_set_si(r.hi_, 1, MPFR_RNDU);
  return r;
}

RealInterval sin(const RealInterval& x) {
  RealInterval half_pi = RealInterval::pi(x.bits_) / RealInterval::from_int(2, x.bits_);
  return cos(x - half_pi);
}

RealInterval cosh(const RealInterval& x) {
  RealInterval a = x.abs();
  RealInterval r(x.bits_);
  mpfr_cosh(r.lo_, a.lo_, MPFR_RNDD);
  mpfr_cosh(r.hi_, a.hi_, MPFR_RNDU);
  return r;
}

RealInterval sinh(const RealInterval& x) {
  RealInterval r(x.bits_);
  mpfr_sinh(r.lo_, x.lo_, MPFR_RNDD);
  mpfr_sinh(r.hi_, x.hi_, MPFR_RNDU);
  return r;
}

// Encloses acosh on the part of x inside [1, inf).
RealInterval acosh(const RealInterval& x) {
  if (mpfr_cmp_ui(x.hi_, 1) < 0) throw DomainError("acosh of an interval below 1");
  RealInterval r(x.bits_);
  if (mpfr_cmp_ui(x.lo_, 1) < 0) {
    mpfr_set_zero(r.lo_, 1);
  } else {
    mpfr_acosh(r.lo_, x.lo_, MPFR_RNDD);
  }
  mpfr_acosh(r.hi_, x.hi_, MPFR_RNDU);
  return r;
}

RealInterval asinh(const RealInterval& x) {
  RealInterval r(x.bits_);
  mpfr_asinh(r.lo_, x.lo_, MPFR_RNDD);
  mpfr_asinh(r.hi_, x.hi_, MPFR_RNDU);
  return r;
}

RealInterval exp(const RealInterval& x) {
  RealInterval r(x.bits_);
  mpfr_exp(r.lo_, x.lo_, MPFR_RNDD);
  mpfr_exp(r.hi_, x.hi_, MPFR_RNDU);
  return r;
}

RealInterval log(const RealInterval& x) {
  if (mpfr_sgn(x.lo_) <= 0) throw DomainError("log of an interval not bounded away from 0");
  RealInterval r(x.bits_);
  mpfr_log(r.lo_, x.lo_, MPFR_RNDD);
  mpfr_log(r.hi_, x.hi_, MPFR_RNDU);
  return r;
}

RealInterval pow(const RealInterval& base, const RealInterval& exponent) { return exp(exponent * log(base)); }

std::string RealInterval::to_string(int digits) const {
  char* lo = nullptr;
  char* hi = nullptr;
  mpfr_asprintf(&lo, "%.*RDg", digits, lo_);
  mpfr_asprintf(&hi, "%.*RUg", digits, hi_);
  std::string s = std::string("[") + lo + ", " + hi + "]";
  mpfr_free_str(lo);
  mpfr_free_str(hi);
  return s;
}

}  // namespace lenspec
