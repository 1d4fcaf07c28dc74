#include "lenspec/ring.hpp"

#include <cmath>
#include <string>

namespace lenspec {

namespace {

using i128 = __int128;

[[noreturn]] void overflow() { throw RingOverflow("int64 coefficient overflow in Z[lambda] arithmetic"); }

int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) overflow();
  return static_cast<int64_t>(v);
}

i128 add128(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) overflow();
  return r;
}

i128 mul128(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) overflow();
  return r;
}

}  // namespace

IntRing::IntRing(Field f) : field_(std::move(f)), d_(field_->degree) {
  if (d_ > 64) throw std::invalid_argument("IntRing supports degree <= 64");
  // lambda^{d+j} for j = 0 .. d-2, reduced mod the monic minimal polynomial
  const auto& mp = field_->minpoly;
  if (d_ < 2) return;
  red_.assign(static_cast<size_t>(d_ - 1) * d_, 0);
  std::vector<mpz_class> cur(d_);
  for (int k = 0; k < d_; ++k) cur[k] = -mp[k];
  for (int j = 0; j < d_ - 1; ++j) {
    for (int k = 0; k < d_; ++k) {
      if (!cur[k].fits_slong_p()) overflow();
      red_[j * d_ + k] = cur[k].get_si();
    }
    // multiply by lambda and reduce
    mpz_class top = cur[d_ - 1];
    for (int k = d_ - 1; k > 0; --k) cur[k] = cur[k - 1] - top * mp[k];
    cur[0] = -top * mp[0];
  }
}

void IntRing::mul(const int64_t* a, const int64_t* b, int64_t* out) const {
  i128 prod[2 * 64];
  const int n = 2 * d_ - 1;
  for (int k = 0; k < n; ++k) prod[k] = 0;
  for (int i = 0; i < d_; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < d_; ++j) prod[i + j] = add128(prod[i + j], static_cast<i128>(a[i]) * b[j]);
  }
  for (int k = 0; k < d_; ++k) {
    i128 acc = prod[k];
    for (int j = 0; j + d_ < n; ++j)
      if (prod[d_ + j] != 0) acc = add128(acc, mul128(prod[d_ + j], red_[j * d_ + k]));
    out[k] = narrow(acc);
  }
}

IntRing::Multiplier IntRing::multiplier(const int64_t* a) const {
  Multiplier m;
  bool scalar = true;
  for (int k = 1; k < d_; ++k)
    if (a[k] != 0) scalar = false;
  m.is_scalar = scalar;
  m.scalar = a[0];
  m.m.assign(static_cast<size_t>(d_) * d_, 0);
  // column j = a * lambda^j
  std::vector<int64_t> col(a, a + d_), lam(d_, 0), next(d_);
  if (d_ > 1) lam[1] = 1;
  for (int j = 0; j < d_; ++j) {
    for (int r = 0; r < d_; ++r) m.m[r * d_ + j] = col[r];
    if (j + 1 < d_) {
      mul(col.data(), lam.data(), next.data());
      col.swap(next);
    }
  }
  return m;
}

IntRing::Multiplier IntRing::multiplier(const FieldElement& a) const {
  std::vector<int64_t> v(d_);
  from_element(a, v.data());
  return multiplier(v.data());
}

void IntRing::apply(const Multiplier& m, const int64_t* a, int64_t* out) const {
  if (m.is_scalar) {
    for (int k = 0; k < d_; ++k) out[k] = narrow(static_cast<i128>(a[k]) * m.scalar);
    return;
  }
  for (int r = 0; r < d_; ++r) {
    i128 acc = 0;
    const int64_t* row = &m.m[static_cast<size_t>(r) * d_];
    for (int j = 0; j < d_; ++j) acc = add128(acc, static_cast<i128>(row[j]) * a[j]);
    out[r] = narrow(acc);
  }
}

void IntRing::combine(std::initializer_list<std::pair<int64_t, const int64_t*>> terms, int64_t* out) const {
  for (int k = 0; k < d_; ++k) {
    i128 acc = 0;
    for (const auto& [s, v] : terms) acc = add128(acc, static_cast<i128>(s) * v[k]);
    out[k] = narrow(acc);
  }
}

FieldElement IntRing::to_element(const int64_t* a) const {
  std::vector<mpq_class> c(d_);
  for (int k = 0; k < d_; ++k) c[k] = mpq_class(mpz_class(static_cast<long>(a[k])));
  return FieldElement(field_, std::move(c));
}

void IntRing::from_element(const FieldElement& x, int64_t* out) const {
  for (int k = 0; k < d_; ++k) {
    const mpq_class& q = x.coeffs()[k];
    if (q.get_den() != 1 || !q.get_num().fits_slong_p())
      throw RingOverflow("element " + x.to_string() + " is not representable with int64 coefficients");
    out[k] = q.get_num().get_si();
  }
}

double IntRing::approx(const int64_t* a, int i) const {
  const double x = field_->root_values[i];
  double r = static_cast<double>(a[d_ - 1]);
  for (int k = d_ - 1; k-- > 0;) r = r * x + static_cast<double>(a[k]);
  return r;
}

}  // namespace lenspec
