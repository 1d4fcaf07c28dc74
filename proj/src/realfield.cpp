#include "lenspec/realfield.hpp"

#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lenspec {

namespace {

using ZPoly = std::vector<mpz_class>;

void trim(ZPoly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

ZPoly zmul(const ZPoly& a, const ZPoly& b) {
  ZPoly r(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

// Division by a monic divisor; returns quotient, remainder left in num.
ZPoly zdivmod(ZPoly& num, const ZPoly& den) {
  const size_t dd = den.size() - 1;
  if (num.size() - 1 < dd) return ZPoly{0};
  ZPoly q(num.size() - dd, 0);
  for (size_t k = num.size() - 1; k + 1 > dd; --k) {
    mpz_class c = num[k];
    if (c == 0) {
      if (k == dd) break;
      continue;
    }
    q[k - dd] = c;
    for (size_t m = 0; m <= dd; ++m) num[k - dd + m] -= c * den[m];
    if (k == dd) break;
  }
  trim(num);
  trim(q);
  return q;
}

bool is_zero_poly(const ZPoly& p) { return p.size() == 1 && p[0] == 0; }

mpq_class eval_q(const ZPoly& p, const mpq_class& x) {
  mpq_class r = 0;
  for (size_t k = p.size(); k-- > 0;) r = r * x + p[k];
  return r;
}

ZPoly reduce_mod(ZPoly p, const ZPoly& m) {
  zdivmod(p, m);
  p.resize(m.size() - 1, 0);
  return p;
}

std::string mpz_json_string(const mpz_class& z) { return z.get_str(); }

nlohmann::json big_to_json(const mpz_class& z) {
  if (z.fits_slong_p()) return nlohmann::json(z.get_si());
  return nlohmann::json(mpz_json_string(z));
}

mpz_class big_from_json(const nlohmann::json& j) {
  if (j.is_string()) return mpz_class(j.get<std::string>());
  if (j.is_number_integer()) return mpz_class(static_cast<long>(j.get<long long>()));
  throw std::invalid_argument("field element JSON: coefficient is not an integer");
}

// Determinant and linear solve over Q by Gaussian elimination.
mpq_class det_q(std::vector<std::vector<mpq_class>> m) {
  const size_t n = m.size();
  mpq_class det = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      mpq_class f = m[r][c] / m[c][c];
      for (size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

std::vector<mpq_class> solve_q(std::vector<std::vector<mpq_class>> m, std::vector<mpq_class> rhs) {
  const size_t n = m.size();
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) throw DomainError("singular multiplication matrix");
    std::swap(m[p], m[c]);
    std::swap(rhs[p], rhs[c]);
    for (size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      mpq_class f = m[r][c] / m[c][c];
      for (size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (size_t i = 0; i < n; ++i) rhs[i] /= m[i][i];
  return rhs;
}

}  // namespace

std::vector<mpz_class> cyclotomic_polynomial(int n) {
  if (n < 1) throw std::invalid_argument("cyclotomic order must be positive");
  static thread_local std::map<int, ZPoly> memo;
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  ZPoly p(n + 1, 0);
  p[0] = -1;
  p[n] = 1;
  for (int d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    p = zdivmod(p, cyclotomic_polynomial(d));
  }
  memo[n] = p;
  return p;
}

std::vector<mpz_class> chebyshev_s(int n) {
  ZPoly s0{2};
  ZPoly s1{0, 1};
  if (n == 0) return s0;
  for (int k = 1; k < n; ++k) {
    ZPoly next = zmul(ZPoly{0, 1}, s1);
    next.resize(std::max(next.size(), s0.size()), 0);
    for (size_t i = 0; i < s0.size(); ++i) next[i] -= s0[i];
    trim(next);
    s0 = std::move(s1);
    s1 = std::move(next);
  }
  return s1;
}

RealInterval FieldDescriptor::root(int i, long b) const {
  if (b == bits) return roots.at(i);
  if (N == 1) return RealInterval::from_int(-2, b);
  RealInterval angle = RealInterval::pi(b) * RealInterval::from_int(keys.at(i), b) / RealInterval::from_int(N, b);
  return RealInterval::from_int(2, b) * cos(angle);
}

std::string FieldDescriptor::minpoly_string() const {
  std::ostringstream os;
  bool first = true;
  for (size_t k = minpoly.size(); k-- > 0;) {
    const mpz_class& c = minpoly[k];
    if (c == 0) continue;
    mpz_class a = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (k == 0 || a != 1) os << a.get_str();
    if (k > 0) os << "x";
    if (k > 1) os << "^" << k;
  }
  if (first) os << "0";
  return os.str();
}

Field make_field(int N, long bits) {
  if (N < 1) throw std::invalid_argument("field index N must be >= 1");
  auto f = std::make_shared<FieldDescriptor>();
  f->N = N;
  f->bits = bits;
  if (N == 1) {
    f->minpoly = {2, 1};
    f->keys = {1};
  } else {
    ZPoly phi = cyclotomic_polynomial(2 * N);
    const int d = static_cast<int>(phi.size() - 1) / 2;
    ZPoly psi{phi[d]};
    for (int j = 1; j <= d; ++j) {
      ZPoly s = chebyshev_s(j);
      psi.resize(std::max(psi.size(), s.size()), 0);
      for (size_t k = 0; k < s.size(); ++k) psi[k] += phi[d + j] * s[k];
    }
    trim(psi);
    f->minpoly = psi;
    for (int k = 1; k < N; ++k)
      if (std::gcd(k, 2 * N) == 1) f->keys.push_back(k);
  }
  f->degree = static_cast<int>(f->minpoly.size() - 1);
  if (static_cast<int>(f->keys.size()) != f->degree) throw std::logic_error("Galois key count differs from degree");

  // lambda_N must be a root of s_N(x) + 2
  ZPoly check = chebyshev_s(N);
  check[0] += 2;
  zdivmod(check, f->minpoly);
  if (!is_zero_poly(check)) throw std::logic_error("minimal polynomial does not divide s_N + 2");

  // certified root intervals: sign change at exact rational endpoints, pairwise disjoint
  long b = bits;
  for (;;) {
    f->roots.clear();
    bool ok = true;
    for (int i = 0; i < f->degree && ok; ++i) {
      FieldDescriptor tmp;
      tmp.N = N;
      tmp.keys = f->keys;
      tmp.bits = -1;
      RealInterval r = tmp.root(i, b);
      mpq_class lo = r.lower();
      mpq_class hi = r.upper();
      if (eval_q(f->minpoly, lo) * eval_q(f->minpoly, hi) > 0) ok = false;
      f->roots.push_back(r);
    }
    for (int i = 0; i < f->degree && ok; ++i)
      for (int j = i + 1; j < f->degree && ok; ++j)
        if (f->roots[i].intersects(f->roots[j])) ok = false;
    if (ok) break;
    b *= 2;
    if (b > kMaxBits) throw PrecisionCapExceeded("cannot isolate roots of the minimal polynomial");
  }
  f->bits = b;
  for (int i = 0; i < f->degree; ++i) f->root_values.push_back(f->roots[i].mid());

  for (int i = 0; i < f->degree; ++i) {
    if (N == 1) {
      f->galois_images.push_back({-2});
    } else {
      f->galois_images.push_back(reduce_mod(chebyshev_s(f->keys[i]), f->minpoly));
    }
  }
  return f;
}

FieldElement::FieldElement(Field f) : field_(std::move(f)) { c_.assign(field_->degree, 0); }

FieldElement::FieldElement(Field f, std::vector<mpq_class> coeffs) : field_(std::move(f)), c_(std::move(coeffs)) {
  const size_t d = field_->degree;
  if (c_.size() > d) {
    // reduce modulo the minimal polynomial
    const auto& m = field_->minpoly;
    for (size_t k = c_.size() - 1; k >= d; --k) {
      mpq_class c = c_[k];
      if (c != 0)
        for (size_t j = 0; j <= d; ++j) c_[k - d + j] -= c * m[j];
      if (k == d) break;
    }
  }
  c_.resize(d, 0);
  for (auto& q : c_) q.canonicalize();
}

FieldElement FieldElement::from_rational(Field f, const mpq_class& q) {
  FieldElement e(std::move(f));
  e.c_[0] = q;
  return e;
}

FieldElement FieldElement::lambda(Field f) {
  if (f->degree == 1) return from_rational(f, f->N == 1 ? -2 : 0);
  FieldElement e(std::move(f));
  e.c_[1] = 1;
  return e;
}

FieldElement FieldElement::two_cos(Field f, int k) {
  ZPoly s = chebyshev_s(k < 0 ? -k : k);
  FieldElement lam = lambda(f);
  FieldElement acc(f);
  FieldElement pw = from_rational(f, 1);
  for (size_t j = 0; j < s.size(); ++j) {
    if (s[j] != 0) acc = acc + pw * mpq_class(s[j]);
    pw = pw * lam;
  }
  return acc;
}

bool FieldElement::is_zero() const {
  for (const auto& q : c_)
    if (q != 0) return false;
  return true;
}

bool FieldElement::is_rational() const {
  for (size_t i = 1; i < c_.size(); ++i)
    if (c_[i] != 0) return false;
  return true;
}

void FieldElement::check_same(const FieldElement& o) const {
  if (!field_ || !o.field_) throw std::invalid_argument("operation on an uninitialized field element");
  if (field_ != o.field_ && field_->N != o.field_->N)
    throw std::invalid_argument("field elements belong to different fields");
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
  check_same(o);
  FieldElement r(field_);
  for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] + o.c_[i];
  return r;
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
  check_same(o);
  FieldElement r(field_);
  for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] - o.c_[i];
  return r;
}

FieldElement FieldElement::operator-() const {
  FieldElement r(field_);
  for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = -c_[i];
  return r;
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
  check_same(o);
  std::vector<mpq_class> prod(2 * c_.size() - 1, 0);
  for (size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    for (size_t j = 0; j < o.c_.size(); ++j) prod[i + j] += c_[i] * o.c_[j];
  }
  return FieldElement(field_, std::move(prod));
}

FieldElement FieldElement::operator*(const mpq_class& q) const {
  FieldElement r(field_);
  for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] * q;
  return r;
}

bool FieldElement::operator==(const FieldElement& o) const {
  check_same(o);
  return c_ == o.c_;
}

std::vector<std::vector<mpq_class>> FieldElement::mult_matrix() const {
  const size_t d = c_.size();
  std::vector<std::vector<mpq_class>> m(d, std::vector<mpq_class>(d));
  FieldElement col = *this;
  FieldElement lam = lambda(field_);
  for (size_t j = 0; j < d; ++j) {
    for (size_t r = 0; r < d; ++r) m[r][j] = col.c_[r];
    if (j + 1 < d) col = col * lam;
  }
  return m;
}

FieldElement FieldElement::inverse() const {
  if (is_zero()) throw DomainError("inverse of zero field element");
  std::vector<mpq_class> rhs(c_.size(), 0);
  rhs[0] = 1;
  return FieldElement(field_, solve_q(mult_matrix(), rhs));
}

FieldElement FieldElement::galois(int i) const {
  if (i == 0) return *this;
  std::vector<mpq_class> img(field_->galois_images.at(i).begin(), field_->galois_images.at(i).end());
  FieldElement s(field_, img);
  FieldElement acc(field_);
  FieldElement pw = from_rational(field_, 1);
  for (size_t j = 0; j < c_.size(); ++j) {
    if (c_[j] != 0) acc = acc + pw * c_[j];
    if (j + 1 < c_.size()) pw = pw * s;
  }
  return acc;
}

RealInterval FieldElement::embed(int i, long bits) const {
  if (i < 0 || i >= field_->degree) throw std::out_of_range("embedding index out of range");
  const long work = bits + 32;
  RealInterval x = field_->root(i, field_->bits >= work ? field_->bits : work);
  RealInterval r(c_.back(), work);
  for (size_t k = c_.size() - 1; k-- > 0;) r = r * x + RealInterval(c_[k], work);
  return r;
}

double FieldElement::approx(int i) const {
  const double x = field_->root_values.at(i);
  double r = c_.back().get_d();
  for (size_t k = c_.size() - 1; k-- > 0;) r = r * x + c_[k].get_d();
  return r;
}

mpq_class FieldElement::trace() const {
  auto m = mult_matrix();
  mpq_class t = 0;
  for (size_t i = 0; i < m.size(); ++i) t += m[i][i];
  return t;
}

// Faddeev-LeVerrier recursion, exact over Q.
std::vector<mpq_class> FieldElement::charpoly() const {
  const auto a = mult_matrix();
  const size_t n = a.size();
  std::vector<mpq_class> c(n + 1, 0);
  c[n] = 1;
  std::vector<std::vector<mpq_class>> mk(n, std::vector<mpq_class>(n, 0));
  for (size_t k = 1; k <= n; ++k) {
    std::vector<std::vector<mpq_class>> next(n, std::vector<mpq_class>(n, 0));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        mpq_class s = 0;
        for (size_t l = 0; l < n; ++l)
          if (a[i][l] != 0 && mk[l][j] != 0) s += a[i][l] * mk[l][j];
        next[i][j] = s;
      }
    for (size_t i = 0; i < n; ++i) next[i][i] += c[n - k + 1];
    mpq_class tr = 0;
    for (size_t i = 0; i < n; ++i)
      for (size_t l = 0; l < n; ++l) tr += a[i][l] * next[l][i];
    c[n - k] = -tr / static_cast<long>(k);
    mk = std::move(next);
  }
  return c;
}

nlohmann::json FieldElement::to_json() const {
  mpz_class den = 1;
  for (const auto& q : c_) den = lcm(den, mpz_class(q.get_den()));
  nlohmann::json num = nlohmann::json::array();
  for (const auto& q : c_) num.push_back(big_to_json(mpz_class(q.get_num() * (den / q.get_den()))));
  return {{"field_N", field_->N}, {"num", num}, {"den", big_to_json(den)}};
}

FieldElement FieldElement::from_json(Field f, const nlohmann::json& j) {
  if (j.at("field_N").get<int>() != f->N) throw std::invalid_argument("field element JSON: field index mismatch");
  const auto& num = j.at("num");
  if (static_cast<int>(num.size()) != f->degree) throw std::invalid_argument("field element JSON: wrong coefficient count");
  mpz_class den = big_from_json(j.at("den"));
  if (den <= 0) throw std::invalid_argument("field element JSON: denominator must be positive");
  std::vector<mpq_class> c;
  for (const auto& v : num) c.emplace_back(big_from_json(v), den);
  return FieldElement(std::move(f), std::move(c));
}

std::string FieldElement::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (size_t k = 0; k < c_.size(); ++k) {
    if (c_[k] == 0) continue;
    mpq_class a = abs(c_[k]);
    if (first) {
      if (c_[k] < 0) os << "-";
    } else {
      os << (c_[k] < 0 ? " - " : " + ");
    }
    first = false;
    if (k == 0) {
      os << a.get_str();
    } else {
      if (a != 1) os << a.get_str() << "*";
      os << "l";
      if (k > 1) os << "^" << k;
    }
  }
  if (first) os << "0";
  return os.str();
}

mpq_class field_norm(const FieldElement& x) {
  if (x.is_zero()) return 0;
  if (x.is_rational()) {
    mpq_class r = 1;
    for (int i = 0; i < x.field()->degree; ++i) r *= x.coeffs()[0];
    return r;
  }
  return det_q(x.mult_matrix());
}

bool is_algebraic_integer(const FieldElement& x) {
  bool integral = true;
  for (const auto& q : x.coeffs())
    if (q.get_den() != 1) integral = false;
  if (integral) return true;  // Z[lambda] lies in the ring of integers
  for (const auto& q : x.charpoly())
    if (q.get_den() != 1) return false;
  return true;
}

int sign_at(const FieldElement& x, int i) {
  if (x.is_zero()) return 0;
  for (long bits = kDefaultBits; bits <= kMaxBits; bits *= 2) {
    RealInterval r = x.embed(i, bits);
    if (r.certainly_positive()) return 1;
    if (r.certainly_negative()) return -1;
  }
  throw PrecisionCapExceeded("cannot certify the sign of " + x.to_string());
}

int compare(const FieldElement& x, const FieldElement& y) {
  if (x == y) return 0;
  return sign_at(x - y, 0);
}

}  // namespace lenspec
