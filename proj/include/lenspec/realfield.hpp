#pragma once

#include <gmpxx.h>

#include <memory>
#include "json.hpp"
#include <string>
#include <vector>

#include "lenspec/interval.hpp"

namespace lenspec {

/// Q(lambda_N) with lambda_N = 2cos(pi/N). Embedding i sends lambda_N to
/// 2cos(k_i pi/N); embedding 0 is the identity (k_0 = 1).
struct FieldDescriptor {
  int N = 1;
  int degree = 1;
  std::vector<mpz_class> minpoly;  // ascending, monic, size degree + 1
  std::vector<int> keys;           // Galois keys k_i
  std::vector<RealInterval> roots;  // certified root intervals, disjoint
  long bits = kDefaultBits;
  std::vector<double> root_values;  // 2cos(k_i pi/N) rounded to nearest
  // galois_images[i][j]: coefficient j of sigma_i(lambda) in the power basis
  std::vector<std::vector<mpz_class>> galois_images;

  int identity_index() const { return 0; }
  /// Certified enclosure of sigma_i(lambda) at the requested precision.
  RealInterval root(int i, long bits) const;
  std::string minpoly_string() const;
};

using Field = std::shared_ptr<const FieldDescriptor>;

Field make_field(int N, long bits = kDefaultBits);

/// Integer polynomial helpers exposed for tests.
std::vector<mpz_class> cyclotomic_polynomial(int n);
/// Chebyshev-type s_n with s_0 = 2, s_1 = x, s_{n+1} = x s_n - s_{n-1}.
std::vector<mpz_class> chebyshev_s(int n);

class FieldElement {
 public:
  FieldElement() = default;
  explicit FieldElement(Field f);  // zero
  FieldElement(Field f, std::vector<mpq_class> coeffs);

  static FieldElement from_rational(Field f, const mpq_class& q);
  static FieldElement lambda(Field f);
  /// 2cos(k pi / N) as an element of the field.
  static FieldElement two_cos(Field f, int k);

  const Field& field() const { return field_; }
  const std::vector<mpq_class>& coeffs() const { return c_; }
  bool is_zero() const;
  bool is_rational() const;

  FieldElement operator+(const FieldElement& o) const;
  FieldElement operator-(const FieldElement& o) const;
  FieldElement operator-() const;
  FieldElement operator*(const FieldElement& o) const;
  FieldElement operator*(const mpq_class& q) const;
  FieldElement inverse() const;
  FieldElement operator/(const FieldElement& o) const { return *this * o.inverse(); }
  bool operator==(const FieldElement& o) const;
  bool operator!=(const FieldElement& o) const { return !(*this == o); }

  /// Exact image under embedding i, expressed back in the power basis.
  FieldElement galois(int i) const;
  RealInterval embed(int i, long bits = kDefaultBits) const;
  double approx(int i = 0) const;  // floating estimate, not certified

  mpq_class trace() const;  // Tr_{K|Q}
  /// Characteristic polynomial of multiplication by this element, ascending, monic.
  std::vector<mpq_class> charpoly() const;

  nlohmann::json to_json() const;
  static FieldElement from_json(Field f, const nlohmann::json& j);
  std::string to_string() const;

 private:
  friend mpq_class field_norm(const FieldElement& x);
  std::vector<std::vector<mpq_class>> mult_matrix() const;
  void check_same(const FieldElement& o) const;
  Field field_;
  std::vector<mpq_class> c_;
};

mpq_class field_norm(const FieldElement& x);
bool is_algebraic_integer(const FieldElement& x);
/// -1, 0, 1 by the identity embedding; refines up to kMaxBits.
int compare(const FieldElement& x, const FieldElement& y);
/// Certified sign of sigma_i(x); 0 only for x == 0.
int sign_at(const FieldElement& x, int i);

}  // namespace lenspec
