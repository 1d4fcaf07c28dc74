#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lenspec/realfield.hpp"

namespace lenspec {

/// Raised when an int64 coefficient would overflow.
class RingOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Z[lambda_N] with int64 coefficients in the power basis. Used on the
/// enumeration hot path where FieldElement (GMP rationals) is too slow.
/// Every operation is overflow-checked.
class IntRing {
 public:
  /// Multiplication by a fixed ring element as a d x d integer matrix.
  struct Multiplier {
    std::vector<int64_t> m;  // row-major
    bool is_scalar = false;
    int64_t scalar = 0;
  };

  IntRing() = default;
  explicit IntRing(Field f);

  int degree() const { return d_; }
  const Field& field() const { return field_; }

  void mul(const int64_t* a, const int64_t* b, int64_t* out) const;
  Multiplier multiplier(const int64_t* a) const;
  Multiplier multiplier(const FieldElement& a) const;
  void apply(const Multiplier& m, const int64_t* a, int64_t* out) const;

  /// out = sum_k s_k * v_k for small integer scalars.
  void combine(std::initializer_list<std::pair<int64_t, const int64_t*>> terms, int64_t* out) const;

  FieldElement to_element(const int64_t* a) const;
  /// Fails with RingOverflow if x is not in Z[lambda] or does not fit.
  void from_element(const FieldElement& x, int64_t* out) const;
  /// Floating approximation of sigma_i(a).
  double approx(const int64_t* a, int i) const;

 private:
  Field field_;
  int d_ = 0;
  std::vector<int64_t> red_;  // row j: lambda^{d+j} reduced, j < d - 1
};

}  // namespace lenspec
