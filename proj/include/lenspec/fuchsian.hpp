#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lenspec/interval.hpp"
#include "lenspec/realfield.hpp"
#include "lenspec/ring.hpp"

namespace lenspec {

/// Triangle group signature; 0 encodes an infinite entry.
struct Signature {
  static constexpr int kInf = 0;
  int a = 2, b = 3, c = 7;

  bool cusped() const { return c == kInf; }
  bool cocompact() const { return c != kInf; }
  double margin() const;  // 1 - (1/a + 1/b + 1/c)
  std::string to_string() const;  // "2,5,inf"
  /// Throws std::invalid_argument for malformed or non-hyperbolic input.
  void validate() const;
  static Signature parse(const std::string& text);
  bool operator==(const Signature&) const = default;
};

enum class Classification { Identity, Elliptic, Parabolic, Hyperbolic };
const char* to_string(Classification c);

/// Raised by length_of on non-hyperbolic input.
class NotHyperbolic : public DomainError {
 public:
  NotHyperbolic(Classification c);
  Classification classification;
};

struct Mat2I {
  RealInterval a, b, c, d;
  Mat2I() = default;
  Mat2I(RealInterval a_, RealInterval b_, RealInterval c_, RealInterval d_);
  static Mat2I identity(long bits);
  Mat2I operator*(const Mat2I& o) const;
  Mat2I inverse() const;  // adjugate; valid since det = 1
  Mat2I operator-() const;
  RealInterval trace() const;
  RealInterval det() const;
  /// Every entry of this interval matrix contains the matching entry of s * o, s = +-1.
  bool encloses_scaled(const Mat2I& o, int s) const;
  bool contains_scaled_identity(int s) const;
};

/// Letters: 0 = A, 1 = A^-1, 2 = B, 3 = B^-1.
inline constexpr int kLetterA = 0, kLetterAinv = 1, kLetterB = 2, kLetterBinv = 3;
inline int inverse_letter(int l) { return l ^ 1; }
char letter_char(int l);
std::vector<int> parse_word(const std::string& w);
std::string word_string(const std::vector<int>& w);
std::vector<int> inverse_word(const std::vector<int>& w);

class TriangleGroup;
using Group = std::shared_ptr<const TriangleGroup>;

/// Exact trace quadruple (tr W, tr WA, tr WB, tr WAB).
using Quad = std::array<FieldElement, 4>;

struct Isometry {
  std::vector<int> word;
  Mat2I matrix;
  Quad quad;
  const FieldElement& trace() const { return quad[0]; }
  std::string word_text() const { return word_string(word); }
};

class TriangleGroup {
 public:
  static Group build(const Signature& sig, long bits = kDefaultBits);

  Signature sig;
  int ambient_N = 1;
  Field field;
  IntRing ring;
  FieldElement x, y, z;            // tr A, tr B, tr AB
  std::vector<int64_t> xi, yi, zi;  // same in Z[lambda]
  IntRing::Multiplier mx, my, mz, mzxy;  // multiplication by x, y, z, z - xy
  int z_sign = -1;                 // z = z_sign * 2cos(pi/c)
  RealInterval h, t;               // law-of-cosines parameter and B's scale
  long bits = kDefaultBits;
  std::array<Mat2I, 4> gens;       // A, A^-1, B, B^-1

  /// 2cos(pi/k) in the ambient field (k = 0 means infinity, giving 2).
  FieldElement two_cos_pi_over(int k) const;
  Mat2I generator(int letter, long bits) const;
  Quad identity_quad() const;
  /// Right extension of a trace quadruple by one letter, exact.
  Quad extend(const Quad& q, int letter) const;
  /// Same rule on int64 coefficient blocks of 4 * degree entries.
  void extend(const int64_t* q, int letter, int64_t* out) const;

  Isometry identity() const;
  Isometry evaluate(const std::vector<int>& word, long bits) const;
  Isometry evaluate(const std::string& word, long bits) const { return evaluate(parse_word(word), bits); }
  Isometry times(const Isometry& w, int letter) const;
};

/// Hecke-type pair S, ST for Delta(2, q, inf) with T = [[1, 2cos(pi/q)], [0, 1]].
struct HeckePair {
  Mat2I S, U;  // U = S T
  FieldElement x, y, z;
};
HeckePair hecke_generators(const TriangleGroup& g, long bits);

/// Identity is decided exactly: the quadruple determines the element.
Classification classify(const TriangleGroup& g, const Isometry& m);
Classification classify_trace(const FieldElement& t);
bool is_identity_quad(const TriangleGroup& g, const Quad& q);
/// Flips the sign so the first nonzero coefficient of the quadruple is positive.
Quad canonical_sign(const Quad& q);
/// |t| under the identity embedding.
FieldElement canonical_trace(const FieldElement& t);

RealInterval length_of(const TriangleGroup& g, const Isometry& m, long bits = kDefaultBits);
RealInterval length_from_trace(const FieldElement& t, long bits = kDefaultBits);
/// 2 arcosh(|t|/2) for an interval trace with |t| > 2.
RealInterval length_from_trace(const RealInterval& t);
/// 2cosh(l/2).
RealInterval trace_from_length(const RealInterval& l);
FieldElement squared_trace(const FieldElement& t);

/// Subfield of the ambient field.
struct Subfield {
  Field ambient;
  int degree = 1;
  std::vector<FieldElement> basis;  // Q-basis, basis[0] = 1
  std::vector<FieldElement> generators;
  /// n with subfield = Q(2cos(pi/n)) when one exists among divisors of 2N.
  std::optional<int> cyclotomic_index;
  /// Ambient embedding indices grouped by restriction to the subfield;
  /// classes[0] contains the identity.
  std::vector<std::vector<int>> embedding_classes;
  bool contains(const FieldElement& e) const;
  std::string describe() const;
};

/// Q-subalgebra generated by the given elements.
Subfield generated_subfield(const Field& ambient, const std::vector<FieldElement>& gens);

struct TraceFieldResult {
  Subfield field;
  bool stabilized = false;
  int word_cap = 0;
  std::size_t elements_scanned = 0;
  bool budget_hit = false;
};

TraceFieldResult invariant_trace_field(const TriangleGroup& g, int word_cap = 12);

struct EmbeddingVerdict {
  int ambient_index = 0;   // representative ambient embedding
  bool unbounded = false;  // certified |sigma(tr)| > 2 on Gamma^(2)
  std::string witness;     // word of a certifying element
  double witness_abs = 0;  // |sigma(tr witness)|
  int discriminant_sign = 0;  // sign of sigma(x^2 + y^2 + z^2 - xyz - 4)
  bool agrees = true;
};

struct ArithmeticDimension {
  int r = 0;
  TraceFieldResult trace_field;
  std::vector<EmbeddingVerdict> verdicts;
  bool consistent = true;
  int word_cap = 0;
};

/// Raised when the enumeration verdict and the discriminant indicator disagree.
class InconsistentVerdict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ArithmeticDimension arithmetic_dimension(const TriangleGroup& g, int word_cap = 12);

struct ArithmeticityVerdict {
  bool arithmetic = false;
  int r = 0;
  bool traces_integral = true;
  bool stabilized = true;
  std::string certificate;
};

ArithmeticityVerdict takeuchi_is_arithmetic(const TriangleGroup& g, int word_cap = 12);
ArithmeticityVerdict takeuchi_is_arithmetic(const ArithmeticDimension& dim, bool traces_integral);

/// Ambient field index used for a signature.
int ambient_index(const Signature& sig);

/// Exact membership in the subgroup generated by squares: the parity of
/// the A and B exponent sums modulo the relations.
bool in_square_subgroup(const Signature& sig, int parity_a, int parity_b);

}  // namespace lenspec
