#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace lenspec {

class TriangleGroup;
class IntRing;

/// 2x2 double matrix with an absolute error bound on every entry.
struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;
  double err = 0;
};

Mat2 mul(const Mat2& x, const Mat2& y);
Mat2 inverse(const Mat2& m);
/// cosh of the displacement of i: (a^2 + b^2 + c^2 + d^2) / 2, with its error bound.
double cosh_displacement(const Mat2& m, double* err = nullptr);
double trace(const Mat2& m);

/// Hash of a sign-normalized coefficient block.
uint64_t hash_coeffs(const int64_t* v, int n);
/// Flips v in place so its first nonzero entry is positive; returns the applied sign.
int canonicalize_sign(int64_t* v, int n);

// ---------------------------------------------------------------- frontier expansion

enum class PruneDecision : uint8_t { Prune = 0, Keep = 1, Ambiguous = 2, Overflow = 3 };

struct Candidate {
  uint32_t parent = 0;
  uint8_t letter = 0;
  PruneDecision decision = PruneDecision::Prune;
  uint64_t hash = 0;
  Mat2 m;
  double cosh_d = 0;
};

struct ExpandJob {
  const TriangleGroup* group = nullptr;
  const Mat2* gens = nullptr;          // A, A^-1, B, B^-1
  const uint32_t* parents = nullptr;   // store indices to expand
  std::size_t count = 0;
  const uint8_t* last_letter = nullptr;  // per store index, 255 for the identity
  const Mat2* mats = nullptr;            // per store index
  const int64_t* quads = nullptr;        // per store index, 4 * degree entries
  double cosh_cut = 0;                   // prune when cosh(displacement) certainly exceeds this
  bool prune = true;
};

/// Candidates are laid out as 4 slots per parent in parent order and letter
/// order; the slot of the cancelling letter is marked Prune. Quads are written
/// with matching stride.
struct ExpandResult {
  std::vector<Candidate> cands;
  std::vector<int64_t> quads;
};

void expand_frontier_serial(const ExpandJob& job, ExpandResult& out);
void expand_frontier_parallel(const ExpandJob& job, ExpandResult& out);

// ---------------------------------------------------------------- conjugator scan

/// Sorted lookup of matrices up to sign (sign chosen so the trace is positive).
class MatrixIndex {
 public:
  void build(const std::vector<Mat2>& mats);
  /// Indices whose matrix matches m (up to sign) within tol on every entry.
  void find(const Mat2& m, double tol, std::vector<uint32_t>& hits) const;
  std::size_t size() const { return keys_.size(); }

 private:
  struct Entry {
    double a;
    uint32_t id;
  };
  std::vector<Entry> keys_;
  std::vector<Mat2> mats_;
};

inline constexpr uint32_t kNotFound = 0xffffffffu;

struct ConjugatorHit {
  uint32_t rep = 0;         // index into the rep list
  uint32_t conjugator = 0;  // index into the conjugator list
  uint32_t found = 0;       // index into the rep list, kNotFound for a missing expected conjugate
};

/// For every rep r and conjugator s, looks up s r s^-1 among the reps.
/// When expect_cosh is nonempty, a conjugate with cosh displacement at most
/// expect_cosh[r] that is not found is reported with found = kNotFound.
void conjugator_scan_serial(const std::vector<Mat2>& reps, const std::vector<Mat2>& conj, const MatrixIndex& index,
                            double tol, const std::vector<double>& expect_cosh, std::vector<ConjugatorHit>& hits);
void conjugator_scan_parallel(const std::vector<Mat2>& reps, const std::vector<Mat2>& conj, const MatrixIndex& index,
                              double tol, const std::vector<double>& expect_cosh, std::vector<ConjugatorHit>& hits);

// ---------------------------------------------------------------- pairwise separation

/// Exact norms N(t_i - t_j) over all pairs i < j of distinct ring elements.
/// coeffs holds n blocks of degree int64 coefficients; approx holds the
/// identity-embedding values used for the gap statistics.
struct SeparationScan {
  std::size_t pairs = 0;
  std::size_t violations = 0;  // pairs with |N| < 1, i.e. N = 0
  double min_abs_norm = 0;     // smallest |N| over exactly computed pairs
  double min_gap = 0;          // smallest |t_i - t_j| in the identity embedding
  uint32_t gap_i = 0, gap_j = 0;
  /// pairs whose norm overflowed int128 and must be recomputed with GMP
  std::vector<std::pair<uint32_t, uint32_t>> overflowed;
};

void separation_scan_serial(const IntRing& ring, const std::vector<int64_t>& coeffs, const std::vector<double>& approx,
                            SeparationScan& out);
void separation_scan_parallel(const IntRing& ring, const std::vector<int64_t>& coeffs,
                              const std::vector<double>& approx, SeparationScan& out);

/// Exact norm of an element of Z[lambda] via fraction-free elimination; false on overflow.
bool int_norm(const IntRing& ring, const int64_t* v, __int128& norm);

}  // namespace lenspec
