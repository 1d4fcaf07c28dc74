#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lenspec/fuchsian.hpp"
#include "lenspec/kernels.hpp"

namespace lenspec {

enum class SubgroupMode { Full, Squares };
const char* to_string(SubgroupMode m);
SubgroupMode parse_mode(const std::string& s);

enum class EnumerationStatus { Complete, Partial };

struct EnumerationConfig {
  std::optional<double> max_length;  // exactly one of these two
  std::optional<double> max_trace;
  double r_cut = 0;   // 0: derived from the length bound and the domain radius
  int word_cap = 2000;
  double eps = 0;     // 0: derived from short words
  SubgroupMode mode = SubgroupMode::Full;
  long bits = kDefaultBits;
  bool prune = true;
  bool parallel = true;

  /// Length bound L, converting a trace bound via 2 arcosh(T/2).
  double length_bound() const;
  void validate() const;
};

/// Fundamental-domain data about the base point i.
struct Geometry {
  double rho = 0;      // every point of the (thick part of the) domain lies within rho of i
  double rho_pad = 0;  // rho plus a safety pad, used for all radius tests
  bool cusped = false;
  // Cusped groups: normalization N with the cusp at infinity and AB acting
  // as z -> z + translation_sign.
  Mat2 norm;
  int translation_sign = 1;
  double x_a = 0;  // real part of N(i)
  double x_b = 0;  // real part of N(B's fixed point)

  /// Displacement bound for elements whose axis passes within rho_pad of i and length <= L.
  double reps_radius(double L) const;
  /// Pruning radius that makes the store complete for reps of length <= L.
  double cut_radius(double L) const;
  /// Radius of the conjugator ball.
  double conj_radius() const;
};

Geometry domain_geometry(const TriangleGroup& g);

struct StoreStats {
  std::vector<std::size_t> frontier_sizes;
  std::size_t pruned = 0;
  std::size_t dedup_hits = 0;
  std::size_t ambiguous = 0;           // prune decisions resolved at high precision
  std::size_t boundary_kept = 0;       // undecidable even at high precision, kept
  int max_word_length = 0;
};

/// Elements found by the breadth-first search, deduplicated exactly by
/// their trace quadruples up to sign.
class ElementStore {
 public:
  Group group;
  EnumerationConfig config;
  Geometry geometry;
  double r_cut = 0;
  double eps = 0;  // half the smallest matrix distance among short words (diagnostic)
  EnumerationStatus status = EnumerationStatus::Complete;
  StoreStats stats;

  std::size_t size() const { return letter_.size(); }
  int stride() const { return stride_; }
  std::vector<int> word(std::size_t i) const;
  int word_length(std::size_t i) const { return length_[i]; }
  uint8_t last_letter(std::size_t i) const { return letter_[i]; }
  uint32_t parent(std::size_t i) const { return parent_[i]; }
  const int64_t* quad(std::size_t i) const { return &quads_[i * stride_]; }
  Quad exact_quad(std::size_t i) const;
  FieldElement trace(std::size_t i) const;
  const Mat2& matrix(std::size_t i) const { return mats_[i]; }
  double cosh_displacement(std::size_t i) const { return cosh_[i]; }
  int parity_a(std::size_t i) const { return parity_[i] & 1; }
  int parity_b(std::size_t i) const { return (parity_[i] >> 1) & 1; }
  bool in_squares(std::size_t i) const;
  Isometry isometry(std::size_t i, long bits) const;
  /// Index of the element with this quadruple (either sign).
  std::optional<std::size_t> find(const int64_t* quad) const;
  /// Store sizes by word length.
  std::vector<std::size_t> length_histogram() const;

  // flat arrays for the kernels; invalidated by insert
  const uint8_t* letter_data() const { return letter_.data(); }
  const Mat2* matrix_data() const { return mats_.data(); }
  const int64_t* quad_data() const { return quads_.data(); }

  // construction
  void init(Group g, int stride);
  std::size_t insert(uint32_t parent, uint8_t letter, const int64_t* canonical_quad, uint64_t hash, const Mat2& m,
                     double cosh_d);
  bool contains(const int64_t* canonical_quad, uint64_t hash) const;

 private:
  void rehash(std::size_t capacity);
  std::size_t slot_of(const int64_t* q, uint64_t hash) const;

  int stride_ = 0;
  std::vector<uint32_t> parent_;
  std::vector<uint8_t> letter_;  // 255 for the identity
  std::vector<uint16_t> length_;
  std::vector<uint8_t> parity_;
  std::vector<int64_t> quads_;   // canonical sign
  std::vector<uint64_t> hash_;
  std::vector<Mat2> mats_;
  std::vector<double> cosh_;
  std::vector<uint32_t> table_;
};

/// Raised when an operation needs a larger store than the one given.
class IncompleteEnumeration : public std::runtime_error {
 public:
  IncompleteEnumeration(const std::string& what, double required_r_cut);
  double required_r_cut;
};

ElementStore enumerate_ball(const Group& g, const EnumerationConfig& cfg);

/// Double matrices of A, A^-1, B, B^-1 with their rounding bounds.
std::array<Mat2, 4> generator_matrices(const TriangleGroup& g);
/// Product over a word by balanced splitting (used when the running product's bound grows).
Mat2 balanced_product(const std::array<Mat2, 4>& gens, const std::vector<int>& w);

struct GeodesicClass {
  uint32_t rep = 0;          // store index of the representative
  std::vector<int> word;     // representative word
  FieldElement trace;        // canonical: positive under the identity embedding
  double length = 0;         // 2 arcosh(|tr| / 2)
  double length_lo = 0, length_hi = 0;
  bool primitive = true;
  int root = -1;             // index of the primitive class whose power this is
  int power = 1;
  std::size_t members = 0;   // representatives assigned to the class
  int orientations = 2;      // 1 when the class contains the inverse of its elements
  bool in_squares = true;
};

struct ClassReport {
  double max_length = 0;
  std::vector<GeodesicClass> classes;  // unoriented, ascending by trace
  std::size_t reps = 0;
  std::size_t conjugators = 0;
  std::size_t exact_checks = 0;
  std::size_t cusp_links = 0;
  std::size_t undecided = 0;
  std::size_t missing = 0;  // conjugates that should be representatives but were not found
  std::vector<std::string> undecided_pairs;
  std::vector<std::string> missing_items;
  bool primitive_done = false;
  // every representative (store index, ascending) and its class
  std::vector<uint32_t> member_index;
  std::vector<int> member_class;

  /// Class of a store element, or -1 if it is not a representative.
  int class_of(uint32_t store_index) const;
};

/// Hyperbolic representatives of length <= L grouped into conjugacy
/// classes modulo inversion.
ClassReport conjugacy_classes(const ElementStore& store, double L, bool parallel = true);
/// Flags proper powers and links them to their roots.
void primitive_split(const ElementStore& store, ClassReport& report);

/// Canonical exact trace of a class representative.
FieldElement canonical_trace_of(const ElementStore& store, std::size_t i);

}  // namespace lenspec
