#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lenspec/enumerate.hpp"

namespace lenspec {

/// Raised when a proven inequality fails on computed data.
class InequalityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceEntry {
  FieldElement trace;            // canonical, > 2
  double value = 0;              // identity embedding
  std::size_t multiplicity = 0;  // primitive unoriented classes with this trace
  std::size_t classes = 0;       // all classes with this trace, powers included
  std::size_t elements = 0;      // representatives over those classes
  std::vector<double> conjugates;  // sigma_i(t) for every ambient embedding
};

/// Distinct traces of hyperbolic classes, strictly increasing.
struct TraceSet {
  Field field;
  SubgroupMode mode = SubgroupMode::Full;
  double max_trace = 0;
  std::vector<TraceEntry> entries;
};

/// Traces of all classes (squares mode keeps classes inside the subgroup
/// generated by squares). Throws if a trace is not an algebraic integer.
TraceSet build_trace_set(const ElementStore& store, const ClassReport& classes, SubgroupMode mode);

/// Exact test t <= T for a trace against a double bound.
bool trace_at_most(const TraceEntry& e, double T);

/// L'(T): distinct traces in (2, T].
std::size_t trace_counting(const TraceSet& ts, double T);

struct GridRow {
  double ell = 0;
  std::size_t N = 0;           // primitive unoriented classes with length <= ell
  std::size_t Nprime = 0;      // distinct traces among them
  std::optional<double> mean;  // N / N'
  std::size_t N_oriented = 0;  // primitive oriented classes
  std::size_t N_all = 0;       // unoriented classes, powers included
  std::size_t Nprime_all = 0;
  std::optional<double> mean_oriented;
  std::optional<double> mean_all;
  std::size_t Lprime = 0;      // L'(2 cosh(ell / 2)) over all traces
  double pgt = 0;              // N ell / e^ell
  double pgt_oriented = 0;
};

/// Grid points: multiples of step from the first one at or above the systole up to L.
std::vector<double> length_grid(const ClassReport& classes, double step);
std::vector<GridRow> counting_functions(const ClassReport& classes, const TraceSet& all_traces,
                                        const std::vector<double>& grid);

struct Clustering {
  std::vector<std::size_t> counts;  // counts[k] for the window [n - 1, n], n = k + 3
  std::vector<std::size_t> running_max;
  double exponent = 0;      // least-squares slope of log count over the running-max points
  double constant = 0;      // least-squares constant
  std::size_t max_count = 0;
};

/// #(traces in [n - 1, n]) for n = 3..n_max, exact at integer endpoints.
Clustering clustering_histogram(const TraceSet& ts, int n_max);
/// Smallest C with count(n) <= C n^e for every window.
double envelope_constant(const Clustering& c, double e);

struct Separation {
  std::size_t traces = 0;
  std::size_t pairs = 0;
  std::size_t gmp_pairs = 0;       // pairs whose norm needed arbitrary precision
  double min_abs_norm = 0;
  double min_gap = 0;
  std::string gap_pair;
  double c_emp = 0;                // min |t - s| T^(1 - delta)
};

/// Certifies |N(t - s)| >= 1 for all distinct trace pairs up to T.
/// Throws InequalityViolation on failure.
Separation separation_check(const TraceSet& ts, double T, double delta, bool parallel = true);

struct GaloisAudit {
  int sigma = -1;                  // ambient embedding index of the unbounded conjugate
  std::size_t traces = 0;
  std::size_t unbounded = 0;       // traces with |sigma(t)| > 2
  std::size_t bounded = 0;         // elliptic or bounded conjugate
  std::optional<double> delta_emp; // inf of 1 - log(|sigma t| / 2) / log t
  std::string delta_emp_trace;
  // cocompact: strict contraction of lengths
  std::size_t audited = 0;
  std::size_t contraction_failures = 0;
  // cusped: upper-envelope fit log|sigma t| <= log C + (1 - delta_fit) log t
  std::optional<double> delta_fit;
  double C_fit = 0;                // shifted so every envelope point lies on or below
  double C_ls = 0;                 // plain least-squares constant
  double min_residual = 0;
  std::size_t envelope_points = 0;
  std::vector<double> margins;     // per trace: delta(t), or NaN when bounded
};

/// Requires arithmetic dimension 2.
GaloisAudit galois_bound_check(const TraceSet& ts, const ArithmeticDimension& dim, bool cocompact);

struct NormVerdict {
  std::string trace;
  std::string norm;
  double bound = 0;
  int verdict = 0;  // 1 pass, 0 undecided, -1 fail
};

struct NormBound {
  int degree = 0;   // degree of the invariant trace field
  double delta = 0;
  std::size_t pass = 0, fail = 0, undecided = 0;
  std::vector<NormVerdict> rows;
};

/// |N_{k|Q}(t)| < 2^(d-1) t^(2 - delta) for every trace, k the invariant trace field.
NormBound norm_bound_check(const TraceSet& ts, const Subfield& k, double delta);

double pgt_ratio(const ClassReport& classes, double ell, bool oriented = false);

struct EgmmFit {
  double beta = 0;
  double c = 0;
  double residual = 0;
  std::size_t points = 0;
};

/// Least squares of log<g> + log ell against beta ell + log c over grid rows in [lo, hi].
EgmmFit egmm_fit(const std::vector<GridRow>& rows, double lo, double hi);
EgmmFit egmm_fit(const std::vector<double>& ell, const std::vector<double>& mean);

struct DistinctLengthBound {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double C = 0;  // max over the trace set of L'(t) / t^(2 - delta)
};

/// Pointwise N'(ell) <= L'(2 cosh(ell / 2)); throws InequalityViolation on failure.
DistinctLengthBound distinct_length_bound_check(const std::vector<GridRow>& rows, const TraceSet& all_traces,
                                                double delta);

}  // namespace lenspec
