#include "lenspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lenspec/ring.hpp"

namespace lenspec {

namespace {

constexpr long kCheckBits = 256;

// -1, 0, 1 for t against a double, exact.
int compare_to(const FieldElement& t, double approx, double x) {
  const double tol = 1e-9 * std::max(1.0, std::fabs(x));
  if (approx < x - tol) return -1;
  if (approx > x + tol) return 1;
  return compare(t, FieldElement::from_rational(t.field(), mpq_class(x)));
}

// t <= 2cosh(ell/2), i.e. the length of a trace-t element is at most ell.
bool within_length(const FieldElement& t, double approx, double ell) {
  const double bound = 2.0 * std::cosh(ell / 2.0);
  if (approx < bound * (1 - 1e-12)) return true;
  if (approx > bound * (1 + 1e-12)) return false;
  for (long bits : {kCheckBits, 1024L, 4096L}) {
    RealInterval b = trace_from_length(RealInterval(mpq_class(ell), bits));
    RealInterval v = t.embed(0, bits);
    if (v.certainly_less(b)) return true;
    if (b.certainly_less(v)) return false;
  }
  // 2cosh(ell/2) is transcendental for rational ell > 0, so this is unreachable in practice
  return true;
}

struct LineFit {
  double slope = 0, intercept = 0, residual = 0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0;
  f.intercept = my - f.slope * mx;
  double r2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    r2 += r * r;
  }
  f.residual = std::sqrt(r2);
  return f;
}

void require_classes(const ClassReport& classes, double ell) {
  if (!classes.primitive_done) throw std::logic_error("primitive classes not computed");
  if (ell > classes.max_length + 1e-12)
    throw IncompleteEnumeration("classes are complete to length " + std::to_string(classes.max_length) +
                                    ", requested " + std::to_string(ell),
                                0);
}

}  // namespace

TraceSet build_trace_set(const ElementStore& store, const ClassReport& classes, SubgroupMode mode) {
  (void)store;
  TraceSet ts;
  ts.mode = mode;
  ts.max_trace = 2.0 * std::cosh(classes.max_length / 2.0);
  std::map<std::string, std::size_t> index;
  for (const GeodesicClass& c : classes.classes) {
    if (mode == SubgroupMode::Squares && !c.in_squares) continue;
    if (!ts.field) ts.field = c.trace.field();
    const std::string key = c.trace.to_string();
    auto it = index.find(key);
    if (it == index.end()) {
      if (!is_algebraic_integer(c.trace))
        throw InequalityViolation("trace " + key + " of " + word_string(c.word) + " is not an algebraic integer");
      if (compare_to(c.trace, c.trace.approx(0), 2.0) <= 0)
        throw std::logic_error("non-hyperbolic trace " + key + " in the class list");
      TraceEntry e;
      e.trace = c.trace;
      e.value = c.trace.approx(0);
      const int d = c.trace.field()->degree;
      for (int i = 0; i < d; ++i) e.conjugates.push_back(c.trace.approx(i));
      it = index.emplace(key, ts.entries.size()).first;
      ts.entries.push_back(std::move(e));
    }
    TraceEntry& e = ts.entries[it->second];
    if (c.primitive) ++e.multiplicity;
    ++e.classes;
    e.elements += c.members;
  }
  std::sort(ts.entries.begin(), ts.entries.end(), [](const TraceEntry& a, const TraceEntry& b) {
    if (std::fabs(a.value - b.value) > 1e-9 * a.value) return a.value < b.value;
    return compare(a.trace, b.trace) < 0;
  });
  return ts;
}

bool trace_at_most(const TraceEntry& e, double T) { return compare_to(e.trace, e.value, T) <= 0; }

std::size_t trace_counting(const TraceSet& ts, double T) {
  if (T > ts.max_trace * (1 + 1e-12))
    throw IncompleteEnumeration("traces are complete to " + std::to_string(ts.max_trace) + ", requested " +
                                    std::to_string(T),
                                0);
  std::size_t n = 0;
  while (n < ts.entries.size() && trace_at_most(ts.entries[n], T)) ++n;
  return n;
}

std::vector<double> length_grid(const ClassReport& classes, double step) {
  if (!(step > 0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> grid;
  if (classes.classes.empty()) return grid;
  double systole = classes.classes.front().length;
  for (const auto& c : classes.classes) systole = std::min(systole, c.length);
  const long first = static_cast<long>(std::ceil(systole / step - 1e-12));
  for (long k = first; k * step <= classes.max_length + 1e-12; ++k) grid.push_back(static_cast<double>(k) * step);
  return grid;
}

std::vector<GridRow> counting_functions(const ClassReport& classes, const TraceSet& all_traces,
                                        const std::vector<double>& grid) {
  std::vector<GridRow> rows;
  if (grid.empty()) return rows;
  require_classes(classes, *std::max_element(grid.begin(), grid.end()));

  // exact trace identity per class
  std::map<std::string, int> ids;
  std::vector<int> trace_id(classes.classes.size());
  std::vector<double> approx(classes.classes.size());
  for (std::size_t i = 0; i < classes.classes.size(); ++i) {
    const auto& t = classes.classes[i].trace;
    trace_id[i] = ids.emplace(t.to_string(), static_cast<int>(ids.size())).first->second;
    approx[i] = t.approx(0);
  }

  for (double ell : grid) {
    GridRow r;
    r.ell = ell;
    std::vector<char> seen(ids.size(), 0), seen_all(ids.size(), 0);
    for (std::size_t i = 0; i < classes.classes.size(); ++i) {
      const GeodesicClass& c = classes.classes[i];
      bool in;
      if (c.length_hi <= ell) in = true;
      else if (c.length_lo > ell) in = false;
      else in = within_length(c.trace, approx[i], ell);
      if (!in) continue;
      ++r.N_all;
      if (!seen_all[trace_id[i]]) {
        seen_all[trace_id[i]] = 1;
        ++r.Nprime_all;
      }
      if (!c.primitive) continue;
      ++r.N;
      r.N_oriented += static_cast<std::size_t>(c.orientations);
      if (!seen[trace_id[i]]) {
        seen[trace_id[i]] = 1;
        ++r.Nprime;
      }
    }
    if (r.Nprime > 0) {
      r.mean = static_cast<double>(r.N) / static_cast<double>(r.Nprime);
      r.mean_oriented = static_cast<double>(r.N_oriented) / static_cast<double>(r.Nprime);
    }
    if (r.Nprime_all > 0) r.mean_all = static_cast<double>(r.N_all) / static_cast<double>(r.Nprime_all);
    for (const TraceEntry& e : all_traces.entries) {
      if (!within_length(e.trace, e.value, ell)) break;
      ++r.Lprime;
    }
    r.pgt = static_cast<double>(r.N) * ell / std::exp(ell);
    r.pgt_oriented = static_cast<double>(r.N_oriented) * ell / std::exp(ell);
    rows.push_back(std::move(r));
  }
  return rows;
}

Clustering clustering_histogram(const TraceSet& ts, int n_max) {
  if (n_max > ts.max_trace + 1e-12)
    throw IncompleteEnumeration("traces are complete to " + std::to_string(ts.max_trace) + ", clustering needs " +
                                    std::to_string(n_max),
                                0);
  Clustering c;
  for (int n = 3; n <= n_max; ++n) {
    std::size_t count = 0;
    for (const TraceEntry& e : ts.entries) {
      if (compare_to(e.trace, e.value, n - 1) < 0) continue;
      if (compare_to(e.trace, e.value, n) > 0) break;
      ++count;
    }
    c.counts.push_back(count);
    c.max_count = std::max(c.max_count, count);
    c.running_max.push_back(c.max_count);
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k < c.counts.size(); ++k) {
    if (c.counts[k] == 0 || c.counts[k] != c.running_max[k]) continue;
    x.push_back(std::log(static_cast<double>(k + 3)));
    y.push_back(std::log(static_cast<double>(c.counts[k])));
  }
  if (x.size() >= 2) {
    LineFit f = least_squares(x, y);
    c.exponent = f.slope;
    c.constant = std::exp(f.intercept);
  } else if (x.size() == 1) {
    c.constant = std::exp(y[0]);
  }
  return c;
}

double envelope_constant(const Clustering& c, double e) {
  double C = 0;
  for (std::size_t k = 0; k < c.counts.size(); ++k)
    C = std::max(C, static_cast<double>(c.counts[k]) / std::pow(static_cast<double>(k + 3), e));
  return C;
}

Separation separation_check(const TraceSet& ts, double T, double delta, bool parallel) {
  Separation s;
  std::vector<const TraceEntry*> sel;
  for (const TraceEntry& e : ts.entries) {
    if (!trace_at_most(e, T)) break;
    sel.push_back(&e);
  }
  s.traces = sel.size();
  if (sel.size() < 2) return s;

  IntRing ring(ts.field);
  const int d = ring.degree();
  std::vector<int64_t> coeffs(sel.size() * d);
  std::vector<double> approx(sel.size());
  for (std::size_t i = 0; i < sel.size(); ++i) {
    ring.from_element(sel[i]->trace, &coeffs[i * d]);
    approx[i] = sel[i]->value;
  }
  SeparationScan scan;
  if (parallel) separation_scan_parallel(ring, coeffs, approx, scan);
  else separation_scan_serial(ring, coeffs, approx, scan);

  s.pairs = scan.pairs;
  s.gmp_pairs = scan.overflowed.size();
  double min_norm = scan.min_abs_norm;
  std::size_t violations = scan.violations;
  for (const auto& [i, j] : scan.overflowed) {
    const mpq_class n = abs(field_norm(sel[i]->trace - sel[j]->trace));
    if (n < 1) ++violations;
    min_norm = std::min(min_norm, n.get_d());
  }
  if (violations > 0)
    throw InequalityViolation(std::to_string(violations) + " trace pairs with |N(t - s)| < 1");
  s.min_abs_norm = min_norm;
  s.min_gap = scan.min_gap;
  s.gap_pair = sel[scan.gap_i]->trace.to_string() + " ; " + sel[scan.gap_j]->trace.to_string();
  s.c_emp = s.min_gap * std::pow(T, 1.0 - delta);
  return s;
}

GaloisAudit galois_bound_check(const TraceSet& ts, const ArithmeticDimension& dim, bool cocompact) {
  if (dim.r != 2)
    throw std::invalid_argument("Galois bound needs arithmetic dimension 2, got " + std::to_string(dim.r));
  GaloisAudit a;
  for (std::size_t v = 1; v < dim.verdicts.size(); ++v)
    if (dim.verdicts[v].unbounded) a.sigma = dim.verdicts[v].ambient_index;
  if (a.sigma < 0) throw std::invalid_argument("no unbounded non-identity embedding");

  a.traces = ts.entries.size();
  const RealInterval two = RealInterval::from_int(2, kCheckBits);
  std::vector<double> ex, ey;  // log t, log|sigma t| over the running-max points
  std::vector<double> all_x, all_y;
  double running = 0;
  for (const TraceEntry& e : ts.entries) {
    const double s = std::fabs(e.conjugates[a.sigma]);
    bool unbounded;
    if (s > 2 + 1e-9) unbounded = true;
    else if (s < 2 - 1e-9) unbounded = false;
    else unbounded = two.certainly_less(e.trace.embed(a.sigma, kCheckBits).abs());
    if (!unbounded) {
      ++a.bounded;
      a.margins.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    ++a.unbounded;
    const double delta = 1.0 - std::log(s / 2.0) / std::log(e.value);
    a.margins.push_back(delta);
    if (!a.delta_emp || delta < *a.delta_emp) {
      a.delta_emp = delta;
      a.delta_emp_trace = e.trace.to_string();
    }
    if (cocompact) {
      ++a.audited;
      RealInterval st = e.trace.embed(a.sigma, kCheckBits).abs();
      if (!st.certainly_less(e.trace.embed(0, kCheckBits))) ++a.contraction_failures;
    } else {
      all_x.push_back(std::log(e.value));
      all_y.push_back(std::log(s));
      if (s > running) {
        running = s;
        ex.push_back(std::log(e.value));
        ey.push_back(std::log(s));
      }
    }
  }
  if (!cocompact && ex.size() >= 2) {
    LineFit f = least_squares(ex, ey);
    a.envelope_points = ex.size();
    a.delta_fit = 1.0 - f.slope;
    a.C_ls = std::exp(f.intercept);
    double shift = 0;
    for (std::size_t i = 0; i < ex.size(); ++i) shift = std::max(shift, ey[i] - f.intercept - f.slope * ex[i]);
    a.C_fit = std::exp(f.intercept + shift);
    // residuals of every unbounded trace against the shifted envelope
    a.min_residual = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < all_x.size(); ++i)
      a.min_residual = std::min(a.min_residual, f.intercept + shift + f.slope * all_x[i] - all_y[i]);
    // the point that fixed the shift sits at zero up to rounding
    if (std::fabs(a.min_residual) < 1e-12) a.min_residual = 0;
  }
  return a;
}

NormBound norm_bound_check(const TraceSet& ts, const Subfield& k, double delta) {
  NormBound nb;
  nb.degree = k.degree;
  nb.delta = delta;
  const int ambient = ts.field ? ts.field->degree : 1;
  const RealInterval exponent = RealInterval(mpq_class(2.0 - delta), kCheckBits);
  for (const TraceEntry& e : ts.entries) {
    NormVerdict v;
    v.trace = e.trace.to_string();
    mpq_class nq = abs(field_norm(e.trace));
    mpz_class n = nq.get_num();
    int d = ambient;
    if (k.contains(e.trace) && k.degree < ambient) {
      // N_K = N_k^m for t in k
      const unsigned long m = static_cast<unsigned long>(ambient / k.degree);
      mpz_class root;
      if (!mpz_root(root.get_mpz_t(), n.get_mpz_t(), m))
        throw std::logic_error("norm of " + v.trace + " is not a perfect power");
      n = root;
      d = k.degree;
    }
    v.norm = n.get_str();
    RealInterval bound = pow(e.trace.embed(0, kCheckBits), exponent) * RealInterval::from_int(1L << (d - 1), kCheckBits);
    v.bound = bound.mid();
    RealInterval lhs(mpq_class(n), kCheckBits);
    if (lhs.certainly_less(bound)) {
      v.verdict = 1;
      ++nb.pass;
    } else if (bound.certainly_less(lhs) || bound.upper() <= lhs.lower()) {
      v.verdict = -1;
      ++nb.fail;
    } else {
      ++nb.undecided;
    }
    nb.rows.push_back(std::move(v));
  }
  return nb;
}

double pgt_ratio(const ClassReport& classes, double ell, bool oriented) {
  require_classes(classes, ell);
  std::size_t n = 0;
  for (const GeodesicClass& c : classes.classes) {
    if (!c.primitive) continue;
    const bool in = c.length_hi <= ell ? true : c.length_lo > ell ? false : within_length(c.trace, c.trace.approx(0), ell);
    if (in) n += oriented ? static_cast<std::size_t>(c.orientations) : 1;
  }
  return static_cast<double>(n) * ell / std::exp(ell);
}

EgmmFit egmm_fit(const std::vector<double>& ell, const std::vector<double>& mean) {
  if (ell.size() != mean.size()) throw std::invalid_argument("egmm_fit: size mismatch");
  if (ell.size() < 3) throw std::invalid_argument("egmm_fit needs at least 3 grid points");
  std::vector<double> y(ell.size());
  for (std::size_t i = 0; i < ell.size(); ++i) y[i] = std::log(mean[i]) + std::log(ell[i]);
  LineFit f = least_squares(ell, y);
  EgmmFit r;
  r.beta = f.slope;
  r.c = std::exp(f.intercept);
  r.residual = f.residual;
  r.points = ell.size();
  return r;
}

EgmmFit egmm_fit(const std::vector<GridRow>& rows, double lo, double hi) {
  std::vector<double> ell, mean;
  for (const GridRow& r : rows) {
    if (r.ell < lo - 1e-12 || r.ell > hi + 1e-12 || !r.mean) continue;
    ell.push_back(r.ell);
    mean.push_back(*r.mean);
  }
  return egmm_fit(ell, mean);
}

DistinctLengthBound distinct_length_bound_check(const std::vector<GridRow>& rows, const TraceSet& all_traces,
                                                double delta) {
  DistinctLengthBound b;
  for (const GridRow& r : rows) {
    ++b.checked;
    if (r.Nprime > r.Lprime || r.Nprime_all > r.Lprime) ++b.violations;
  }
  if (b.violations > 0)
    throw InequalityViolation(std::to_string(b.violations) + " grid points with N'(l) > L'(2cosh(l/2))");
  for (std::size_t k = 0; k < all_traces.entries.size(); ++k)
    b.C = std::max(b.C, static_cast<double>(k + 1) / std::pow(all_traces.entries[k].value, 2.0 - delta));
  return b;
}

}  // namespace lenspec
