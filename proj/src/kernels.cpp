#include "lenspec/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lenspec/fuchsian.hpp"
#include "lenspec/ring.hpp"

namespace lenspec {

namespace {

constexpr double kRound = 6e-16;  // generous unit-roundoff multiple for 2-term dot products

double max_abs(const Mat2& m) { return std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)}); }

}  // namespace

Mat2 mul(const Mat2& x, const Mat2& y) {
  Mat2 r;
  r.a = x.a * y.a + x.b * y.c;
  r.b = x.a * y.b + x.b * y.d;
  r.c = x.c * y.a + x.d * y.c;
  r.d = x.c * y.b + x.d * y.d;
  const double nx = max_abs(x), ny = max_abs(y);
  r.err = 2.0 * ((nx + x.err) * y.err + ny * x.err) + 2.0 * kRound * nx * ny;
  return r;
}

Mat2 inverse(const Mat2& m) { return {m.d, -m.b, -m.c, m.a, m.err}; }

double cosh_displacement(const Mat2& m, double* err) {
  const double v = 0.5 * (m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
  if (err) {
    const double s = std::fabs(m.a) + std::fabs(m.b) + std::fabs(m.c) + std::fabs(m.d);
    *err = s * m.err + 2.0 * m.err * m.err + 4.0 * kRound * v;
  }
  return v;
}

double trace(const Mat2& m) { return m.a + m.d; }

uint64_t hash_coeffs(const int64_t* v, int n) {
  uint64_t h = 0x9e3779b97f4a7c15ull;
  for (int k = 0; k < n; ++k) {
    uint64_t x = static_cast<uint64_t>(v[k]) + 0x632be59bd9b4e019ull + (h << 6) + (h >> 2);
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    h ^= x;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

int canonicalize_sign(int64_t* v, int n) {
  for (int k = 0; k < n; ++k) {
    if (v[k] == 0) continue;
    if (v[k] > 0) return 1;
    for (int j = 0; j < n; ++j) v[j] = -v[j];
    return -1;
  }
  return 1;
}

// ---------------------------------------------------------------- frontier expansion

namespace {

void expand_one(const ExpandJob& job, std::size_t p, Candidate* cand, int64_t* quads, int stride) {
  const uint32_t idx = job.parents[p];
  const uint8_t last = job.last_letter[idx];
  const Mat2& pm = job.mats[idx];
  const int64_t* pq = job.quads + static_cast<std::size_t>(idx) * stride;
  std::vector<int64_t> key(stride);
  for (int l = 0; l < 4; ++l) {
    Candidate& c = cand[l];
    c.parent = idx;
    c.letter = static_cast<uint8_t>(l);
    c.decision = PruneDecision::Prune;
    if (last != 255 && l == inverse_letter(last)) continue;
    c.m = mul(pm, job.gens[l]);
    double e = 0;
    c.cosh_d = cosh_displacement(c.m, &e);
    if (job.prune) {
      if (c.cosh_d - e > job.cosh_cut) continue;
      c.decision = (c.cosh_d + e <= job.cosh_cut) ? PruneDecision::Keep : PruneDecision::Ambiguous;
    } else {
      c.decision = PruneDecision::Keep;
    }
    int64_t* q = quads + static_cast<std::size_t>(l) * stride;
    try {
      job.group->extend(pq, l, q);
    } catch (const RingOverflow&) {
      c.decision = PruneDecision::Overflow;
      continue;
    }
    std::copy(q, q + stride, key.begin());
    canonicalize_sign(key.data(), stride);
    c.hash = hash_coeffs(key.data(), stride);
  }
}

void prepare(const ExpandJob& job, ExpandResult& out, int stride) {
  out.cands.assign(job.count * 4, Candidate{});
  out.quads.assign(job.count * 4 * static_cast<std::size_t>(stride), 0);
}

}  // namespace

void expand_frontier_serial(const ExpandJob& job, ExpandResult& out) {
  const int stride = 4 * job.group->ring.degree();
  prepare(job, out, stride);
  for (std::size_t p = 0; p < job.count; ++p)
    expand_one(job, p, &out.cands[p * 4], &out.quads[p * 4 * stride], stride);
}

void expand_frontier_parallel(const ExpandJob& job, ExpandResult& out) {
  const int stride = 4 * job.group->ring.degree();
  prepare(job, out, stride);
  const long long n = static_cast<long long>(job.count);
#pragma omp parallel for schedule(static)
  for (long long p = 0; p < n; ++p)
    expand_one(job, static_cast<std::size_t>(p), &out.cands[p * 4], &out.quads[p * 4 * stride], stride);
}

// ---------------------------------------------------------------- conjugator scan

void MatrixIndex::build(const std::vector<Mat2>& mats) {
  mats_ = mats;
  keys_.clear();
  keys_.reserve(mats.size());
  for (std::size_t i = 0; i < mats_.size(); ++i) {
    if (trace(mats_[i]) < 0) {
      Mat2& m = mats_[i];
      m = {-m.a, -m.b, -m.c, -m.d, m.err};
    }
    keys_.push_back({mats_[i].a, static_cast<uint32_t>(i)});
  }
  std::sort(keys_.begin(), keys_.end(), [](const Entry& x, const Entry& y) { return x.a < y.a || (x.a == y.a && x.id < y.id); });
}

void MatrixIndex::find(const Mat2& q, double tol, std::vector<uint32_t>& hits) const {
  hits.clear();
  Mat2 m = q;
  if (trace(m) < 0) m = {-m.a, -m.b, -m.c, -m.d, m.err};
  auto it = std::lower_bound(keys_.begin(), keys_.end(), m.a - tol, [](const Entry& e, double v) { return e.a < v; });
  for (; it != keys_.end() && it->a <= m.a + tol; ++it) {
    const Mat2& s = mats_[it->id];
    if (std::fabs(s.b - m.b) <= tol && std::fabs(s.c - m.c) <= tol && std::fabs(s.d - m.d) <= tol) hits.push_back(it->id);
  }
}

namespace {

void scan_rep(const std::vector<Mat2>& reps, const std::vector<Mat2>& conj, const MatrixIndex& index, double tol,
              const std::vector<double>& expect, std::size_t r, std::vector<ConjugatorHit>& local,
              std::vector<uint32_t>& buf) {
  for (std::size_t s = 0; s < conj.size(); ++s) {
    Mat2 m = mul(mul(conj[s], reps[r]), inverse(conj[s]));
    index.find(m, tol, buf);
    for (uint32_t f : buf)
      if (f != r) local.push_back({static_cast<uint32_t>(r), static_cast<uint32_t>(s), f});
    if (buf.empty() && !expect.empty() && cosh_displacement(m) <= expect[r])
      local.push_back({static_cast<uint32_t>(r), static_cast<uint32_t>(s), kNotFound});
  }
}

}  // namespace

void conjugator_scan_serial(const std::vector<Mat2>& reps, const std::vector<Mat2>& conj, const MatrixIndex& index,
                            double tol, const std::vector<double>& expect, std::vector<ConjugatorHit>& hits) {
  hits.clear();
  std::vector<uint32_t> buf;
  for (std::size_t r = 0; r < reps.size(); ++r) scan_rep(reps, conj, index, tol, expect, r, hits, buf);
}

void conjugator_scan_parallel(const std::vector<Mat2>& reps, const std::vector<Mat2>& conj, const MatrixIndex& index,
                              double tol, const std::vector<double>& expect, std::vector<ConjugatorHit>& hits) {
  hits.clear();
  const long long n = static_cast<long long>(reps.size());
  std::vector<std::vector<ConjugatorHit>> per(reps.size());
#pragma omp parallel
  {
    std::vector<uint32_t> buf;
#pragma omp for schedule(dynamic, 64)
    for (long long r = 0; r < n; ++r) scan_rep(reps, conj, index, tol, expect, static_cast<std::size_t>(r), per[r], buf);
  }
  for (auto& v : per) hits.insert(hits.end(), v.begin(), v.end());
}

// ---------------------------------------------------------------- pairwise separation

bool int_norm(const IntRing& ring, const int64_t* v, __int128& norm) {
  const int d = ring.degree();
  std::vector<__int128> m(static_cast<std::size_t>(d) * d);
  std::vector<int64_t> col(v, v + d), lam(d, 0), next(d);
  if (d > 1) lam[1] = 1;
  try {
    for (int j = 0; j < d; ++j) {
      for (int r = 0; r < d; ++r) m[r * d + j] = col[r];
      if (j + 1 < d) {
        ring.mul(col.data(), lam.data(), next.data());
        col.swap(next);
      }
    }
  } catch (const RingOverflow&) {
    return false;
  }
  // Bareiss fraction-free elimination
  __int128 prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < d; ++k) {
    if (m[k * d + k] == 0) {
      int p = k + 1;
      while (p < d && m[p * d + k] == 0) ++p;
      if (p == d) {
        norm = 0;
        return true;
      }
      for (int j = 0; j < d; ++j) std::swap(m[k * d + j], m[p * d + j]);
      sign = -sign;
    }
    for (int i = k + 1; i < d; ++i) {
      for (int j = k + 1; j < d; ++j) {
        __int128 u, w, diff;
        if (__builtin_mul_overflow(m[i * d + j], m[k * d + k], &u)) return false;
        if (__builtin_mul_overflow(m[i * d + k], m[k * d + j], &w)) return false;
        if (__builtin_sub_overflow(u, w, &diff)) return false;
        m[i * d + j] = diff / prev;
      }
      m[i * d + k] = 0;
    }
    prev = m[k * d + k];
  }
  norm = sign * m[(d - 1) * d + (d - 1)];
  return true;
}

namespace {

struct PairStats {
  std::size_t pairs = 0, violations = 0;
  double min_abs_norm = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  uint32_t gi = 0, gj = 0;
  std::vector<std::pair<uint32_t, uint32_t>> overflowed;
};

void scan_row(const IntRing& ring, const std::vector<int64_t>& coeffs, const std::vector<double>& approx, std::size_t i,
              PairStats& st) {
  const int d = ring.degree();
  const std::size_t n = approx.size();
  std::vector<int64_t> diff(d);
  for (std::size_t j = i + 1; j < n; ++j) {
    ++st.pairs;
    bool ok = true;
    for (int k = 0; k < d; ++k)
      if (__builtin_sub_overflow(coeffs[i * d + k], coeffs[j * d + k], &diff[k])) ok = false;
    __int128 nv = 0;
    if (ok) ok = int_norm(ring, diff.data(), nv);
    if (!ok) {
      st.overflowed.push_back({static_cast<uint32_t>(i), static_cast<uint32_t>(j)});
    } else {
      if (nv == 0) ++st.violations;
      const double a = std::fabs(static_cast<double>(nv));
      if (a < st.min_abs_norm) st.min_abs_norm = a;
    }
    const double gap = std::fabs(approx[i] - approx[j]);
    if (gap < st.min_gap) {
      st.min_gap = gap;
      st.gi = static_cast<uint32_t>(i);
      st.gj = static_cast<uint32_t>(j);
    }
  }
}

void merge_stats(PairStats& into, const PairStats& from) {
  into.pairs += from.pairs;
  into.violations += from.violations;
  into.min_abs_norm = std::min(into.min_abs_norm, from.min_abs_norm);
  if (from.min_gap < into.min_gap) {
    into.min_gap = from.min_gap;
    into.gi = from.gi;
    into.gj = from.gj;
  }
  into.overflowed.insert(into.overflowed.end(), from.overflowed.begin(), from.overflowed.end());
}

void finish(const PairStats& st, SeparationScan& out) {
  out.pairs = st.pairs;
  out.violations = st.violations;
  out.min_abs_norm = st.min_abs_norm;
  out.min_gap = st.min_gap;
  out.gap_i = st.gi;
  out.gap_j = st.gj;
  out.overflowed = st.overflowed;
}

}  // namespace

void separation_scan_serial(const IntRing& ring, const std::vector<int64_t>& coeffs, const std::vector<double>& approx,
                            SeparationScan& out) {
  PairStats st;
  for (std::size_t i = 0; i < approx.size(); ++i) scan_row(ring, coeffs, approx, i, st);
  finish(st, out);
}

void separation_scan_parallel(const IntRing& ring, const std::vector<int64_t>& coeffs,
                              const std::vector<double>& approx, SeparationScan& out) {
  const long long n = static_cast<long long>(approx.size());
  std::vector<PairStats> rows(approx.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < n; ++i) scan_row(ring, coeffs, approx, static_cast<std::size_t>(i), rows[i]);
  // ordered reduction keeps ties and the overflow list deterministic
  PairStats st;
  for (const auto& r : rows) merge_stats(st, r);
  finish(st, out);
}

}  // namespace lenspec
