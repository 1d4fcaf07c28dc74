// Serial against OpenMP timings for the three hot kernels, on data taken
// from a real enumeration. Usage: bench_kernels [sig] [max_length] [reps]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "lenspec/enumerate.hpp"
#include "lenspec/ring.hpp"
#include "lenspec/spectrum.hpp"

using namespace lenspec;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, std::size_t work, double serial, double parallel, bool same) {
  std::printf("%-18s %10zu %12.4f %12.4f %8.2fx  %s\n", name, work, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const Signature sig = Signature::parse(argc > 1 ? argv[1] : "2,6,10");
  const double L = argc > 2 ? std::stod(argv[2]) : 7.0;
  const int reps = argc > 3 ? std::stoi(argv[3]) : 3;

  const Group g = TriangleGroup::build(sig);
  EnumerationConfig cfg;
  cfg.max_length = L;
  const ElementStore store = enumerate_ball(g, cfg);
  std::printf("signature %s, L = %g, %zu elements, %d threads\n", sig.to_string().c_str(), L, store.size(),
              omp_get_max_threads());
  std::printf("%-18s %10s %12s %12s %9s\n", "kernel", "work", "serial s", "parallel s", "speedup");

  // frontier expansion over the whole store
  {
    const auto gens = generator_matrices(*g);
    std::vector<uint32_t> parents(store.size());
    for (std::size_t i = 0; i < parents.size(); ++i) parents[i] = static_cast<uint32_t>(i);
    ExpandJob job;
    job.group = g.get();
    job.gens = gens.data();
    job.parents = parents.data();
    job.count = parents.size();
    job.last_letter = store.letter_data();
    job.mats = store.matrix_data();
    job.quads = store.quad_data();
    job.cosh_cut = std::cosh(store.r_cut);
    ExpandResult s, p;
    const double ts = best_of(reps, [&] { expand_frontier_serial(job, s); });
    const double tp = best_of(reps, [&] { expand_frontier_parallel(job, p); });
    bool same = s.quads == p.quads && s.cands.size() == p.cands.size();
    for (std::size_t k = 0; same && k < s.cands.size(); ++k)
      same = s.cands[k].decision == p.cands[k].decision && s.cands[k].hash == p.cands[k].hash;
    report("expand_frontier", 4 * job.count, ts, tp, same);
  }

  // conjugator scan: hyperbolic elements against the shortest elements
  {
    std::vector<Mat2> rep_mats, conj;
    for (std::size_t i = 0; i < store.size(); ++i) {
      if (std::fabs(trace(store.matrix(i))) > 2 + 1e-9) rep_mats.push_back(store.matrix(i));
      if (store.word_length(i) <= 4) conj.push_back(store.matrix(i));
    }
    MatrixIndex index;
    index.build(rep_mats);
    std::vector<ConjugatorHit> s, p;
    const double ts = best_of(reps, [&] { conjugator_scan_serial(rep_mats, conj, index, 1e-6, {}, s); });
    const double tp = best_of(reps, [&] { conjugator_scan_parallel(rep_mats, conj, index, 1e-6, {}, p); });
    bool same = s.size() == p.size();
    for (std::size_t k = 0; same && k < s.size(); ++k)
      same = s[k].rep == p[k].rep && s[k].conjugator == p[k].conjugator && s[k].found == p[k].found;
    report("conjugator_scan", rep_mats.size() * conj.size(), ts, tp, same);
  }

  // pairwise exact norms over the distinct traces
  {
    ClassReport cr = conjugacy_classes(store, L);
    const TraceSet ts_all = build_trace_set(store, cr, SubgroupMode::Full);
    IntRing ring(ts_all.field);
    const int d = ring.degree();
    std::vector<int64_t> coeffs(ts_all.entries.size() * d);
    std::vector<double> approx;
    for (std::size_t i = 0; i < ts_all.entries.size(); ++i) {
      ring.from_element(ts_all.entries[i].trace, &coeffs[i * d]);
      approx.push_back(ts_all.entries[i].value);
    }
    SeparationScan s, p;
    const double ts = best_of(reps, [&] {
      s = {};
      separation_scan_serial(ring, coeffs, approx, s);
    });
    const double tp = best_of(reps, [&] {
      p = {};
      separation_scan_parallel(ring, coeffs, approx, p);
    });
    const bool same = s.pairs == p.pairs && s.violations == p.violations && s.min_abs_norm == p.min_abs_norm &&
                      s.min_gap == p.min_gap && s.overflowed.size() == p.overflowed.size();
    report("separation_scan", s.pairs, ts, tp, same);
  }
  return 0;
}
