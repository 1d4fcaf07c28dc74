#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "lenspec/enumerate.hpp"

namespace lenspec {

namespace {

using cplx = std::complex<double>;

cplx mobius(const Mat2& m, cplx z) { return (m.a * z + m.b) / (m.c * z + m.d); }

struct UnionFind {
  std::vector<uint32_t> p;
  explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0u); }
  uint32_t find(uint32_t x) {
    while (p[x] != x) {
      p[x] = p[p[x]];
      x = p[x];
    }
    return x;
  }
  void unite(uint32_t a, uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    p[b] = a;
  }
};

/// Quadruple of (store element start) * w_1 * w_2 * ..., canonical sign.
/// Returns false when the int64 coefficients overflow.
bool product_quad(const ElementStore& st, std::size_t start, const std::vector<const std::vector<int>*>& words,
                  std::vector<int64_t>& out) {
  const TriangleGroup& g = *st.group;
  const int n = st.stride();
  out.assign(st.quad(start), st.quad(start) + n);
  std::vector<int64_t> tmp(n);
  try {
    for (const auto* w : words)
      for (int l : *w) {
        g.extend(out.data(), l, tmp.data());
        out.swap(tmp);
      }
  } catch (const RingOverflow&) {
    return false;
  }
  canonicalize_sign(out.data(), n);
  return true;
}

/// Exact test that (start) * w_1 * w_2 * ... equals the store element target up to sign.
bool product_equals(const ElementStore& st, std::size_t start, const std::vector<const std::vector<int>*>& words,
                    std::size_t target) {
  std::vector<int64_t> q;
  if (product_quad(st, start, words, q)) return std::equal(q.begin(), q.end(), st.quad(target));
  const TriangleGroup& g = *st.group;
  Quad e = st.exact_quad(start);
  for (const auto* w : words)
    for (int l : *w) e = g.extend(e, l);
  return canonical_sign(e) == canonical_sign(st.exact_quad(target));
}

std::vector<int> power_word(const std::vector<int>& w, int n) {
  std::vector<int> out;
  if (n >= 0) {
    for (int k = 0; k < n; ++k) out.insert(out.end(), w.begin(), w.end());
  } else {
    const std::vector<int> inv = inverse_word(w);
    for (int k = 0; k < -n; ++k) out.insert(out.end(), inv.begin(), inv.end());
  }
  return out;
}

double sinh_half_length(double tr) { return std::sqrt(std::max(0.0, tr * tr / 4.0 - 1.0)); }

/// Endpoints of the axis of a hyperbolic matrix, larger first.
std::pair<double, double> axis_endpoints(const Mat2& m) {
  const double tr = m.a + m.d;
  const double s = std::sqrt(std::max(0.0, tr * tr - 4.0));
  double u = ((m.a - m.d) + s) / (2.0 * m.c), v = ((m.a - m.d) - s) / (2.0 * m.c);
  if (u < v) std::swap(u, v);
  return {u, v};
}

struct Horoball {
  double center = 0;    // tangency point on the real line
  double diameter = 0;  // Euclidean diameter; 0 marks the horoball {Im z > 1} at infinity
  bool at_infinity = false;
};

/// Thick-point test in the cusp normalization: does the axis of m meet the
/// ball about w0 of radius rho outside every horoball?
bool has_thick_point(const Mat2& m, cplx w0, double cosh_rho, const std::vector<Horoball>& balls) {
  auto [x0, xi] = axis_endpoints(m);
  // M sends x0 to 0 and xi to infinity; det of [[1, -x0], [1, -xi]] is x0 - xi > 0
  const double k = 1.0 / std::sqrt(x0 - xi);
  const Mat2 M{k, -k * x0, k, -k * xi, 0};
  const cplx w = mobius(M, w0);
  const double y0 = w.imag();
  const double disc = y0 * y0 * cosh_rho * cosh_rho - std::norm(w);
  if (disc < 0) return false;
  const double lo = y0 * cosh_rho - std::sqrt(disc), hi = y0 * cosh_rho + std::sqrt(disc);
  std::vector<std::pair<double, double>> cover;
  for (const Horoball& h : balls) {
    double c, D;
    if (h.at_infinity) {
      c = M.a / M.c;
      D = 1.0 / (M.c * M.c);
    } else {
      const double den = M.c * h.center + M.d;
      if (std::fabs(den) < 1e-14) continue;
      c = (M.a * h.center + M.b) / den;
      D = h.diameter / (den * den);
    }
    // points iy inside: y^2 - D y + c^2 < 0
    const double q = D * D / 4.0 - c * c;
    if (q <= 0) continue;
    const double r = std::sqrt(q);
    const double shrink = 1e-9 * D;
    double a = D / 2.0 - r + shrink, b = D / 2.0 + r - shrink;
    if (a < b) cover.push_back({a, b});
  }
  std::sort(cover.begin(), cover.end());
  double reach = lo;
  for (const auto& [a, b] : cover) {
    if (a > reach) break;
    reach = std::max(reach, b);
    if (reach >= hi) return false;
  }
  return reach < hi;
}

}  // namespace

int ClassReport::class_of(uint32_t store_index) const {
  auto it = std::lower_bound(member_index.begin(), member_index.end(), store_index);
  if (it == member_index.end() || *it != store_index) return -1;
  return member_class[it - member_index.begin()];
}

FieldElement canonical_trace_of(const ElementStore& store, std::size_t i) {
  return canonical_trace(store.trace(i));
}

ClassReport conjugacy_classes(const ElementStore& store, double L, bool parallel) {
  const Geometry& geo = store.geometry;
  const double required = std::max(geo.cut_radius(L), geo.conj_radius() + geo.rho_pad);
  if (!store.config.prune || store.status != EnumerationStatus::Complete || store.r_cut < required - 1e-12) {
    std::ostringstream os;
    os << "store is not complete for length bound " << L << ": need a finished pruned search with R_cut >= "
       << required << " (have " << store.r_cut << (store.status == EnumerationStatus::Partial ? ", partial" : "")
       << ")";
    throw IncompleteEnumeration(os.str(), required);
  }
  const TriangleGroup& g = *store.group;
  ClassReport rep;
  rep.max_length = L;
  const double cosh_rho = std::cosh(geo.rho_pad);
  const double cosh_conj = std::cosh(geo.conj_radius());

  // conjugator ball, also the source of horoballs near i
  std::vector<uint32_t> conj_idx;
  for (std::size_t i = 0; i < store.size(); ++i)
    if (store.cosh_displacement(i) <= cosh_conj) conj_idx.push_back(static_cast<uint32_t>(i));

  std::vector<Horoball> balls;
  Mat2 norm_inv;
  cplx base;
  if (geo.cusped) {
    norm_inv = inverse(geo.norm);
    base = mobius(geo.norm, cplx(0, 1));
    balls.push_back({0, 0, true});
    for (uint32_t i : conj_idx) {
      const Mat2 w = mul(mul(geo.norm, store.matrix(i)), norm_inv);
      if (std::fabs(w.c) < 1e-9) continue;  // stabilizes the cusp at infinity
      balls.push_back({w.a / w.c, 1.0 / (w.c * w.c), false});
    }
  }

  // representatives: hyperbolic, length <= L, axis within rho of i (through a thick point when cusped)
  std::vector<uint32_t> reps;
  for (std::size_t i = 1; i < store.size(); ++i) {
    const Mat2& m = store.matrix(i);
    const double tr = std::fabs(trace(m));
    if (tr < 2.0 - 1e-9) continue;
    if (tr <= 2.0 + 1e-9 && classify_trace(store.trace(i)) != Classification::Hyperbolic) continue;
    const double len = 2.0 * std::acosh(std::max(1.0, tr / 2.0));
    if (len > L + 1e-9) continue;
    if (std::fabs(len - L) <= 1e-9) {
      RealInterval li = length_from_trace(store.trace(i), 256);
      if (li.lower_double() > L) continue;
    }
    const double sh_d = std::sqrt(std::max(0.0, (store.cosh_displacement(i) - 1.0) / 2.0));
    if (sh_d > cosh_rho * sinh_half_length(tr) * (1 + 1e-12)) continue;
    if (geo.cusped && !has_thick_point(mul(mul(geo.norm, m), norm_inv), base, cosh_rho, balls)) continue;
    reps.push_back(static_cast<uint32_t>(i));
  }
  rep.reps = reps.size();
  rep.conjugators = conj_idx.size();
  std::vector<int> rep_of(store.size(), -1);
  for (std::size_t k = 0; k < reps.size(); ++k) rep_of[reps[k]] = static_cast<int>(k);

  std::vector<Mat2> rep_mats, conj_mats;
  for (uint32_t i : reps) rep_mats.push_back(store.matrix(i));
  for (uint32_t i : conj_idx) conj_mats.push_back(store.matrix(i));
  MatrixIndex index;
  index.build(rep_mats);

  std::vector<double> expect;
  if (!geo.cusped) {
    const double ch = std::cosh(std::max(0.0, geo.rho_pad - 1e-4));
    for (const Mat2& m : rep_mats) {
      const double s = ch * sinh_half_length(std::fabs(trace(m)));
      expect.push_back(1.0 + 2.0 * s * s);
    }
  }
  std::vector<ConjugatorHit> hits;
  constexpr double kTol = 1e-6;
  if (parallel)
    conjugator_scan_parallel(rep_mats, conj_mats, index, kTol, expect, hits);
  else
    conjugator_scan_serial(rep_mats, conj_mats, index, kTol, expect, hits);

  UnionFind oriented(reps.size()), unoriented(reps.size());
  auto note_undecided = [&](const std::string& a, const std::string& b, const std::string& how) {
    ++rep.undecided;
    if (rep.undecided_pairs.size() < 50) rep.undecided_pairs.push_back(a + " ~ " + b + " via " + how);
  };
  auto note_missing = [&](const std::string& what) {
    ++rep.missing;
    if (rep.missing_items.size() < 50) rep.missing_items.push_back(what);
  };

  for (const ConjugatorHit& h : hits) {
    const uint32_t r = reps[h.rep], s = conj_idx[h.conjugator];
    if (h.found == kNotFound) {
      note_missing(word_string(store.word(s)) + " * " + word_string(store.word(r)) + " * inverse");
      continue;
    }
    if (oriented.find(h.rep) == oriented.find(h.found)) continue;
    const uint32_t f = reps[h.found];
    const std::vector<int> wr = store.word(r), ws_inv = inverse_word(store.word(s));
    ++rep.exact_checks;
    if (product_equals(store, s, {&wr, &ws_inv}, f)) {
      oriented.unite(h.rep, h.found);
      unoriented.unite(h.rep, h.found);
    } else {
      note_undecided(word_string(wr), word_string(store.word(f)), "conjugator " + word_string(store.word(s)));
    }
  }

  // inverses: exact lookup
  std::vector<int> inverse_rep(reps.size(), -1);
  {
    const IntRing& ring = g.ring;
    const int d = ring.degree();
    std::vector<int64_t> q(store.stride()), t(d);
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const int64_t* p = store.quad(reps[k]);
      bool ok = true;
      try {
        std::copy(p, p + d, q.begin());
        ring.apply(g.mx, p, t.data());
        ring.combine({{1, t.data()}, {-1, p + d}}, q.data() + d);
        ring.apply(g.my, p, t.data());
        ring.combine({{1, t.data()}, {-1, p + 2 * d}}, q.data() + 2 * d);
        ring.apply(g.mz, p, t.data());
        ring.combine({{1, t.data()}, {-1, p + 3 * d}}, q.data() + 3 * d);
      } catch (const RingOverflow&) {
        ok = false;
      }
      std::optional<std::size_t> f = ok ? store.find(q.data()) : std::nullopt;
      if (!f || rep_of[*f] < 0) {
        note_missing("inverse of " + word_string(store.word(reps[k])));
        continue;
      }
      inverse_rep[k] = rep_of[*f];
      unoriented.unite(static_cast<uint32_t>(k), static_cast<uint32_t>(rep_of[*f]));
    }
  }

  // cusp excursions: conjugate by translations along the cusp at infinity
  if (geo.cusped) {
    const std::vector<int> ab{kLetterA, kLetterB};
    auto mid = [](const Mat2I& m) { return Mat2{m.a.mid(), m.b.mid(), m.c.mid(), m.d.mid(), 0}; };
    const Mat2 P = mul(mid(g.gens[kLetterA]), mid(g.gens[kLetterB]));
    auto power = [&](int e) {
      Mat2 r;
      const Mat2 base = e >= 0 ? P : inverse(P);
      for (int k = 0; k < std::abs(e); ++k) r = mul(r, base);
      return r;
    };
    std::vector<uint32_t> buf;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const Mat2 m = mul(mul(geo.norm, rep_mats[k]), norm_inv);
      auto [u, v] = axis_endpoints(m);
      const double centre = (u + v) / 2.0, rad = (u - v) / 2.0;
      if (rad <= 1.0) continue;
      const double off = std::sqrt(rad * rad - 1.0);
      std::vector<long> shifts;
      for (double x : {centre - off, centre + off}) {
        const long t0 = static_cast<long>(std::floor(x - (geo.x_a - 0.5)));
        for (long t = t0 - 1; t <= t0 + 1; ++t)
          if (t != 0) shifts.push_back(t);
      }
      std::sort(shifts.begin(), shifts.end());
      shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());
      for (long t : shifts) {
        // translation by -t in the normalized picture is (AB)^(-sign * t)
        const int e = static_cast<int>(-geo.translation_sign * t);
        const std::vector<int> left = power_word(ab, e), right = power_word(ab, -e);
        const Mat2 T = power(e);
        const Mat2 c = mul(mul(T, rep_mats[k]), inverse(T));
        index.find(c, kTol, buf);
        for (uint32_t f : buf) {
          if (oriented.find(static_cast<uint32_t>(k)) == oriented.find(f)) continue;
          const std::vector<int> wr = store.word(reps[k]);
          ++rep.exact_checks;
          if (product_equals(store, 0, {&left, &wr, &right}, reps[f])) {
            oriented.unite(static_cast<uint32_t>(k), f);
            unoriented.unite(static_cast<uint32_t>(k), f);
            ++rep.cusp_links;
          } else {
            note_undecided(word_string(wr), word_string(store.word(reps[f])), "cusp shift " + std::to_string(t));
          }
        }
      }
    }
  }

  // assemble classes; representatives in store order are shortlex ordered
  std::vector<int> class_id(reps.size(), -1);
  std::vector<uint32_t> rep_root;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const uint32_t root = unoriented.find(static_cast<uint32_t>(k));
    if (class_id[root] < 0) {
      class_id[root] = static_cast<int>(rep.classes.size());
      GeodesicClass c;
      c.rep = reps[k];
      c.word = store.word(reps[k]);
      c.trace = canonical_trace_of(store, reps[k]);
      const double tr = std::fabs(trace(rep_mats[k]));
      c.length = 2.0 * std::acosh(tr / 2.0);
      RealInterval li = length_from_trace(c.trace, 128);
      c.length_lo = li.lower_double();
      c.length_hi = li.upper_double();
      const int inv = inverse_rep[k];
      c.orientations = (inv >= 0 && oriented.find(static_cast<uint32_t>(inv)) == oriented.find(static_cast<uint32_t>(k))) ? 1 : 2;
      c.in_squares = store.in_squares(reps[k]);
      rep.classes.push_back(std::move(c));
    }
    class_id[k] = class_id[root];
    ++rep.classes[class_id[k]].members;
  }

  // ascending by trace, ties by representative
  std::vector<int> order(rep.classes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const GeodesicClass& a = rep.classes[x];
    const GeodesicClass& b = rep.classes[y];
    if (std::fabs(a.length - b.length) > 1e-9) return a.length < b.length;
    if (!(a.trace == b.trace)) return compare(a.trace, b.trace) < 0;
    return a.rep < b.rep;
  });
  std::vector<int> pos(order.size());
  std::vector<GeodesicClass> sorted;
  sorted.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    pos[order[k]] = static_cast<int>(k);
    sorted.push_back(std::move(rep.classes[order[k]]));
  }
  rep.classes.swap(sorted);
  rep.member_index = reps;
  rep.member_class.resize(reps.size());
  for (std::size_t k = 0; k < reps.size(); ++k) rep.member_class[k] = pos[class_id[k]];
  return rep;
}

void primitive_split(const ElementStore& store, ClassReport& report) {
  const double L = report.max_length;
  std::vector<int64_t> q;
  for (std::size_t ci = 0; ci < report.classes.size(); ++ci) {
    if (!report.classes[ci].primitive) continue;
    const GeodesicClass& c = report.classes[ci];
    const FieldElement t = store.trace(c.rep);
    FieldElement prev = FieldElement::from_rational(t.field(), 2), cur = t;
    for (int n = 2; n * c.length_lo <= L + 1e-9; ++n) {
      FieldElement next = t * cur - prev;
      prev = cur;
      cur = next;
      const std::vector<int> w = power_word(c.word, n);
      std::optional<std::size_t> f;
      if (product_quad(store, 0, {&w}, q)) f = store.find(q.data());
      const int target = f ? report.class_of(static_cast<uint32_t>(*f)) : -1;
      if (target < 0) {
        if (n * c.length_hi < L - 1e-9) {
          ++report.missing;
          if (report.missing_items.size() < 50)
            report.missing_items.push_back("power " + std::to_string(n) + " of " + word_string(c.word));
        }
        continue;
      }
      if (!(store.trace(*f) == cur) && !(store.trace(*f) == -cur))
        throw std::logic_error("power trace mismatch for " + word_string(c.word));
      GeodesicClass& p = report.classes[target];
      if (p.primitive) {
        p.primitive = false;
        p.root = static_cast<int>(ci);
        p.power = n;
      }
    }
  }
  report.primitive_done = true;
}

}  // namespace lenspec
