#include "lenspec/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace lenspec {

const char* to_string(SubgroupMode m) { return m == SubgroupMode::Full ? "full" : "squares"; }

SubgroupMode parse_mode(const std::string& s) {
  if (s == "full") return SubgroupMode::Full;
  if (s == "squares") return SubgroupMode::Squares;
  throw std::invalid_argument("unknown subgroup mode '" + s + "' (expected full or squares)");
}

double EnumerationConfig::length_bound() const {
  validate();
  if (max_length) return *max_length;
  return 2.0 * std::acosh(*max_trace / 2.0);
}

void EnumerationConfig::validate() const {
  if (max_length.has_value() == max_trace.has_value())
    throw std::invalid_argument("exactly one of the length bound and the trace bound must be set");
  if (max_length && !(*max_length > 0)) throw std::invalid_argument("length bound must be positive");
  if (max_trace && !(*max_trace > 2)) throw std::invalid_argument("trace bound must exceed 2");
  if (word_cap < 1) throw std::invalid_argument("word cap must be positive");
  if (bits < 53 || bits > kMaxBits) throw std::invalid_argument("precision must lie in [53, 16384] bits");
  if (r_cut < 0 || eps < 0) throw std::invalid_argument("radius and separation must be nonnegative");
}

// ---------------------------------------------------------------- geometry

namespace {

using cplx = std::complex<double>;

Mat2 to_mat2(const Mat2I& m) { return {m.a.mid(), m.b.mid(), m.c.mid(), m.d.mid(), 0}; }

cplx mobius(const Mat2& m, cplx z) { return (m.a * z + m.b) / (m.c * z + m.d); }

double hyp_dist(cplx z, cplx w) {
  const double c = 1.0 + std::norm(z - w) / (2.0 * z.imag() * w.imag());
  return std::acosh(std::max(1.0, c));
}

cplx elliptic_fixed_point(const Mat2& m) {
  const double tr = m.a + m.d;
  const double s = std::sqrt(std::max(0.0, 4.0 - tr * tr));
  return {(m.a - m.d) / (2.0 * m.c), s / (2.0 * std::fabs(m.c))};
}

}  // namespace

double Geometry::reps_radius(double L) const {
  return 2.0 * std::asinh(std::cosh(rho_pad) * std::sinh(L / 2.0));
}

double Geometry::cut_radius(double L) const { return reps_radius(L) + rho_pad; }

double Geometry::conj_radius() const { return 2.0 * rho_pad + 1e-6; }

Geometry domain_geometry(const TriangleGroup& g) {
  Geometry geo;
  const Mat2 A = to_mat2(g.gens[kLetterA]);
  const Mat2 B = to_mat2(g.gens[kLetterB]);
  const Mat2 AB = mul(A, B);
  const cplx pa(0, 1);
  const cplx pb(0, g.t.mid());
  const double dab = hyp_dist(pa, pb);
  geo.cusped = g.sig.cusped();
  if (!geo.cusped) {
    geo.rho = std::max(dab, hyp_dist(pa, elliptic_fixed_point(AB)));
  } else {
    // send the parabolic fixed point of AB to infinity, then scale so AB translates by +-1
    const double p = (AB.a - AB.d) / (2.0 * AB.c);
    const Mat2 F{0, -1, 1, -p, 0};
    const Mat2 Finv = inverse(F);
    Mat2 T = mul(mul(F, AB), Finv);
    const double tau = T.b / T.a;
    const double s = 1.0 / std::sqrt(std::fabs(tau));
    const Mat2 S{s, 0, 0, 1.0 / s, 0};
    geo.norm = mul(S, F);
    geo.translation_sign = tau > 0 ? 1 : -1;
    const cplx na = mobius(geo.norm, pa), nb = mobius(geo.norm, pb);
    geo.x_a = na.real();
    geo.x_b = nb.real();
    if (std::fabs(2.0 * std::fabs(geo.x_b - geo.x_a) - 1.0) > 1e-6)
      throw std::logic_error("cusp normalization failed: domain width is not the translation length");
    const cplx c1(geo.x_b, 1.0), c2(2.0 * geo.x_a - geo.x_b, 1.0);
    geo.rho = std::max({dab, hyp_dist(na, c1), hyp_dist(na, c2)});
  }
  geo.rho_pad = geo.rho + 1e-6;
  return geo;
}

// ---------------------------------------------------------------- element store

namespace {
constexpr uint32_t kEmpty = std::numeric_limits<uint32_t>::max();
}

IncompleteEnumeration::IncompleteEnumeration(const std::string& what, double r)
    : std::runtime_error(what), required_r_cut(r) {}

void ElementStore::init(Group g, int stride) {
  group = std::move(g);
  stride_ = stride;
  rehash(1 << 12);
}

std::vector<int> ElementStore::word(std::size_t i) const {
  std::vector<int> w(length_[i]);
  for (std::size_t k = w.size(); k-- > 0;) {
    w[k] = letter_[i];
    i = parent_[i];
  }
  return w;
}

Quad ElementStore::exact_quad(std::size_t i) const {
  const IntRing& r = group->ring;
  const int d = r.degree();
  const int64_t* q = quad(i);
  return {r.to_element(q), r.to_element(q + d), r.to_element(q + 2 * d), r.to_element(q + 3 * d)};
}

FieldElement ElementStore::trace(std::size_t i) const { return group->ring.to_element(quad(i)); }

bool ElementStore::in_squares(std::size_t i) const {
  return in_square_subgroup(group->sig, parity_a(i), parity_b(i));
}

Isometry ElementStore::isometry(std::size_t i, long bits) const { return group->evaluate(word(i), bits); }

std::size_t ElementStore::slot_of(const int64_t* q, uint64_t hash) const {
  const std::size_t mask = table_.size() - 1;
  std::size_t s = hash & mask;
  while (true) {
    const uint32_t id = table_[s];
    if (id == kEmpty) return s;
    if (hash_[id] == hash && std::equal(q, q + stride_, quad(id))) return s;
    s = (s + 1) & mask;
  }
}

void ElementStore::rehash(std::size_t capacity) {
  table_.assign(capacity, kEmpty);
  const std::size_t mask = capacity - 1;
  for (std::size_t id = 0; id < size(); ++id) {
    std::size_t s = hash_[id] & mask;
    while (table_[s] != kEmpty) s = (s + 1) & mask;
    table_[s] = static_cast<uint32_t>(id);
  }
}

bool ElementStore::contains(const int64_t* q, uint64_t hash) const { return table_[slot_of(q, hash)] != kEmpty; }

std::optional<std::size_t> ElementStore::find(const int64_t* q) const {
  std::vector<int64_t> key(q, q + stride_);
  canonicalize_sign(key.data(), stride_);
  const uint64_t h = hash_coeffs(key.data(), stride_);
  const uint32_t id = table_[slot_of(key.data(), h)];
  if (id == kEmpty) return std::nullopt;
  return id;
}

std::size_t ElementStore::insert(uint32_t parent, uint8_t letter, const int64_t* q, uint64_t hash, const Mat2& m,
                                 double cosh_d) {
  if (size() >= kEmpty - 1) throw std::length_error("element store exceeds 2^32 entries");
  if (2 * (size() + 1) > table_.size()) rehash(table_.size() * 2);
  const std::size_t id = size();
  const bool root = letter == 255;
  parent_.push_back(root ? 0 : parent);
  letter_.push_back(letter);
  length_.push_back(root ? 0 : static_cast<uint16_t>(length_[parent] + 1));
  uint8_t par = root ? 0 : parity_[parent];
  if (!root) par ^= (letter < 2) ? 1 : 2;
  parity_.push_back(par);
  quads_.insert(quads_.end(), q, q + stride_);
  hash_.push_back(hash);
  mats_.push_back(m);
  cosh_.push_back(cosh_d);
  table_[slot_of(q, hash)] = static_cast<uint32_t>(id);
  return id;
}

std::vector<std::size_t> ElementStore::length_histogram() const {
  std::vector<std::size_t> h;
  for (uint16_t l : length_) {
    if (l >= h.size()) h.resize(l + 1, 0);
    ++h[l];
  }
  return h;
}

// ---------------------------------------------------------------- ball enumeration

namespace {

constexpr std::size_t kChunk = 1 << 15;
constexpr double kRecompute = 1e-11;  // relative error that triggers a fresh product

/// High-precision prune decision for a candidate the double bound could not settle.
PruneDecision resolve(const ElementStore& store, uint32_t parent, int letter, double r_cut, long bits) {
  std::vector<int> w = store.word(parent);
  w.push_back(letter);
  const TriangleGroup& g = *store.group;
  RealInterval cut = cosh(RealInterval::from_double(r_cut, bits));
  for (long b = bits; b <= 4 * bits; b *= 2) {
    Isometry iso = g.evaluate(w, b);
    const Mat2I& m = iso.matrix;
    RealInterval two = RealInterval::from_int(2, b);
    RealInterval c = (m.a.square() + m.b.square() + m.c.square() + m.d.square()) / two;
    if (cut.certainly_less(c)) return PruneDecision::Prune;
    if (c.certainly_less(cut)) return PruneDecision::Keep;
  }
  return PruneDecision::Ambiguous;
}

/// Product of a word's generator matrices by balanced splitting, which keeps
/// the propagated error bound far below the left-to-right bound on long words.
Mat2 tree_product(const std::array<Mat2, 4>& gens, const std::vector<int>& w, std::size_t lo, std::size_t hi) {
  if (hi == lo) return Mat2{};
  if (hi - lo == 1) return gens[w[lo]];
  const std::size_t mid = lo + (hi - lo) / 2;
  return mul(tree_product(gens, w, lo, mid), tree_product(gens, w, mid, hi));
}

double short_word_separation(const ElementStore& s) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size() && idx.size() < 3000; ++i)
    if (s.word_length(i) <= 6) idx.push_back(i);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < idx.size(); ++p) {
    const Mat2& x = s.matrix(idx[p]);
    for (std::size_t q = p + 1; q < idx.size(); ++q) {
      const Mat2& y = s.matrix(idx[q]);
      const double dp = std::max({std::fabs(x.a - y.a), std::fabs(x.b - y.b), std::fabs(x.c - y.c), std::fabs(x.d - y.d)});
      const double dm = std::max({std::fabs(x.a + y.a), std::fabs(x.b + y.b), std::fabs(x.c + y.c), std::fabs(x.d + y.d)});
      best = std::min(best, std::min(dp, dm));
    }
  }
  return std::isfinite(best) ? best / 2.0 : 0.0;
}

}  // namespace

std::array<Mat2, 4> generator_matrices(const TriangleGroup& g) {
  std::array<Mat2, 4> gens;
  for (int l = 0; l < 4; ++l) gens[l] = to_mat2(g.gens[l]);
  for (auto& m : gens) m.err = 4e-16 * std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)});
  return gens;
}

Mat2 balanced_product(const std::array<Mat2, 4>& gens, const std::vector<int>& w) {
  return tree_product(gens, w, 0, w.size());
}

ElementStore enumerate_ball(const Group& g, const EnumerationConfig& cfg) {
  cfg.validate();
  const double L = cfg.length_bound();
  ElementStore store;
  store.config = cfg;
  store.geometry = domain_geometry(*g);
  const Geometry& geo = store.geometry;
  store.r_cut = cfg.r_cut > 0 ? cfg.r_cut : std::max(geo.cut_radius(L), geo.conj_radius() + geo.rho_pad);
  if (store.r_cut < L) throw std::invalid_argument("pruning radius must be at least the length bound");
  const int d = g->ring.degree();
  const int stride = 4 * d;
  store.init(g, stride);

  const std::array<Mat2, 4> gens = generator_matrices(*g);

  {
    Quad e = g->identity_quad();
    std::vector<int64_t> q(stride);
    for (int k = 0; k < 4; ++k) g->ring.from_element(e[k], q.data() + k * d);
    canonicalize_sign(q.data(), stride);
    store.insert(0, 255, q.data(), hash_coeffs(q.data(), stride), Mat2{}, 1.0);
  }

  std::vector<uint32_t> frontier{0};
  const double cosh_cut = std::cosh(store.r_cut);
  int depth = 0;
  ExpandResult res;
  while (!frontier.empty() && depth < cfg.word_cap) {
    store.stats.frontier_sizes.push_back(frontier.size());
    std::vector<uint32_t> next;
    for (std::size_t start = 0; start < frontier.size(); start += kChunk) {
      ExpandJob job;
      job.group = g.get();
      job.gens = gens.data();
      job.parents = frontier.data() + start;
      job.count = std::min(kChunk, frontier.size() - start);
      job.last_letter = store.letter_data();
      job.mats = store.matrix_data();
      job.quads = store.quad_data();
      job.cosh_cut = cosh_cut;
      job.prune = cfg.prune;
      if (cfg.parallel)
        expand_frontier_parallel(job, res);
      else
        expand_frontier_serial(job, res);
      std::vector<int64_t> key(stride);
      for (std::size_t k = 0; k < res.cands.size(); ++k) {
        const Candidate& c = res.cands[k];
        PruneDecision dec = c.decision;
        if (dec == PruneDecision::Prune) {
          const uint8_t pl = store.last_letter(c.parent);
          if (pl == 255 || c.letter != inverse_letter(pl)) ++store.stats.pruned;
          continue;
        }
        if (dec == PruneDecision::Overflow) {
          std::vector<int> w = store.word(c.parent);
          w.push_back(c.letter);
          throw std::overflow_error("trace coefficients overflow int64 at word " + word_string(w));
        }
        const int64_t* q = res.quads.data() + k * stride;
        std::copy(q, q + stride, key.begin());
        canonicalize_sign(key.data(), stride);
        if (store.contains(key.data(), c.hash)) {
          ++store.stats.dedup_hits;
          continue;
        }
        Mat2 m = c.m;
        double cd = c.cosh_d;
        if (dec == PruneDecision::Ambiguous || m.err > kRecompute * (1.0 + cd)) {
          std::vector<int> w = store.word(c.parent);
          w.push_back(c.letter);
          Mat2 t = tree_product(gens, w, 0, w.size());
          if (t.err < m.err) {
            m = t;
            double e = 0;
            cd = lenspec::cosh_displacement(m, &e);
            if (dec == PruneDecision::Ambiguous && cfg.prune) {
              if (cd - e > cosh_cut) {
                ++store.stats.pruned;
                continue;
              }
              if (cd + e <= cosh_cut) dec = PruneDecision::Keep;
            }
          }
        }
        if (dec == PruneDecision::Ambiguous) {
          ++store.stats.ambiguous;
          dec = resolve(store, c.parent, c.letter, store.r_cut, cfg.bits);
          if (dec == PruneDecision::Prune) {
            ++store.stats.pruned;
            continue;
          }
          if (dec == PruneDecision::Ambiguous) ++store.stats.boundary_kept;
        }
        const std::size_t id = store.insert(c.parent, c.letter, key.data(), c.hash, m, cd);
        next.push_back(static_cast<uint32_t>(id));
      }
    }
    frontier.swap(next);
    ++depth;
  }
  store.status = frontier.empty() ? EnumerationStatus::Complete : EnumerationStatus::Partial;
  store.stats.max_word_length = store.word_length(store.size() - 1);
  store.eps = cfg.eps > 0 ? cfg.eps : short_word_separation(store);
  return store;
}

}  // namespace lenspec
