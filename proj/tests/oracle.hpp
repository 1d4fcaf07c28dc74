#pragma once

// Brute-force reference computations in quad precision. Nothing here uses
// the library's exact traces, pruning or class machinery.

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "lenspec/fuchsian.hpp"

namespace oracle {

using Q = __float128;

struct M {
  Q a = 1, b = 0, c = 0, d = 1;
};

inline M operator*(const M& x, const M& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}
inline M inv(const M& m) { return {m.d, -m.b, -m.c, m.a}; }
inline Q tr(const M& m) { return m.a + m.d; }
inline Q qabs(Q x) { return x < 0 ? -x : x; }
inline double cosh_disp(const M& m) { return static_cast<double>((m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d) / 2); }

/// Rotation generators from the closed forms, letters A, a, B, b.
inline std::vector<M> generators(const lenspec::Signature& s) {
  const Q pi = acosq(Q(-1));
  auto cs = [&](int k) { return k == 0 ? Q(1) : cosq(pi / k); };
  auto sn = [&](int k) { return k == 0 ? Q(0) : sinq(pi / k); };
  const Q ca = cs(s.a), sa = sn(s.a), cb = cs(s.b), sb = sn(s.b), cc = cs(s.c);
  const Q h = (ca * cb + cc) / (sa * sb);
  const Q t = h + sqrtq(h * h - 1);
  const M A{ca, sa, -sa, ca};
  const M B{cb, t * sb, -sb / t, cb};
  return {A, inv(A), B, inv(B)};
}

/// Lookup of matrices up to sign with an absolute tolerance.
class Index {
 public:
  void add(const M& m, int id) {
    const M n = norm(m);
    keys_.emplace(static_cast<double>(n.a), Entry{id, n});
  }
  int find(const M& m, double tol) const {
    const M n = norm(m);
    const double a = static_cast<double>(n.a);
    if (int id = scan(n, a, tol); id >= 0) return id;
    // a near zero: the sign normalization may differ
    if (std::abs(a) <= tol) return scan(M{-n.a, -n.b, -n.c, -n.d}, -a, tol);
    return -1;
  }
  std::size_t size() const { return keys_.size(); }

 private:
  struct Entry {
    int id;
    M m;
  };
  int scan(const M& n, double a, double tol) const {
    for (auto it = keys_.lower_bound(a - tol); it != keys_.end() && it->first <= a + tol; ++it)
      if (close(it->second.m, n, tol)) return it->second.id;
    return -1;
  }
  static M norm(const M& m) {
    const Q lead = qabs(m.a) > Q(1e-6) ? m.a : (qabs(m.b) > Q(1e-6) ? m.b : m.c);
    return lead < 0 ? M{-m.a, -m.b, -m.c, -m.d} : m;
  }
  static bool close(const M& x, const M& y, double tol) {
    return qabs(x.a - y.a) <= tol && qabs(x.b - y.b) <= tol && qabs(x.c - y.c) <= tol && qabs(x.d - y.d) <= tol;
  }
  std::multimap<double, Entry> keys_;
};

/// Every element with a reduced word of length <= cap, deduplicated up to sign.
struct Ball {
  std::vector<M> mats;
  std::vector<std::string> words;
  std::vector<int> length;
  Index index;
  int cap = 0;
};

inline const char kLetters[] = "AaBb";

inline Ball naive_ball(const lenspec::Signature& s, int cap, double tol = 1e-12) {
  const std::vector<M> g = generators(s);
  Ball ball;
  ball.cap = cap;
  ball.mats.push_back(M{});
  ball.words.push_back("");
  ball.length.push_back(0);
  ball.index.add(M{}, 0);
  std::vector<int> frontier{0};
  for (int len = 1; len <= cap; ++len) {
    std::vector<int> next;
    for (int p : frontier)
      for (int l = 0; l < 4; ++l) {
        const std::string& w = ball.words[p];
        if (!w.empty() && w.back() == kLetters[l ^ 1]) continue;
        const M m = ball.mats[p] * g[l];
        if (ball.index.find(m, tol) >= 0) continue;
        const int id = static_cast<int>(ball.mats.size());
        ball.mats.push_back(m);
        ball.words.push_back(w + kLetters[l]);
        ball.length.push_back(len);
        ball.index.add(m, id);
        next.push_back(id);
      }
    frontier = std::move(next);
  }
  return ball;
}

inline M evaluate(const std::vector<M>& g, const std::string& w) {
  M m;
  for (char ch : w) m = m * g[std::string(kLetters).find(ch)];
  return m;
}

inline double length_of_trace(Q t) { return static_cast<double>(2 * acoshq(qabs(t) / 2)); }

struct Dsu {
  std::vector<int> p;
  explicit Dsu(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int x, int y) { p[find(x)] = find(y); }
};

struct OracleClass {
  double trace = 0;  // |tr| of the class
  double length = 0;
  bool primitive = true;
  int orientations = 2;
  int shortest_word = 0;
};

/// Conjugacy classes modulo inversion among hyperbolic elements of the ball
/// with length <= L, found by merging single-letter conjugates. Only classes
/// with an element of word length <= w0 are reported.
inline std::vector<OracleClass> naive_classes(const Ball& ball, const lenspec::Signature& s, double L, int w0,
                                              double tol = 1e-9) {
  const std::vector<M> g = generators(s);
  const Q cut = 2 * coshq(Q(L) / 2);
  const std::size_t n = ball.mats.size();
  std::vector<char> hyp(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Q t = qabs(tr(ball.mats[i]));
    hyp[i] = t > 2 + Q(1e-12) && t <= cut;
  }
  Dsu oriented(n), unoriented(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!hyp[i]) continue;
    for (int l = 0; l < 4; ++l) {
      const M m = g[l] * ball.mats[i] * g[l ^ 1];
      const int j = ball.index.find(m, tol);
      if (j >= 0) {
        oriented.unite(static_cast<int>(i), j);
        unoriented.unite(static_cast<int>(i), j);
      }
    }
    const int k = ball.index.find(inv(ball.mats[i]), tol);
    if (k >= 0) unoriented.unite(static_cast<int>(i), k);
  }
  // proper powers: h^n with the same axis as h lands in the ball when h does
  std::vector<char> nonprim(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!hyp[i]) continue;
    M p = ball.mats[i];
    for (int e = 2;; ++e) {
      p = p * ball.mats[i];
      if (qabs(tr(p)) > cut) break;
      const int j = ball.index.find(p, tol);
      if (j >= 0) nonprim[unoriented.find(j)] = 1;
    }
  }
  std::map<int, OracleClass> out;
  std::map<int, int> shortest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!hyp[i]) continue;
    const int r = unoriented.find(static_cast<int>(i));
    auto [it, fresh] = shortest.try_emplace(r, ball.length[i]);
    if (!fresh) it->second = std::min(it->second, ball.length[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!hyp[i]) continue;
    const int r = unoriented.find(static_cast<int>(i));
    if (shortest[r] > w0 || out.count(r)) continue;
    OracleClass c;
    c.trace = static_cast<double>(qabs(tr(ball.mats[i])));
    c.length = length_of_trace(tr(ball.mats[i]));
    c.primitive = !nonprim[r];
    const int k = ball.index.find(inv(ball.mats[i]), tol);
    c.orientations = (k >= 0 && oriented.find(k) == oriented.find(static_cast<int>(i))) ? 1 : 2;
    c.shortest_word = shortest[r];
    out.emplace(r, c);
  }
  std::vector<OracleClass> v;
  for (auto& [r, c] : out) v.push_back(c);
  std::sort(v.begin(), v.end(), [](const OracleClass& x, const OracleClass& y) { return x.trace < y.trace; });
  return v;
}

// ---------------------------------------------------------------- PSL2(Z)

/// Hyperbolic classes of PSL2(Z), which is the (2,3,inf) triangle group:
/// cyclic words in L = [[1,0],[1,1]] and R = [[1,1],[0,1]] using both
/// letters. Inversion sends a word to its reverse with the letters swapped.
struct ModularClass {
  long trace = 0;
  bool primitive = true;
  int orientations = 2;
};

inline std::string least_rotation(const std::string& w) {
  std::string best = w;
  for (std::size_t k = 1; k < w.size(); ++k) best = std::min(best, w.substr(k) + w.substr(0, k));
  return best;
}

inline bool is_primitive_word(const std::string& w) {
  for (std::size_t p = 1; p < w.size(); ++p)
    if (w.size() % p == 0 && w.substr(p) + w.substr(0, p) == w) return false;
  return true;
}

/// A necklace with both letters starts with L and ends with R, so it is a
/// product of blocks L^k R^m. Each block is entrywise at least the identity,
/// so the trace never decreases as blocks or exponents grow.
inline std::vector<ModularClass> modular_classes(double L) {
  const long cut = static_cast<long>(std::floor(2 * std::cosh(L / 2) + 1e-9));
  std::map<std::string, ModularClass> classes;
  struct Frame {
    std::string w;
    long a, b, c, d;
  };
  std::vector<Frame> stack{{"", 1, 0, 0, 1}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    for (long k = 1;; ++k) {
      // P L^k = [[a + k b, b], [c + k d, d]]
      const long a1 = f.a + k * f.b, c1 = f.c + k * f.d;
      bool any = false;
      for (long m = 1;; ++m) {
        // then R^m: [[a1, a1 m + b], [c1, c1 m + d]]
        const long b2 = a1 * m + f.b, d2 = c1 * m + f.d;
        const long t = a1 + d2;
        if (t > cut) break;
        any = true;
        const std::string w = f.w + std::string(k, 'L') + std::string(m, 'R');
        if (least_rotation(w) == w) {
          std::string rev(w.rbegin(), w.rend());
          for (char& ch : rev) ch = ch == 'L' ? 'R' : 'L';
          const std::string inv_key = least_rotation(rev);
          ModularClass c;
          c.trace = t;
          c.primitive = is_primitive_word(w);
          c.orientations = inv_key == w ? 1 : 2;
          classes.emplace(std::min(w, inv_key), c);
        }
        stack.push_back({w, a1, b2, c1, d2});
      }
      if (!any) break;
    }
  }
  std::vector<ModularClass> v;
  for (auto& [k, c] : classes) v.push_back(c);
  std::sort(v.begin(), v.end(), [](const ModularClass& x, const ModularClass& y) { return x.trace < y.trace; });
  return v;
}

}  // namespace oracle
