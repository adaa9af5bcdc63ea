#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's enumerator, determinant or linear algebra.

#include "treesurgeon/treesurgeon.hpp"

#include <bit>
#include <functional>

namespace oracle {

using namespace treesurgeon;

inline Digraph<Rational> exact(std::string_view text) { return std::get<Digraph<Rational>>(parse_graph(text)); }

/// Every (n-1)-subset of the positive-rate oriented edges, kept when it is a
/// spanning tree oriented toward `root`. Only for small graphs.
template <Scalar S>
std::vector<std::vector<OrientedEdge>> trees_by_subsets(const Digraph<S>& g, VertexId root,
                                                        const std::vector<OrientedEdge>& avoid = {},
                                                        const std::vector<OrientedEdge>& require = {}) {
  const std::size_t n = g.vertex_count();
  std::vector<OrientedEdge> all;
  for (const auto& e : g.edges())
    if (g.has_edge(e)) all.push_back(e);
  std::vector<std::vector<OrientedEdge>> out;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (pick.size() + 1 == n) {
      std::vector<int> next(n, -1);
      for (auto i : pick) {
        const auto& e = all[i];
        if (e.source == root || next[e.source] != -1) return;
        next[e.source] = int(e.target);
      }
      for (VertexId v = 0; v < n; ++v) {
        VertexId w = v;
        for (std::size_t k = 0; k <= n && w != root; ++k) {
          if (next[w] < 0) return;
          w = VertexId(next[w]);
        }
        if (w != root) return;
      }
      std::vector<OrientedEdge> t;
      for (auto i : pick) t.push_back(all[i]);
      for (const auto& a : avoid)
        if (std::find(t.begin(), t.end(), a) != t.end()) return;
      for (const auto& b : require)
        if (std::find(t.begin(), t.end(), b) == t.end()) return;
      out.push_back(std::move(t));
      return;
    }
    for (std::size_t i = from; i < all.size(); ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  if (n == 1) return {{}};
  rec(0);
  return out;
}

/// Sum of tree weights under a rate table (entries may be zero).
template <Scalar S>
S tree_sum(const Digraph<S>& g, VertexId root, const std::vector<S>& rate, const std::vector<OrientedEdge>& avoid = {},
           const std::vector<OrientedEdge>& require = {}) {
  S total(0);
  for (const auto& t : trees_by_subsets(g, root, avoid, require)) {
    S w(1);
    for (const auto& e : t) w *= rate[edge_index(e)];
    total += w;
  }
  return total;
}

template <Scalar S>
std::vector<S> rates_of(const Digraph<S>& g) {
  std::vector<S> r(2 * g.pair_count());
  for (PairId p = 0; p < g.pair_count(); ++p) {
    r[2 * p] = g.pair(p).forward;
    r[2 * p + 1] = g.pair(p).backward;
  }
  return r;
}

template <Scalar S>
S tree_sum(const Digraph<S>& g, VertexId root, const std::vector<OrientedEdge>& avoid = {},
           const std::vector<OrientedEdge>& require = {}) {
  return tree_sum(g, root, rates_of(g), avoid, require);
}

/// Stationary law by Gauss-Jordan on p Q = 0 with sum p = 1, over rationals.
inline std::vector<Rational> stationary(const Digraph<Rational>& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1, Rational(0)));
  for (const auto& e : g.edges()) {
    // column of p Q = 0: sum_x p_x Q(x, y) = 0, row y of Q^T
    a[e.target][e.source] += g.rate(e);
    a[e.source][e.source] -= g.rate(e);
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1;
  a[n - 1][n] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t r = c;
    while (a[r][c] == 0) ++r;
    std::swap(a[r], a[c]);
    const Rational piv = a[c][c];
    for (auto& v : a[c]) v /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c] == 0) continue;
      const Rational f = a[i][c];
      for (std::size_t k = 0; k <= n; ++k) a[i][k] -= f * a[c][k];
    }
  }
  std::vector<Rational> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = a[i][n];
  return p;
}

/// Coefficients, keyed by bitmask of rate slots (0 = r(+1), 1 = r(-1),
/// 2 = r(+2), 3 = r(-2)), of each current numerator and of the normalisation
/// (index m), from values at 0/1 points by Moebius inversion.
inline std::vector<std::vector<Rational>> mobius_w(const Digraph<Rational>& g, PairId p1, PairId p2) {
  const OrientedEdge slot_edge[4] = {g.edge(p1, Sign::plus), g.edge(p1, Sign::minus), g.edge(p2, Sign::plus),
                                     g.edge(p2, Sign::minus)};
  const std::size_t m = g.pair_count();
  std::vector<std::vector<Rational>> values(16);
  for (std::size_t mask = 0; mask < 16; ++mask) {
    auto rate = rates_of(g);
    for (int s = 0; s < 4; ++s) rate[edge_index(slot_edge[s])] = (mask >> s) & 1 ? 1 : 0;
    std::vector<Rational> tau;
    Rational z(0);
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
      tau.push_back(tree_sum(g, x, rate));
      z += tau.back();
    }
    for (PairId e = 0; e < m; ++e) {
      const auto f = g.edge(e, Sign::plus), b = g.edge(e, Sign::minus);
      values[mask].push_back(rate[edge_index(f)] * tau[f.source] - rate[edge_index(b)] * tau[b.source]);
    }
    values[mask].push_back(z);
  }
  std::vector<std::vector<Rational>> coeff(m + 1, std::vector<Rational>(16));
  for (std::size_t k = 0; k <= m; ++k)
    for (std::size_t mask = 0; mask < 16; ++mask) {
      Rational c(0);
      for (std::size_t sub = mask;; sub = (sub - 1) & mask) {
        const int sign = (std::popcount(mask) - std::popcount(sub)) % 2 ? -1 : 1;
        c += sign * values[sub][k];
        if (sub == 0) break;
      }
      coeff[k][mask] = c;
    }
  return coeff;
}

/// Bitmask of the rate slots multiplying the entry of each 2-pin status.
inline std::size_t status_mask(const Status& s) {
  std::size_t mask = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    if (s[k] == PinStatus::plus) mask |= std::size_t{1} << (2 * k);
    if (s[k] == PinStatus::minus) mask |= std::size_t{1} << (2 * k + 1);
  }
  return mask;
}

}  // namespace oracle
