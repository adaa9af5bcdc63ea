#pragma once

#include "treesurgeon/graph_io.hpp"
#include "treesurgeon/random.hpp"

namespace treesurgeon::fixtures {

/// The four-vertex worked example: pairs b-a, b-c, c-d, d-a, d-b, unit rates.
/// Pair 0 (b -> a forward) is the one pinned throughout the examples.
inline Digraph<Rational> worked_example() {
  return std::get<Digraph<Rational>>(parse_graph("b a 1 1\nb c 1 1\nc d 1 1\nd a 1 1\nd b 1 1\n"));
}

/// Same topology with the given rates, listed forward/backward per pair.
inline Digraph<Rational> worked_example(const std::array<Rational, 10>& r) {
  std::vector<std::string> labels{"b", "a", "c", "d"};
  std::vector<EdgePair<Rational>> pairs{
      {0, 1, r[0], r[1]}, {0, 2, r[2], r[3]}, {2, 3, r[4], r[5]}, {3, 1, r[6], r[7]}, {3, 0, r[8], r[9]}};
  return Digraph<Rational>(std::move(labels), std::move(pairs));
}

inline Digraph<Rational> two_state(Rational forward, Rational backward) {
  return Digraph<Rational>({"0", "1"}, {{0, 1, std::move(forward), std::move(backward)}});
}

/// Reversible triangle 0-1-2.
inline Digraph<Rational> triangle(Rational rate = 1) {
  return Digraph<Rational>::with_vertices(3, {{0, 1, rate, rate}, {1, 2, rate, rate}, {0, 2, rate, rate}});
}

/// 3-cycle 0 -> 1 -> 2 -> 0 driven with rate `forward` and `backward` against.
inline Digraph<Rational> biased_cycle(Rational forward = 2, Rational backward = 1) {
  return Digraph<Rational>::with_vertices(3, {{0, 1, forward, backward}, {1, 2, forward, backward}, {2, 0, forward, backward}});
}

/// Complete reversible graph with unit rates.
inline Digraph<Rational> complete_unit(std::size_t n) { return complete_graph<Rational>(n, UnitRates{}, 0); }

/// Six-vertex complete reversible graph, vertices labelled 1..6, float rates
/// uniform in [0.5, 3]; the pair 1-2 is the pinned one.
inline Digraph<double> six_vertex_network(std::uint64_t seed) {
  auto g = complete_graph<double>(6, UniformRates{0.5, 3.0}, seed);
  std::vector<std::string> labels;
  for (int i = 1; i <= 6; ++i) labels.push_back(std::to_string(i));
  return Digraph<double>(std::move(labels), g.pairs());
}

inline PairId six_vertex_pinned(const Digraph<double>& g) { return *g.find_pair(g.vertex("1"), g.vertex("2")); }

/// Random graph that satisfies detailed balance once pair 0 is removed: every
/// other pair has r(u -> v) = a_uv w_v and r(v -> u) = a_uv w_u. Pair 0 joins
/// two vertices of a cycle with arbitrary rates.
inline Digraph<Rational> balanced_at_stall(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorCode::invalid_argument, "need at least 3 vertices");
  CounterRng rng(seed, 0x7374616c6cULL);
  const RateLaw law = RationalRates{20, 20};
  std::vector<Rational> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(draw_rate<Rational>(law, rng));
  std::vector<EdgePair<Rational>> pairs;
  pairs.push_back({0, 1, draw_rate<Rational>(law, rng), draw_rate<Rational>(law, rng)});
  auto add = [&](VertexId u, VertexId v) {
    Rational a = draw_rate<Rational>(law, rng);
    pairs.push_back({u, v, a * w[v], a * w[u]});
  };
  // path 0 - 2 - 3 - ... - (n-1) - 1 keeps the graph connected without pair 0
  std::vector<VertexId> path{0};
  for (VertexId v = 2; v < n; ++v) path.push_back(v);
  path.push_back(1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) add(path[i], path[i + 1]);
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) {
      const bool on_path = std::abs(int(std::find(path.begin(), path.end(), u) - path.begin()) -
                                    int(std::find(path.begin(), path.end(), v) - path.begin())) == 1;
      if ((u == 0 && v == 1) || on_path) continue;
      if (rng.uniform01() < 0.4) add(u, v);
    }
  return Digraph<Rational>::with_vertices(n, std::move(pairs));
}

}  // namespace treesurgeon::fixtures
