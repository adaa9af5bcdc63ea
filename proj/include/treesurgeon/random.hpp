#pragma once

#include "treesurgeon/graph.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <variant>

namespace treesurgeon {

/// Counter-based generator: output i is a SplitMix64 finalisation of key + i * golden.
/// Streams are reproducible across platforms and can be forked by key derivation.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], rejection-sampled so there is no modulo bias.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == UINT64_MAX) return next_u64();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do x = next_u64();
    while (x >= limit);
    return lo + x % range;
  }

  /// Exponential waiting time by inverse CDF.
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct UniformRates {
  double low = 0.5;
  double high = 3.0;
};

/// Random positive rationals p/q with p, q drawn uniformly from [1, max].
struct RationalRates {
  std::uint64_t max_numerator = 1000;
  std::uint64_t max_denominator = 1000;
};

struct UnitRates {};

using RateLaw = std::variant<UniformRates, RationalRates, UnitRates>;

template <Scalar S>
S draw_rate(const RateLaw& law, CounterRng& rng) {
  return std::visit([&](const auto& l) -> S {
    using L = std::decay_t<decltype(l)>;
    if constexpr (std::is_same_v<L, UnitRates>) {
      return S(1);
    } else if constexpr (std::is_same_v<L, UniformRates>) {
      if constexpr (is_exact_v<S>)
        throw Error(ErrorCode::invalid_argument, "uniform float rates need float arithmetic");
      else
        return rng.uniform(l.low, l.high);
    } else {
      auto p = rng.uniform_int(1, l.max_numerator);
      auto q = rng.uniform_int(1, l.max_denominator);
      if constexpr (is_exact_v<S>)
        return Rational(BigInt(p), BigInt(q));
      else
        return static_cast<double>(p) / static_cast<double>(q);
    }
  }, law);
}

/// Random irreducible graph on n vertices. A random spanning tree of reversible
/// pairs is always present; every other pair appears with probability `density`.
/// Pairs are listed in (u, v) order with u < v oriented forward.
template <Scalar S>
Digraph<S> random_graph(std::size_t n, double density, const RateLaw& law, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "random_graph needs n >= 2");
  if (!(density >= 0.0 && density <= 1.0))
    throw Error(ErrorCode::invalid_density, "density must lie in [0, 1]");
  CounterRng rng(seed, 0x6772617068ULL);

  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), VertexId{0});
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
  std::set<std::pair<VertexId, VertexId>> forced;
  for (std::size_t i = 1; i < n; ++i) {
    VertexId a = order[i], b = order[rng.uniform_int(0, i - 1)];
    forced.insert(std::minmax(a, b));
  }

  std::vector<EdgePair<S>> pairs;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) {
      const bool coin = rng.uniform01() < density;
      if (!coin && !forced.count({u, v})) continue;
      S f = draw_rate<S>(law, rng);
      S b = draw_rate<S>(law, rng);
      pairs.push_back({u, v, std::move(f), std::move(b)});
    }
  return Digraph<S>::with_vertices(n, std::move(pairs));
}

template <Scalar S>
Digraph<S> complete_graph(std::size_t n, const RateLaw& law, std::uint64_t seed) {
  return random_graph<S>(n, 1.0, law, seed);
}

}  // namespace treesurgeon
