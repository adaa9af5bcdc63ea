#pragma once

#include "treesurgeon/error.hpp"
#include "treesurgeon/scalar.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace treesurgeon {

using VertexId = std::uint32_t;
using PairId = std::uint32_t;

enum class Sign : std::uint8_t { plus = 0, minus = 1 };

constexpr Sign opposite(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }

/// One direction of a reversible pair. Identity and order are (pair, sign);
/// source and target are carried along so trees can be checked without the graph.
struct OrientedEdge {
  PairId pair = 0;
  Sign sign = Sign::plus;
  VertexId source = 0;
  VertexId target = 0;

  OrientedEdge reversed() const { return {pair, opposite(sign), target, source}; }

  friend bool operator==(const OrientedEdge& a, const OrientedEdge& b) {
    return a.pair == b.pair && a.sign == b.sign;
  }
  friend std::strong_ordering operator<=>(const OrientedEdge& a, const OrientedEdge& b) {
    if (auto c = a.pair <=> b.pair; c != 0) return c;
    return a.sign <=> b.sign;
  }
};

/// Dense index of an oriented edge: 2 * pair + sign.
constexpr std::size_t edge_index(const OrientedEdge& e) {
  return 2 * static_cast<std::size_t>(e.pair) + static_cast<std::size_t>(e.sign);
}

template <Scalar S>
struct EdgePair {
  VertexId u = 0;
  VertexId v = 0;
  S forward{};   // rate of u -> v
  S backward{};  // rate of v -> u; zero means the direction is absent
};

/// Weighted directed graph whose edges come in reversible pairs. Immutable
/// once built; "modifying" a rate returns a new graph.
template <Scalar S>
class Digraph {
 public:
  using scalar_type = S;
  using Pair = EdgePair<S>;

  Digraph() = default;

  Digraph(std::vector<std::string> labels, std::vector<Pair> pairs)
      : labels_(std::move(labels)), pairs_(std::move(pairs)) {
    validate();
    index();
  }

  /// Unlabelled graph on `n` vertices, labels are the decimal indices.
  static Digraph with_vertices(std::size_t n, std::vector<Pair> pairs) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return Digraph(std::move(labels), std::move(pairs));
  }

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t pair_count() const { return pairs_.size(); }
  const std::vector<Pair>& pairs() const { return pairs_; }
  const Pair& pair(PairId p) const { return pairs_.at(p); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(VertexId v) const { return labels_.at(v); }

  std::optional<VertexId> find_vertex(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<VertexId>(it - labels_.begin());
  }

  VertexId vertex(std::string_view label) const {
    if (auto v = find_vertex(label)) return *v;
    throw Error(ErrorCode::unknown_vertex, "no vertex labelled '" + std::string(label) + "'");
  }

  /// The pair joining u and v, in either orientation.
  std::optional<PairId> find_pair(VertexId u, VertexId v) const {
    auto key = std::minmax(u, v);
    auto it = pair_lookup_.find({key.first, key.second});
    if (it == pair_lookup_.end()) return std::nullopt;
    return it->second;
  }

  OrientedEdge edge(PairId p, Sign s) const {
    const Pair& pr = pairs_.at(p);
    return s == Sign::plus ? OrientedEdge{p, s, pr.u, pr.v} : OrientedEdge{p, s, pr.v, pr.u};
  }

  /// Oriented edge u -> v, if the pair exists (the direction may have zero rate).
  std::optional<OrientedEdge> find_edge(VertexId u, VertexId v) const {
    auto p = find_pair(u, v);
    if (!p) return std::nullopt;
    return edge(*p, pairs_[*p].u == u ? Sign::plus : Sign::minus);
  }

  const S& rate(const OrientedEdge& e) const {
    const Pair& pr = pairs_.at(e.pair);
    return e.sign == Sign::plus ? pr.forward : pr.backward;
  }

  bool has_edge(const OrientedEdge& e) const { return sign_of(rate(e)) > 0; }

  /// Present (positive-rate) out-edges of v, ordered by (pair, sign).
  std::span<const OrientedEdge> out_edges(VertexId v) const { return out_.at(v); }

  /// All present oriented edges ordered by (pair, sign).
  std::vector<OrientedEdge> edges() const {
    std::vector<OrientedEdge> all;
    for (PairId p = 0; p < pairs_.size(); ++p)
      for (Sign s : {Sign::plus, Sign::minus})
        if (has_edge(edge(p, s))) all.push_back(edge(p, s));
    return all;
  }

  std::string edge_name(const OrientedEdge& e) const {
    return labels_.at(e.source) + ">" + labels_.at(e.target);
  }

  Digraph with_pair_rates(PairId p, S forward, S backward) const {
    auto pairs = pairs_;
    pairs.at(p).forward = std::move(forward);
    pairs.at(p).backward = std::move(backward);
    return Digraph(labels_, std::move(pairs));
  }

  /// Same topology with every rate mapped through `f`.
  template <Scalar T, class F>
  Digraph<T> map_rates(F&& f) const {
    std::vector<EdgePair<T>> pairs;
    pairs.reserve(pairs_.size());
    for (const auto& p : pairs_) pairs.push_back({p.u, p.v, f(p.forward), f(p.backward)});
    return Digraph<T>(labels_, std::move(pairs));
  }

  friend bool operator==(const Digraph& a, const Digraph& b) {
    if (a.labels_ != b.labels_ || a.pairs_.size() != b.pairs_.size()) return false;
    for (std::size_t i = 0; i < a.pairs_.size(); ++i) {
      const auto& x = a.pairs_[i];
      const auto& y = b.pairs_[i];
      if (x.u != y.u || x.v != y.v || x.forward != y.forward || x.backward != y.backward)
        return false;
    }
    return true;
  }

 private:
  void validate() const {
    const auto n = labels_.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (labels_[i] == labels_[j])
          throw Error(ErrorCode::invalid_argument, "duplicate vertex label '" + labels_[i] + "'");
    std::map<std::pair<VertexId, VertexId>, bool> seen;
    for (const auto& p : pairs_) {
      if (p.u >= n || p.v >= n)
        throw Error(ErrorCode::unknown_vertex, "pair endpoint out of range");
      if (p.u == p.v) throw Error(ErrorCode::self_loop, "self-loop at '" + labels_[p.u] + "'");
      auto key = std::minmax(p.u, p.v);
      if (!seen.emplace(std::pair{key.first, key.second}, true).second)
        throw Error(ErrorCode::duplicate_edge,
                    "pair '" + labels_[p.u] + "'-'" + labels_[p.v] + "' listed twice");
      if (sign_of(p.forward) < 0 || sign_of(p.backward) < 0 ||
          (is_zero(p.forward) && is_zero(p.backward)))
        throw Error(ErrorCode::nonpositive_rate,
                    "pair '" + labels_[p.u] + "'-'" + labels_[p.v] + "' needs a positive rate");
      if constexpr (!is_exact_v<S>) {
        if (!std::isfinite(p.forward) || !std::isfinite(p.backward))
          throw Error(ErrorCode::nonfinite_rate, "non-finite rate");
      }
    }
  }

  void index() {
    out_.assign(labels_.size(), {});
    pair_lookup_.clear();
    for (PairId p = 0; p < pairs_.size(); ++p) {
      auto key = std::minmax(pairs_[p].u, pairs_[p].v);
      pair_lookup_[{key.first, key.second}] = p;
      for (Sign s : {Sign::plus, Sign::minus}) {
        auto e = edge(p, s);
        if (has_edge(e)) out_[e.source].push_back(e);
      }
    }
  }

  std::vector<std::string> labels_;
  std::vector<Pair> pairs_;
  std::vector<std::vector<OrientedEdge>> out_;
  std::map<std::pair<VertexId, VertexId>, PairId> pair_lookup_;
};

namespace detail {

template <Scalar S, class Skip>
std::vector<bool> reachable(const Digraph<S>& g, VertexId from, bool reverse, Skip&& skip) {
  std::vector<std::vector<VertexId>> adj(g.vertex_count());
  for (const auto& e : g.edges()) {
    if (skip(e)) continue;
    if (reverse)
      adj[e.target].push_back(e.source);
    else
      adj[e.source].push_back(e.target);
  }
  std::vector<bool> seen(g.vertex_count(), false);
  std::vector<VertexId> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (VertexId w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return seen;
}

template <Scalar S, class Skip>
bool strongly_connected(const Digraph<S>& g, Skip&& skip) {
  if (g.vertex_count() <= 1) return true;
  auto all = [](const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
  };
  return all(reachable(g, 0, false, skip)) && all(reachable(g, 0, true, skip));
}

}  // namespace detail

/// True iff every ordered vertex pair is joined by a positive-rate directed path.
template <Scalar S>
bool is_irreducible(const Digraph<S>& g) {
  return detail::strongly_connected(g, [](const OrientedEdge&) { return false; });
}

/// True iff the graph stays irreducible once the given pairs are removed in both directions.
template <Scalar S>
bool stays_connected_without(const Digraph<S>& g, std::span<const PairId> pinned) {
  for (PairId p : pinned)
    if (p >= g.pair_count())
      throw Error(ErrorCode::unknown_edge, "pair id " + std::to_string(p) + " out of range");
  return detail::strongly_connected(g, [&](const OrientedEdge& e) {
    return std::find(pinned.begin(), pinned.end(), e.pair) != pinned.end();
  });
}

template <Scalar S>
void require_irreducible(const Digraph<S>& g) {
  if (!is_irreducible(g)) throw Error(ErrorCode::not_irreducible, "graph is not irreducible");
}

/// Pinned pairs must carry both directions and must not disconnect the graph.
template <Scalar S>
void require_pinnable(const Digraph<S>& g, std::span<const PairId> pinned) {
  for (PairId p : pinned) {
    if (p >= g.pair_count())
      throw Error(ErrorCode::unknown_edge, "pair id " + std::to_string(p) + " out of range");
    const auto& pr = g.pair(p);
    if (sign_of(pr.forward) <= 0 || sign_of(pr.backward) <= 0)
      throw Error(ErrorCode::missing_reverse_edge,
                  "pinned pair " + g.label(pr.u) + "-" + g.label(pr.v) + " is not reversible");
  }
  if (!stays_connected_without(g, pinned)) {
    if (pinned.size() == 1)
      throw Error(ErrorCode::bridge_pinned, "pinned pair is a bridge");
    throw Error(ErrorCode::disconnected_without_pins, "graph disconnects without the pinned pairs");
  }
}

inline Digraph<double> to_float(const Digraph<Rational>& g) {
  return g.map_rates<double>([](const Rational& q) { return to_double(q); });
}

inline const Digraph<double>& to_float(const Digraph<double>& g) { return g; }

}  // namespace treesurgeon
