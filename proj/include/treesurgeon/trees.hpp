#pragma once

#include "treesurgeon/graph.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace treesurgeon {

/// Avoid-set and require-set of oriented edges. Requiring both orientations of
/// a pair is allowed and simply admits no tree.
class TreeConstraint {
 public:
  TreeConstraint() = default;
  TreeConstraint(std::vector<OrientedEdge> avoid, std::vector<OrientedEdge> require)
      : avoid_(normalise(std::move(avoid))), require_(normalise(std::move(require))) {
    for (const auto& e : avoid_)
      if (std::binary_search(require_.begin(), require_.end(), e))
        throw Error(ErrorCode::invalid_constraint, "edge both avoided and required");
  }

  static TreeConstraint avoiding(std::vector<OrientedEdge> e) { return {std::move(e), {}}; }
  static TreeConstraint requiring(std::vector<OrientedEdge> e) { return {{}, std::move(e)}; }

  const std::vector<OrientedEdge>& avoid() const { return avoid_; }
  const std::vector<OrientedEdge>& require() const { return require_; }
  bool empty() const { return avoid_.empty() && require_.empty(); }

  bool avoids(const OrientedEdge& e) const { return std::binary_search(avoid_.begin(), avoid_.end(), e); }
  bool requires_edge(const OrientedEdge& e) const {
    return std::binary_search(require_.begin(), require_.end(), e);
  }

  bool mentions_pair(PairId p) const {
    auto hit = [p](const OrientedEdge& e) { return e.pair == p; };
    return std::any_of(avoid_.begin(), avoid_.end(), hit) ||
           std::any_of(require_.begin(), require_.end(), hit);
  }

  /// Union of two constraints; throws if the result contradicts itself.
  TreeConstraint merged(const TreeConstraint& other) const {
    auto a = avoid_;
    a.insert(a.end(), other.avoid_.begin(), other.avoid_.end());
    auto r = require_;
    r.insert(r.end(), other.require_.begin(), other.require_.end());
    return {std::move(a), std::move(r)};
  }

  /// True iff an edge set (sorted or not) meets both conditions.
  bool satisfied_by(std::span<const OrientedEdge> edges) const {
    for (const auto& e : edges)
      if (avoids(e)) return false;
    for (const auto& r : require_)
      if (std::find(edges.begin(), edges.end(), r) == edges.end()) return false;
    return true;
  }

  friend bool operator==(const TreeConstraint&, const TreeConstraint&) = default;

 private:
  static std::vector<OrientedEdge> normalise(std::vector<OrientedEdge> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  std::vector<OrientedEdge> avoid_;
  std::vector<OrientedEdge> require_;
};

/// Spanning tree with every edge directed toward `root`: one out-edge per non-root vertex.
class RootedTree {
 public:
  RootedTree() = default;
  RootedTree(VertexId root, std::vector<std::optional<OrientedEdge>> out_edge)
      : root_(root), out_(std::move(out_edge)) {}

  /// Builds from an edge list; throws unless the edges form a tree rooted at `root`.
  static RootedTree from_edges(std::size_t vertex_count, VertexId root, std::span<const OrientedEdge> edges) {
    std::vector<std::optional<OrientedEdge>> out(vertex_count);
    for (const auto& e : edges) {
      if (e.source >= vertex_count || out[e.source])
        throw Error(ErrorCode::invalid_argument, "edge set is not a rooted spanning tree");
      out[e.source] = e;
    }
    RootedTree t(root, std::move(out));
    if (!t.is_valid()) throw Error(ErrorCode::invalid_argument, "edge set is not a rooted spanning tree");
    return t;
  }

  VertexId root() const { return root_; }
  std::size_t vertex_count() const { return out_.size(); }
  const std::optional<OrientedEdge>& out_edge(VertexId v) const { return out_.at(v); }

  /// Edges ordered by (pair, sign).
  std::vector<OrientedEdge> edges() const {
    std::vector<OrientedEdge> e;
    for (const auto& o : out_)
      if (o) e.push_back(*o);
    std::sort(e.begin(), e.end());
    return e;
  }

  bool contains(const OrientedEdge& e) const {
    return e.source < out_.size() && out_[e.source] && *out_[e.source] == e;
  }

  /// Out-degree certificate: root has none, everyone else exactly one, and every
  /// vertex reaches the root.
  bool is_valid() const {
    const auto n = out_.size();
    if (root_ >= n || out_[root_]) return false;
    for (VertexId v = 0; v < n; ++v) {
      if (v != root_ && (!out_[v] || out_[v]->source != v || out_[v]->target >= n)) return false;
    }
    for (VertexId v = 0; v < n; ++v) {
      VertexId w = v;
      for (std::size_t steps = 0; w != root_; ++steps) {
        if (steps >= n) return false;
        w = out_[w]->target;
      }
    }
    return true;
  }

  template <Scalar S>
  S weight(const Digraph<S>& g) const {
    S w(1);
    for (const auto& o : out_)
      if (o) w *= g.rate(*o);
    return w;
  }

  friend bool operator==(const RootedTree& a, const RootedTree& b) {
    return a.root_ == b.root_ && a.edges() == b.edges();
  }
  friend bool operator<(const RootedTree& a, const RootedTree& b) {
    if (a.root_ != b.root_) return a.root_ < b.root_;
    return a.edges() < b.edges();
  }

 private:
  VertexId root_ = 0;
  std::vector<std::optional<OrientedEdge>> out_;
};

namespace detail {

/// Union-find over the partial forest of chosen out-edges, with rollback.
/// Each component has exactly one vertex without an out-edge yet (its head).
class RollbackForest {
 public:
  explicit RollbackForest(std::size_t n) : parent_(n), size_(n, 1), head_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = head_[i] = static_cast<VertexId>(i);
  }

  VertexId find(VertexId v) const {
    while (parent_[v] != v) v = parent_[v];
    return v;
  }

  /// v (a head) gains out-edge v -> w. Returns false if that closes a cycle.
  bool link(VertexId v, VertexId w) {
    VertexId rv = find(v), rw = find(w);
    if (rv == rw) return false;
    const VertexId new_head = head_[rw];
    if (size_[rv] > size_[rw]) std::swap(rv, rw);
    history_.push_back({rv, rw, head_[rw]});
    parent_[rv] = rw;
    size_[rw] += size_[rv];
    head_[rw] = new_head;
    return true;
  }

  void undo() {
    auto [child, into, old_head] = history_.back();
    history_.pop_back();
    parent_[child] = child;
    size_[into] -= size_[child];
    head_[into] = old_head;
  }

 private:
  struct Step {
    VertexId child, into, old_head;
  };
  std::vector<VertexId> parent_;
  std::vector<std::size_t> size_;
  std::vector<VertexId> head_;
  std::vector<Step> history_;
};

}  // namespace detail

/// Visits every rooted spanning tree at `root` meeting `c`, exactly once, in
/// lexicographic order of (vertex, pair, sign) choices. The visitor gets the
/// chosen out-edges (indexed by vertex, root slot unused) and the product of
/// `weight[edge_index(e)]` over the tree, accumulated along the search.
template <Scalar S, class W, class Visitor>
void for_each_tree_choice_weighted(const Digraph<S>& g, VertexId root, const TreeConstraint& c,
                                   const std::vector<W>& weight, Visitor&& visit) {
  const std::size_t n = g.vertex_count();
  if (root >= n) throw Error(ErrorCode::unknown_vertex, "root out of range");

  // candidate out-edges per vertex
  std::vector<std::vector<OrientedEdge>> options(n);
  for (VertexId v = 0; v < n; ++v) {
    std::vector<OrientedEdge> forced;
    for (const auto& r : c.require())
      if (r.source == v) forced.push_back(r);
    if (v == root) {
      if (!forced.empty()) return;
      continue;
    }
    if (forced.size() > 1) return;
    if (forced.size() == 1) {
      if (!g.has_edge(forced.front())) return;
      options[v] = forced;
      continue;
    }
    for (const auto& e : g.out_edges(v))
      if (!c.avoids(e)) options[v].push_back(e);
    if (options[v].empty()) return;
  }

  std::vector<VertexId> order;
  for (VertexId v = 0; v < n; ++v)
    if (v != root) order.push_back(v);

  std::vector<OrientedEdge> chosen(n);
  std::vector<W> prefix(order.size() + 1, W(1));
  detail::RollbackForest forest(n);

  std::function<void(std::size_t)> descend = [&](std::size_t depth) {
    if (depth == order.size()) {
      visit(std::span<const OrientedEdge>(chosen), prefix[depth]);
      return;
    }
    const VertexId v = order[depth];
    for (const auto& e : options[v]) {
      if (!forest.link(v, e.target)) continue;
      chosen[v] = e;
      prefix[depth + 1] = prefix[depth] * weight[edge_index(e)];
      descend(depth + 1);
      forest.undo();
    }
  };
  descend(0);
}

/// Dense rate table indexed by edge_index; absent directions hold zero.
template <Scalar S>
std::vector<S> rate_table(const Digraph<S>& g) {
  std::vector<S> r(2 * g.pair_count(), S(0));
  for (PairId p = 0; p < g.pair_count(); ++p) {
    r[2 * p] = g.pair(p).forward;
    r[2 * p + 1] = g.pair(p).backward;
  }
  return r;
}

/// As for_each_tree_choice_weighted, with the graph's own rates as weights.
template <Scalar S, class Visitor>
void for_each_tree_choice(const Digraph<S>& g, VertexId root, const TreeConstraint& c, Visitor&& visit) {
  for_each_tree_choice_weighted(g, root, c, rate_table(g), std::forward<Visitor>(visit));
}

/// Streams RootedTree values; see for_each_tree_choice for order and guarantees.
template <Scalar S, class Visitor>
void for_each_rooted_tree(const Digraph<S>& g, VertexId root, const TreeConstraint& c, Visitor&& visit) {
  for_each_tree_choice(g, root, c, [&](std::span<const OrientedEdge> chosen, const S&) {
    std::vector<std::optional<OrientedEdge>> out(chosen.size());
    for (VertexId v = 0; v < chosen.size(); ++v)
      if (v != root) out[v] = chosen[v];
    visit(RootedTree(root, std::move(out)));
  });
}

template <Scalar S>
std::vector<RootedTree> enumerate_rooted_trees(const Digraph<S>& g, VertexId root,
                                               const TreeConstraint& c = {}) {
  std::vector<RootedTree> trees;
  for_each_rooted_tree(g, root, c, [&](RootedTree t) { trees.push_back(std::move(t)); });
  return trees;
}

template <Scalar S>
std::size_t count_rooted_trees(const Digraph<S>& g, VertexId root, const TreeConstraint& c = {}) {
  std::size_t count = 0;
  for_each_tree_choice(g, root, c, [&](std::span<const OrientedEdge>, const S&) { ++count; });
  return count;
}

}  // namespace treesurgeon
