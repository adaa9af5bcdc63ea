#pragma once

#include "treesurgeon/trees.hpp"

#include <numeric>
#include <utility>
#include <vector>

namespace treesurgeon {

/// Spanning tree with two out-degree-0 roots and one out-degree-2 branch vertex.
/// With branch == roots.second it is the tree rooted at roots.first, with
/// branch == roots.first it is the tree rooted at roots.second.
class DoublyRootedTree {
 public:
  DoublyRootedTree() = default;

  /// Degenerate view of t (rooted at x) as S_{x,y;y}.
  DoublyRootedTree(const RootedTree& t, VertexId y) : x_(t.root()), y_(y), branch_(y), out_(t.vertex_count()) {
    for (VertexId v = 0; v < t.vertex_count(); ++v)
      if (const auto& e = t.out_edge(v)) out_[v].push_back(*e);
  }

  DoublyRootedTree(VertexId x, VertexId y, VertexId branch, std::vector<std::vector<OrientedEdge>> out)
      : x_(x), y_(y), branch_(branch), out_(std::move(out)) {}

  std::pair<VertexId, VertexId> roots() const { return {x_, y_}; }
  VertexId branch() const { return branch_; }
  std::size_t vertex_count() const { return out_.size(); }
  const std::vector<OrientedEdge>& out_edges(VertexId v) const { return out_.at(v); }

  std::vector<OrientedEdge> edges() const {
    std::vector<OrientedEdge> all;
    for (const auto& o : out_) all.insert(all.end(), o.begin(), o.end());
    std::sort(all.begin(), all.end());
    return all;
  }

  bool is_degenerate() const { return branch_ == x_ || branch_ == y_; }

  /// Degree pattern plus undirected acyclicity over n - 1 edges.
  bool is_valid() const {
    const auto n = out_.size();
    if (x_ >= n || y_ >= n || branch_ >= n || x_ == y_) return false;
    for (VertexId v = 0; v < n; ++v) {
      std::size_t want = 1;
      if (branch_ == y_) {
        if (v == x_) want = 0;
      } else if (branch_ == x_) {
        if (v == y_) want = 0;
      } else if (v == x_ || v == y_) {
        want = 0;
      } else if (v == branch_) {
        want = 2;
      }
      if (out_[v].size() != want) return false;
      for (const auto& e : out_[v])
        if (e.source != v || e.target >= n) return false;
    }
    std::vector<VertexId> parent(n);
    std::iota(parent.begin(), parent.end(), VertexId{0});
    auto find = [&](VertexId v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    std::size_t count = 0;
    for (const auto& o : out_)
      for (const auto& e : o) {
        auto a = find(e.source), b = find(e.target);
        if (a == b) return false;
        parent[a] = b;
        ++count;
      }
    return count + 1 == n;
  }

  /// The rooted tree this degenerates to; throws unless degenerate.
  RootedTree as_rooted() const {
    if (!is_degenerate()) throw Error(ErrorCode::not_a_swap_configuration, "branch vertex is not a root");
    const VertexId root = branch_ == y_ ? x_ : y_;
    std::vector<std::optional<OrientedEdge>> out(out_.size());
    for (VertexId v = 0; v < out_.size(); ++v)
      if (!out_[v].empty()) out[v] = out_[v].front();
    return RootedTree(root, std::move(out));
  }

 private:
  friend struct SurgeryAccess;
  VertexId x_ = 0, y_ = 0, branch_ = 0;
  std::vector<std::vector<OrientedEdge>> out_;
};

/// One exchanged couple: e left the doubly-rooted tree, f entered it.
struct EdgeSwap {
  OrientedEdge e;
  OrientedEdge f;
};

struct SurgeryResult {
  RootedTree tree_x;  // rooted at the first input's root
  RootedTree tree_y;  // rooted at the second input's root
  std::vector<EdgeSwap> swaps;
};

struct SurgeryAccess {
  static std::vector<std::vector<OrientedEdge>>& out(DoublyRootedTree& s) { return s.out_; }
  static VertexId& branch(DoublyRootedTree& s) { return s.branch_; }
};

namespace detail {

inline std::vector<std::optional<OrientedEdge>> out_table(const RootedTree& t) {
  std::vector<std::optional<OrientedEdge>> out(t.vertex_count());
  for (VertexId v = 0; v < t.vertex_count(); ++v) out[v] = t.out_edge(v);
  return out;
}

/// Vertices whose out-path in s (ignoring `skip` at the branch) ends at `target`.
inline std::vector<bool> basin_of(const DoublyRootedTree& s, VertexId target) {
  const auto n = s.vertex_count();
  std::vector<signed char> state(n, -1);  // -1 unknown, 0 no, 1 yes
  state[target] = 1;
  for (VertexId v = 0; v < n; ++v) {
    std::vector<VertexId> trail;
    VertexId w = v;
    while (state[w] < 0) {
      trail.push_back(w);
      const auto& o = s.out_edges(w);
      if (o.size() != 1) {  // another root, or an unresolved branch
        state[w] = 0;
        trail.pop_back();
        break;
      }
      w = o.front().target;
    }
    const signed char res = state[w];
    for (VertexId t : trail) state[t] = res;
  }
  std::vector<bool> in(n);
  for (VertexId v = 0; v < n; ++v) in[v] = state[v] == 1;
  return in;
}

/// Edges on the out-path of `t` from `start` until `stop`.
inline std::vector<OrientedEdge> path_in(const std::vector<std::optional<OrientedEdge>>& t, VertexId start,
                                         VertexId stop) {
  std::vector<OrientedEdge> path;
  for (VertexId v = start; v != stop;) {
    if (!t[v] || path.size() > t.size())
      throw Error(ErrorCode::not_a_swap_configuration, "path does not reach the moving root");
    path.push_back(*t[v]);
    v = t[v]->target;
  }
  return path;
}

/// Follows single out-edges of s from v; returns the vertex where the walk stops.
inline VertexId walk_to_root(const DoublyRootedTree& s, VertexId v) {
  for (std::size_t steps = 0; s.out_edges(v).size() == 1; ++steps) {
    if (steps > s.vertex_count()) throw Error(ErrorCode::not_a_swap_configuration, "cycle in doubly-rooted tree");
    v = s.out_edges(v).front().target;
  }
  return v;
}

inline void check_configuration(const DoublyRootedTree& s, const RootedTree& t) {
  if (s.vertex_count() != t.vertex_count())
    throw Error(ErrorCode::not_a_swap_configuration, "trees live on different vertex sets");
  if (!s.is_valid()) throw Error(ErrorCode::not_a_swap_configuration, "not a doubly-rooted spanning tree");
  if (!t.is_valid()) throw Error(ErrorCode::not_a_swap_configuration, "not a rooted spanning tree");
  if (t.root() != s.branch())
    throw Error(ErrorCode::not_a_swap_configuration, "moving root and branch vertex disagree");
}

}  // namespace detail

/// One e/f exchange. `moving` is S_{x,y;z}, `fixed` the tree rooted at z. The
/// first edge e of z ~> x leaves S; f, the last edge of the fixed tree's path
/// from target(e) back to z that leaves the basin of x, takes its place. The
/// fixed tree gets e and is re-rooted at source(f), the new branch vertex.
/// A branch already at x is terminal: inputs are returned unchanged.
inline std::pair<DoublyRootedTree, RootedTree> swap_step(DoublyRootedTree moving, RootedTree fixed,
                                                         EdgeSwap* record = nullptr) {
  detail::check_configuration(moving, fixed);
  const auto [x, y] = moving.roots();
  const VertexId z = moving.branch();
  if (z == x) return {std::move(moving), std::move(fixed)};

  auto& s_out = SurgeryAccess::out(moving);
  std::optional<OrientedEdge> e;
  for (std::size_t i = 0; i < s_out[z].size(); ++i) {
    const auto cand = s_out[z][i];
    s_out[z].erase(s_out[z].begin() + static_cast<std::ptrdiff_t>(i));
    const bool leads_to_x = cand.target == x || detail::walk_to_root(moving, cand.target) == x;
    s_out[z].insert(s_out[z].begin() + static_cast<std::ptrdiff_t>(i), cand);
    if (leads_to_x) {
      e = cand;
      s_out[z].erase(s_out[z].begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!e) throw Error(ErrorCode::not_a_swap_configuration, "branch vertex has no path to the first root");

  const auto in_x = detail::basin_of(moving, x);
  auto t_out = detail::out_table(fixed);
  std::optional<OrientedEdge> f;
  for (const auto& edge : detail::path_in(t_out, e->target, z))
    if (in_x[edge.source] && !in_x[edge.target]) f = edge;
  if (!f) throw Error(ErrorCode::not_a_swap_configuration, "no basin-crossing edge");

  const VertexId z_next = f->source;
  t_out[z_next].reset();
  t_out[z] = *e;
  s_out[z_next].push_back(*f);
  std::sort(s_out[z_next].begin(), s_out[z_next].end());
  SurgeryAccess::branch(moving) = z_next;
  if (record) *record = {*e, *f};
  return {std::move(moving), RootedTree(z_next, std::move(t_out))};
}

/// Exact inverse of swap_step: `moving` is S_{x,y;z'}, `fixed` is rooted at z'.
/// f is the edge of z' that leads to y; e is the first edge of the fixed tree's
/// path from target(f) to z' that enters the basin of x. A branch at y is
/// terminal.
inline std::pair<DoublyRootedTree, RootedTree> unswap_step(DoublyRootedTree moving, RootedTree fixed,
                                                           EdgeSwap* record = nullptr) {
  detail::check_configuration(moving, fixed);
  const auto [x, y] = moving.roots();
  const VertexId zp = moving.branch();
  if (zp == y) return {std::move(moving), std::move(fixed)};

  auto& s_out = SurgeryAccess::out(moving);
  std::optional<OrientedEdge> f;
  for (std::size_t i = 0; i < s_out[zp].size(); ++i) {
    const auto cand = s_out[zp][i];
    s_out[zp].erase(s_out[zp].begin() + static_cast<std::ptrdiff_t>(i));
    const bool leads_to_y = cand.target == y || detail::walk_to_root(moving, cand.target) == y;
    s_out[zp].insert(s_out[zp].begin() + static_cast<std::ptrdiff_t>(i), cand);
    if (leads_to_y) {
      f = cand;
      s_out[zp].erase(s_out[zp].begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!f) throw Error(ErrorCode::not_a_swap_configuration, "branch vertex has no path to the second root");

  const auto in_x = detail::basin_of(moving, x);
  auto t_out = detail::out_table(fixed);
  std::optional<OrientedEdge> e;
  for (const auto& edge : detail::path_in(t_out, f->target, zp))
    if (!in_x[edge.source] && in_x[edge.target]) {
      e = edge;
      break;
    }
  if (!e) throw Error(ErrorCode::not_a_swap_configuration, "no basin-crossing edge");

  const VertexId z = e->source;
  t_out[z].reset();
  t_out[zp] = *f;
  s_out[z].push_back(*e);
  std::sort(s_out[z].begin(), s_out[z].end());
  SurgeryAccess::branch(moving) = z;
  if (record) *record = {*e, *f};
  return {std::move(moving), RootedTree(z, std::move(t_out))};
}

/// Exchanges the roots of two trees while preserving the product of weights.
/// Returns the new tree rooted at t_x.root() (grown from t_y) and the new tree
/// rooted at t_y.root() (grown from t_x), plus the swap log.
inline SurgeryResult surgery_trace(const RootedTree& t_x, const RootedTree& t_y) {
  if (t_x.root() == t_y.root()) throw Error(ErrorCode::same_root, "surgery needs two distinct roots");
  const VertexId x = t_x.root();
  DoublyRootedTree s(t_x, t_y.root());
  RootedTree t = t_y;
  SurgeryResult out;
  while (s.branch() != x) {
    if (out.swaps.size() > t_x.vertex_count())
      throw Error(ErrorCode::not_a_swap_configuration, "swap loop failed to terminate");
    EdgeSwap sw;
    std::tie(s, t) = swap_step(std::move(s), std::move(t), &sw);
    out.swaps.push_back(sw);
  }
  out.tree_x = std::move(t);
  out.tree_y = s.as_rooted();
  return out;
}

inline std::pair<RootedTree, RootedTree> surgery(const RootedTree& t_x, const RootedTree& t_y) {
  auto r = surgery_trace(t_x, t_y);
  return {std::move(r.tree_x), std::move(r.tree_y)};
}

/// Inverse of surgery: from (t'_x, t'_y) recovers the original (t_x, t_y).
inline std::pair<RootedTree, RootedTree> unsurgery(const RootedTree& tp_x, const RootedTree& tp_y) {
  if (tp_x.root() == tp_y.root()) throw Error(ErrorCode::same_root, "surgery needs two distinct roots");
  const VertexId x = tp_x.root(), y = tp_y.root();
  // t'_y viewed as S_{x,y;x}
  std::vector<std::vector<OrientedEdge>> out(tp_y.vertex_count());
  for (VertexId v = 0; v < tp_y.vertex_count(); ++v)
    if (const auto& e = tp_y.out_edge(v)) out[v].push_back(*e);
  DoublyRootedTree s(x, y, x, std::move(out));
  RootedTree t = tp_x;
  for (std::size_t steps = 0; s.branch() != y; ++steps) {
    if (steps > tp_x.vertex_count())
      throw Error(ErrorCode::not_a_swap_configuration, "unswap loop failed to terminate");
    std::tie(s, t) = unswap_step(std::move(s), std::move(t));
  }
  return {s.as_rooted(), std::move(t)};
}

/// Executable lemma: if both inputs meet `c`, so do both outputs. Vacuously
/// true otherwise. The constraint may not touch the pinned pairs.
inline bool surgery_respects_constraints(const RootedTree& t_x, const RootedTree& t_y, const TreeConstraint& c,
                                         std::span<const PairId> pinned) {
  for (PairId p : pinned)
    if (c.mentions_pair(p))
      throw Error(ErrorCode::constraint_mentions_pinned, "constraint touches a pinned pair");
  auto ok = [&](const RootedTree& t) {
    const auto e = t.edges();
    return c.satisfied_by(e);
  };
  if (!ok(t_x) || !ok(t_y)) return true;
  auto [a, b] = surgery(t_x, t_y);
  return ok(a) && ok(b);
}

}  // namespace treesurgeon
