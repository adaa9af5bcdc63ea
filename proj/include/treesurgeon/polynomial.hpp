#pragma once

#include "treesurgeon/linalg.hpp"
#include "treesurgeon/trees.hpp"

#include <atomic>
#include <bit>
#include <map>
#include <string>
#include <vector>

namespace treesurgeon {

enum class Backend { enumeration, determinant, both, automatic };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::enumeration: return "enum";
    case Backend::determinant: return "det";
    case Backend::both: return "both";
    case Backend::automatic: return "auto";
  }
  return "?";
}

inline Backend parse_backend(std::string_view s) {
  if (s == "enum" || s == "enumeration") return Backend::enumeration;
  if (s == "det" || s == "determinant") return Backend::determinant;
  if (s == "both") return Backend::both;
  if (s == "auto") return Backend::automatic;
  throw Error(ErrorCode::invalid_argument, "unknown backend '" + std::string(s) + "'");
}

/// Graphs up to this size are enumerated when the backend is automatic.
inline constexpr std::size_t enumeration_vertex_limit = 8;

inline Backend resolve_backend(Backend b, std::size_t vertex_count) {
  if (b != Backend::automatic) return b;
  return vertex_count <= enumeration_vertex_limit ? Backend::enumeration : Backend::determinant;
}

template <Scalar S>
struct TreePolyValue {
  S value{};
  Backend backend = Backend::enumeration;
};

/// Process-wide cross-check of the two backends. While enabled, every
/// polynomial evaluated on a graph with at most `max_vertices` vertices is
/// computed both ways and compared; mismatches are counted, never thrown.
struct BackendAudit {
  std::atomic<bool> enabled{false};
  std::atomic<std::uint64_t> compared{0};
  std::atomic<std::uint64_t> mismatched{0};
  std::size_t max_vertices = enumeration_vertex_limit;

  void reset() {
    compared = 0;
    mismatched = 0;
  }
};

inline BackendAudit& backend_audit() {
  static BackendAudit audit;
  return audit;
}

namespace detail {

/// det of the out-degree Laplacian with the root's row and column removed.
template <Scalar S>
S laplacian_minor(const Digraph<S>& g, const std::vector<S>& rate, VertexId root) {
  const std::size_t n = g.vertex_count();
  if (n <= 1) return S(1);
  std::vector<std::size_t> slot(n);
  for (VertexId v = 0, k = 0; v < n; ++v)
    if (v != root) slot[v] = k++;
  Matrix<S> m(n - 1, n - 1);
  for (PairId p = 0; p < g.pair_count(); ++p)
    for (Sign s : {Sign::plus, Sign::minus}) {
      const auto e = g.edge(p, s);
      const S& w = rate[edge_index(e)];
      if (is_zero(w) || e.source == root) continue;
      m(slot[e.source], slot[e.source]) += w;
      if (e.target != root) m(slot[e.source], slot[e.target]) -= w;
    }
  return determinant(m);
}

/// Matrix-tree evaluation with avoided rates zeroed and the multilinear
/// coefficient of the required rates extracted by 0/1 evaluation.
template <Scalar S>
S det_conditioned(const Digraph<S>& g, VertexId root, const TreeConstraint& c, bool rescaled) {
  auto rate = rate_table(g);
  for (const auto& a : c.avoid()) rate[edge_index(a)] = S(0);
  const auto& req = c.require();
  S scale(1);
  for (const auto& b : req) {
    if (b.source == root) return S(0);
    scale *= rate[edge_index(b)];
  }
  const std::size_t k = req.size();
  S acc(0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) rate[edge_index(req[i])] = S((mask >> i) & 1U);
    S v = laplacian_minor(g, rate, root);
    if ((k - static_cast<std::size_t>(std::popcount(mask))) % 2) v = -v;
    acc += v;
  }
  return rescaled ? acc : S(acc * scale);
}

/// Enumeration-side weights. Rational rates are cleared per source vertex so
/// trees accumulate as integers; the common factor is divided out once.
template <Scalar S>
struct EnumerationWeights;

template <>
struct EnumerationWeights<double> {
  std::vector<double> weight;
  double finish(double total, VertexId) const { return total; }
  static double zero() { return 0.0; }
};

template <>
struct EnumerationWeights<Rational> {
  std::vector<BigInt> weight;
  std::vector<BigInt> vertex_scale;
  Rational finish(const BigInt& total, VertexId root) const {
    BigInt d(1);
    for (VertexId v = 0; v < vertex_scale.size(); ++v)
      if (v != root) d *= vertex_scale[v];
    return Rational(total, d);
  }
  static BigInt zero() { return BigInt(0); }
};

/// `rate` with required edges set to one when rescaling.
inline EnumerationWeights<double> enumeration_weights(const Digraph<double>& g, const std::vector<double>& rate) {
  (void)g;
  return {rate};
}

inline EnumerationWeights<Rational> enumeration_weights(const Digraph<Rational>& g,
                                                        const std::vector<Rational>& rate) {
  EnumerationWeights<Rational> w;
  w.vertex_scale.assign(g.vertex_count(), BigInt(1));
  for (std::size_t i = 0; i < rate.size(); ++i) {
    const auto e = g.edge(static_cast<PairId>(i / 2), i % 2 ? Sign::minus : Sign::plus);
    w.vertex_scale[e.source] = boost::multiprecision::lcm(w.vertex_scale[e.source], denominator(rate[i]));
  }
  w.weight.resize(rate.size());
  for (std::size_t i = 0; i < rate.size(); ++i) {
    const auto e = g.edge(static_cast<PairId>(i / 2), i % 2 ? Sign::minus : Sign::plus);
    w.weight[i] = numerator(rate[i]) * (w.vertex_scale[e.source] / denominator(rate[i]));
  }
  return w;
}

template <Scalar S>
S enum_conditioned(const Digraph<S>& g, VertexId root, const TreeConstraint& c, bool rescaled) {
  auto rate = rate_table(g);
  if (rescaled)
    for (const auto& b : c.require()) rate[edge_index(b)] = S(1);
  const auto w = enumeration_weights(g, rate);
  auto total = w.zero();
  for_each_tree_choice_weighted(g, root, c, w.weight,
                                [&](std::span<const OrientedEdge>, const auto& x) { total += x; });
  return w.finish(total, root);
}

template <Scalar S>
void audit_compare(const S& a, const S& b) {
  auto& audit = backend_audit();
  ++audit.compared;
  if (!nearly_equal(a, b)) ++audit.mismatched;
}

template <Scalar S>
bool audit_applies(const Digraph<S>& g) {
  const auto& audit = backend_audit();
  return audit.enabled.load() && g.vertex_count() <= audit.max_vertices;
}

template <Scalar S>
TreePolyValue<S> evaluate(const Digraph<S>& g, VertexId root, const TreeConstraint& c, Backend backend,
                          bool rescaled) {
  if (root >= g.vertex_count()) throw Error(ErrorCode::unknown_vertex, "root out of range");
  if (rescaled)
    for (const auto& b : c.require())
      if (!g.has_edge(b))
        throw Error(ErrorCode::zero_required_rate, "required edge " + g.edge_name(b) + " has zero rate");
  const Backend b = resolve_backend(backend, g.vertex_count());
  switch (b) {
    case Backend::enumeration: {
      S v = enum_conditioned(g, root, c, rescaled);
      if (audit_applies(g)) audit_compare(v, det_conditioned(g, root, c, rescaled));
      return {std::move(v), b};
    }
    case Backend::determinant: {
      S v = det_conditioned(g, root, c, rescaled);
      if (audit_applies(g)) audit_compare(enum_conditioned(g, root, c, rescaled), v);
      return {std::move(v), b};
    }
    default: {
      S a = enum_conditioned(g, root, c, rescaled);
      S d = det_conditioned(g, root, c, rescaled);
      if (audit_applies(g)) audit_compare(a, d);
      if (!nearly_equal(a, d))
        throw Error(ErrorCode::verification_failure,
                    "backends disagree: enum " + to_string(a) + " vs det " + to_string(d));
      return {std::move(d), Backend::both};
    }
  }
}

}  // namespace detail

/// Conditioned rooted spanning-tree polynomial: sum over trees rooted at `root`
/// avoiding c.avoid() and containing c.require() of the product of rates.
template <Scalar S>
TreePolyValue<S> tree_poly(const Digraph<S>& g, VertexId root, const TreeConstraint& c = {},
                           Backend backend = Backend::automatic) {
  return detail::evaluate(g, root, c, backend, false);
}

template <Scalar S>
TreePolyValue<S> tree_poly_enum(const Digraph<S>& g, VertexId root, const TreeConstraint& c = {}) {
  return tree_poly(g, root, c, Backend::enumeration);
}

template <Scalar S>
TreePolyValue<S> tree_poly_det(const Digraph<S>& g, VertexId root, const TreeConstraint& c = {}) {
  return tree_poly(g, root, c, Backend::determinant);
}

/// The conditioned polynomial divided by the rates of its required edges.
template <Scalar S>
TreePolyValue<S> rescaled_poly(const Digraph<S>& g, VertexId root, const TreeConstraint& c = {},
                               Backend backend = Backend::automatic) {
  return detail::evaluate(g, root, c, backend, true);
}

template <Scalar S>
struct Contraction {
  Digraph<S> graph;
  VertexId merged = 0;
  std::vector<VertexId> image;  // original vertex -> contracted vertex
};

/// Merges the endpoints of pair p into one vertex, drops the pair, and sums
/// rates of parallel directions created by the merge.
template <Scalar S>
Contraction<S> contract_pair(const Digraph<S>& g, PairId p) {
  if (p >= g.pair_count()) throw Error(ErrorCode::unknown_edge, "pair id out of range");
  const auto& pr = g.pair(p);
  if (!g.has_edge(g.edge(p, Sign::plus)) || !g.has_edge(g.edge(p, Sign::minus)))
    throw Error(ErrorCode::missing_reverse_edge,
                "pair " + g.label(pr.u) + "-" + g.label(pr.v) + " lacks a direction");
  const VertexId keep = std::min(pr.u, pr.v), drop = std::max(pr.u, pr.v);

  Contraction<S> out;
  out.image.resize(g.vertex_count());
  std::vector<std::string> labels;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (v == drop) continue;
    out.image[v] = static_cast<VertexId>(labels.size());
    labels.push_back(v == keep ? g.label(pr.u) + "+" + g.label(pr.v) : g.label(v));
  }
  out.image[drop] = out.image[keep];
  out.merged = out.image[keep];

  std::map<std::pair<VertexId, VertexId>, std::size_t> slot;
  std::vector<EdgePair<S>> pairs;
  for (PairId q = 0; q < g.pair_count(); ++q) {
    if (q == p) continue;
    const auto& e = g.pair(q);
    VertexId a = out.image[e.u], b = out.image[e.v];
    if (a == b) continue;  // cannot happen for simple graphs, kept for safety
    S fwd = e.forward, bwd = e.backward;
    if (a > b) {
      std::swap(a, b);
      std::swap(fwd, bwd);
    }
    auto [it, fresh] = slot.emplace(std::pair{a, b}, pairs.size());
    if (fresh) {
      pairs.push_back({a, b, std::move(fwd), std::move(bwd)});
    } else {
      pairs[it->second].forward += fwd;
      pairs[it->second].backward += bwd;
    }
  }
  out.graph = Digraph<S>(std::move(labels), std::move(pairs));
  return out;
}

/// Rooted polynomial of the contracted graph at the merged vertex.
template <Scalar S>
TreePolyValue<S> contracted_root_poly(const Digraph<S>& g, PairId p, Backend backend = Backend::automatic) {
  auto c = contract_pair(g, p);
  return tree_poly(c.graph, c.merged, {}, backend);
}

// ---------------------------------------------------------------------------
// Pinned statuses and tree vectors

enum class PinStatus : std::uint8_t { none = 0, plus = 1, minus = 2 };

using Status = std::vector<PinStatus>;

inline char status_char(PinStatus s) {
  switch (s) {
    case PinStatus::none: return '0';
    case PinStatus::plus: return '+';
    case PinStatus::minus: return '-';
  }
  return '?';
}

inline std::string status_string(const Status& s) {
  std::string out;
  for (auto p : s) out += status_char(p);
  return out;
}

inline Status parse_status(std::string_view text) {
  Status s;
  for (char ch : text) {
    if (ch == '0') s.push_back(PinStatus::none);
    else if (ch == '+') s.push_back(PinStatus::plus);
    else if (ch == '-') s.push_back(PinStatus::minus);
    else throw Error(ErrorCode::invalid_argument, "bad status '" + std::string(text) + "'");
  }
  return s;
}

/// The 3^n statuses in vector order: grouped by how many pins are constricted;
/// within a group the constricted pin sets go in lexicographic order, and for
/// one pin set the signs count up with the first pin fastest, + before -.
/// n = 1 gives (0, +, -); n = 2 gives 00 +0 -0 0+ 0- ++ -+ +- --.
inline std::vector<Status> status_layout(std::size_t n) {
  std::vector<Status> out;
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) members.push_back(i);
      for (std::size_t signs = 0; signs < (std::size_t{1} << k); ++signs) {
        Status s(n, PinStatus::none);
        for (std::size_t j = 0; j < k; ++j) s[members[j]] = (signs >> j) & 1U ? PinStatus::minus : PinStatus::plus;
        out.push_back(std::move(s));
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

/// Base-3 code of a status (pin i contributes digit status_i * 3^i).
inline std::size_t status_code(const Status& s) {
  std::size_t code = 0, mul = 1;
  for (auto p : s) {
    code += static_cast<std::size_t>(p) * mul;
    mul *= 3;
  }
  return code;
}

/// Layout position for each base-3 code.
inline std::vector<std::size_t> status_positions(std::size_t n) {
  const auto layout = status_layout(n);
  std::vector<std::size_t> pos(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) pos[status_code(layout[i])] = i;
  return pos;
}

/// Avoid/require sets selecting one status over the pinned pairs.
template <Scalar S>
TreeConstraint status_constraint(const Digraph<S>& g, std::span<const PairId> pinned, const Status& s) {
  if (s.size() != pinned.size()) throw Error(ErrorCode::invalid_argument, "status arity differs from pin count");
  std::vector<OrientedEdge> avoid, require;
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    const auto plus = g.edge(pinned[i], Sign::plus), minus = g.edge(pinned[i], Sign::minus);
    switch (s[i]) {
      case PinStatus::none:
        avoid.push_back(plus);
        avoid.push_back(minus);
        break;
      case PinStatus::plus:
        avoid.push_back(minus);
        require.push_back(plus);
        break;
      case PinStatus::minus:
        avoid.push_back(plus);
        require.push_back(minus);
        break;
    }
  }
  return {std::move(avoid), std::move(require)};
}

template <Scalar S>
void check_pinned_distinct(const Digraph<S>& g, std::span<const PairId> pinned) {
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    if (pinned[i] >= g.pair_count()) throw Error(ErrorCode::unknown_edge, "pinned pair out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (pinned[i] == pinned[j]) throw Error(ErrorCode::invalid_argument, "pinned pairs must be distinct");
  }
}

/// Deletion-constriction decomposition of tau_root over n pinned pairs.
template <Scalar S>
struct TreeVector {
  VertexId root = 0;
  std::vector<PairId> pinned;
  std::vector<Status> statuses;
  std::vector<S> values;
  Backend backend = Backend::enumeration;

  std::size_t size() const { return values.size(); }
  const S& operator[](std::size_t i) const { return values[i]; }

  S total() const {
    S t(0);
    for (const auto& v : values) t += v;
    return t;
  }
};

namespace detail {

/// One enumeration pass: each tree meeting `extra` is classified by which
/// orientation of each pin it uses and its weight added to that entry.
template <Scalar S>
std::vector<S> classify_trees(const Digraph<S>& g, VertexId root, std::span<const PairId> pinned,
                              const TreeConstraint& extra, bool rescaled) {
  const std::size_t n = pinned.size();
  const auto pos = status_positions(n);
  auto rate = rate_table(g);
  if (rescaled) {
    for (PairId p : pinned) rate[2 * p] = rate[2 * p + 1] = S(1);
    for (const auto& b : extra.require()) rate[edge_index(b)] = S(1);
  }
  const auto w = enumeration_weights(g, rate);
  std::vector<decltype(w.zero())> bucket(pos.size(), w.zero());
  std::vector<OrientedEdge> plus(n), minus(n);
  for (std::size_t i = 0; i < n; ++i) {
    plus[i] = g.edge(pinned[i], Sign::plus);
    minus[i] = g.edge(pinned[i], Sign::minus);
  }
  for_each_tree_choice_weighted(g, root, extra, w.weight, [&](std::span<const OrientedEdge> chosen, const auto& x) {
    std::size_t code = 0, mul = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = plus[i];
      const auto& b = minus[i];
      if (a.source != root && chosen[a.source] == a) code += mul;
      else if (b.source != root && chosen[b.source] == b) code += 2 * mul;
      mul *= 3;
    }
    bucket[pos[code]] += x;
  });
  std::vector<S> out;
  out.reserve(bucket.size());
  for (const auto& b : bucket) out.push_back(w.finish(b, root));
  return out;
}

/// Determinant route. Rates of pin pair i are set to (0,0), (1,0), or (0,1)
/// per evaluation; each entry is an inclusion-exclusion over those values.
/// Evaluations are shared across entries through a small cache.
template <Scalar S>
std::vector<S> det_tree_vector(const Digraph<S>& g, VertexId root, std::span<const PairId> pinned,
                               const TreeConstraint& extra, bool rescaled) {
  const std::size_t n = pinned.size();
  const auto layout = status_layout(n);
  auto base = rate_table(g);
  for (const auto& a : extra.avoid()) base[edge_index(a)] = S(0);
  const auto& req = extra.require();
  S extra_scale(1);
  bool extra_dead = false;
  for (const auto& b : req) {
    extra_scale *= base[edge_index(b)];
    if (b.source == root) extra_dead = true;
  }

  std::map<std::vector<std::uint8_t>, S> cache;
  // state per pin: 0 -> (0,0), 1 -> (1,0), 2 -> (0,1); extra required edges: bit per edge
  auto eval = [&](const std::vector<std::uint8_t>& key) -> const S& {
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto rate = base;
    for (std::size_t i = 0; i < n; ++i) {
      rate[2 * pinned[i]] = S(key[i] == 1 ? 1 : 0);
      rate[2 * pinned[i] + 1] = S(key[i] == 2 ? 1 : 0);
    }
    for (std::size_t j = 0; j < req.size(); ++j) rate[edge_index(req[j])] = S(key[n + j]);
    return cache.emplace(key, laplacian_minor(g, rate, root)).first->second;
  };

  std::vector<S> out;
  out.reserve(layout.size());
  for (const auto& s : layout) {
    if (extra_dead) {
      out.push_back(S(0));
      continue;
    }
    std::vector<std::size_t> hot;  // constricted pins
    for (std::size_t i = 0; i < n; ++i)
      if (s[i] != PinStatus::none) hot.push_back(i);
    const std::size_t k = hot.size() + req.size();
    S acc(0);
    std::vector<std::uint8_t> key(n + req.size(), 0);
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      std::fill(key.begin(), key.end(), 0);
      for (std::size_t j = 0; j < hot.size(); ++j)
        if ((mask >> j) & 1U) key[hot[j]] = static_cast<std::uint8_t>(s[hot[j]]);
      for (std::size_t j = 0; j < req.size(); ++j)
        if ((mask >> (hot.size() + j)) & 1U) key[n + j] = 1;
      S v = eval(key);
      if ((k - static_cast<std::size_t>(std::popcount(mask))) % 2) v = -v;
      acc += v;
    }
    if (!rescaled) {
      acc *= extra_scale;
      for (std::size_t i : hot) {
        const auto e = g.edge(pinned[i], s[i] == PinStatus::plus ? Sign::plus : Sign::minus);
        acc *= g.rate(e);
      }
    }
    out.push_back(std::move(acc));
  }
  return out;
}

template <Scalar S>
TreeVector<S> decompose_impl(const Digraph<S>& g, VertexId root, std::span<const PairId> pinned,
                             const TreeConstraint& extra, Backend backend, bool rescaled) {
  if (root >= g.vertex_count()) throw Error(ErrorCode::unknown_vertex, "root out of range");
  check_pinned_distinct(g, pinned);
  for (PairId p : pinned)
    if (extra.mentions_pair(p))
      throw Error(ErrorCode::constraint_mentions_pinned, "extra constraint touches a pinned pair");
  if (rescaled) {
    for (PairId p : pinned)
      for (Sign s : {Sign::plus, Sign::minus})
        if (!g.has_edge(g.edge(p, s)))
          throw Error(ErrorCode::zero_required_rate, "pinned direction " + g.edge_name(g.edge(p, s)) + " has zero rate");
    for (const auto& b : extra.require())
      if (!g.has_edge(b)) throw Error(ErrorCode::zero_required_rate, "required edge has zero rate");
  }
  TreeVector<S> tv;
  tv.root = root;
  tv.pinned.assign(pinned.begin(), pinned.end());
  tv.statuses = status_layout(pinned.size());
  const Backend b = resolve_backend(backend, g.vertex_count());
  const bool audit = audit_applies(g);
  if (b == Backend::enumeration) {
    tv.values = classify_trees(g, root, pinned, extra, rescaled);
    if (audit) {
      auto d = det_tree_vector(g, root, pinned, extra, rescaled);
      for (std::size_t i = 0; i < d.size(); ++i) audit_compare(tv.values[i], d[i]);
    }
  } else if (b == Backend::determinant) {
    tv.values = det_tree_vector(g, root, pinned, extra, rescaled);
    if (audit) {
      auto e = classify_trees(g, root, pinned, extra, rescaled);
      for (std::size_t i = 0; i < e.size(); ++i) audit_compare(e[i], tv.values[i]);
    }
  } else {
    auto e = classify_trees(g, root, pinned, extra, rescaled);
    tv.values = det_tree_vector(g, root, pinned, extra, rescaled);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (audit) audit_compare(e[i], tv.values[i]);
      if (!nearly_equal(e[i], tv.values[i]))
        throw Error(ErrorCode::verification_failure, "backends disagree on status " + status_string(tv.statuses[i]));
    }
  }
  tv.backend = b;
  return tv;
}

}  // namespace detail

/// The 3^n-entry deletion-constriction vector of tau_root over `pinned`,
/// optionally restricted to trees meeting `extra` (which may not touch pins).
template <Scalar S>
TreeVector<S> decompose(const Digraph<S>& g, VertexId root, std::span<const PairId> pinned,
                        const TreeConstraint& extra = {}, Backend backend = Backend::automatic) {
  return detail::decompose_impl(g, root, pinned, extra, backend, false);
}

/// Same layout with every entry divided by the rates of its required edges:
/// the coefficients of the pinned-rate monomials, independent of those rates.
template <Scalar S>
TreeVector<S> decompose_rescaled(const Digraph<S>& g, VertexId root, std::span<const PairId> pinned,
                                 const TreeConstraint& extra = {}, Backend backend = Backend::automatic) {
  return detail::decompose_impl(g, root, pinned, extra, backend, true);
}

/// Tree vectors for every root, in vertex order.
template <Scalar S>
std::vector<TreeVector<S>> decompose_all(const Digraph<S>& g, std::span<const PairId> pinned,
                                         const TreeConstraint& extra = {}, Backend backend = Backend::automatic) {
  std::vector<TreeVector<S>> out;
  out.reserve(g.vertex_count());
  for (VertexId x = 0; x < g.vertex_count(); ++x) out.push_back(decompose(g, x, pinned, extra, backend));
  return out;
}

}  // namespace treesurgeon
