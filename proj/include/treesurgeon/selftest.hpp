#pragma once

#include "treesurgeon/fixtures.hpp"
#include "treesurgeon/simulation.hpp"
#include "treesurgeon/surgery.hpp"

namespace treesurgeon {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  /// Corrupts one rate on the right-hand side of the second-order identity;
  /// the suite must then report a failure.
  bool inject_fault = false;
};

namespace detail {

/// Second-order identity at every root, with the two unconstrained factors
/// optionally taken from a graph whose rate of pair `corrupt` was doubled.
template <Scalar S>
bool second_order_holds(const Digraph<S>& g, PairId pair, std::optional<PairId> corrupt) {
  const auto plus = g.edge(pair, Sign::plus), minus = g.edge(pair, Sign::minus);
  const auto off = TreeConstraint::avoiding({plus, minus});
  Digraph<S> h = g;
  if (corrupt) h = g.with_pair_rates(*corrupt, S(g.pair(*corrupt).forward * S(2)), g.pair(*corrupt).backward);
  const S rp = g.rate(plus), rm = g.rate(minus);
  const S tdot = contracted_root_poly(g, pair).value;
  const S tp = tree_poly(h, plus.source, off).value;
  const S tm = tree_poly(h, minus.source, off).value;
  const PairId pins[] = {pair};
  for (VertexId x = 0; x < g.vertex_count(); ++x) {
    const auto tv = decompose(g, x, std::span<const PairId>(pins));
    if (!nearly_equal(S(rp * rm * tdot * tv[0]), S(rp * tp * tv[2] + rm * tm * tv[1]))) return false;
  }
  return true;
}

template <Scalar S>
bool first_order_holds(const Digraph<S>& g, std::span<const PairId> pinned) {
  for (VertexId x = 0; x < g.vertex_count(); ++x)
    if (!nearly_equal(decompose(g, x, pinned).total(), tree_poly(g, x).value)) return false;
  return true;
}

template <Scalar S>
std::vector<PairId> non_bridge_pairs(const Digraph<S>& g) {
  std::vector<PairId> out;
  for (PairId p = 0; p < g.pair_count(); ++p) {
    const PairId one[] = {p};
    const auto& pr = g.pair(p);
    if (sign_of(pr.forward) > 0 && sign_of(pr.backward) > 0 && stays_connected_without(g, std::span<const PairId>(one)))
      out.push_back(p);
  }
  return out;
}

}  // namespace detail

/// Identity suite on the bundled fixtures: the worked example, the six-vertex
/// network, and complete graphs K_3..K_5.
inline std::vector<SelfCheck> run_selftest(const SelftestOptions& opt = {}) {
  std::vector<SelfCheck> out;
  auto record = [&](std::string name, auto&& body) {
    SelfCheck c{std::move(name)};
    try {
      c.passed = body(c.detail);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = e.what();
    }
    out.push_back(std::move(c));
  };

  const auto ex = fixtures::worked_example();
  const auto net = fixtures::six_vertex_network(1);
  std::vector<Digraph<Rational>> kn;
  for (std::size_t n = 3; n <= 5; ++n) kn.push_back(fixtures::complete_unit(n));

  record("worked example: 8 trees per root, backends agree", [&](std::string& d) {
    bool ok = true;
    for (VertexId x = 0; x < ex.vertex_count(); ++x) {
      const auto c = count_rooted_trees(ex, x);
      ok = ok && c == 8 && tree_poly(ex, x, {}, Backend::both).value == 8;
      d += ex.label(x) + "=" + std::to_string(c) + " ";
    }
    return ok;
  });

  record("first-order decomposition sums to the tree polynomial", [&](std::string&) {
    bool ok = true;
    for (PairId p = 0; p < ex.pair_count(); ++p) {
      const PairId one[] = {p};
      ok = ok && detail::first_order_holds(ex, std::span<const PairId>(one));
    }
    const PairId two[] = {0, 1};
    for (const auto& g : kn) ok = ok && detail::first_order_holds(g, std::span<const PairId>(two));
    const PairId one[] = {fixtures::six_vertex_pinned(net)};
    return ok && detail::first_order_holds(net, std::span<const PairId>(one));
  });

  record("second-order identity at every root", [&](std::string& d) {
    bool ok = true;
    for (PairId p : detail::non_bridge_pairs(ex)) {
      std::optional<PairId> corrupt;
      if (opt.inject_fault) corrupt = (p + 1) % ex.pair_count();
      const bool h = detail::second_order_holds(ex, p, corrupt);
      if (!h) d += "fails for pair " + ex.edge_name(ex.edge(p, Sign::plus)) + "; ";
      ok = ok && h;
    }
    for (const auto& g : kn) ok = ok && detail::second_order_holds(g, 0, std::nullopt);
    return ok && detail::second_order_holds(net, fixtures::six_vertex_pinned(net), std::nullopt);
  });

  record("coplanarity: rank 2 and sigma orthogonal", [&](std::string& d) {
    bool ok = true;
    for (PairId p : detail::non_bridge_pairs(ex)) {
      const auto r = check_coplanarity(ex, p);
      ok = ok && r.certificate.rank == 2 && r.all_orthogonal;
    }
    const auto rn = check_coplanarity(net, fixtures::six_vertex_pinned(net));
    d = "six-vertex smallest/largest singular value " + to_string(rn.certificate.spectral_ratio(2));
    return ok && rn.certificate.rank == 2 && rn.all_orthogonal && rn.certificate.spectral_ratio(2) < 1e-9;
  });

  record("two pins on K_5: rank at most 3, all sigma orthogonal", [&](std::string& d) {
    const PairId two[] = {0, 9};
    const auto r = check_coplanarity(kn.back(), std::span<const PairId>(two));
    d = "rank " + std::to_string(r.certificate.rank);
    return r.certificate.rank <= 3 && r.all_orthogonal;
  });

  record("stationary: matrix-tree equals generator kernel; currents balance", [&](std::string&) {
    bool ok = true;
    for (const auto& g : {ex, fixtures::biased_cycle(), kn[1]}) {
      ok = ok && stationary(g).p == stationary_by_kernel(g).p;
      for (const auto& b : vertex_balance(g, currents(g))) ok = ok && is_zero(b);
    }
    return ok;
  });

  record("lambda-linearity on the worked example", [&](std::string&) {
    auto g = fixtures::worked_example({1, 2, 3, 1, 2, 5, 1, 4, 3, 2});
    const auto lc = lambda_coefficients(g, 0);
    std::vector<std::pair<Rational, Rational>> samples{{Rational(1, 2), 3}, {7, Rational(2, 3)}, {1, 1}};
    const auto r = verify_linearity(g, 0, lc, samples);
    return lc.consistent && r.exact_zero && check_quadratic_terms(g, 0).quadratic_free;
  });

  record("tree surgery round trip on the worked example", [&](std::string& d) {
    std::size_t bad = 0, total = 0;
    for (VertexId x = 0; x < ex.vertex_count(); ++x)
      for (VertexId y = 0; y < ex.vertex_count(); ++y) {
        if (x == y) continue;
        for (const auto& a : enumerate_rooted_trees(ex, x))
          for (const auto& b : enumerate_rooted_trees(ex, y)) {
            ++total;
            auto [c, e] = surgery(a, b);
            auto [a2, b2] = unsurgery(c, e);
            if (!(c.is_valid() && e.is_valid() && c.root() == x && e.root() == y && a2 == a && b2 == b)) ++bad;
          }
      }
    d = std::to_string(total) + " pairs, " + std::to_string(bad) + " bad";
    return bad == 0;
  });
  return out;
}

}  // namespace treesurgeon
