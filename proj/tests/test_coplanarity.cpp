#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace treesurgeon;

namespace {

using R = Rational;

// a pair of K_n's pairs with no common endpoint
std::pair<PairId, PairId> disjoint_pairs(const Digraph<R>& g) {
  const auto& a = g.pair(0);
  for (PairId q = 1; q < g.pair_count(); ++q) {
    const auto& b = g.pair(q);
    if (a.u != b.u && a.u != b.v && a.v != b.u && a.v != b.v) return {0, q};
  }
  throw std::logic_error("no disjoint pair");
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(Sigma, WorkedExample) {
  auto g = fixtures::worked_example();
  const auto s = sigma_vector(g, 0);
  EXPECT_EQ(s.normal(), (std::vector<R>{-5, 3, 3}));
  // independent: -r+ r- tdot, r+ tau^{avoid both}_b, r- tau^{avoid both}_a
  const auto p = g.edge(0, Sign::plus), m = p.reversed();
  EXPECT_EQ(s.plus, oracle::tree_sum(g, p.source, {p, m}));
  EXPECT_EQ(s.minus, oracle::tree_sum(g, m.source, {p, m}));
  EXPECT_EQ(s.none, -oracle::tree_sum(g, p.source, {p}, {m}));
  const PairId pin[] = {0};
  for (VertexId x = 0; x < 4; ++x) EXPECT_EQ(dot(s.normal(), decompose(g, x, pin)), R(0));
}

TEST(Sigma, ConstrainedThroughCtoB) {
  auto g = fixtures::worked_example();
  const auto extra = TreeConstraint::requiring({parse_edge(g, "c>b")});
  const auto s = sigma_vector(g, 0, extra);
  const PairId pin[] = {0};
  const auto p = g.edge(0, Sign::plus), m = p.reversed(), cb = parse_edge(g, "c>b");
  EXPECT_EQ(s.plus, oracle::tree_sum(g, p.source, {p, m}, {cb}));
  EXPECT_EQ(s.minus, oracle::tree_sum(g, m.source, {p, m}, {cb}));
  bool any_nonzero = false;
  for (VertexId x = 0; x < 4; ++x) {
    const auto tv = decompose(g, x, pin, extra);
    EXPECT_EQ(dot(s.normal(), tv), R(0));
    any_nonzero = any_nonzero || tv.total() != 0;
  }
  EXPECT_TRUE(any_nonzero);
  EXPECT_EQ(decompose(g, g.vertex("c"), pin, extra).values, (std::vector<R>{0, 0, 0}));
  EXPECT_EQ(code_of([&] { sigma_vector(g, 0, TreeConstraint::requiring({p})); }), ErrorCode::constraint_mentions_pinned);
}

TEST(Sigma, SignStructureAndRandomConstraints) {
  CounterRng rng(5, 5);
  for (std::uint64_t s = 0; s < 15; ++s) {
    auto g = random_graph<R>(5 + s % 2, 0.8, RationalRates{7, 4}, 40 + s);
    for (PairId q = 0; q < g.pair_count(); ++q) {
      const PairId pin[] = {q};
      if (!stays_connected_without(g, std::span<const PairId>(pin))) continue;
      std::vector<OrientedEdge> avoid, require;
      for (const auto& e : g.edges())
        if (e.pair != q) {
          const double u = rng.uniform01();
          if (u < 0.1) avoid.push_back(e);
          else if (u < 0.15) require.push_back(e);
        }
      const TreeConstraint extra(avoid, require);
      const auto sv = sigma_vector(g, q, extra);
      EXPECT_LE(sign_of(sv.none), 0);
      EXPECT_GE(sign_of(sv.plus), 0);
      EXPECT_GE(sign_of(sv.minus), 0);
      for (VertexId x = 0; x < g.vertex_count(); ++x) EXPECT_EQ(dot(sv.normal(), decompose(g, x, pin, extra)), R(0));
    }
  }
}

TEST(SecondOrder, ExactOnFixtures) {
  EXPECT_TRUE(check_second_order(fixtures::worked_example(), 0).holds);
  EXPECT_TRUE(check_second_order(fixtures::triangle(), 1).holds);
  auto k6 = complete_graph<R>(6, RationalRates{9, 5}, 12);
  for (PairId q = 0; q < k6.pair_count(); q += 4) {
    const auto rep = check_second_order(k6, q);
    EXPECT_TRUE(rep.holds);
    for (const auto& r : rep.residual) EXPECT_EQ(r, R(0));
  }
  auto path = oracle::exact("a b 1 1\nb c 1 1\n");
  EXPECT_EQ(code_of([&] { check_second_order(path, 0); }), ErrorCode::bridge_pinned);
}

TEST(Coplanarity, RankTwo) {
  const auto rep = check_coplanarity(fixtures::worked_example(), 0);
  EXPECT_EQ(rep.certificate.rank, 2u);
  EXPECT_TRUE(rep.all_orthogonal);
  EXPECT_TRUE(rep.rank_is_n_plus_one());
  EXPECT_FALSE(rep.too_few_vertices);

  auto db = std::get<Digraph<R>>(load_graph(TREESURGEON_DATA "/detailed_balance.txt"));
  EXPECT_TRUE(is_detailed_balanced(db));
  EXPECT_EQ(check_coplanarity(db, 0).certificate.rank, 2u);

  for (std::uint64_t s = 0; s < 10; ++s) {
    auto g = fixtures::six_vertex_network(s);
    const auto r = check_coplanarity(g, fixtures::six_vertex_pinned(g));
    EXPECT_EQ(r.certificate.rank, 2u);
    EXPECT_LT(r.certificate.spectral_ratio(2), 1e-9);
    EXPECT_GT(r.certificate.spectral_ratio(1), 1e-6);
    EXPECT_TRUE(r.all_orthogonal);
  }
}

TEST(Coplanarity, Errors) {
  auto path = oracle::exact("a b 1 1\nb c 1 1\n");
  EXPECT_EQ(code_of([&] { check_coplanarity(path, 0); }), ErrorCode::bridge_pinned);
  auto one_way = oracle::exact("0 1 1 0\n1 2 1 1\n2 0 1 1\n");
  EXPECT_EQ(code_of([&] { check_coplanarity(one_way, 0); }), ErrorCode::missing_reverse_edge);
  auto square = oracle::exact("0 1 1 1\n1 2 1 1\n2 3 1 1\n3 0 1 1\n");
  const PairId both[] = {0, 2};
  EXPECT_EQ(code_of([&] { check_coplanarity(square, std::span<const PairId>(both)); }),
            ErrorCode::disconnected_without_pins);
  EXPECT_FALSE(check_coplanarity(fixtures::triangle(), 0).too_few_vertices);
  auto k4 = fixtures::complete_unit(4);
  const PairId three[] = {*k4.find_pair(0, 1), *k4.find_pair(2, 3), *k4.find_pair(0, 2)};
  const auto small = check_coplanarity(k4, std::span<const PairId>(three));
  EXPECT_TRUE(small.too_few_vertices);
  EXPECT_LE(small.certificate.rank, 4u);
}

TEST(Coplanarity, PlaneCsv) {
  auto g = fixtures::worked_example();
  const auto rep = check_coplanarity(g, 0);
  EXPECT_EQ(plane_data_csv(g, rep),
            "root,tau_none,tau_plus,tau_minus\nb,3,0,5\na,3,5,0\nc,3,1,4\nd,3,2,3\nnormal,-5,3,3\n");
  auto k5 = fixtures::complete_unit(5);
  const PairId two[] = {0, 9};
  const auto rep2 = check_coplanarity(k5, std::span<const PairId>(two));
  EXPECT_EQ(code_of([&] { plane_data_csv(k5, rep2); }), ErrorCode::wrong_arity);
}

TEST(TwoEdge, CompleteNineVertices) {
  auto g = complete_graph<R>(9, RationalRates{9, 7}, 2024);
  const auto [p1, p2] = disjoint_pairs(g);
  const auto rep = two_edge_analysis(g, p1, p2, Backend::determinant);
  EXPECT_TRUE(rep.meets_size_condition);
  EXPECT_FALSE(rep.pairs_share_vertex);
  EXPECT_EQ(rep.coplanarity.certificate.rank, 3u);
  EXPECT_TRUE(rep.coplanarity.all_orthogonal);
  EXPECT_EQ(rep.coplanarity.sigmas.size(), 6u);
  EXPECT_GT(rep.lower_block_det, 0);
  EXPECT_TRUE(rep.sigma.pattern_ok);
  EXPECT_EQ(rep.consistency.vanishing, 0u);
  EXPECT_EQ(rep.coplanarity.sigma_rank, 6u);
}

TEST(TwoEdge, SharedVertexKillsLowerBlock) {
  auto g = fixtures::complete_unit(6);
  const auto a = g.pair(0);
  PairId q = 1;
  while (g.pair(q).u != a.u && g.pair(q).v != a.u && g.pair(q).u != a.v && g.pair(q).v != a.v) ++q;
  const auto rep = two_edge_analysis(g, 0, q);
  EXPECT_TRUE(rep.pairs_share_vertex);
  EXPECT_EQ(rep.lower_block_det, R(0));
  EXPECT_EQ(rep.coplanarity.certificate.rank, 3u);
}

TEST(Conjecture, ThreePinsThirteenVertices) {
  auto g = random_graph<R>(13, 0.5, RationalRates{5, 4}, 13);
  std::vector<PairId> pins;
  std::vector<bool> used(13, false);
  for (PairId q = 0; q < g.pair_count() && pins.size() < 3; ++q) {
    const auto& pr = g.pair(q);
    if (used[pr.u] || used[pr.v]) continue;
    pins.push_back(q);
    if (!stays_connected_without(g, std::span<const PairId>(pins))) {
      pins.pop_back();
      continue;
    }
    used[pr.u] = used[pr.v] = true;
  }
  ASSERT_EQ(pins.size(), 3u);
  const auto rep = conjecture_test(g, std::span<const PairId>(pins), Backend::determinant);
  EXPECT_EQ(rep.vectors.front().size(), 27u);
  EXPECT_EQ(rep.sigmas.size(), sigma_candidate_count(3));
  EXPECT_TRUE(rep.all_orthogonal);
  EXPECT_EQ(rep.certificate.rank, 4u);
}
