#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace treesurgeon;

namespace {

using R = Rational;

// the oracle constraint of one status, built independently of status_constraint
std::pair<std::vector<OrientedEdge>, std::vector<OrientedEdge>> oracle_status(const Digraph<R>& g,
                                                                              std::span<const PairId> pinned,
                                                                              const Status& s) {
  std::vector<OrientedEdge> avoid, require;
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    const auto p = g.edge(pinned[i], Sign::plus), m = g.edge(pinned[i], Sign::minus);
    switch (s[i]) {
      case PinStatus::none: avoid.insert(avoid.end(), {p, m}); break;
      case PinStatus::plus: require.push_back(p); avoid.push_back(m); break;
      case PinStatus::minus: require.push_back(m); avoid.push_back(p); break;
    }
  }
  return {avoid, require};
}

std::vector<R> frozen(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(TreePoly, SmallKnownValues) {
  EXPECT_EQ(tree_poly(fixtures::triangle(), 0).value, R(3));
  for (VertexId x = 0; x < 5; ++x) EXPECT_EQ(tree_poly_det(fixtures::complete_unit(5), x).value, R(125));
  auto g = fixtures::worked_example();
  EXPECT_EQ(tree_poly(g, g.vertex("a")).value, R(8));
  EXPECT_EQ(tree_poly(g, g.vertex("c"), TreeConstraint::requiring({parse_edge(g, "c>b")})).value, R(0));
  EXPECT_EQ(tree_poly_det(g, g.vertex("c"), TreeConstraint::requiring({parse_edge(g, "c>b")})).value, R(0));
}

TEST(TreePoly, BackendsMatchOracleOnRandomGraphs) {
  CounterRng rng(3, 3);
  for (std::uint64_t s = 0; s < 40; ++s) {
    auto g = random_graph<R>(3 + s % 4, 0.6, RationalRates{7, 5}, 500 + s);
    for (int k = 0; k < 3; ++k) {
      std::vector<OrientedEdge> avoid, require;
      for (const auto& e : g.edges()) {
        const double u = rng.uniform01();
        if (u < 0.1) avoid.push_back(e);
        else if (u < 0.2) require.push_back(e);
      }
      const TreeConstraint c(avoid, require);
      for (VertexId x = 0; x < g.vertex_count(); ++x) {
        const R want = oracle::tree_sum(g, x, c.avoid(), c.require());
        EXPECT_EQ(tree_poly_enum(g, x, c).value, want);
        EXPECT_EQ(tree_poly_det(g, x, c).value, want);
      }
    }
  }
}

TEST(TreePoly, FloatBackendsAgree) {
  auto g = random_graph<double>(7, 0.7, UniformRates{0.5, 3.0}, 8);
  for (VertexId x = 0; x < g.vertex_count(); ++x)
    EXPECT_NEAR(tree_poly_enum(g, x).value / tree_poly_det(g, x).value, 1.0, 1e-12);
}

TEST(TreePoly, BothOrientationsRequiredIsZero) {
  auto g = fixtures::complete_unit(5);
  const auto e = g.edge(3, Sign::plus);
  const auto both = TreeConstraint::requiring({e, e.reversed()});
  for (VertexId x = 0; x < 5; ++x) {
    EXPECT_EQ(tree_poly_enum(g, x, both).value, R(0));
    EXPECT_EQ(tree_poly_det(g, x, both).value, R(0));
  }
}

TEST(TreePoly, FirstOrderAndThreeWaySplit) {
  auto g = random_graph<R>(6, 0.8, RationalRates{9, 4}, 21);
  for (VertexId x = 0; x < g.vertex_count(); ++x) {
    const R total = tree_poly(g, x).value;
    for (const auto& e : g.edges())
      EXPECT_EQ(tree_poly(g, x, TreeConstraint::avoiding({e})).value + tree_poly(g, x, TreeConstraint::requiring({e})).value,
                total);
    const auto p = g.edge(0, Sign::plus), m = p.reversed();
    EXPECT_EQ(tree_poly(g, x, TreeConstraint::avoiding({p, m})).value + tree_poly(g, x, TreeConstraint({m}, {p})).value +
                  tree_poly(g, x, TreeConstraint({p}, {m})).value,
              total);
  }
}

TEST(RescaledPoly, Values) {
  auto two = fixtures::two_state(3, 7);
  const auto plus = two.edge(0, Sign::plus);
  EXPECT_EQ(rescaled_poly(two, plus.target, TreeConstraint::requiring({plus})).value, R(1));

  auto g = fixtures::worked_example({2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
  const auto ab = parse_edge(g, "a>b");
  const VertexId b = g.vertex("b");
  const TreeConstraint c({ab.reversed()}, {ab});
  auto rate = oracle::rates_of(g);
  rate[edge_index(ab)] = 1;
  const R want = oracle::tree_sum(g, b, rate, c.avoid(), c.require());
  EXPECT_EQ(rescaled_poly(g, b, c).value, want);
  EXPECT_EQ(rescaled_poly(g, b, c, Backend::determinant).value, want);
  EXPECT_EQ(rescaled_poly(g, b).value, tree_poly(g, b).value);
}

TEST(RescaledPoly, IndependentOfConditionedRates) {
  auto g = random_graph<R>(6, 0.9, RationalRates{9, 4}, 77);
  const auto p = g.edge(1, Sign::plus);
  const TreeConstraint c({p.reversed()}, {p});
  auto h = g.with_pair_rates(1, R(123, 7), R(5, 11));
  for (VertexId x = 0; x < g.vertex_count(); ++x)
    EXPECT_EQ(rescaled_poly(g, x, c).value, rescaled_poly(h, x, c).value);
}

TEST(RescaledPoly, ZeroRequiredRate) {
  auto g = oracle::exact("0 1 1 0\n1 2 1 1\n2 0 1 1\n");
  try {
    rescaled_poly(g, 0, TreeConstraint::requiring({g.edge(0, Sign::minus)}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_required_rate);
  }
}

TEST(Contraction, Values) {
  EXPECT_EQ(contracted_root_poly(fixtures::two_state(2, 3), 0).value, R(1));
  EXPECT_EQ(contracted_root_poly(fixtures::triangle(), 0).value, R(2));
  auto one_way = oracle::exact("0 1 1 0\n1 2 1 1\n2 0 1 1\n");
  try {
    contracted_root_poly(one_way, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_reverse_edge);
  }
}

TEST(Contraction, DoubleIdentity) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto g = random_graph<R>(3 + s % 4, 0.7, RationalRates{6, 5}, 900 + s);
    for (PairId q = 0; q < g.pair_count(); ++q) {
      const auto p = g.edge(q, Sign::plus), m = p.reversed();
      const R rp = g.rate(p), rm = g.rate(m);
      const R lhs = rp * tree_poly(g, p.source, TreeConstraint::requiring({m})).value;
      const R mid = rm * tree_poly(g, m.source, TreeConstraint::requiring({p})).value;
      const R rhs = rp * rm * contracted_root_poly(g, q).value;
      EXPECT_EQ(lhs, mid);
      EXPECT_EQ(lhs, rhs);
    }
  }
}

TEST(Status, Layout) {
  std::vector<std::string> two;
  for (const auto& s : status_layout(2)) two.push_back(status_string(s));
  EXPECT_EQ(two, (std::vector<std::string>{"00", "+0", "-0", "0+", "0-", "++", "-+", "+-", "--"}));
  std::vector<std::string> one;
  for (const auto& s : status_layout(1)) one.push_back(status_string(s));
  EXPECT_EQ(one, (std::vector<std::string>{"0", "+", "-"}));
  EXPECT_EQ(status_layout(3).size(), 27u);
  EXPECT_EQ(status_string(parse_status("+-0")), "+-0");
  EXPECT_THROW(parse_status("+x"), Error);
}

TEST(Decompose, WorkedExampleFrozen) {
  auto g = fixtures::worked_example();
  const PairId pin[] = {0};
  // vertex order b, a, c, d; entries (avoid both, through b->a, through a->b)
  const std::vector<std::vector<R>> want{frozen({3, 0, 5}), frozen({3, 5, 0}), frozen({3, 1, 4}), frozen({3, 2, 3})};
  for (VertexId x = 0; x < 4; ++x) {
    for (Backend b : {Backend::enumeration, Backend::determinant}) {
      const auto tv = decompose(g, x, pin, {}, b);
      EXPECT_EQ(tv.values, want[x]) << g.label(x) << " " << to_string(b);
      EXPECT_EQ(tv.total(), R(8));
    }
    // independent check of the frozen numbers
    for (std::size_t k = 0; k < 3; ++k) {
      auto [avoid, require] = oracle_status(g, pin, status_layout(1)[k]);
      EXPECT_EQ(oracle::tree_sum(g, x, avoid, require), want[x][k]);
    }
  }
  EXPECT_EQ(contracted_root_poly(g, 0).value, R(5));
}

TEST(Decompose, TwoPinsMatchOracle) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto g = random_graph<R>(5 + s % 2, 0.8, RationalRates{5, 4}, 1200 + s);
    const PairId pins[] = {0, PairId(g.pair_count() - 1)};
    const auto layout = status_layout(2);
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
      const auto tv = decompose(g, x, pins);
      ASSERT_EQ(tv.size(), 9u);
      EXPECT_EQ(tv.total(), oracle::tree_sum(g, x));
      for (std::size_t k = 0; k < 9; ++k) {
        auto [avoid, require] = oracle_status(g, pins, layout[k]);
        EXPECT_EQ(tv[k], oracle::tree_sum(g, x, avoid, require));
      }
      EXPECT_EQ(decompose(g, x, pins, {}, Backend::determinant).values, tv.values);
    }
  }
}

TEST(Decompose, NinePinsSumOnK9) {
  auto g = complete_graph<R>(9, RationalRates{5, 3}, 4);
  const PairId pins[] = {0, 35};
  for (VertexId x = 0; x < 9; x += 4) {
    const auto tv = decompose(g, x, pins, {}, Backend::determinant);
    EXPECT_EQ(tv.size(), 9u);
    EXPECT_EQ(tv.total(), tree_poly_det(g, x).value);
  }
}

TEST(Decompose, Errors) {
  auto g = fixtures::worked_example();
  const PairId dup[] = {1, 1};
  EXPECT_THROW(decompose(g, 0, dup), Error);
  const PairId bad[] = {17};
  EXPECT_THROW(decompose(g, 0, bad), Error);
}

TEST(BackendAudit, CountsComparisons) {
  auto& audit = backend_audit();
  audit.reset();
  audit.enabled = true;
  auto g = random_graph<R>(6, 0.8, RationalRates{5, 4}, 5);
  for (VertexId x = 0; x < g.vertex_count(); ++x) tree_poly(g, x);
  audit.enabled = false;
  EXPECT_GE(audit.compared.load(), g.vertex_count());
  EXPECT_EQ(audit.mismatched.load(), 0u);
  EXPECT_EQ(resolve_backend(Backend::automatic, 8), Backend::enumeration);
  EXPECT_EQ(resolve_backend(Backend::automatic, 9), Backend::determinant);
}
