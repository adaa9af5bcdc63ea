#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace treesurgeon;

namespace {

using R = Rational;

Digraph<R> without_pair(const Digraph<R>& g, PairId q) {
  auto pairs = g.pairs();
  pairs.erase(pairs.begin() + q);
  return Digraph<R>(g.labels(), pairs);
}

std::vector<R> oracle_currents(const Digraph<R>& g) {
  const auto p = oracle::stationary(g);
  std::vector<R> j;
  for (const auto& pr : g.pairs()) j.push_back(pr.forward * p[pr.u] - pr.backward * p[pr.v]);
  return j;
}

std::vector<std::pair<R, R>> random_samples(std::size_t k, std::uint64_t seed) {
  CounterRng rng(seed, 17);
  std::vector<std::pair<R, R>> out;
  for (std::size_t i = 0; i < k; ++i)
    out.emplace_back(draw_rate<R>(RationalRates{12, 5}, rng), draw_rate<R>(RationalRates{12, 5}, rng));
  return out;
}

// a non-bridge reversible pair, scanning from the end
PairId input_pair(const Digraph<R>& g) {
  for (PairId q = PairId(g.pair_count()); q-- > 0;) {
    const PairId pin[] = {q};
    if (stays_connected_without(g, std::span<const PairId>(pin))) return q;
  }
  throw std::logic_error("every pair is a bridge");
}

}  // namespace

TEST(Stationary, TwoState) {
  const auto p = stationary(fixtures::two_state(2, 1));
  EXPECT_EQ(p.p, (std::vector<R>{R(1, 3), R(2, 3)}));
  const auto j = currents(fixtures::two_state(2, 1));
  EXPECT_EQ(j[0], R(0));
}

TEST(Stationary, DetailedBalanceClosedForm) {
  auto g = std::get<Digraph<R>>(load_graph(TREESURGEON_DATA "/detailed_balance.txt"));
  ASSERT_TRUE(is_detailed_balanced(g));
  // p_v / p_u = r(u->v) / r(v->u) along a spanning path 0-1-2-3
  std::vector<R> w{R(1)};
  for (VertexId v = 1; v < 4; ++v) {
    const auto e = *g.find_edge(g.vertex(std::to_string(v - 1)), g.vertex(std::to_string(v)));
    w.push_back(w.back() * g.rate(e) / g.rate(e.reversed()));
  }
  R z(0);
  for (const auto& x : w) z += x;
  const auto p = stationary(g);
  for (VertexId v = 0; v < 4; ++v) EXPECT_EQ(p[g.vertex(std::to_string(v))], w[v] / z);
  for (const auto& x : currents(g).j) EXPECT_EQ(x, R(0));
}

TEST(Stationary, ThreeWaysAgree) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto g = random_graph<R>(3 + s % 5, 0.6, RationalRates{9, 7}, 70 + s);
    const auto want = oracle::stationary(g);
    EXPECT_EQ(stationary(g).p, want);
    EXPECT_EQ(stationary(g, Backend::determinant).p, want);
    EXPECT_EQ(stationary_by_kernel(g).p, want);
  }
  CounterRng rng(1, 1);
  std::array<R, 10> r;
  for (auto& x : r) x = draw_rate<R>(RationalRates{10, 10}, rng);
  auto g = fixtures::worked_example(r);
  EXPECT_EQ(stationary(g).p, stationary_by_kernel(g).p);
}

TEST(Currents, BiasedCycleAndBalance) {
  const auto j = currents(fixtures::biased_cycle(2, 1));
  for (const auto& x : j.j) EXPECT_EQ(x, R(1, 3));
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto g = random_graph<R>(4 + s % 4, 0.6, RationalRates{9, 7}, 170 + s);
    const auto c = currents(g);
    EXPECT_EQ(c.j, oracle_currents(g));
    for (const auto& b : vertex_balance(g, c)) EXPECT_EQ(b, R(0));
  }
}

TEST(DetailedBalance, Kolmogorov) {
  EXPECT_FALSE(is_detailed_balanced(fixtures::biased_cycle()));
  EXPECT_TRUE(is_detailed_balanced(fixtures::biased_cycle(1, 1)));
  auto g = fixtures::balanced_at_stall(6, 3);
  EXPECT_FALSE(is_detailed_balanced(g));
  const PairId ignore[] = {0};
  EXPECT_TRUE(is_detailed_balanced(g, std::span<const PairId>(ignore)));
}

TEST(ZVectors, Invariants) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    auto g = random_graph<R>(4 + s % 4, 0.7, RationalRates{9, 7}, 300 + s);
    const PairId in = input_pair(g);
    const auto zv = z_vectors(g, in);
    const auto& z1 = zv.z[in];
    EXPECT_EQ(z1[0], R(0));
    EXPECT_GT(zv.z0[0], 0);
    EXPECT_GT(zv.z0[1], 0);
    EXPECT_GT(zv.z0[2], 0);
    EXPECT_GT(z1[1], 0);
    EXPECT_LT(z1[2], 0);
    const auto j = currents(g);
    const auto& pr = g.pair(in);
    for (PairId e = 0; e < g.pair_count(); ++e) {
      EXPECT_EQ(zv.current(e, pr.forward, pr.backward), j[e]);
      EXPECT_EQ(det3(zv.z0, z1, zv.z[e]), R(0));
      EXPECT_EQ(zv.left_null[0] * zv.z[e][0] + zv.left_null[1] * zv.z[e][1] + zv.left_null[2] * zv.z[e][2], R(0));
    }
  }
}

TEST(ZVectors, RationalFunctionMatchesDirectSolve) {
  auto g = fixtures::worked_example();
  const auto zv = z_vectors(g, 0);
  for (const auto& [rp, rm] : random_samples(5, 9)) {
    const auto h = g.with_pair_rates(0, rp, rm);
    const auto j = oracle_currents(h);
    for (PairId e = 0; e < g.pair_count(); ++e) EXPECT_EQ(zv.current(e, rp, rm), j[e]);
  }
  auto path = oracle::exact("a b 1 1\nb c 1 1\n");
  EXPECT_THROW(z_vectors(path, 0), Error);
}

TEST(Lambda, InputIsIdentity) {
  auto g = fixtures::worked_example();
  const auto lc = lambda_coefficients(g, 0);
  EXPECT_TRUE(lc.consistent);
  EXPECT_EQ(lc.coefficients[0], (std::vector<R>{0, 1}));
}

TEST(Lambda, OffsetIsCurrentWithoutInput) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    auto g = random_graph<R>(4 + s % 4, 0.7, RationalRates{9, 7}, 400 + s);
    const PairId in = input_pair(g);
    const auto lc = lambda_coefficients(g, in);
    const auto h = without_pair(g, in);
    const auto j0 = oracle_currents(h);
    for (PairId e = 0, k = 0; e < g.pair_count(); ++e) {
      if (e == in) continue;
      EXPECT_EQ(lc.coefficients[e][0], j0[k++]);
    }
  }
}

TEST(Lambda, OffsetVanishesWhenBalancedAtStall) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto g = fixtures::balanced_at_stall(4 + s % 4, s);
    const auto lc = lambda_coefficients(g, 0);
    for (const auto& c : lc.coefficients) EXPECT_EQ(c[0], R(0));
    const auto j = currents(g);
    EXPECT_NE(j[0], R(0));
  }
}

TEST(Lambda, IndependentOfInputRates) {
  auto g = random_graph<R>(6, 0.8, RationalRates{9, 7}, 31);
  const PairId in = input_pair(g);
  const auto base = lambda_coefficients(g, in);
  for (const auto& [rp, rm] : random_samples(3, 4))
    EXPECT_EQ(lambda_coefficients(g.with_pair_rates(in, rp, rm), in).coefficients, base.coefficients);
}

TEST(Lambda, VerifiedFromScratch) {
  auto g = fixtures::worked_example();
  const auto lc = lambda_coefficients(g, 0);
  auto samples = random_samples(5, 12);
  for (int k = 1; k <= 3; ++k) samples.emplace_back(R(k, 2), R(k, 2));
  const auto rep = verify_linearity(g, 0, lc, samples);
  EXPECT_TRUE(rep.exact_zero);
  EXPECT_EQ(rep.samples, 8u);

  auto f = to_float(random_graph<R>(7, 0.8, RationalRates{9, 7}, 88));
  const auto lf = lambda_coefficients(f, 0);
  std::vector<std::pair<double, double>> fs{{0.3, 2.0}, {1.7, 0.4}, {5.0, 5.0}};
  const auto rf = verify_linearity(f, 0, lf, fs);
  EXPECT_TRUE(rf.within_tolerance);
  EXPECT_LT(rf.max_rel, 1e-9);
  EXPECT_THROW(verify_linearity(g, 0, lc, {{R(0), R(1)}}), Error);
}

TEST(Lambda, QuadraticFree) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto g = random_graph<R>(5 + s % 3, 0.7, RationalRates{9, 7}, 600 + s);
    const auto q = check_quadratic_terms(g, input_pair(g));
    EXPECT_TRUE(q.quadratic_free);
    for (const auto& v : q.mixed) EXPECT_EQ(v, R(0));
  }
}

TEST(WVectors, MatchMobiusOracle) {
  const auto layout = status_layout(2);
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto g = random_graph<R>(5 + s % 2, 0.8, RationalRates{6, 5}, 700 + s);
    const PairId p1 = 0, p2 = PairId(g.pair_count() - 1);
    const PairId pins[] = {p1, p2};
    if (!stays_connected_without(g, std::span<const PairId>(pins))) continue;
    const auto wv = w_vectors(g, std::span<const PairId>(pins));
    EXPECT_EQ(wv.quadratic_terms, 0u);
    const auto coeff = oracle::mobius_w(g, p1, p2);
    const std::size_t m = g.pair_count();
    std::vector<bool> in_layout(16, false);
    for (std::size_t i = 0; i < 9; ++i) {
      const auto mask = oracle::status_mask(layout[i]);
      in_layout[mask] = true;
      EXPECT_EQ(wv.w0[i], coeff[m][mask]);
      for (PairId e = 0; e < m; ++e) EXPECT_EQ(wv.w[e][i], coeff[e][mask]) << "pair " << e << " status " << i;
    }
    for (std::size_t mask = 0; mask < 16; ++mask)
      if (!in_layout[mask])
        for (std::size_t k = 0; k <= m; ++k) EXPECT_EQ(coeff[k][mask], R(0));
  }
}

TEST(Mu, CompleteGraph) {
  auto g = complete_graph<R>(7, RationalRates{9, 7}, 77);
  const PairId p1 = *g.find_pair(0, 1), p2 = *g.find_pair(2, 3);
  const auto lc = mu_coefficients(g, p1, p2);
  EXPECT_TRUE(lc.consistent);
  EXPECT_EQ(lc.certificate.rank, 3u);
  EXPECT_EQ(lc.rows_used.size(), 3u);
  EXPECT_EQ(lc.coefficients[p1], (std::vector<R>{0, 1, 0}));
  EXPECT_EQ(lc.coefficients[p2], (std::vector<R>{0, 0, 1}));
  std::vector<PinnedRates<R>> samples;
  for (const auto& [a, b] : random_samples(4, 21)) samples.push_back({a, b, b, a});
  const auto rep = verify_multi_linearity(g, lc, samples);
  EXPECT_TRUE(rep.exact_zero);
  const auto moved = g.with_pair_rates(p1, R(7, 3), R(1, 9)).with_pair_rates(p2, R(4), R(2, 5));
  EXPECT_EQ(mu_coefficients(moved, p1, p2).coefficients, lc.coefficients);
}

TEST(Mu, RankDeficientCarriesCertificate) {
  WVectors<R> wv;
  wv.pinned = {0, 1};
  wv.w0 = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  wv.w = {{0, 1, 0, 1, 0, 1, 0, 1, 0}, {0, 1, 0, 1, 0, 1, 0, 1, 0}, {1, 1, 1, 1, 1, 1, 1, 1, 1}};
  try {
    mu_coefficients(wv);
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.code(), ErrorCode::rank_deficient);
    EXPECT_EQ(e.certificate().rank, 2u);
  }
}
