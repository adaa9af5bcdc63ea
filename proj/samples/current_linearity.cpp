// Stationary currents of a random network respond affinely to the current
// through one input pair: j_e = lambda0_e + lambda1_e j_1.

#include "treesurgeon/treesurgeon.hpp"

#include <iostream>

using namespace treesurgeon;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
  const auto g = random_graph<Rational>(6, 0.7, RationalRates{9, 7}, seed);
  const PairId input = 0;
  if (!stays_connected_without(g, std::span<const PairId>(&input, 1))) {
    std::cerr << "pair 0 is a bridge for this seed\n";
    return 1;
  }

  const auto lc = lambda_coefficients(g, input);
  for (PairId e = 0; e < g.pair_count(); ++e)
    std::cout << g.edge_name(g.edge(e, Sign::plus)) << "  lambda0 = " << lc.coefficients[e][0]
              << "  lambda1 = " << lc.coefficients[e][1] << '\n';

  // drive the input pair at new rates and compare with a fresh solve
  const auto h = g.with_pair_rates(input, Rational(7, 2), Rational(1, 3));
  const auto j = currents(h);
  for (PairId e = 0; e < g.pair_count(); ++e) {
    const auto predicted = lc.coefficients[e][0] + lc.coefficients[e][1] * j[input];
    std::cout << "pair " << e << ": " << j[e] << (j[e] == predicted ? " == prediction\n" : " != prediction\n");
  }
}
