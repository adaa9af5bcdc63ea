// Tree vectors of the four-vertex example for one pinned pair, the plane they
// span, and the sigma normal that certifies it.

#include "treesurgeon/treesurgeon.hpp"

#include <iostream>

using namespace treesurgeon;

int main() {
  const auto g = fixtures::worked_example();
  const PairId pin = parse_pair(g, "b-a");

  const auto rep = check_coplanarity(g, pin);
  std::cout << plane_data_csv(g, rep);
  std::cout << "rank " << rep.certificate.rank << (rep.all_orthogonal ? ", sigma annihilates every root\n" : "\n");

  // same statement restricted to trees through c -> b
  const auto through = TreeConstraint::requiring({parse_edge(g, "c>b")});
  const auto sigma = sigma_vector(g, pin, through);
  const PairId pins[] = {pin};
  for (VertexId x = 0; x < g.vertex_count(); ++x)
    std::cout << g.label(x) << ": sigma . tau = " << dot(sigma.normal(), decompose(g, x, pins, through)) << '\n';
}
