#include "cascade/generators.hpp"

#include <stdexcept>
#include <vector>

namespace cascade {

Network path_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Network::from_edges(edges, n, true);
}

Network ring_graph(Index n) {
  if (n < 3) throw std::invalid_argument("a ring needs at least 3 nodes");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return Network::from_edges(edges, n, true);
}

Network star_graph(Index leaves) {
  std::vector<Edge> edges;
  for (Index i = 1; i <= leaves; ++i) edges.push_back({0, i, 1.0});
  return Network::from_edges(edges, leaves + 1, true);
}

Network complete_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return Network::from_edges(edges, n, true);
}

Network circulant_graph(Index n, const std::vector<Index>& offsets) {
  std::vector<Edge> edges;
  for (Index d : offsets) {
    if (d <= 0 || 2 * d >= n) throw std::invalid_argument("circulant offsets must lie in [1, n/2)");
    for (Index i = 0; i < n; ++i) edges.push_back({i, (i + d) % n, 1.0});
  }
  return Network::from_edges(edges, n, true);
}

Network erdos_renyi(Index n, double p, bool directed, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = directed ? 0 : i + 1; j < n; ++j)
      if (i != j && coin(rng)) edges.push_back({i, j, 1.0});
  return Network::from_edges(edges, n, !directed);
}

}  // namespace cascade
