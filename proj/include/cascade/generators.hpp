#ifndef CASCADE_GENERATORS_HPP
#define CASCADE_GENERATORS_HPP

#include <random>
#include <vector>

#include "cascade/network.hpp"

namespace cascade {

// Small undirected test topologies with unit weights.

Network path_graph(Index n);
Network ring_graph(Index n);
Network star_graph(Index leaves);  // node 0 is the centre
Network complete_graph(Index n);

/// Circulant graph: i is linked to i +/- d for every offset d. Regular with
/// degree 2 * offsets.size() when all offsets are distinct and below n / 2.
Network circulant_graph(Index n, const std::vector<Index>& offsets);

/// G(n, p); `directed` draws each ordered pair independently.
Network erdos_renyi(Index n, double p, bool directed, std::mt19937_64& rng);

}  // namespace cascade

#endif  // CASCADE_GENERATORS_HPP
