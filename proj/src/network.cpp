#include "cascade/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cascade {

namespace {

std::string edge_str(const Edge& e) {
  std::ostringstream os;
  os << "(" << e.from << ", " << e.to << ", " << e.weight << ")";
  return os.str();
}

}  // namespace

Network Network::from_edges(std::span<const Edge> edges, Index n, bool undirected) {
  if (n < 0) throw NetworkError("negative node count");
  Network net;
  net.undirected_ = undirected;
  net.adjacency_ = Eigen::MatrixXd::Zero(n, n);

  auto insert = [&](Index from, Index to, double w, const Edge& src) {
    if (net.adjacency_(from, to) > 0.0) throw NetworkError("duplicate edge " + edge_str(src));
    net.adjacency_(from, to) = w;
  };

  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
      throw NetworkError("node index out of range in edge " + edge_str(e));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw NetworkError("non-positive weight in edge " + edge_str(e));
    if (e.from == e.to) throw NetworkError("self-loop in edge " + edge_str(e));
    insert(e.from, e.to, e.weight, e);
    if (undirected) insert(e.to, e.from, e.weight, e);
  }

  const auto un = static_cast<std::size_t>(n);
  net.in_.assign(un, {});
  net.out_.assign(un, {});
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (net.adjacency_(i, j) > 0.0) {
        net.out_[static_cast<std::size_t>(i)].push_back(j);
        net.in_[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return net;
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> list;
  for (Index i = 0; i < size(); ++i)
    for (Index j : out_neighbors(i))
      if (!undirected_ || i < j) list.push_back({i, j, adjacency_(i, j)});
  return list;
}

NodeState NodeState::healthy(Eigen::ArrayXd phi, Eigen::ArrayXd theta) {
  NodeState s;
  s.failed = FailureMask::Constant(theta.size(), false);
  s.phi = std::move(phi);
  s.theta = std::move(theta);
  s.check_consistent(s.theta.size());
  return s;
}

void NodeState::check_consistent(Index n) const {
  if (failed.size() != n || phi.size() != n || theta.size() != n ||
      (theta_prime && theta_prime->size() != n)) {
    std::ostringstream os;
    os << "node state size mismatch: expected " << n << " nodes";
    throw std::invalid_argument(os.str());
  }
}

FailureMask threshold_mask(const NodeState& state) {
  return state.failed || (state.phi - state.theta >= 0.0);
}

NodeState apply_threshold(const NodeState& state) {
  NodeState next = state;
  next.failed = threshold_mask(state);
  return next;
}

double fraction_failed(const FailureMask& failed) {
  if (failed.size() == 0) return 0.0;
  return static_cast<double>(failed.count()) / static_cast<double>(failed.size());
}

}  // namespace cascade
