#ifndef CASCADE_NETWORK_HPP
#define CASCADE_NETWORK_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cascade {

using Index = Eigen::Index;
using FailureMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct Edge {
  Index from = 0;
  Index to = 0;
  double weight = 1.0;
};

class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Directed weighted graph. a(i, j) > 0 means an edge i -> j, so j is an
/// out-neighbor of i and i an in-neighbor of j. Immutable once built.
class Network {
 public:
  Network() = default;

  /// Throws NetworkError on out-of-range indices, duplicate edges,
  /// self-loops and non-positive weights. With `undirected` every edge is
  /// mirrored, so listing both (i, j) and (j, i) is a duplicate.
  static Network from_edges(std::span<const Edge> edges, Index n, bool undirected);

  Index size() const { return adjacency_.rows(); }
  bool undirected() const { return undirected_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  double weight(Index i, Index j) const { return adjacency_(i, j); }

  std::span<const Index> in_neighbors(Index i) const { return in_[static_cast<std::size_t>(i)]; }
  std::span<const Index> out_neighbors(Index i) const { return out_[static_cast<std::size_t>(i)]; }
  Index in_degree(Index i) const { return static_cast<Index>(in_[static_cast<std::size_t>(i)].size()); }
  Index out_degree(Index i) const { return static_cast<Index>(out_[static_cast<std::size_t>(i)].size()); }

  std::vector<Edge> edges() const;

 private:
  Eigen::MatrixXd adjacency_;
  std::vector<std::vector<Index>> in_;
  std::vector<std::vector<Index>> out_;
  bool undirected_ = false;
};

/// Per-node failure flag s, fragility phi and threshold theta.
/// theta_prime is the recovery threshold used only by the stochastic layer.
struct NodeState {
  FailureMask failed;
  Eigen::ArrayXd phi;
  Eigen::ArrayXd theta;
  std::optional<Eigen::ArrayXd> theta_prime;

  static NodeState healthy(Eigen::ArrayXd phi, Eigen::ArrayXd theta);

  Index size() const { return failed.size(); }
  const Eigen::ArrayXd& recovery_threshold() const { return theta_prime ? *theta_prime : theta; }
  void check_consistent(Index n) const;
};

inline double net_fragility(const NodeState& state, Index i) { return state.phi(i) - state.theta(i); }
inline Eigen::ArrayXd net_fragility(const NodeState& state) { return state.phi - state.theta; }

/// Heaviside with Theta(0) = 1; failure is absorbing.
FailureMask threshold_mask(const NodeState& state);
NodeState apply_threshold(const NodeState& state);

double fraction_failed(const FailureMask& failed);
inline double fraction_failed(const NodeState& state) { return fraction_failed(state.failed); }

}  // namespace cascade

#endif  // CASCADE_NETWORK_HPP
