#ifndef CASCADE_ENGINE_HPP
#define CASCADE_ENGINE_HPP

#include <vector>

#include "cascade/network.hpp"

namespace cascade {

/// Hook a deterministic model plugs into the synchronous engine.
class FragilityRule {
 public:
  virtual ~FragilityRule() = default;

  /// Fragility at t = 0 given the initial state.
  virtual Eigen::ArrayXd initial(const Network& net, const NodeState& init) const = 0;

  /// Fragility at t + 1, given the full state at t and the failure flags at t + 1.
  virtual Eigen::ArrayXd advance(const Network& net, const NodeState& current,
                                 const FailureMask& next_failed) const = 0;
};

struct CascadeTrace {
  std::vector<NodeState> states;
  std::vector<double> x_series;
  Index terminated_at = 0;
  bool converged = false;

  const NodeState& final_state() const { return states.back(); }
  double final_fraction() const { return x_series.back(); }
};

/// Synchronous cascade: at every step all nodes are thresholded against
/// their time-t fragility, then the rule computes the new fragility. Stops
/// when no flag changes or after `max_steps` update evaluations
/// (`max_steps <= 0` means n + 1). A run that hits the cap is returned
/// with `converged == false`.
CascadeTrace run_cascade(const FragilityRule& rule, const Network& net, const NodeState& init,
                         Index max_steps = 0);

}  // namespace cascade

#endif  // CASCADE_ENGINE_HPP
