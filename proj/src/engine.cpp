#include "cascade/engine.hpp"

namespace cascade {

CascadeTrace run_cascade(const FragilityRule& rule, const Network& net, const NodeState& init,
                         Index max_steps) {
  const Index n = net.size();
  init.check_consistent(n);
  if (max_steps <= 0) max_steps = n + 1;

  CascadeTrace trace;
  NodeState current = init;
  current.phi = rule.initial(net, init);
  trace.states.push_back(current);
  trace.x_series.push_back(fraction_failed(current));

  for (Index step = 0; step < max_steps; ++step) {
    FailureMask next_failed = threshold_mask(current);
    if ((next_failed == current.failed).all()) {
      trace.converged = true;
      break;
    }
    NodeState next = current;
    next.phi = rule.advance(net, current, next_failed);
    next.failed = std::move(next_failed);
    trace.x_series.push_back(fraction_failed(next));
    trace.states.push_back(std::move(next));
    current = trace.states.back();
  }
  trace.terminated_at = static_cast<Index>(trace.states.size()) - 1;
  return trace;
}

}  // namespace cascade
