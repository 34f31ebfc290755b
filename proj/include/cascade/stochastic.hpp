#ifndef CASCADE_STOCHASTIC_HPP
#define CASCADE_STOCHASTIC_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "cascade/meanfield.hpp"
#include "cascade/models.hpp"
#include "cascade/network.hpp"

namespace cascade {

using Rng = std::mt19937_64;

/// Independent stream for replica `replica` of a run seeded with `seed`.
Rng replica_rng(std::uint64_t seed, std::uint64_t replica);

struct TransitionParams {
  double beta = 1.0;
  double beta_prime = 1.0;
  double gamma = 1.0;
  double gamma_prime = 1.0;
  double theta = 0.0;        // homogeneous thresholds for the macroscopic maps
  double theta_prime = 0.0;

  void validate() const;
};

/// exp(beta z) / (exp(beta z) + exp(-beta' z')), evaluated without
/// overflow. Infinite betas give the Heaviside limit.
double logit_prob(double z, double z_prime, double beta, double beta_prime);
inline double logit_prob(double z, double z_prime, const TransitionParams& p) {
  return logit_prob(z, z_prime, p.beta, p.beta_prime);
}

struct TransitionProbs {
  double fail = 0.0;     // p(1|0; z)
  double recover = 0.0;  // p(0|1; z')
};

TransitionProbs transition_probs(double z, double z_prime, const TransitionParams& p);

/// One synchronous stochastic update. Every healthy node fails with
/// p(1|0; z_i) and every failed node recovers with p(0|1; z'_i), where
/// z = phi - theta and z' = phi - theta'. The returned state carries the
/// new flags and the fragility the rule assigns to them.
NodeState stochastic_step(const Network& net, const NodeState& state, const TransitionParams& params,
                          const CascadeModel& rule, Rng& rng);

/// Runs `steps` stochastic updates from `init` (fragility recomputed from
/// the initial flags). Returns the state after every step, index 0 = start.
std::vector<NodeState> stochastic_run(const Network& net, const NodeState& init,
                                      const TransitionParams& params, const CascadeModel& rule,
                                      Index steps, Rng& rng);

/// Expected-fraction update with heterogeneous net fragility:
/// X' = X + (1 - X) E[p(1|0; z)] - X E[p(0|1; z')], z' = z + theta - theta'.
/// `pz` is evaluated at bin centres and should carry unit mass.
double macro_step(double X, const DiscretizedDensity& pz, const TransitionParams& params);

/// Homogeneous threshold: the density is a delta at z.
double macro_step(double X, double z, const TransitionParams& params);

/// Frequency-dependent voter response: p(1|0) = f F1(f), p(0|1) = (1 - f) F2(f).
struct VmResponse {
  std::function<double(double)> f1 = [](double) { return 1.0; };
  std::function<double(double)> f2 = [](double) { return 1.0; };

  static VmResponse linear() { return {}; }
};

/// X' = X + (1 - X) X [F1(X) - F2(X)], clamped to [0, 1].
double vm_macro_step(double X, const VmResponse& response);

struct SisParams {
  double nu = 0.0;
  double delta = 0.0;
  int k = 1;

  void validate() const;
  double critical_nu() const { return delta / static_cast<double>(k); }
};

/// X' = X + nu k X (1 - X) - delta X, clamped to [0, 1].
double sis_macro_step(double X, const SisParams& p);

/// Iterates a macroscopic map for `steps` steps; element 0 is x0.
std::vector<double> iterate_map(const std::function<double(double)>& step, double x0, Index steps);

struct VoterOutcome {
  bool consensus = false;
  double final_fraction = 0.0;
  Index time = 0;  // unit times elapsed (n micro updates each)
};

/// Classic voter model: n random single-node updates per unit time; the
/// chosen node copies a uniformly random in-neighbor. Stops at consensus
/// or after `max_time` units.
VoterOutcome voter_model_run(const Network& net, FailureMask state, Index max_time, Rng& rng);

/// Microscopic SIS: healthy node fails with min(1, nu * failed in-neighbors),
/// failed node recovers with delta. Returns X after every step.
std::vector<double> sis_micro_run(const Network& net, FailureMask state, const SisParams& p, Index steps,
                                  Rng& rng);

/// Mask with round(fraction * n) failed nodes, chosen uniformly.
FailureMask random_failures(Index n, double fraction, Rng& rng);

}  // namespace cascade

#endif  // CASCADE_STOCHASTIC_HPP
