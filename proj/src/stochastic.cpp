#include "cascade/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cascade {

namespace {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

__extension__ using Wide = unsigned __int128;

// Multiply-shift reduction of a 64-bit draw onto [0, n).
Index uniform_index(Rng& rng, Index n) {
  const Wide wide = static_cast<Wide>(rng()) * static_cast<Wide>(n);
  return static_cast<Index>(wide >> 64);
}

double scaled(double beta, double z) {
  if (std::isinf(beta)) return z > 0.0 ? beta : (z < 0.0 ? -beta : 0.0);
  return beta * z;
}

double sigmoid(double a) {
  if (std::isnan(a)) return 0.5;
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

Rng replica_rng(std::uint64_t seed, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  return Rng(seq);
}

void TransitionParams::validate() const {
  if (!(beta >= 0.0) || !(beta_prime >= 0.0)) throw std::invalid_argument("beta and beta' must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(gamma_prime >= 0.0 && gamma_prime <= 1.0))
    throw std::invalid_argument("gamma and gamma' must lie in [0, 1]");
}

double logit_prob(double z, double z_prime, double beta, double beta_prime) {
  return sigmoid(scaled(beta, z) + scaled(beta_prime, z_prime));
}

TransitionProbs transition_probs(double z, double z_prime, const TransitionParams& p) {
  const double a = scaled(p.beta, z) + scaled(p.beta_prime, z_prime);
  return {p.gamma * sigmoid(a), p.gamma_prime * sigmoid(-a)};
}

NodeState stochastic_step(const Network& net, const NodeState& state, const TransitionParams& params,
                          const CascadeModel& rule, Rng& rng) {
  if (!rule.spec().depends_only_on_failures())
    throw std::invalid_argument("stochastic updates need a fragility rule that depends only on s");
  const Index n = net.size();
  state.check_consistent(n);
  const Eigen::ArrayXd& recovery = state.recovery_threshold();
  NodeState next = state;
  for (Index i = 0; i < n; ++i) {
    const auto pr = transition_probs(state.phi(i) - state.theta(i), state.phi(i) - recovery(i), params);
    const double u = uniform01(rng);
    next.failed(i) = state.failed(i) ? !(u < pr.recover) : (u < pr.fail);
  }
  next.phi = rule.fragility_for(net, next);
  return next;
}

std::vector<NodeState> stochastic_run(const Network& net, const NodeState& init,
                                      const TransitionParams& params, const CascadeModel& rule,
                                      Index steps, Rng& rng) {
  std::vector<NodeState> states;
  states.reserve(static_cast<std::size_t>(steps + 1));
  NodeState current = init;
  current.phi = rule.fragility_for(net, init);
  states.push_back(current);
  for (Index t = 0; t < steps; ++t) states.push_back(stochastic_step(net, states.back(), params, rule, rng));
  return states;
}

double macro_step(double X, const DiscretizedDensity& pz, const TransitionParams& params) {
  const double total = pz.total_mass();
  if (!(total > 0.0)) throw std::invalid_argument("net-fragility density has no mass");
  const double shift = params.theta - params.theta_prime;
  double fail = 0.0;
  double recover = 0.0;
  for (Index b = 0; b < pz.bins(); ++b) {
    const double w = pz.mass()(b);
    if (w == 0.0) continue;
    const double z = pz.center(b);
    const auto pr = transition_probs(z, z + shift, params);
    fail += w * pr.fail;
    recover += w * pr.recover;
  }
  fail /= total;
  recover /= total;
  return std::clamp(X + (1.0 - X) * fail - X * recover, 0.0, 1.0);
}

double macro_step(double X, double z, const TransitionParams& params) {
  const auto pr = transition_probs(z, z + params.theta - params.theta_prime, params);
  return std::clamp(X + (1.0 - X) * pr.fail - X * pr.recover, 0.0, 1.0);
}

double vm_macro_step(double X, const VmResponse& response) {
  if (X <= 0.0 || X >= 1.0) return std::clamp(X, 0.0, 1.0);
  return std::clamp(X + (1.0 - X) * X * (response.f1(X) - response.f2(X)), 0.0, 1.0);
}

void SisParams::validate() const {
  check_probability(nu, "nu");
  check_probability(delta, "delta");
  if (k < 1) throw std::invalid_argument("contact degree k must be >= 1");
}

double sis_macro_step(double X, const SisParams& p) {
  const double k = static_cast<double>(p.k);
  return std::clamp(X + p.nu * k * X * (1.0 - X) - p.delta * X, 0.0, 1.0);
}

std::vector<double> iterate_map(const std::function<double(double)>& step, double x0, Index steps) {
  std::vector<double> xs{x0};
  for (Index t = 0; t < steps; ++t) xs.push_back(step(xs.back()));
  return xs;
}

VoterOutcome voter_model_run(const Network& net, FailureMask state, Index max_time, Rng& rng) {
  const Index n = net.size();
  if (state.size() != n) throw std::invalid_argument("voter state size mismatch");
  Index failed = state.count();
  VoterOutcome out;
  auto settled = [&] { return failed == 0 || failed == n; };
  while (!settled() && out.time < max_time) {
    for (Index micro = 0; micro < n && !settled(); ++micro) {
      const Index i = uniform_index(rng, n);
      const auto nbrs = net.in_neighbors(i);
      if (nbrs.empty()) continue;
      const Index j = nbrs[static_cast<std::size_t>(uniform_index(rng, static_cast<Index>(nbrs.size())))];
      if (state(i) != state(j)) {
        failed += state(j) ? 1 : -1;
        state(i) = state(j);
      }
    }
    ++out.time;
  }
  out.consensus = settled();
  out.final_fraction = n ? static_cast<double>(failed) / static_cast<double>(n) : 0.0;
  return out;
}

std::vector<double> sis_micro_run(const Network& net, FailureMask state, const SisParams& p, Index steps,
                                  Rng& rng) {
  p.validate();
  const Index n = net.size();
  if (state.size() != n) throw std::invalid_argument("SIS state size mismatch");
  std::vector<double> xs{fraction_failed(state)};
  for (Index t = 0; t < steps; ++t) {
    FailureMask next = state;
    for (Index i = 0; i < n; ++i) {
      const double u = uniform01(rng);
      if (state(i)) {
        next(i) = !(u < p.delta);
      } else {
        Index infected = 0;
        for (Index j : net.in_neighbors(i)) infected += state(j) ? 1 : 0;
        next(i) = u < std::min(1.0, p.nu * static_cast<double>(infected));
      }
    }
    state = std::move(next);
    xs.push_back(fraction_failed(state));
  }
  return xs;
}

FailureMask random_failures(Index n, double fraction, Rng& rng) {
  check_probability(fraction, "initial fraction");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)],
                                              order[static_cast<std::size_t>(uniform_index(rng, i + 1))]);
  const auto count = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  FailureMask mask = FailureMask::Constant(n, false);
  for (Index c = 0; c < count; ++c) mask(order[static_cast<std::size_t>(c)]) = true;
  return mask;
}

}  // namespace cascade
