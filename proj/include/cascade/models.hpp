#ifndef CASCADE_MODELS_HPP
#define CASCADE_MODELS_HPP

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/engine.hpp"
#include "cascade/network.hpp"

namespace cascade {

enum class ModelClass { constant_load, load_redistribution, overload_redistribution };

/// inward/outward apply to constant load, llsc/llss to the two
/// redistribution classes.
enum class Variant { inward, outward, llsc, llss };

struct ModelSpec {
  ModelClass model_class = ModelClass::constant_load;
  Variant variant = Variant::inward;
  Eigen::ArrayXd phi0;

  /// Accepts `constant-in`, `constant-out`, `load-llsc`, `load-llss`,
  /// `overload-llsc`, `overload-llss`. Throws std::invalid_argument otherwise.
  static ModelSpec from_name(std::string_view name, Eigen::ArrayXd phi0 = {});

  std::string name() const;
  bool depends_only_on_failures() const { return variant != Variant::llss; }

  /// Legal class/variant pairing and, for load redistribution, phi0 >= 0.
  void validate(Index n) const;
};

const std::vector<std::string>& model_names();

/// phi_i = (failed in-neighbors) / k_in(i); zero when k_in(i) = 0.
Eigen::ArrayXd fragility_constant_inward(const Network& net, const NodeState& state);

/// phi_i = sum over failed in-neighbors j of 1 / k_out(j).
Eigen::ArrayXd fragility_constant_outward(const Network& net, const NodeState& state);

/// Failed nodes from which `i` is reachable along directed paths whose
/// interior nodes are all failed. Sorted ascending.
std::vector<Index> reach_failed_in(const Network& net, const NodeState& state, Index i);

/// Healthy nodes reachable from `j` along directed paths whose interior
/// nodes are all failed. Sorted ascending; never contains `j`.
std::vector<Index> reach_healthy_out(const Network& net, const NodeState& state, Index j);

/// Load (or overload, for class iii) of every failed node shared equally
/// over its healthy reach; failed nodes with an empty reach shed their load.
/// Healthy nodes get phi0 plus their shares, failed nodes keep state.phi.
Eigen::ArrayXd fragility_llsc(const Network& net, const NodeState& state, const ModelSpec& spec);

/// One synchronous load-shedding step: returns flags and fragility at t + 1.
NodeState step_llss(const Network& net, const NodeState& state, const ModelSpec& spec);

/// Deterministic cascade model backed by one of the six fragility rules.
class CascadeModel final : public FragilityRule {
 public:
  explicit CascadeModel(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }

  Eigen::ArrayXd initial(const Network& net, const NodeState& init) const override;
  Eigen::ArrayXd advance(const Network& net, const NodeState& current,
                         const FailureMask& next_failed) const override;

  /// Fragility as a function of the failure flags alone. Only valid when
  /// spec().depends_only_on_failures().
  Eigen::ArrayXd fragility_for(const Network& net, const NodeState& state) const;

 private:
  ModelSpec spec_;
};

/// Total fragility carried by nodes with s = 0.
double healthy_load(const NodeState& state);

}  // namespace cascade

#endif  // CASCADE_MODELS_HPP
