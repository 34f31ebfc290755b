#include "cascade/models.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace cascade {

namespace {

struct NamedModel {
  const char* name;
  ModelClass cls;
  Variant variant;
};

constexpr NamedModel kModels[] = {
    {"constant-in", ModelClass::constant_load, Variant::inward},
    {"constant-out", ModelClass::constant_load, Variant::outward},
    {"load-llsc", ModelClass::load_redistribution, Variant::llsc},
    {"load-llss", ModelClass::load_redistribution, Variant::llss},
    {"overload-llsc", ModelClass::overload_redistribution, Variant::llsc},
    {"overload-llss", ModelClass::overload_redistribution, Variant::llss},
};

// Load a failing node passes on: its whole load for class (ii), its
// overload phi - theta for class (iii).
double transferable(const ModelSpec& spec, double phi, double theta) {
  return spec.model_class == ModelClass::overload_redistribution ? phi - theta : phi;
}

}  // namespace

ModelSpec ModelSpec::from_name(std::string_view name, Eigen::ArrayXd phi0) {
  for (const auto& m : kModels) {
    if (name == m.name) {
      ModelSpec spec;
      spec.model_class = m.cls;
      spec.variant = m.variant;
      spec.phi0 = std::move(phi0);
      return spec;
    }
  }
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

std::string ModelSpec::name() const {
  for (const auto& m : kModels)
    if (m.cls == model_class && m.variant == variant) return m.name;
  return "invalid";
}

void ModelSpec::validate(Index n) const {
  const bool constant = model_class == ModelClass::constant_load;
  const bool direction = variant == Variant::inward || variant == Variant::outward;
  if (constant != direction) throw std::invalid_argument("variant not legal for model class");
  if (constant) return;
  if (phi0.size() != n)
    throw std::invalid_argument("phi0 must have one entry per node for " + name());
  if (!phi0.allFinite()) throw std::invalid_argument("phi0 must be finite");
  if (model_class == ModelClass::load_redistribution && (phi0 < 0.0).any())
    throw std::invalid_argument("load redistribution requires phi0 >= 0");
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& m : kModels) v.emplace_back(m.name);
    return v;
  }();
  return names;
}

Eigen::ArrayXd fragility_constant_inward(const Network& net, const NodeState& state) {
  const Index n = net.size();
  Eigen::ArrayXd phi = Eigen::ArrayXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index k = net.in_degree(i);
    if (k == 0) continue;
    Index failed = 0;
    for (Index j : net.in_neighbors(i)) failed += state.failed(j) ? 1 : 0;
    phi(i) = static_cast<double>(failed) / static_cast<double>(k);
  }
  return phi;
}

Eigen::ArrayXd fragility_constant_outward(const Network& net, const NodeState& state) {
  const Index n = net.size();
  Eigen::ArrayXd phi = Eigen::ArrayXd::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index j : net.in_neighbors(i))
      if (state.failed(j)) phi(i) += 1.0 / static_cast<double>(net.out_degree(j));
  return phi;
}

std::vector<Index> reach_failed_in(const Network& net, const NodeState& state, Index i) {
  std::vector<bool> seen(static_cast<std::size_t>(net.size()), false);
  std::deque<Index> queue{i};
  std::vector<Index> result;
  seen[static_cast<std::size_t>(i)] = true;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    for (Index u : net.in_neighbors(v)) {
      if (seen[static_cast<std::size_t>(u)] || !state.failed(u)) continue;
      seen[static_cast<std::size_t>(u)] = true;
      result.push_back(u);
      queue.push_back(u);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<Index> reach_healthy_out(const Network& net, const NodeState& state, Index j) {
  std::vector<bool> seen(static_cast<std::size_t>(net.size()), false);
  std::deque<Index> queue{j};
  std::vector<Index> result;
  seen[static_cast<std::size_t>(j)] = true;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    for (Index u : net.out_neighbors(v)) {
      if (seen[static_cast<std::size_t>(u)]) continue;
      seen[static_cast<std::size_t>(u)] = true;
      if (state.failed(u))
        queue.push_back(u);
      else
        result.push_back(u);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

Eigen::ArrayXd fragility_llsc(const Network& net, const NodeState& state, const ModelSpec& spec) {
  const Index n = net.size();
  Eigen::ArrayXd received = Eigen::ArrayXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    if (!state.failed(j)) continue;
    const auto reach = reach_healthy_out(net, state, j);
    if (reach.empty()) continue;  // shed
    const double share =
        transferable(spec, spec.phi0(j), state.theta(j)) / static_cast<double>(reach.size());
    for (Index i : reach) received(i) += share;
  }
  return state.failed.select(state.phi, spec.phi0 + received);
}

NodeState step_llss(const Network& net, const NodeState& state, const ModelSpec& spec) {
  const Index n = net.size();
  const FailureMask failing = !state.failed && (state.phi >= state.theta);
  const FailureMask survives = !state.failed && (state.phi < state.theta);

  Eigen::ArrayXd received = Eigen::ArrayXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    if (!failing(j)) continue;
    Index healthy_out = 0;
    for (Index i : net.out_neighbors(j)) healthy_out += survives(i) ? 1 : 0;
    if (healthy_out == 0) continue;  // shed
    const double share =
        transferable(spec, state.phi(j), state.theta(j)) / static_cast<double>(healthy_out);
    for (Index i : net.out_neighbors(j))
      if (survives(i)) received(i) += share;
  }

  NodeState next = state;
  next.phi = survives.select(state.phi + received, 0.0);
  next.failed = threshold_mask(state);
  return next;
}

CascadeModel::CascadeModel(ModelSpec spec) : spec_(std::move(spec)) {}

Eigen::ArrayXd CascadeModel::fragility_for(const Network& net, const NodeState& state) const {
  switch (spec_.variant) {
    case Variant::inward:
      return fragility_constant_inward(net, state);
    case Variant::outward:
      return fragility_constant_outward(net, state);
    case Variant::llsc:
      return fragility_llsc(net, state, spec_);
    case Variant::llss:
      break;
  }
  throw std::logic_error("load-shedding fragility depends on its history, not only on s");
}

Eigen::ArrayXd CascadeModel::initial(const Network& net, const NodeState& init) const {
  spec_.validate(net.size());
  switch (spec_.variant) {
    case Variant::inward:
    case Variant::outward:
      return fragility_for(net, init);
    case Variant::llsc: {
      NodeState start = init;
      start.phi = spec_.phi0;
      return fragility_llsc(net, start, spec_);
    }
    case Variant::llss:
      return spec_.phi0;
  }
  return {};
}

Eigen::ArrayXd CascadeModel::advance(const Network& net, const NodeState& current,
                                     const FailureMask& next_failed) const {
  if (spec_.variant == Variant::llss) return step_llss(net, current, spec_).phi;
  NodeState next = current;
  next.failed = next_failed;
  return fragility_for(net, next);
}

double healthy_load(const NodeState& state) {
  return (!state.failed).select(state.phi, 0.0).sum();
}

}  // namespace cascade
