#ifndef CASCADE_EXPERIMENT_HPP
#define CASCADE_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cascade/io.hpp"
#include "cascade/meanfield.hpp"
#include "cascade/stochastic.hpp"

namespace cascade {

/// Invalid configuration. what() names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { trace, phase, vm, sis, stochastic, clearing };

Mode parse_mode(std::string_view name);
std::string mode_name(Mode mode);

/// Either an edge-list file or one of the built-in test topologies.
struct NetworkSource {
  std::optional<std::filesystem::path> file;
  std::string generator;  // path, ring, star, complete, erdos-renyi
  Index n = 0;
  double p = 0.0;
  bool directed = false;

  /// Builds the network; erdos-renyi draws from `rng`.
  Network build(Rng& rng) const;
};

struct TraceConfig {
  std::string model;
  std::filesystem::path network;
  std::filesystem::path nodes;
  Index max_steps = 0;
  std::vector<Index> initial_failed;
};

struct PhaseConfig {
  PhaseSpec spec;
  Eigen::ArrayXd mu;
  Eigen::ArrayXd sigma;
  PhaseDiagramOptions options;
  bool json = true;
};

struct VmConfig {
  NetworkSource network;
  double initial_fraction = 0.5;
  Index max_time = 100000;
  Index steps = 100;  // length of the macroscopic series
};

struct SisConfig {
  SisParams params;
  double x0 = 0.01;
  Index steps = 1000;
  std::optional<NetworkSource> network;  // Monte Carlo alongside the map when set
};

struct StochasticConfig {
  std::string model;
  NetworkSource network;
  std::optional<std::filesystem::path> nodes;
  TransitionParams params;
  Index steps = 100;
  double initial_fraction = 0.0;
  std::vector<Index> initial_failed;
};

struct ClearingConfig {
  std::filesystem::path input;
  double tol = 1e-10;
};

struct ExperimentConfig {
  Mode mode = Mode::trace;
  std::string output;  // file stem, relative to the output directory
  std::optional<std::uint64_t> seed;
  Index replicas = 1;
  unsigned threads = 0;
  std::variant<TraceConfig, PhaseConfig, VmConfig, SisConfig, StochasticConfig, ClearingConfig> block;
};

/// Parses and validates a JSON config. Relative input paths are resolved
/// against `base_dir`. Throws ConfigError.
ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig parse_config(const std::filesystem::path& path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<Index> replicas;
  std::optional<unsigned> threads;
};

/// Applies overrides and re-checks the seed requirement. Throws ConfigError.
void apply_overrides(ExperimentConfig& config, const RunOverrides& overrides);

/// Runs the experiment and writes its outputs under `out_dir`. Returns the
/// files written, in order.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config,
                                                  const std::filesystem::path& out_dir);

}  // namespace cascade

#endif  // CASCADE_EXPERIMENT_HPP
