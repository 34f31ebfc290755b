#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cascade/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<long long> replicas;
  std::optional<unsigned> threads;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade, contagion and clearing experiments"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"trace", "phase", "vm", "sis", "stochastic", "stochastic-cascade", "clearing"}) {
    auto* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--replicas", opt.replicas, "override the replica count");
    sub->add_option("--threads", opt.threads, "worker threads (0: all cores)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    auto config = cascade::parse_config(std::filesystem::path(opt.config));
    if (config.mode != cascade::parse_mode(command))
      throw cascade::ConfigError(opt.config + ": field 'mode' is '" + cascade::mode_name(config.mode) +
                                 "' but the '" + command + "' command was given");
    cascade::RunOverrides overrides;
    overrides.seed = opt.seed;
    if (opt.replicas) overrides.replicas = static_cast<cascade::Index>(*opt.replicas);
    overrides.threads = opt.threads;
    cascade::apply_overrides(config, overrides);
    for (const auto& path : cascade::run_experiment(config, opt.out)) std::cout << path.string() << '\n';
  } catch (const cascade::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
