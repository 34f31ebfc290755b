#include "cascade/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>
#include <type_traits>

#include "cascade/clearing.hpp"
#include "cascade/engine.hpp"
#include "cascade/generators.hpp"
#include "cascade/models.hpp"

namespace cascade {

namespace {

std::string type_name(const Json& j) {
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

/// Typed access to one JSON object; errors carry the dotted field path.
class Fields {
 public:
  Fields(const Json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(where("") + "expected an object, got " + type_name(obj_));
  }

  std::string path(std::string_view name) const {
    return prefix_.empty() ? std::string(name) : prefix_ + "." + std::string(name);
  }
  [[noreturn]] void error(std::string_view name, const std::string& msg) const {
    throw ConfigError(where(name) + msg);
  }

  bool has(std::string_view name) const { return obj_.contains(name); }

  const Json& require(std::string_view name) const {
    if (!has(name)) error(name, "is required");
    return obj_.at(std::string(name));
  }

  double number(std::string_view name) const {
    const Json& j = require(name);
    if (!j.is_number()) error(name, "expected number, got " + type_name(j));
    const double v = j.get<double>();
    if (!std::isfinite(v)) error(name, "must be finite");
    return v;
  }
  double number(std::string_view name, double fallback) const { return has(name) ? number(name) : fallback; }

  long long integer(std::string_view name) const {
    const Json& j = require(name);
    if (!j.is_number_integer()) error(name, "expected integer, got " + type_name(j));
    return j.get<long long>();
  }
  long long integer(std::string_view name, long long fallback) const {
    return has(name) ? integer(name) : fallback;
  }

  std::string string(std::string_view name) const {
    const Json& j = require(name);
    if (!j.is_string()) error(name, "expected string, got " + type_name(j));
    return j.get<std::string>();
  }

  bool boolean(std::string_view name, bool fallback) const {
    if (!has(name)) return fallback;
    const Json& j = obj_.at(std::string(name));
    if (!j.is_boolean()) error(name, "expected boolean, got " + type_name(j));
    return j.get<bool>();
  }

  double probability(std::string_view name, double fallback) const {
    const double v = number(name, fallback);
    if (v < 0.0 || v > 1.0) error(name, "must lie in [0, 1]");
    return v;
  }

  void only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& item : obj_.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
        error(item.key(), "is not a recognised field");
    }
  }

 private:
  std::string where(std::string_view name) const {
    const std::string p = name.empty() ? prefix_ : path(name);
    return p.empty() ? std::string("config: ") : "field '" + p + "' ";
  }

  const Json& obj_;
  std::string prefix_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Eigen::ArrayXd parse_grid(const Fields& f, std::string_view name) {
  const Json& j = f.require(name);
  if (j.is_array()) {
    if (j.empty()) f.error(name, "must not be empty");
    Eigen::ArrayXd out(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) f.error(std::string(name) + "[" + std::to_string(i) + "]", "expected number");
      out(static_cast<Index>(i)) = j[i].get<double>();
    }
    return out;
  }
  if (!j.is_object()) f.error(name, "expected array or {min, max, count}, got " + type_name(j));
  const Fields g(j, f.path(name));
  g.only({"min", "max", "count"});
  const double lo = g.number("min");
  const double hi = g.number("max");
  const auto count = g.integer("count");
  if (count < 1) g.error("count", "must be >= 1");
  if (hi < lo) g.error("max", "must be >= min");
  if (count == 1) return Eigen::ArrayXd::Constant(1, lo);
  return Eigen::ArrayXd::LinSpaced(static_cast<Index>(count), lo, hi);
}

std::vector<Index> parse_indices(const Fields& f, std::string_view name) {
  std::vector<Index> out;
  if (!f.has(name)) return out;
  const Json& j = f.require(name);
  if (!j.is_array()) f.error(name, "expected array of node indices, got " + type_name(j));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() < 0)
      f.error(std::string(name) + "[" + std::to_string(i) + "]", "expected non-negative integer");
    out.push_back(j[i].get<Index>());
  }
  return out;
}

std::string parse_model(const Fields& f, bool require_s_only) {
  const std::string name = f.string("model");
  const auto& names = model_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    f.error("model", "unknown model '" + name + "' (expected one of: " + list + ")");
  }
  if (require_s_only && !ModelSpec::from_name(name).depends_only_on_failures())
    f.error("model", "'" + name + "' is not supported by the stochastic layer (fragility must depend on s only)");
  return name;
}

NetworkSource parse_network_source(const Fields& f, std::string_view name, const std::filesystem::path& base) {
  const Json& j = f.require(name);
  NetworkSource src;
  if (j.is_string()) {
    src.file = resolve(base, j.get<std::string>());
    return src;
  }
  if (!j.is_object()) f.error(name, "expected edge-list path or generator object, got " + type_name(j));
  const Fields g(j, f.path(name));
  g.only({"type", "n", "p", "directed"});
  src.generator = g.string("type");
  static const std::set<std::string> kinds{"path", "ring", "star", "complete", "erdos-renyi"};
  if (!kinds.count(src.generator))
    g.error("type", "unknown generator '" + src.generator + "' (expected path, ring, star, complete, erdos-renyi)");
  const auto n = g.integer("n");
  if (n < 1) g.error("n", "must be >= 1");
  if (src.generator == "ring" && n < 3) g.error("n", "a ring needs at least 3 nodes");
  src.n = static_cast<Index>(n);
  if (src.generator == "erdos-renyi") src.p = g.probability("p", 0.0);
  src.directed = g.boolean("directed", false);
  return src;
}

void check_schema(const Fields& f) {
  const auto v = f.integer("schema_version");
  if (v != kSchemaVersion)
    f.error("schema_version", "unsupported version " + std::to_string(v) + " (expected " +
                                  std::to_string(kSchemaVersion) + ")");
}

bool needs_seed(const ExperimentConfig& c) {
  switch (c.mode) {
    case Mode::vm:
    case Mode::stochastic: return true;
    case Mode::sis: return std::get<SisConfig>(c.block).network.has_value();
    default: return false;
  }
}

/// Runs fn(0..count-1) on up to `threads` workers; rethrows the first error.
template <class Fn>
void parallel_for(Index count, unsigned threads, Fn&& fn) {
  std::atomic<Index> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::clamp<Index>(count, 1, threads));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

Rng network_rng(const ExperimentConfig& c) {
  return c.seed ? replica_rng(*c.seed, std::numeric_limits<std::uint64_t>::max()) : Rng{};
}

std::filesystem::path output_file(const std::filesystem::path& out_dir, const ExperimentConfig& c,
                                  const char* ext) {
  return out_dir / (c.output + ext);
}

std::vector<std::filesystem::path> run_trace(const ExperimentConfig& c, const TraceConfig& t,
                                             const std::filesystem::path& out_dir) {
  const Network net = read_edge_list(t.network);
  const NodeAttributes attr = read_node_file(t.nodes, net.size());
  const CascadeModel model(ModelSpec::from_name(t.model, attr.phi0));
  model.spec().validate(net.size());
  NodeState init = NodeState::healthy(attr.phi0, attr.theta);
  init.theta_prime = attr.theta_prime;
  for (Index i : t.initial_failed) {
    if (i >= net.size())
      throw ConfigError("field 'initial_failed' index " + std::to_string(i) + " is out of range");
    init.failed(i) = true;
  }
  const CascadeTrace trace = run_cascade(model, net, init, t.max_steps);
  const auto path = output_file(out_dir, c, ".json");
  write_json(path, trace_to_json(trace, t.model));
  return {path};
}

std::vector<std::filesystem::path> run_phase(const ExperimentConfig& c, const PhaseConfig& p,
                                             const std::filesystem::path& out_dir) {
  PhaseDiagramOptions opt = p.options;
  opt.threads = c.threads;
  const PhaseDiagramGrid grid = phase_diagram(p.spec, p.mu, p.sigma, opt);
  std::vector<std::filesystem::path> written{output_file(out_dir, c, ".csv")};
  write_phase_csv(written.back(), grid);
  if (p.json) {
    Json meta{{"schema_version", kSchemaVersion},
              {"mode", "phase"},
              {"method", p.spec.method_name()},
              {"csv", written.back().filename().string()},
              {"columns", {"mu", "sigma", "x0", "x_star"}},
              {"order", "mu-major"},
              {"mu", std::vector<double>(p.mu.begin(), p.mu.end())},
              {"sigma", std::vector<double>(p.sigma.begin(), p.sigma.end())},
              {"rows", p.mu.size() * p.sigma.size()},
              {"solver", {{"tol", opt.solver.tol}, {"max_iter", opt.solver.max_iter}}}};
    if (p.spec.method == PhaseMethod::mf1_load) meta["phi0"] = p.spec.phi0;
    if (p.spec.method == PhaseMethod::mf2 || p.spec.method == PhaseMethod::mf3) meta["k"] = p.spec.k;
    if (p.spec.method == PhaseMethod::mf3) meta["solver"]["mf3_bins"] = opt.mf3_bins;
    written.push_back(output_file(out_dir, c, ".json"));
    write_json(written.back(), meta);
  }
  return written;
}

std::vector<std::filesystem::path> run_vm(const ExperimentConfig& c, const VmConfig& v,
                                          const std::filesystem::path& out_dir) {
  Rng net_rng = network_rng(c);
  const Network net = v.network.build(net_rng);
  const Index n = net.size();
  const auto xs = iterate_map([](double x) { return vm_macro_step(x, VmResponse::linear()); },
                              v.initial_fraction, v.steps);
  std::vector<double> ts(xs.size());
  for (std::size_t t = 0; t < ts.size(); ++t) ts[t] = static_cast<double>(t);

  std::vector<VoterOutcome> outcomes(static_cast<std::size_t>(c.replicas));
  parallel_for(c.replicas, c.threads, [&](Index r) {
    Rng rng = replica_rng(*c.seed, static_cast<std::uint64_t>(r));
    const FailureMask init = random_failures(n, v.initial_fraction, rng);
    outcomes[static_cast<std::size_t>(r)] = voter_model_run(net, init, v.max_time, rng);
  });

  Index at_one = 0, at_zero = 0, unresolved = 0;
  double time_sum = 0.0;
  std::vector<double> finals;
  for (const auto& o : outcomes) {
    if (!o.consensus) ++unresolved;
    else if (o.final_fraction == 1.0) ++at_one;
    else ++at_zero;
    time_sum += static_cast<double>(o.time);
    finals.push_back(o.final_fraction);
  }
  const double reps = static_cast<double>(c.replicas);
  const double freq = static_cast<double>(at_one) / reps;
  const double x0 = n ? std::round(v.initial_fraction * static_cast<double>(n)) / static_cast<double>(n) : 0.0;
  Json summary{{"schema_version", kSchemaVersion},
               {"mode", "vm"},
               {"n", n},
               {"seed", *c.seed},
               {"replicas", c.replicas},
               {"initial_fraction", x0},
               {"consensus_failed", at_one},
               {"consensus_healthy", at_zero},
               {"unresolved", unresolved},
               {"frequency_failed", freq},
               {"standard_error", std::sqrt(x0 * (1.0 - x0) / reps)},
               {"mean_time", time_sum / reps},
               {"final_fraction", finals}};
  std::vector<std::filesystem::path> written{output_file(out_dir, c, ".csv"), output_file(out_dir, c, ".json")};
  write_series_csv(written[0], {"t", "x_map"}, {ts, xs});
  write_json(written[1], summary);
  return written;
}

std::vector<std::filesystem::path> run_sis(const ExperimentConfig& c, const SisConfig& s,
                                           const std::filesystem::path& out_dir) {
  const auto xs = iterate_map([&](double x) { return sis_macro_step(x, s.params); }, s.x0, s.steps);
  std::vector<double> ts(xs.size());
  for (std::size_t t = 0; t < ts.size(); ++t) ts[t] = static_cast<double>(t);
  const double nk = s.params.nu * static_cast<double>(s.params.k);
  Json summary{{"schema_version", kSchemaVersion},
               {"mode", "sis"},
               {"nu", s.params.nu},
               {"delta", s.params.delta},
               {"k", s.params.k},
               {"critical_nu", s.params.critical_nu()},
               {"predicted_fixed_point", s.params.nu > s.params.critical_nu() ? 1.0 - s.params.delta / nk : 0.0},
               {"final_map", xs.back()}};
  std::vector<std::string> header{"t", "x_map"};
  std::vector<std::vector<double>> columns{ts, xs};

  if (s.network) {
    Rng net_rng = network_rng(c);
    const Network net = s.network->build(net_rng);
    std::vector<std::vector<double>> runs(static_cast<std::size_t>(c.replicas));
    parallel_for(c.replicas, c.threads, [&](Index r) {
      Rng rng = replica_rng(*c.seed, static_cast<std::uint64_t>(r));
      const FailureMask init = random_failures(net.size(), s.x0, rng);
      runs[static_cast<std::size_t>(r)] = sis_micro_run(net, init, s.params, s.steps, rng);
    });
    std::vector<double> mean(xs.size(), 0.0);
    for (const auto& run : runs)
      for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += run[t] / static_cast<double>(c.replicas);
    header.push_back("x_mc_mean");
    columns.push_back(mean);
    summary["n"] = net.size();
    summary["seed"] = *c.seed;
    summary["replicas"] = c.replicas;
    summary["final_mc_mean"] = mean.back();
  }
  std::vector<std::filesystem::path> written{output_file(out_dir, c, ".csv"), output_file(out_dir, c, ".json")};
  write_series_csv(written[0], header, columns);
  write_json(written[1], summary);
  return written;
}

std::vector<std::filesystem::path> run_stochastic(const ExperimentConfig& c, const StochasticConfig& s,
                                                  const std::filesystem::path& out_dir) {
  Rng net_rng = network_rng(c);
  const Network net = s.network.build(net_rng);
  const Index n = net.size();
  NodeAttributes attr;
  if (s.nodes) {
    attr = read_node_file(*s.nodes, n);
  } else {
    attr.phi0 = Eigen::ArrayXd::Zero(n);
    attr.theta = Eigen::ArrayXd::Constant(n, s.params.theta);
    attr.theta_prime = Eigen::ArrayXd::Constant(n, s.params.theta_prime);
  }
  const CascadeModel model(ModelSpec::from_name(s.model, attr.phi0));
  model.spec().validate(n);
  for (Index i : s.initial_failed)
    if (i >= n) throw ConfigError("field 'initial_failed' index " + std::to_string(i) + " is out of range");

  std::vector<std::vector<double>> runs(static_cast<std::size_t>(c.replicas));
  parallel_for(c.replicas, c.threads, [&](Index r) {
    Rng rng = replica_rng(*c.seed, static_cast<std::uint64_t>(r));
    NodeState init = NodeState::healthy(attr.phi0, attr.theta);
    init.theta_prime = attr.theta_prime;
    if (s.initial_fraction > 0.0) init.failed = random_failures(n, s.initial_fraction, rng);
    for (Index i : s.initial_failed) init.failed(i) = true;
    const auto states = stochastic_run(net, init, s.params, model, s.steps, rng);
    auto& xs = runs[static_cast<std::size_t>(r)];
    for (const auto& st : states) xs.push_back(fraction_failed(st));
  });

  const std::size_t len = static_cast<std::size_t>(s.steps) + 1;
  std::vector<double> ts(len), mean(len, 0.0), lo(len, 1.0), hi(len, 0.0), finals;
  for (std::size_t t = 0; t < len; ++t) ts[t] = static_cast<double>(t);
  for (const auto& run : runs) {
    for (std::size_t t = 0; t < len; ++t) {
      mean[t] += run[t] / static_cast<double>(c.replicas);
      lo[t] = std::min(lo[t], run[t]);
      hi[t] = std::max(hi[t], run[t]);
    }
    finals.push_back(run.back());
  }
  const auto beta_json = [](double b) { return std::isinf(b) ? Json("inf") : Json(b); };
  Json summary{{"schema_version", kSchemaVersion},
               {"mode", "stochastic"},
               {"model", s.model},
               {"n", n},
               {"seed", *c.seed},
               {"replicas", c.replicas},
               {"steps", s.steps},
               {"params",
                {{"beta", beta_json(s.params.beta)},
                 {"beta_prime", beta_json(s.params.beta_prime)},
                 {"gamma", s.params.gamma},
                 {"gamma_prime", s.params.gamma_prime}}},
               {"mean_final_fraction", mean.back()},
               {"final_fraction", finals}};
  std::vector<std::filesystem::path> written{output_file(out_dir, c, ".csv"), output_file(out_dir, c, ".json")};
  write_series_csv(written[0], {"t", "x_mean", "x_min", "x_max"}, {ts, mean, lo, hi});
  write_json(written[1], summary);
  return written;
}

std::vector<std::filesystem::path> run_clearing(const ExperimentConfig& c, const ClearingConfig& k,
                                                const std::filesystem::path& out_dir) {
  FinancialSystem sys;
  try {
    sys = financial_system_from_json(read_json(k.input));
  } catch (const std::invalid_argument& e) {
    throw ParseError(k.input.string() + ": " + e.what());
  }
  const ClearingResult result = fictitious_default(sys, k.tol);
  const auto path = output_file(out_dir, c, ".json");
  write_json(path, clearing_result_to_json(result));
  return {path};
}

double beta_field(const Fields& f, std::string_view name) {
  if (f.has(name) && f.require(name).is_string()) {
    if (f.string(name) != "inf") f.error(name, "expected number or \"inf\"");
    return std::numeric_limits<double>::infinity();
  }
  const double b = f.number(name, 1.0);
  if (b < 0.0) f.error(name, "must be >= 0");
  return b;
}

}  // namespace

Mode parse_mode(std::string_view name) {
  if (name == "trace") return Mode::trace;
  if (name == "phase") return Mode::phase;
  if (name == "vm") return Mode::vm;
  if (name == "sis") return Mode::sis;
  if (name == "stochastic" || name == "stochastic-cascade") return Mode::stochastic;
  if (name == "clearing") return Mode::clearing;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::trace: return "trace";
    case Mode::phase: return "phase";
    case Mode::vm: return "vm";
    case Mode::sis: return "sis";
    case Mode::stochastic: return "stochastic";
    case Mode::clearing: return "clearing";
  }
  return "invalid";
}

Network NetworkSource::build(Rng& rng) const {
  if (file) return read_edge_list(*file);
  if (generator == "path") return path_graph(n);
  if (generator == "ring") return ring_graph(n);
  if (generator == "star") return star_graph(n - 1);
  if (generator == "complete") return complete_graph(n);
  if (generator == "erdos-renyi") return erdos_renyi(n, p, directed, rng);
  throw std::invalid_argument("unknown generator '" + generator + "'");
}

ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  const Fields f(doc, "");
  ExperimentConfig c;
  check_schema(f);
  const std::string mode = f.string("mode");
  try {
    c.mode = parse_mode(mode);
  } catch (const std::invalid_argument&) {
    f.error("mode", "unknown mode '" + mode + "' (expected trace, phase, vm, sis, stochastic, clearing)");
  }
  c.output = f.string("output");
  if (c.output.empty()) f.error("output", "must not be empty");
  if (f.has("seed")) {
    const auto seed = f.integer("seed");
    if (seed < 0) f.error("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  c.replicas = static_cast<Index>(f.integer("replicas", 1));
  if (c.replicas < 1) f.error("replicas", "must be >= 1");
  const auto threads = f.integer("threads", 0);
  if (threads < 0) f.error("threads", "must be >= 0");
  c.threads = static_cast<unsigned>(threads);

  switch (c.mode) {
    case Mode::trace: {
      f.only({"schema_version", "mode", "output", "model", "network", "nodes", "max_steps", "initial_failed"});
      TraceConfig t;
      t.model = parse_model(f, false);
      t.network = resolve(base_dir, f.string("network"));
      t.nodes = resolve(base_dir, f.string("nodes"));
      t.max_steps = static_cast<Index>(f.integer("max_steps", 0));
      if (t.max_steps < 0) f.error("max_steps", "must be >= 0");
      t.initial_failed = parse_indices(f, "initial_failed");
      c.block = std::move(t);
      break;
    }
    case Mode::phase: {
      f.only({"schema_version", "mode", "output", "threads", "method", "phi0", "k", "mu", "sigma", "tol",
              "max_iter", "mf3_bins", "json"});
      PhaseConfig p;
      const std::string method = f.string("method");
      try {
        p.spec.method = PhaseSpec::parse_method(method);
      } catch (const std::invalid_argument&) {
        f.error("method", "unknown method '" + method + "' (expected mf1-i, mf1-ii, mf1-iii, mf2, mf3)");
      }
      p.spec.phi0 = f.number("phi0", 0.25);
      if (p.spec.method == PhaseMethod::mf1_load && !(p.spec.phi0 > 0.0)) f.error("phi0", "must be > 0");
      const auto k = f.integer("k", 3);
      if (k < 1 || k > 1000) f.error("k", "must lie in [1, 1000]");
      p.spec.k = static_cast<int>(k);
      p.mu = parse_grid(f, "mu");
      p.sigma = parse_grid(f, "sigma");
      for (Index j = 0; j < p.sigma.size(); ++j)
        if (!(p.sigma(j) > 0.0)) f.error("sigma", "values must be > 0 (got " + format_number(p.sigma(j)) + ")");
      p.options.solver.tol = f.number("tol", 1e-10);
      if (!(p.options.solver.tol > 0.0)) f.error("tol", "must be > 0");
      p.options.solver.max_iter = static_cast<long>(f.integer("max_iter", 100000));
      if (p.options.solver.max_iter < 1) f.error("max_iter", "must be >= 1");
      p.options.mf3_bins = static_cast<Index>(f.integer("mf3_bins", 4000));
      if (p.options.mf3_bins < 10) f.error("mf3_bins", "must be >= 10");
      p.json = f.boolean("json", true);
      c.block = std::move(p);
      break;
    }
    case Mode::vm: {
      f.only({"schema_version", "mode", "output", "seed", "replicas", "threads", "network", "initial_fraction",
              "max_time", "steps"});
      VmConfig v;
      v.network = parse_network_source(f, "network", base_dir);
      v.initial_fraction = f.probability("initial_fraction", 0.5);
      v.max_time = static_cast<Index>(f.integer("max_time", 100000));
      if (v.max_time < 1) f.error("max_time", "must be >= 1");
      v.steps = static_cast<Index>(f.integer("steps", 100));
      if (v.steps < 0) f.error("steps", "must be >= 0");
      c.block = std::move(v);
      break;
    }
    case Mode::sis: {
      f.only({"schema_version", "mode", "output", "seed", "replicas", "threads", "nu", "delta", "k", "x0", "steps",
              "network"});
      SisConfig s;
      f.require("nu");
      f.require("delta");
      s.params.nu = f.probability("nu", 0.0);
      s.params.delta = f.probability("delta", 0.0);
      const auto k = f.integer("k");
      if (k < 1) f.error("k", "must be >= 1");
      s.params.k = static_cast<int>(k);
      s.x0 = f.probability("x0", 0.01);
      s.steps = static_cast<Index>(f.integer("steps", 1000));
      if (s.steps < 0) f.error("steps", "must be >= 0");
      if (f.has("network")) s.network = parse_network_source(f, "network", base_dir);
      c.block = std::move(s);
      break;
    }
    case Mode::stochastic: {
      f.only({"schema_version", "mode", "output", "seed", "replicas", "threads", "model", "network", "nodes", "beta",
              "beta_prime", "gamma", "gamma_prime", "theta", "theta_prime", "steps", "initial_fraction",
              "initial_failed"});
      StochasticConfig s;
      s.model = parse_model(f, true);
      s.network = parse_network_source(f, "network", base_dir);
      if (f.has("nodes")) s.nodes = resolve(base_dir, f.string("nodes"));
      s.params.beta = beta_field(f, "beta");
      s.params.beta_prime = beta_field(f, "beta_prime");
      s.params.gamma = f.probability("gamma", 1.0);
      s.params.gamma_prime = f.probability("gamma_prime", 1.0);
      s.params.theta = f.number("theta", 0.0);
      s.params.theta_prime = f.number("theta_prime", s.params.theta);
      s.steps = static_cast<Index>(f.integer("steps", 100));
      if (s.steps < 0) f.error("steps", "must be >= 0");
      s.initial_fraction = f.probability("initial_fraction", 0.0);
      s.initial_failed = parse_indices(f, "initial_failed");
      c.block = std::move(s);
      break;
    }
    case Mode::clearing: {
      f.only({"schema_version", "mode", "output", "input", "tol"});
      ClearingConfig k;
      k.input = resolve(base_dir, f.string("input"));
      k.tol = f.number("tol", 1e-10);
      if (!(k.tol > 0.0)) f.error("tol", "must be > 0");
      c.block = std::move(k);
      break;
    }
  }
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot read config file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    return parse_config(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_overrides(ExperimentConfig& config, const RunOverrides& o) {
  if (o.seed) config.seed = o.seed;
  if (o.replicas) {
    if (*o.replicas < 1) throw ConfigError("--replicas must be >= 1");
    config.replicas = *o.replicas;
  }
  if (o.threads) config.threads = *o.threads;
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config,
                                                  const std::filesystem::path& out_dir) {
  if (needs_seed(config) && !config.seed)
    throw ConfigError("field 'seed' is required for " + mode_name(config.mode) +
                      " runs (set it in the config or pass --seed)");
  return std::visit(
      [&](const auto& block) -> std::vector<std::filesystem::path> {
        using T = std::decay_t<decltype(block)>;
        if constexpr (std::is_same_v<T, TraceConfig>) return run_trace(config, block, out_dir);
        else if constexpr (std::is_same_v<T, PhaseConfig>) return run_phase(config, block, out_dir);
        else if constexpr (std::is_same_v<T, VmConfig>) return run_vm(config, block, out_dir);
        else if constexpr (std::is_same_v<T, SisConfig>) return run_sis(config, block, out_dir);
        else if constexpr (std::is_same_v<T, StochasticConfig>) return run_stochastic(config, block, out_dir);
        else return run_clearing(config, block, out_dir);
      },
      config.block);
}

}  // namespace cascade
