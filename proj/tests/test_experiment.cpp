#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "cascade/experiment.hpp"
#include "support.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CASCADE_TEST_DATA;

std::string message_of(const Json& doc) {
  try {
    parse_config(doc, kData);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

Json trace_config() { return read_json(kData / "trace_path3.json"); }

Json phase_config(int count) {
  return {{"schema_version", 1},
          {"mode", "phase"},
          {"output", "phase"},
          {"method", "mf1-i"},
          {"mu", {{"min", 0.0}, {"max", 1.0}, {"count", count}}},
          {"sigma", {{"min", 0.02}, {"max", 1.0}, {"count", count}}}};
}

Json stochastic_config() {
  return {{"schema_version", 1},
          {"mode", "stochastic"},
          {"output", "stoch"},
          {"seed", 17},
          {"replicas", 8},
          {"model", "constant-out"},
          {"network", {{"type", "erdos-renyi"}, {"n", 40}, {"p", 0.1}}},
          {"beta", 4.0},
          {"beta_prime", 4.0},
          {"theta", 0.3},
          {"steps", 25},
          {"initial_fraction", 0.2}};
}

}  // namespace

TEST_CASE("parse_config: minimal trace config") {
  const auto c = parse_config(trace_config(), kData);
  CHECK(c.mode == Mode::trace);
  CHECK(c.output == "path3_trace");
  const auto& t = std::get<TraceConfig>(c.block);
  CHECK(t.model == "constant-in");
  CHECK(t.network == kData / "path3.edges");
}

TEST_CASE("parse_config: errors name the field") {
  Json bad_model = trace_config();
  bad_model["model"] = "constant-sideways";
  const auto m = message_of(bad_model);
  CHECK(m.find("'model'") != std::string::npos);
  CHECK(m.find("constant-in") != std::string::npos);

  Json zero_sigma = phase_config(5);
  zero_sigma["sigma"] = Json::array({0.1, 0.0});
  CHECK(message_of(zero_sigma).find("'sigma'") != std::string::npos);

  Json missing = trace_config();
  missing.erase("nodes");
  CHECK(message_of(missing).find("field 'nodes' is required") != std::string::npos);

  Json wrong_type = phase_config(5);
  wrong_type["k"] = "three";
  CHECK(message_of(wrong_type).find("field 'k' expected integer, got string") != std::string::npos);

  Json extra = trace_config();
  extra["colour"] = "blue";
  CHECK(message_of(extra).find("'colour' is not a recognised field") != std::string::npos);

  Json version = trace_config();
  version["schema_version"] = 2;
  CHECK(message_of(version).find("'schema_version'") != std::string::npos);

  Json nested = stochastic_config();
  nested["network"]["p"] = 1.5;
  CHECK(message_of(nested).find("'network.p'") != std::string::npos);

  Json llss = stochastic_config();
  llss["model"] = "load-llss";
  CHECK(message_of(llss).find("'model'") != std::string::npos);

  CHECK_THROWS_WITH_AS(parse_config(kData / "does-not-exist.json"), doctest::Contains("cannot read"), ConfigError);
}

TEST_CASE("shipped example configs parse") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(CASCADE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CHECK_NOTHROW(parse_config(entry.path()));
    ++seen;
  }
  CHECK(seen >= 4);
}

TEST_CASE("run_experiment: trace reproduces the path hand simulation") {
  const fs::path out = support::scratch_dir("trace");
  const auto files = run_experiment(parse_config(kData / "trace_path3.json"), out);
  REQUIRE(files.size() == 1);
  const Json doc = read_json(files[0]);
  CHECK(doc["steps"].size() == 4);
  CHECK(doc["steps"][1]["s"] == Json::array({1, 0, 0}));
  CHECK(doc["steps"][2]["phi"] == Json::array({1.0, 0.5, 1.0}));
  CHECK(doc["steps"][3]["X"] == 1.0);
  CHECK(doc["converged"] == true);
}

TEST_CASE("run_experiment: 50x50 class (i) phase grid") {
  const fs::path out = support::scratch_dir("phase");
  const auto files = run_experiment(parse_config(phase_config(50), kData), out);
  REQUIRE(files.size() == 2);
  std::ifstream csv(files[0]);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "mu,sigma,x0,x_star");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2500);
  const Json meta = read_json(files[1]);
  CHECK(meta["rows"] == 2500);
  CHECK(meta["order"] == "mu-major");
}

TEST_CASE("run_experiment: clearing") {
  const fs::path out = support::scratch_dir("clearing");
  const auto files = run_experiment(parse_config(kData / "clearing_two_firm.json"), out);
  const Json doc = read_json(files.at(0));
  CHECK(doc["defaults"] == Json::array({0}));
  CHECK(doc["x_star"] == Json::array({1.0, 1.0}));
}

TEST_CASE("run_experiment: seeded runs are byte-identical, threads do not matter") {
  auto cfg = parse_config(stochastic_config(), kData);
  const fs::path a = support::scratch_dir("repro-a"), b = support::scratch_dir("repro-b");
  cfg.threads = 1;
  const auto fa = run_experiment(cfg, a);
  cfg.threads = 3;
  const auto fb = run_experiment(cfg, b);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(support::slurp(fa[i]) == support::slurp(fb[i]));
}

TEST_CASE("run_experiment: seeded modes demand a seed") {
  Json doc = stochastic_config();
  doc.erase("seed");
  auto cfg = parse_config(doc, kData);
  CHECK_THROWS_WITH_AS(run_experiment(cfg, support::scratch_dir("noseed")), doctest::Contains("'seed'"), ConfigError);
  apply_overrides(cfg, RunOverrides{7, {}, {}});
  CHECK_NOTHROW(run_experiment(cfg, support::scratch_dir("noseed")));
}

TEST_CASE("cascade-lab exit codes") {
  const fs::path out = support::scratch_dir("cli");
  const std::string lab = CASCADE_LAB_PATH;
  const auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + lab + "\" " + args + " > \"" + (out / "log.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::string trace = (kData / "trace_path3.json").string();
  CHECK(run("trace --config \"" + trace + "\" --out \"" + out.string() + "\"") == 0);
  CHECK(fs::exists(out / "path3_trace.json"));
  CHECK(run("--help") == 0);
  CHECK(run("phase --config \"" + trace + "\" --out \"" + out.string() + "\"") == 2);
  CHECK(run("trace --config \"" + (kData / "missing.json").string() + "\"") == 2);
  CHECK(run("trace") == 2);

  Json bad = trace_config();
  bad["model"] = "constant-sideways";
  std::ofstream(out / "bad.json") << bad.dump();
  CHECK(run("trace --config \"" + (out / "bad.json").string() + "\"") == 2);
  CHECK(support::slurp(out / "log.txt").find("'model'") != std::string::npos);

  Json broken = trace_config();
  broken["network"] = (kData / "path3.nodes").string();
  std::ofstream(out / "broken.json") << broken.dump();
  CHECK(run("trace --config \"" + (out / "broken.json").string() + "\" --out \"" + out.string() + "\"") == 3);
}
