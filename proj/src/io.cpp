#include "cascade/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

namespace cascade {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  const auto hash = line.find('#');
  std::istringstream is(hash == std::string::npos ? line : line.substr(0, hash));
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(std::move(t));
  return out;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& msg) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + msg);
}

template <class T>
T parse_token(const std::string& tok, const std::string& source, long line, const char* what) {
  T value{};
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end) fail(source, line, std::string("invalid ") + what + " '" + tok + "'");
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Json array_json(const Eigen::ArrayXd& a) {
  Json j = Json::array();
  for (Index i = 0; i < a.size(); ++i) j.push_back(a(i));
  return j;
}

Eigen::ArrayXd array_from(const Json& j, Index n, const char* field) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    throw std::invalid_argument(std::string("field '") + field + "' must be an array of " + std::to_string(n) +
                                " numbers");
  Eigen::ArrayXd a(n);
  for (Index i = 0; i < n; ++i) {
    const auto& v = j[static_cast<std::size_t>(i)];
    if (!v.is_number())
      throw std::invalid_argument(std::string("field '") + field + "[" + std::to_string(i) + "]' must be a number");
    a(i) = v.get<double>();
  }
  return a;
}

const Json& field(const Json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) throw std::invalid_argument(std::string("missing field '") + name + "'");
  return doc.at(name);
}

}  // namespace

Network read_edge_list(std::istream& in, const std::string& source) {
  std::string line;
  long lineno = 0;
  std::optional<Index> n;
  bool undirected = false;
  std::vector<Edge> edges;
  std::set<std::pair<long long, long long>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (!n) {
      if (t.size() != 3 || t[0] != "n") fail(source, lineno, "expected header 'n <count> directed|undirected'");
      const auto count = parse_token<long long>(t[1], source, lineno, "node count");
      if (count < 0) fail(source, lineno, "node count must be >= 0");
      if (t[2] == "undirected") {
        undirected = true;
      } else if (t[2] != "directed") {
        fail(source, lineno, "expected 'directed' or 'undirected', got '" + t[2] + "'");
      }
      n = static_cast<Index>(count);
      continue;
    }
    if (t.size() != 3) fail(source, lineno, "expected 'i j weight'");
    const auto i = parse_token<long long>(t[0], source, lineno, "node index");
    const auto j = parse_token<long long>(t[1], source, lineno, "node index");
    const auto w = parse_token<double>(t[2], source, lineno, "weight");
    if (i < 0 || i >= *n || j < 0 || j >= *n)
      fail(source, lineno, "node index out of range [0, " + std::to_string(*n) + ")");
    if (i == j) fail(source, lineno, "self-loop at node " + t[0]);
    if (!(w > 0.0) || !std::isfinite(w)) fail(source, lineno, "weight must be finite and > 0");
    const std::pair key = undirected ? std::pair{std::min(i, j), std::max(i, j)} : std::pair{i, j};
    if (!seen.insert(key).second) fail(source, lineno, "duplicate edge " + t[0] + " " + t[1]);
    edges.push_back({static_cast<Index>(i), static_cast<Index>(j), w});
  }
  if (!n) fail(source, lineno, "missing header 'n <count> directed|undirected'");
  return Network::from_edges(edges, *n, undirected);
}

Network read_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_edge_list(in, path.string());
}

void write_edge_list(std::ostream& out, const Network& net) {
  out << "n " << net.size() << (net.undirected() ? " undirected" : " directed") << '\n';
  for (const Edge& e : net.edges()) {
    if (net.undirected() && e.from > e.to) continue;
    out << e.from << ' ' << e.to << ' ' << format_number(e.weight) << '\n';
  }
}

NodeAttributes read_node_file(std::istream& in, Index n, const std::string& source) {
  NodeAttributes attr;
  attr.phi0 = Eigen::ArrayXd::Zero(n);
  attr.theta = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd theta_prime = Eigen::ArrayXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  bool any_prime = false;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t.size() != 3 && t.size() != 4) fail(source, lineno, "expected 'i phi0 theta [theta_prime]'");
    const auto i = parse_token<long long>(t[0], source, lineno, "node index");
    if (i < 0 || i >= n) fail(source, lineno, "node index out of range [0, " + std::to_string(n) + ")");
    const auto ui = static_cast<std::size_t>(i);
    if (seen[ui]) fail(source, lineno, "node " + std::to_string(i) + " listed twice");
    seen[ui] = true;
    attr.phi0(i) = parse_token<double>(t[1], source, lineno, "phi0");
    attr.theta(i) = parse_token<double>(t[2], source, lineno, "theta");
    if (t.size() == 4) {
      theta_prime(i) = parse_token<double>(t[3], source, lineno, "theta_prime");
      any_prime = true;
    }
  }
  for (Index i = 0; i < n; ++i)
    if (!seen[static_cast<std::size_t>(i)]) fail(source, lineno, "node " + std::to_string(i) + " has no attributes");
  if (any_prime) attr.theta_prime = theta_prime.isNaN().select(attr.theta, theta_prime);
  return attr;
}

NodeAttributes read_node_file(const std::filesystem::path& path, Index n) {
  auto in = open_input(path);
  return read_node_file(in, n, path.string());
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf, ptr};
}

Json trace_to_json(const CascadeTrace& trace, const std::string& model) {
  if (trace.states.empty()) throw std::invalid_argument("cannot emit an empty trace");
  Json steps = Json::array();
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    const NodeState& st = trace.states[t];
    Json s = Json::array();
    for (Index i = 0; i < st.size(); ++i) s.push_back(st.failed(i) ? 1 : 0);
    Json step{{"t", t},
              {"s", std::move(s)},
              {"phi", array_json(st.phi)},
              {"theta", array_json(st.theta)},
              {"z", array_json(net_fragility(st))},
              {"X", trace.x_series[t]}};
    if (st.theta_prime) step["theta_prime"] = array_json(*st.theta_prime);
    steps.push_back(std::move(step));
  }
  return {{"schema_version", kSchemaVersion},
          {"model", model},
          {"n", trace.states.front().size()},
          {"terminated_at", trace.terminated_at},
          {"converged", trace.converged},
          {"steps", std::move(steps)}};
}

CascadeTrace trace_from_json(const Json& doc) {
  if (field(doc, "schema_version") != kSchemaVersion)
    throw std::invalid_argument("unsupported trace schema_version " + doc.at("schema_version").dump());
  const auto n = field(doc, "n").get<Index>();
  CascadeTrace trace;
  trace.terminated_at = field(doc, "terminated_at").get<Index>();
  trace.converged = field(doc, "converged").get<bool>();
  for (const Json& step : field(doc, "steps")) {
    NodeState st;
    const Json& s = field(step, "s");
    if (!s.is_array() || static_cast<Index>(s.size()) != n)
      throw std::invalid_argument("field 's' must be an array of " + std::to_string(n) + " flags");
    st.failed.resize(n);
    for (Index i = 0; i < n; ++i) st.failed(i) = s[static_cast<std::size_t>(i)].get<int>() != 0;
    st.phi = array_from(field(step, "phi"), n, "phi");
    st.theta = array_from(field(step, "theta"), n, "theta");
    if (step.contains("theta_prime")) st.theta_prime = array_from(step.at("theta_prime"), n, "theta_prime");
    trace.x_series.push_back(field(step, "X").get<double>());
    trace.states.push_back(std::move(st));
  }
  if (trace.states.empty()) throw std::invalid_argument("trace has no steps");
  return trace;
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

Json read_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_phase_csv(std::ostream& out, const PhaseDiagramGrid& grid) {
  out << "mu,sigma,x0,x_star\n";
  for (Index i = 0; i < grid.mu_values.size(); ++i) {
    for (Index j = 0; j < grid.sigma_values.size(); ++j) {
      out << format_number(grid.mu_values(i)) << ',' << format_number(grid.sigma_values(j)) << ','
          << format_number(grid.x0(i, j)) << ',' << format_number(grid.x_star(i, j)) << '\n';
    }
  }
}

void write_phase_csv(const std::filesystem::path& path, const PhaseDiagramGrid& grid) {
  auto out = open_output(path);
  write_phase_csv(out, grid);
  finish(out, path);
}

void write_series_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("series columns have different lengths");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_number(columns[c][r]);
    out << '\n';
  }
}

void write_series_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  auto out = open_output(path);
  write_series_csv(out, header, columns);
  finish(out, path);
}

FinancialSystem financial_system_from_json(const Json& doc) {
  const Json& nj = field(doc, "n");
  if (!nj.is_number_integer() || nj.get<long long>() < 0)
    throw std::invalid_argument("field 'n' must be a non-negative integer");
  const auto n = nj.get<Index>();
  FinancialSystem sys;
  sys.x0 = array_from(field(doc, "x0"), n, "x0").matrix();
  sys.theta = array_from(field(doc, "theta"), n, "theta").matrix();
  const Json& a = field(doc, "A");
  if (!a.is_array() || static_cast<Index>(a.size()) != n)
    throw std::invalid_argument("field 'A' must have " + std::to_string(n) + " rows");
  sys.A.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const std::string name = "A[" + std::to_string(i) + "]";
    sys.A.row(i) = array_from(a[static_cast<std::size_t>(i)], n, name.c_str()).matrix().transpose();
  }
  return sys;
}

Json financial_system_to_json(const FinancialSystem& sys) {
  Json a = Json::array();
  for (Index i = 0; i < sys.A.rows(); ++i) a.push_back(array_json(sys.A.row(i).transpose().array()));
  return {{"n", sys.size()}, {"x0", array_json(sys.x0.array())}, {"A", std::move(a)},
          {"theta", array_json(sys.theta.array())}};
}

Json clearing_result_to_json(const ClearingResult& result) {
  return {{"schema_version", kSchemaVersion},
          {"x_star", array_json(result.x_star.array())},
          {"defaults", result.defaults},
          {"equity", array_json(result.equity.array())},
          {"iterations", result.iterations},
          {"diverged", result.diverged}};
}

}  // namespace cascade
