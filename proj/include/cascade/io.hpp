#ifndef CASCADE_IO_HPP
#define CASCADE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cascade/clearing.hpp"
#include "cascade/engine.hpp"
#include "cascade/meanfield.hpp"
#include "cascade/network.hpp"

namespace cascade {

using Json = nlohmann::json;

/// Version stamped into every JSON output.
inline constexpr int kSchemaVersion = 1;

/// Malformed input, with "source:line: " context in what().
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header `n <count> directed|undirected`, then one `i j weight` triple per
/// line. Whitespace separated; `#` starts a comment.
Network read_edge_list(std::istream& in, const std::string& source = "<edge list>");
Network read_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const Network& net);

struct NodeAttributes {
  Eigen::ArrayXd phi0;
  Eigen::ArrayXd theta;
  std::optional<Eigen::ArrayXd> theta_prime;
};

/// `i phi0 theta [theta_prime]` per line, every node exactly once. Lines
/// without theta_prime fall back to theta when other lines set it.
NodeAttributes read_node_file(std::istream& in, Index n, const std::string& source = "<node file>");
NodeAttributes read_node_file(const std::filesystem::path& path, Index n);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

Json trace_to_json(const CascadeTrace& trace, const std::string& model);
CascadeTrace trace_from_json(const Json& doc);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

/// Header `mu,sigma,x0,x_star`, one row per cell, mu-major.
void write_phase_csv(std::ostream& out, const PhaseDiagramGrid& grid);
void write_phase_csv(const std::filesystem::path& path, const PhaseDiagramGrid& grid);

/// Column-major series: `columns[c][row]`. All columns must have equal length.
void write_series_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);
void write_series_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

/// {n, x0: [...], A: [[...]], theta: [...]}.
FinancialSystem financial_system_from_json(const Json& doc);
Json financial_system_to_json(const FinancialSystem& sys);
Json clearing_result_to_json(const ClearingResult& result);

}  // namespace cascade

#endif  // CASCADE_IO_HPP
