#ifndef CASCADE_TESTS_SUPPORT_HPP
#define CASCADE_TESTS_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/generators.hpp"
#include "cascade/network.hpp"
#include "oracles.hpp"

namespace support {

using cascade::Index;

inline oracle::Matrix dense(const cascade::Network& net) {
  const auto n = static_cast<std::size_t>(net.size());
  oracle::Matrix adj(n, std::vector<double>(n, 0.0));
  for (const auto& e : net.edges()) {
    adj[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] = 1.0;
    if (net.undirected()) adj[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.from)] = 1.0;
  }
  return adj;
}

inline std::vector<double> to_vec(const Eigen::ArrayXd& a) { return {a.begin(), a.end()}; }

inline oracle::Flags to_flags(const cascade::FailureMask& m) {
  oracle::Flags f(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.size(); ++i) f[static_cast<std::size_t>(i)] = m(i) ? 1 : 0;
  return f;
}

inline Eigen::ArrayXd normal_array(Index n, double mu, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> d(mu, sigma);
  Eigen::ArrayXd a(n);
  for (Index i = 0; i < n; ++i) a(i) = d(rng);
  return a;
}

/// Directed or undirected G(n, p) with n in [lo, hi].
inline cascade::Network random_network(std::mt19937_64& rng, Index lo = 3, Index hi = 30) {
  const Index n = std::uniform_int_distribution<Index>(lo, hi)(rng);
  const double p = std::uniform_real_distribution<double>(0.05, 0.4)(rng);
  const bool directed = std::bernoulli_distribution(0.5)(rng);
  return cascade::erdos_renyi(n, p, directed, rng);
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cascade-tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace support

#endif  // CASCADE_TESTS_SUPPORT_HPP
