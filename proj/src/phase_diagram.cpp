#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "cascade/meanfield.hpp"

namespace cascade {

PhaseMethod PhaseSpec::parse_method(std::string_view name) {
  if (name == "mf1-i") return PhaseMethod::mf1_constant;
  if (name == "mf1-ii") return PhaseMethod::mf1_load;
  if (name == "mf1-iii") return PhaseMethod::mf1_overload;
  if (name == "mf2") return PhaseMethod::mf2;
  if (name == "mf3") return PhaseMethod::mf3;
  throw std::invalid_argument("unknown mean-field method '" + std::string(name) + "'");
}

std::string PhaseSpec::method_name() const {
  switch (method) {
    case PhaseMethod::mf1_constant: return "mf1-i";
    case PhaseMethod::mf1_load: return "mf1-ii";
    case PhaseMethod::mf1_overload: return "mf1-iii";
    case PhaseMethod::mf2: return "mf2";
    case PhaseMethod::mf3: return "mf3";
  }
  return "invalid";
}

double solve_cell(const PhaseSpec& spec, double mu, double sigma, const PhaseDiagramOptions& opt) {
  const ThresholdDistribution dist(mu, sigma);
  const double x0 = normal_cdf(0.0, dist);
  double x_star = x0;
  switch (spec.method) {
    case PhaseMethod::mf1_constant:
      x_star = solve_fixed_point(
          [&](double x) { return mf1_step(ModelClass::constant_load, x, dist); }, x0, opt.solver);
      break;
    case PhaseMethod::mf1_load: {
      // P(phi0 / (1 - X)) under N(mu + phi0, sigma) equals P(phi0 X / (1 - X))
      // under N(mu, sigma). The second form never rounds mu + phi0, which
      // keeps X* monotone in phi0 down to the last ulp.
      const double phi0 = spec.phi0;
      x_star = solve_fixed_point(
          [&](double x) { return x >= 1.0 ? 1.0 : normal_cdf(phi0 * x / (1.0 - x), dist); }, x0, opt.solver);
      break;
    }
    case PhaseMethod::mf1_overload:
      x_star = solve_fixed_point(
          [&](double x) { return mf1_step(ModelClass::overload_redistribution, x, dist); }, x0, opt.solver);
      break;
    case PhaseMethod::mf2:
      x_star = solve_fixed_point([&](double x) { return mf2_step(spec.k, x, dist); }, x0, opt.solver);
      break;
    case PhaseMethod::mf3:
      x_star = solve_mf3(spec.k, dist, opt.solver, opt.mf3_bins);
      break;
  }
  // binning can leave the mf3 start a rounding error below the analytic x0
  return std::clamp(std::max(x_star, x0), 0.0, 1.0);
}

PhaseDiagramGrid phase_diagram(const PhaseSpec& spec, const Eigen::ArrayXd& mu_values,
                               const Eigen::ArrayXd& sigma_values, const PhaseDiagramOptions& opt) {
  if (mu_values.size() == 0 || sigma_values.size() == 0)
    throw std::invalid_argument("phase diagram grids must be non-empty");
  if (!mu_values.allFinite() || !sigma_values.allFinite())
    throw std::invalid_argument("phase diagram grids must be finite");
  if ((sigma_values <= 0.0).any()) throw std::invalid_argument("sigma grid values must be > 0");
  if (spec.method == PhaseMethod::mf1_load && !(spec.phi0 > 0.0))
    throw std::invalid_argument("load redistribution needs phi0 > 0");
  if ((spec.method == PhaseMethod::mf2 || spec.method == PhaseMethod::mf3) && spec.k < 1)
    throw std::invalid_argument("degree k must be >= 1");

  PhaseDiagramGrid grid;
  grid.mu_values = mu_values;
  grid.sigma_values = sigma_values;
  const Index rows = mu_values.size();
  const Index cols = sigma_values.size();
  grid.x0.resize(rows, cols);
  grid.x_star.resize(rows, cols);

  const Index cells = rows * cols;
  std::atomic<Index> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::string error_where;

  auto worker = [&] {
    for (Index c = next++; c < cells; c = next++) {
      const Index i = c / cols;
      const Index j = c % cols;
      const double mu = mu_values(i);
      const double sigma = sigma_values(j);
      try {
        grid.x0(i, j) = normal_cdf(0.0, ThresholdDistribution(mu, sigma));
        grid.x_star(i, j) = solve_cell(spec, mu, sigma, opt);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          std::ostringstream os;
          os << spec.method_name() << " at mu=" << mu << ", sigma=" << sigma << ": " << e.what();
          error_where = os.str();
          error = std::current_exception();
        }
        next = cells;
      }
    }
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<Index>(threads, cells));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const ConvergenceError&) {
      throw ConvergenceError(error_where);
    } catch (const GridOverflowError&) {
      throw GridOverflowError(error_where);
    } catch (const std::exception&) {
      throw std::runtime_error(error_where);
    }
  }
  return grid;
}

std::vector<std::array<Index, 4>> discontinuities(const PhaseDiagramGrid& grid, double jump) {
  std::vector<std::array<Index, 4>> out;
  const Index rows = grid.x_star.rows();
  const Index cols = grid.x_star.cols();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (i + 1 < rows && std::abs(grid.x_star(i + 1, j) - grid.x_star(i, j)) > jump)
        out.push_back({i, j, i + 1, j});
      if (j + 1 < cols && std::abs(grid.x_star(i, j + 1) - grid.x_star(i, j)) > jump)
        out.push_back({i, j, i, j + 1});
    }
  }
  return out;
}

}  // namespace cascade
