#ifndef CASCADE_MEANFIELD_HPP
#define CASCADE_MEANFIELD_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cascade/models.hpp"
#include "cascade/normal.hpp"

namespace cascade {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected (delta-fragility) recursion for the three model classes.
///  constant load:            X' = P(X)
///  load redistribution:      X' = P(phi0 / (1 - X)), dist centred on mu + phi0
///  overload redistribution:  X' = P(-<theta>_X X / (1 - X)), with X' = P(0) at X = 0
/// X >= 1 maps to 1.
double mf1_step(ModelClass cls, double X, const ThresholdDistribution& dist, double phi0 = 0.0);

/// Degree-k binomial fragility: X' = sum_j C(k, j) X^j (1 - X)^(k - j) P(j / k).
double mf2_step(int k, double X, const ThresholdDistribution& dist);

/// Binomial weights C(k, j) q^j (1 - q)^(k - j), j = 0..k.
Eigen::ArrayXd binomial_weights(int k, double q);

struct FixedPointOptions {
  double tol = 1e-10;
  long max_iter = 100000;
};

/// Iterates x <- step(x) from x0. Returns once |step(x) - x| <= tol and the
/// iteration is contracting with an estimated remaining distance below tol,
/// or the step is exactly stationary. A tiny step that is still growing
/// geometrically (unstable fixed point) does not stop the iteration.
/// Throws ConvergenceError after max_iter steps.
template <typename Step>
double solve_fixed_point(Step&& step, double x0, const FixedPointOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("fixed-point tolerance must be positive");
  double x = x0;
  double prev_delta = 0.0;
  bool have_prev = false;
  for (long it = 0; it < opt.max_iter; ++it) {
    const double next = step(x);
    const double delta = next - x;
    if (delta == 0.0) return next;
    if (std::abs(delta) <= opt.tol && have_prev && prev_delta != 0.0) {
      const double rate = delta / prev_delta;
      if (rate >= 0.0 && rate < 1.0 && std::abs(delta) / (1.0 - rate) <= opt.tol) return next;
      if (rate < 0.0 && std::abs(delta) <= opt.tol) return next;
    }
    prev_delta = delta;
    have_prev = true;
    x = next;
  }
  throw ConvergenceError("fixed-point iteration did not converge within " +
                         std::to_string(opt.max_iter) + " iterations (last x=" + std::to_string(x) + ")");
}

/// Binned density over [z_min, z_max]; bin b covers
/// [z_min + b h, z_min + (b + 1) h]. A bin counts as failing when its
/// centre is >= 0.
class DiscretizedDensity {
 public:
  DiscretizedDensity() = default;
  DiscretizedDensity(double z_min, double z_max, Eigen::ArrayXd mass);

  /// Net fragility z = -theta for theta ~ dist, binned with width 1 / (k m)
  /// so that 0 is a bin edge and every j / k shift is a whole number of
  /// bins. m is chosen so that the bin count is close to `target_bins`.
  /// Covers [-6 sigma - mu - 1.5, 2.5]; tails are lumped into the end bins.
  static DiscretizedDensity net_fragility(const ThresholdDistribution& dist, int k,
                                          Index target_bins = 4000);

  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  Index bins() const { return mass_.size(); }
  double bin_width() const { return (z_max_ - z_min_) / static_cast<double>(mass_.size()); }
  double center(Index b) const { return z_min_ + (static_cast<double>(b) + 0.5) * bin_width(); }
  const Eigen::ArrayXd& mass() const { return mass_; }

  double total_mass() const { return mass_.sum(); }
  double failing_mass() const;
  double healthy_mass() const { return total_mass() - failing_mass(); }
  Index first_failing_bin() const;

  /// Zeroes every failing bin.
  DiscretizedDensity truncated() const;

  /// Moves all mass up by `dz` >= 0. Whole-bin shifts are exact; otherwise
  /// mass is split linearly between the two nearest bins. Throws
  /// GridOverflowError if any mass would leave the grid.
  DiscretizedDensity shifted(double dz) const;

 private:
  double z_min_ = 0.0;
  double z_max_ = 0.0;
  Eigen::ArrayXd mass_;
};

/// One step of the partial-density recursion over healthy nodes:
/// X_f is the failing mass of `ph`; the failing part is removed and the
/// rest is mixed over shifts j / k with binomial weights B(j, k, X_f).
/// The fraction failed after the step is 1 - result.healthy_mass().
DiscretizedDensity mf3_step(int k, const DiscretizedDensity& ph);

/// Iterates mf3_step from the full initial net-fragility density until the
/// failed fraction converges (same stopping rule as solve_fixed_point).
double solve_mf3(int k, const ThresholdDistribution& dist, const FixedPointOptions& opt = {},
                 Index target_bins = 4000);

enum class PhaseMethod { mf1_constant, mf1_load, mf1_overload, mf2, mf3 };

struct PhaseSpec {
  PhaseMethod method = PhaseMethod::mf1_constant;
  double phi0 = 0.25;  // mf1_load only
  int k = 3;           // mf2 / mf3 only

  /// `mf1-i`, `mf1-ii`, `mf1-iii`, `mf2`, `mf3`.
  static PhaseMethod parse_method(std::string_view name);
  std::string method_name() const;
};

struct PhaseDiagramOptions {
  FixedPointOptions solver;
  Index mf3_bins = 4000;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// x0(i, j) and x_star(i, j) belong to (mu_values(i), sigma_values(j)).
struct PhaseDiagramGrid {
  Eigen::ArrayXd mu_values;
  Eigen::ArrayXd sigma_values;
  Eigen::MatrixXd x0;
  Eigen::MatrixXd x_star;
};

/// Converged failed fraction for one (mu, sigma) cell. mu and sigma
/// describe the initial net fragility z(0) ~ N(-mu, sigma).
double solve_cell(const PhaseSpec& spec, double mu, double sigma, const PhaseDiagramOptions& opt = {});

PhaseDiagramGrid phase_diagram(const PhaseSpec& spec, const Eigen::ArrayXd& mu_values,
                               const Eigen::ArrayXd& sigma_values, const PhaseDiagramOptions& opt = {});

/// Adjacent-cell pairs (along mu or sigma) whose x_star differs by more
/// than `jump`. Each entry is (i, j, i2, j2).
std::vector<std::array<Index, 4>> discontinuities(const PhaseDiagramGrid& grid, double jump = 0.5);

}  // namespace cascade

#endif  // CASCADE_MEANFIELD_HPP
