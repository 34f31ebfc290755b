#ifndef CASCADE_CLEARING_HPP
#define CASCADE_CLEARING_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/network.hpp"

namespace cascade {

/// Interbank liability system. a(i, j) is the fraction of firm i's total
/// obligation x0(i) owed to firm j; theta(i) is its operating cash flow.
struct FinancialSystem {
  Eigen::VectorXd x0;
  Eigen::MatrixXd A;
  Eigen::VectorXd theta;

  Index size() const { return x0.size(); }
};

struct Violation {
  std::string rule;
  Index row = -1;
  Index col = -1;
  std::string message;
};

/// Every violated constraint: shapes, non-negativity, zero diagonal and,
/// for firms with obligations, rows summing to one within `tol`. Empty on
/// success.
std::vector<Violation> validate_system(const FinancialSystem& sys, double tol = 1e-9);

/// x'_i = min(theta_i + sum_j a_ji x_j, x0_i).
Eigen::VectorXd clearing_iterate(const FinancialSystem& sys, const Eigen::VectorXd& x);

/// x0_i - sum_j a_ji x_j: the debt left for operating cash to cover.
Eigen::VectorXd en_fragility(const FinancialSystem& sys, const Eigen::VectorXd& x);

/// theta_i + sum_j a_ji x_j - x_i.
Eigen::VectorXd equity(const FinancialSystem& sys, const Eigen::VectorXd& x);

struct ClearingResult {
  Eigen::VectorXd x_star;
  std::vector<Index> defaults;
  Eigen::VectorXd equity;
  Index iterations = 0;
  /// No firm with positive obligations pays in full.
  bool diverged = false;
  /// Candidate payment vectors, starting with x0.
  std::vector<Eigen::VectorXd> candidates;
};

/// Fictitious default algorithm. Starting from x0, each round adds the
/// firms that cannot pay the current candidate in full to the default set
/// and solves the linear system in which defaulters pay out everything they
/// receive plus their cash. Stops when the default set is stable, which
/// takes at most n + 1 rounds. Degenerate default sets whose linear system
/// is singular are resolved by monotone iteration of clearing_iterate.
ClearingResult fictitious_default(const FinancialSystem& sys, double tol = 1e-10);

}  // namespace cascade

#endif  // CASCADE_CLEARING_HPP
