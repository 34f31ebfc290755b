#include "cascade/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cascade {

std::vector<Violation> validate_system(const FinancialSystem& sys, double tol) {
  std::vector<Violation> out;
  const Index n = sys.size();
  auto add = [&](std::string rule, Index r, Index c, std::string msg) {
    out.push_back({std::move(rule), r, c, std::move(msg)});
  };
  if (sys.A.rows() != n || sys.A.cols() != n) {
    add("shape", -1, -1, "liability matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    return out;
  }
  if (sys.theta.size() != n) {
    add("shape", -1, -1, "theta must have " + std::to_string(n) + " entries");
    return out;
  }
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(sys.x0(i)) || sys.x0(i) < 0.0) add("x0", i, -1, "total obligation must be finite and >= 0");
    if (!std::isfinite(sys.theta(i)) || sys.theta(i) < 0.0) add("theta", i, -1, "operating cash flow must be finite and >= 0");
    for (Index j = 0; j < n; ++j) {
      if (!std::isfinite(sys.A(i, j)) || sys.A(i, j) < 0.0) add("non-negative", i, j, "relative liability must be >= 0");
    }
    if (sys.A(i, i) != 0.0) add("diagonal", i, i, "a firm cannot owe itself");
    const double row = sys.A.row(i).sum();
    if (sys.x0(i) > 0.0 && std::abs(row - 1.0) > tol) {
      std::ostringstream os;
      os << "row sums to " << row << " but firm has obligations";
      add("row-stochastic", i, -1, os.str());
    } else if (sys.x0(i) == 0.0 && row != 0.0 && std::abs(row - 1.0) > tol) {
      std::ostringstream os;
      os << "row sums to " << row << "; expected 0 or 1";
      add("row-stochastic", i, -1, os.str());
    }
  }
  return out;
}

Eigen::VectorXd clearing_iterate(const FinancialSystem& sys, const Eigen::VectorXd& x) {
  return (sys.theta + sys.A.transpose() * x).cwiseMin(sys.x0);
}

Eigen::VectorXd en_fragility(const FinancialSystem& sys, const Eigen::VectorXd& x) {
  return sys.x0 - sys.A.transpose() * x;
}

Eigen::VectorXd equity(const FinancialSystem& sys, const Eigen::VectorXd& x) {
  return sys.theta + sys.A.transpose() * x - x;
}

namespace {

// Payments when firms in `defaulted` pay out their cash plus inflows and
// everybody else pays in full.
Eigen::VectorXd solve_with_defaults(const FinancialSystem& sys, const std::vector<bool>& defaulted,
                                    const Eigen::VectorXd& candidate, double tol) {
  const Index n = sys.size();
  std::vector<Index> idx;
  for (Index i = 0; i < n; ++i)
    if (defaulted[static_cast<std::size_t>(i)]) idx.push_back(i);
  const auto m = static_cast<Index>(idx.size());

  Eigen::VectorXd paying = sys.x0;
  for (Index i : idx) paying(i) = 0.0;

  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs(m);
  const Eigen::VectorXd external = sys.A.transpose() * paying;
  for (Index a = 0; a < m; ++a) {
    rhs(a) = sys.theta(idx[a]) + external(idx[a]);
    for (Index b = 0; b < m; ++b) lhs(a, b) -= sys.A(idx[b], idx[a]);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  lu.setThreshold(1e-12);
  Eigen::VectorXd x = sys.x0;
  if (lu.isInvertible()) {
    const Eigen::VectorXd y = lu.solve(rhs);
    for (Index a = 0; a < m; ++a) x(idx[a]) = std::clamp(y(a), 0.0, sys.x0(idx[a]));
    return x;
  }

  // A closed group of defaulters with no cash coming in: the linear system
  // has a continuum of solutions. Iterate down from the candidate to the
  // greatest one.
  x = candidate;
  for (long it = 0; it < 10'000'000; ++it) {
    const Eigen::VectorXd next = clearing_iterate(sys, x);
    const double change = (x - next).cwiseAbs().maxCoeff();
    x = next;
    if (change <= tol * 1e-3) break;
  }
  return x;
}

}  // namespace

ClearingResult fictitious_default(const FinancialSystem& sys, double tol) {
  if (const auto bad = validate_system(sys); !bad.empty()) {
    std::ostringstream os;
    os << "invalid financial system:";
    for (const auto& v : bad) os << " [" << v.rule << " row " << v.row << "] " << v.message << ";";
    throw std::invalid_argument(os.str());
  }
  const Index n = sys.size();
  ClearingResult res;
  std::vector<bool> defaulted(static_cast<std::size_t>(n), false);
  Eigen::VectorXd x = sys.x0;
  res.candidates.push_back(x);

  for (Index round = 0; round <= n + 1; ++round) {
    ++res.iterations;
    const Eigen::VectorXd inflow = sys.theta + sys.A.transpose() * x;
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!defaulted[ui] && sys.x0(i) > 0.0 && inflow(i) < sys.x0(i) - tol) {
        defaulted[ui] = true;
        changed = true;
      }
    }
    if (!changed) break;
    x = solve_with_defaults(sys, defaulted, x, tol);
    res.candidates.push_back(x);
  }

  res.x_star = x;
  res.equity = equity(sys, x);
  bool any_obligation = false;
  bool any_full_payer = false;
  for (Index i = 0; i < n; ++i) {
    if (defaulted[static_cast<std::size_t>(i)]) res.defaults.push_back(i);
    if (sys.x0(i) > 0.0) {
      any_obligation = true;
      if (!defaulted[static_cast<std::size_t>(i)]) any_full_payer = true;
    }
  }
  res.diverged = any_obligation && !any_full_payer;
  return res;
}

}  // namespace cascade
