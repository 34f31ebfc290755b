#include "cascade/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cascade {

double mf1_step(ModelClass cls, double X, const ThresholdDistribution& dist, double phi0) {
  if (X >= 1.0) return 1.0;
  switch (cls) {
    case ModelClass::constant_load:
      return normal_cdf(X, dist);
    case ModelClass::load_redistribution:
      return normal_cdf(phi0 / (1.0 - X), dist);
    case ModelClass::overload_redistribution: {
      if (X <= 0.0) return normal_cdf(0.0, dist);
      const double mean_failed = truncated_mean_below(X, dist);
      return normal_cdf(-mean_failed * X / (1.0 - X), dist);
    }
  }
  return 0.0;
}

Eigen::ArrayXd binomial_weights(int k, double q) {
  if (k < 1) throw std::invalid_argument("degree k must be >= 1");
  Eigen::ArrayXd w(k + 1);
  double coeff = 1.0;
  for (int j = 0; j <= k; ++j) {
    w(j) = coeff * std::pow(q, j) * std::pow(1.0 - q, k - j);
    coeff = coeff * static_cast<double>(k - j) / static_cast<double>(j + 1);
  }
  return w;
}

double mf2_step(int k, double X, const ThresholdDistribution& dist) {
  const Eigen::ArrayXd w = binomial_weights(k, std::clamp(X, 0.0, 1.0));
  double next = 0.0;
  for (int j = 0; j <= k; ++j)
    next += w(j) * normal_cdf(static_cast<double>(j) / static_cast<double>(k), dist);
  return std::clamp(next, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// DiscretizedDensity

DiscretizedDensity::DiscretizedDensity(double z_min, double z_max, Eigen::ArrayXd mass)
    : z_min_(z_min), z_max_(z_max), mass_(std::move(mass)) {
  if (!(z_max_ > z_min_) || mass_.size() == 0)
    throw std::invalid_argument("density grid needs z_max > z_min and at least one bin");
  if ((mass_ < 0.0).any()) throw std::invalid_argument("density masses must be non-negative");
}

DiscretizedDensity DiscretizedDensity::net_fragility(const ThresholdDistribution& dist, int k,
                                                     Index target_bins) {
  if (k < 1) throw std::invalid_argument("degree k must be >= 1");
  const double lo = -6.0 * dist.sigma - dist.mu - 1.5;
  const double hi = 2.5;
  const double per_unit = static_cast<double>(std::max<Index>(target_bins, 1)) / (hi - lo);
  const long m = std::max(1L, std::lround(per_unit / k));
  const double h = 1.0 / static_cast<double>(k * m);
  const auto below = static_cast<Index>(std::ceil(-lo / h - 1e-9));
  const auto above = static_cast<Index>(std::ceil(hi / h - 1e-9));
  const Index n = below + above;

  // P(z <= e) = P(theta >= -e), and its complement, computed from the
  // standardized tails separately so neither loses precision.
  auto cdf_z = [&](double e) { return standard_normal_cdf((e + dist.mu) / dist.sigma); };
  auto sf_z = [&](double e) { return standard_normal_cdf(-(e + dist.mu) / dist.sigma); };

  Eigen::ArrayXd mass(n);
  for (Index b = 0; b < n; ++b) {
    const double a = static_cast<double>(b - below) * h;
    const double c = static_cast<double>(b + 1 - below) * h;
    if (b == 0)
      mass(b) = cdf_z(c);
    else if (b == n - 1)
      mass(b) = sf_z(a);
    else if (a >= -dist.mu)
      mass(b) = sf_z(a) - sf_z(c);
    else
      mass(b) = cdf_z(c) - cdf_z(a);
  }
  return DiscretizedDensity(-static_cast<double>(below) * h, static_cast<double>(above) * h,
                            mass.max(0.0));
}

Index DiscretizedDensity::first_failing_bin() const {
  const double h = bin_width();
  const auto b = static_cast<Index>(std::ceil(-z_min_ / h - 0.5));
  return std::clamp<Index>(b, 0, bins());
}

double DiscretizedDensity::failing_mass() const {
  const Index first = first_failing_bin();
  return mass_.tail(bins() - first).sum();
}

DiscretizedDensity DiscretizedDensity::truncated() const {
  DiscretizedDensity out = *this;
  const Index first = first_failing_bin();
  out.mass_.tail(bins() - first).setZero();
  return out;
}

namespace {

Index last_nonzero(const Eigen::ArrayXd& mass) {
  for (Index b = mass.size() - 1; b >= 0; --b)
    if (mass(b) > 0.0) return b;
  return -1;
}

void add_shifted(const Eigen::ArrayXd& src, double weight, double bins_shift, double z_max,
                 Eigen::ArrayXd& dst) {
  if (weight == 0.0) return;
  const Index n = src.size();
  const Index top = last_nonzero(src);
  if (top < 0) return;
  const double rounded = std::round(bins_shift);
  auto overflow = [&](Index reach) {
    std::ostringstream os;
    os << "density shift of " << bins_shift << " bins pushes mass to bin " << reach << " past z_max="
       << z_max << " (" << n << " bins); widen the grid";
    throw GridOverflowError(os.str());
  };
  if (std::abs(bins_shift - rounded) < 1e-9) {
    const auto s = static_cast<Index>(rounded);
    if (top + s >= n) overflow(top + s);
    dst.segment(s, top + 1) += weight * src.head(top + 1);
    return;
  }
  const auto lower = static_cast<Index>(std::floor(bins_shift));
  const double frac = bins_shift - static_cast<double>(lower);
  if (top + lower + 1 >= n) overflow(top + lower + 1);
  dst.segment(lower, top + 1) += (weight * (1.0 - frac)) * src.head(top + 1);
  dst.segment(lower + 1, top + 1) += (weight * frac) * src.head(top + 1);
}

}  // namespace

DiscretizedDensity DiscretizedDensity::shifted(double dz) const {
  if (!(dz >= 0.0)) throw std::invalid_argument("density shifts must be non-negative");
  DiscretizedDensity out = *this;
  out.mass_.setZero();
  add_shifted(mass_, 1.0, dz / bin_width(), z_max_, out.mass_);
  return out;
}

DiscretizedDensity mf3_step(int k, const DiscretizedDensity& ph) {
  const double failing = ph.failing_mass();
  const Eigen::ArrayXd weights = binomial_weights(k, std::clamp(failing, 0.0, 1.0));
  const DiscretizedDensity healthy = ph.truncated();
  Eigen::ArrayXd next = Eigen::ArrayXd::Zero(ph.bins());
  const double h = ph.bin_width();
  for (int j = 0; j <= k; ++j) {
    const double dz = static_cast<double>(j) / static_cast<double>(k);
    add_shifted(healthy.mass(), weights(j), dz / h, ph.z_max(), next);
  }
  return DiscretizedDensity(ph.z_min(), ph.z_max(), std::move(next));
}

double solve_mf3(int k, const ThresholdDistribution& dist, const FixedPointOptions& opt,
                 Index target_bins) {
  DiscretizedDensity ph = DiscretizedDensity::net_fragility(dist, k, target_bins);
  double x = 1.0 - ph.healthy_mass();
  double prev_delta = 0.0;
  bool have_prev = false;
  for (long it = 0; it < opt.max_iter; ++it) {
    if (ph.failing_mass() == 0.0) return x;
    ph = mf3_step(k, ph);
    const double next = 1.0 - ph.healthy_mass();
    const double delta = next - x;
    x = next;
    if (delta == 0.0) return x;
    if (std::abs(delta) <= opt.tol && have_prev && prev_delta != 0.0) {
      const double rate = delta / prev_delta;
      if (rate >= 0.0 && rate < 1.0 && std::abs(delta) / (1.0 - rate) <= opt.tol) return x;
      if (rate < 0.0) return x;
    }
    prev_delta = delta;
    have_prev = true;
  }
  throw ConvergenceError("partial-density recursion did not converge within " +
                         std::to_string(opt.max_iter) + " steps");
}

}  // namespace cascade
