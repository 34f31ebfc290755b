#ifndef CASCADE_NORMAL_HPP
#define CASCADE_NORMAL_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cascade {

/// Normal threshold distribution N(mu, sigma), sigma > 0.
template <typename Scalar>
struct Normal {
  Scalar mu{0};
  Scalar sigma{1};

  Normal() = default;
  Normal(Scalar mean, Scalar stddev) : mu(mean), sigma(stddev) {
    if (!(sigma > Scalar(0)) || !std::isfinite(sigma) || !std::isfinite(mu))
      throw std::invalid_argument("normal distribution needs finite mu and sigma > 0, got sigma=" +
                                  std::to_string(static_cast<double>(sigma)));
  }

  Scalar standardize(Scalar x) const { return (x - mu) / sigma; }
};

using ThresholdDistribution = Normal<double>;

template <typename Scalar>
Scalar standard_normal_pdf(Scalar z) {
  return std::exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar standard_normal_cdf(Scalar z) {
  return Scalar(0.5) * std::erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

template <typename Scalar>
Scalar normal_pdf(Scalar x, const Normal<Scalar>& dist) {
  return standard_normal_pdf(dist.standardize(x)) / dist.sigma;
}

/// P(theta <= x).
template <typename Scalar>
Scalar normal_cdf(Scalar x, const Normal<Scalar>& dist) {
  return standard_normal_cdf(dist.standardize(x));
}

/// x with normal_cdf(x) = p, by bisection on the standardized cdf.
template <typename Scalar>
Scalar quantile(Scalar p, const Normal<Scalar>& dist) {
  if (!(p > Scalar(0) && p < Scalar(1)))
    throw std::domain_error("quantile needs p in (0, 1), got " + std::to_string(static_cast<double>(p)));
  Scalar lo = -40, hi = 40;
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (standard_normal_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return dist.mu + dist.sigma * Scalar(0.5) * (lo + hi);
}

/// Mean of theta restricted to the lowest fraction X of the mass,
/// i.e. (integral of theta p(theta) up to the X-quantile) / X.
template <typename Scalar>
Scalar truncated_mean_below(Scalar X, const Normal<Scalar>& dist) {
  if (!(X > Scalar(0)) || X > Scalar(1))
    throw std::domain_error("truncated mean needs X in (0, 1], got " + std::to_string(static_cast<double>(X)));
  if (X == Scalar(1)) return dist.mu;
  const Scalar z = dist.standardize(quantile(X, dist));
  return dist.mu - dist.sigma * standard_normal_pdf(z) / X;
}

}  // namespace cascade

#endif  // CASCADE_NORMAL_HPP
