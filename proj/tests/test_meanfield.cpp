#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "cascade/meanfield.hpp"
#include "cascade/normal.hpp"
#include "oracles.hpp"

using namespace cascade;

TEST_CASE("normal_cdf: examples against quadrature") {
  CHECK(normal_cdf(0.3, Normal<double>(0.3, 0.7)) == 0.5);
  CHECK(normal_cdf(1.96, Normal<double>(0.0, 1.0)) == doctest::Approx(oracle::cdf(1.96, 0, 1)).epsilon(1e-9));
  CHECK(normal_cdf(1.96, Normal<double>(0.0, 1.0)) == doctest::Approx(0.9750).epsilon(1e-4));
  CHECK(normal_cdf(0.0, Normal<double>(0.2, 0.1)) == doctest::Approx(oracle::cdf(0.0, 0.2, 0.1)).epsilon(1e-9));
  CHECK(normal_cdf(0.0, Normal<double>(0.2, 0.1)) == doctest::Approx(0.02275).epsilon(1e-3));
}

TEST_CASE("normal_cdf: monotone with limits 0 and 1") {
  const Normal<double> d(0.1, 0.3);
  double prev = 0.0;
  for (double x = -5.0; x <= 5.0; x += 0.01) {
    const double c = normal_cdf(x, d);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(normal_cdf(-50.0, d) == 0.0);
  CHECK(normal_cdf(50.0, d) == 1.0);
}

TEST_CASE("normal toolkit works in single precision too") {
  const Normal<float> d(0.0f, 1.0f);
  CHECK(normal_cdf(1.96f, d) == doctest::Approx(0.975).epsilon(1e-4));
}

TEST_CASE("quantile: examples and round trip") {
  const Normal<double> std_normal(0.0, 1.0);
  CHECK(quantile(0.5, Normal<double>(0.37, 2.0)) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(quantile(0.975, std_normal) == doctest::Approx(oracle::quantile(0.975, 0, 1)).epsilon(1e-9));
  CHECK(quantile(0.975, std_normal) == doctest::Approx(1.96).epsilon(1e-3));
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    CHECK(std::abs(normal_cdf(quantile(p, Normal<double>(0.2, 0.4)), Normal<double>(0.2, 0.4)) - p) <= 1e-7);
  }
  CHECK_THROWS_AS(quantile(0.0, std_normal), std::domain_error);
  CHECK_THROWS_AS(quantile(1.0, std_normal), std::domain_error);
}

TEST_CASE("truncated_mean_below: examples") {
  const Normal<double> d(0.0, 1.0);
  CHECK(truncated_mean_below(1.0, Normal<double>(0.4, 0.2)) == 0.4);
  CHECK(truncated_mean_below(0.5, d) == doctest::Approx(oracle::truncated_mean(0.5, 0, 1)).epsilon(1e-9));
  CHECK(truncated_mean_below(0.5, d) == doctest::Approx(-0.7979).epsilon(1e-4));
  double prev = -1e300;
  for (double X = 0.001; X <= 1.0; X += 0.001) {
    const double m = truncated_mean_below(X, Normal<double>(0.3, 0.5));
    CHECK(m >= prev);
    CHECK(m <= 0.3 + 1e-12);
    prev = m;
  }
  CHECK_THROWS_AS(truncated_mean_below(0.0, d), std::domain_error);
  CHECK_THROWS_AS(truncated_mean_below(1.5, d), std::domain_error);
}

TEST_CASE("mf1_step: examples") {
  const Normal<double> d(0.2, 0.1);
  CHECK(mf1_step(ModelClass::constant_load, 0.2, d) == 0.5);
  CHECK(mf1_step(ModelClass::constant_load, 0.0, d) == doctest::Approx(oracle::cdf(0.0, 0.2, 0.1)).epsilon(1e-9));
  CHECK(mf1_step(ModelClass::constant_load, 0.0, d) == doctest::Approx(normal_cdf(-0.2 / 0.1, Normal<double>(0, 1))));
  for (double phi0 : {0.1, 0.25, 0.4}) {
    const Normal<double> shifted(0.2 + phi0, 0.1);
    CHECK(mf1_step(ModelClass::load_redistribution, 0.0, shifted, phi0) ==
          doctest::Approx(oracle::cdf(0.0, 0.2, 0.1)).epsilon(1e-9));
  }
  CHECK(mf1_step(ModelClass::overload_redistribution, 0.0, d) == normal_cdf(0.0, d));
  for (auto cls : {ModelClass::constant_load, ModelClass::load_redistribution, ModelClass::overload_redistribution})
    CHECK(mf1_step(cls, 1.0, d, 0.25) == 1.0);
}

TEST_CASE("mf1 class (iii) matches the quadrature form of the recursion") {
  const Normal<double> d(0.3, 0.4);
  for (double X : {0.05, 0.2, 0.5, 0.8}) {
    const double arg = -oracle::truncated_mean(X, 0.3, 0.4) * X / (1.0 - X);
    CHECK(mf1_step(ModelClass::overload_redistribution, X, d) == doctest::Approx(oracle::cdf(arg, 0.3, 0.4)).epsilon(1e-8));
  }
}

TEST_CASE("mean-field steps map [0,1] into [0,1]; all but overload are monotone") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mu(0.0, 1.0), sigma(0.01, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    const Normal<double> d(mu(rng), sigma(rng));
    const Normal<double> shifted(d.mu + 0.25, d.sigma);
    // Once q_X > 0, newly failed nodes have positive thresholds and absorb
    // overload, so the overload map may decrease.
    const std::vector<std::pair<std::function<double(double)>, bool>> steps{
        {[&](double x) { return mf1_step(ModelClass::constant_load, x, d); }, true},
        {[&](double x) { return mf1_step(ModelClass::load_redistribution, x, shifted, 0.25); }, true},
        {[&](double x) { return mf1_step(ModelClass::overload_redistribution, x, d); }, false},
        {[&](double x) { return mf2_step(3, x, d); }, true}};
    for (const auto& [step, monotone] : steps) {
      double prev = -1.0;
      for (double x = 0.0; x <= 1.0; x += 1.0 / 512) {
        const double y = step(x);
        CHECK(y >= 0.0);
        CHECK(y <= 1.0);
        if (monotone) CHECK(y >= prev - 1e-15);
        prev = y;
      }
    }
  }
}

TEST_CASE("solve_fixed_point: examples") {
  CHECK(solve_fixed_point([](double x) { return x; }, 0.37) == 0.37);
  const Normal<double> a(0.3, 0.2);
  const double x0 = normal_cdf(0.0, a);
  CHECK(x0 == doctest::Approx(0.0668).epsilon(1e-3));
  const double full = solve_fixed_point([&](double x) { return mf1_step(ModelClass::constant_load, x, a); }, x0);
  CHECK(full == doctest::Approx(0.9998).epsilon(1e-3));
  CHECK(std::abs(normal_cdf(full, a) - full) <= 1e-10);

  const Normal<double> b(0.8, 0.1);
  const double none =
      solve_fixed_point([&](double x) { return mf1_step(ModelClass::constant_load, x, b); }, normal_cdf(0.0, b));
  CHECK(none < 1e-10);
}

TEST_CASE("solve_fixed_point: the iteration from x0 is monotone and the limit is a fixed point") {
  for (double mu : {0.1, 0.3, 0.5}) {
    for (double sigma : {0.05, 0.2, 0.6}) {
      const Normal<double> d(mu, sigma);
      std::vector<double> xs;
      auto step = [&](double x) {
        xs.push_back(x);
        return mf1_step(ModelClass::overload_redistribution, x, d);
      };
      const double xstar = solve_fixed_point(step, normal_cdf(0.0, d));
      for (std::size_t t = 1; t < xs.size(); ++t) CHECK(xs[t] >= xs[t - 1]);
      CHECK(std::abs(mf1_step(ModelClass::overload_redistribution, xstar, d) - xstar) <= 1e-10);
    }
  }
}

TEST_CASE("solve_fixed_point: does not stop at an unstable fixed point") {
  // x' = 2x has an unstable fixed point at 0; from 1e-14 it must move away.
  const double x = solve_fixed_point([](double v) { return std::min(1.0, 2.0 * v); }, 1e-14);
  CHECK(x == 1.0);
  CHECK_THROWS_AS(solve_fixed_point([](double v) { return 1.0 - v; }, 0.2, {1e-10, 50}), ConvergenceError);
  CHECK_THROWS_AS(solve_fixed_point([](double v) { return v; }, 0.2, {0.0, 50}), std::invalid_argument);
}

TEST_CASE("mf2_step: examples") {
  const Normal<double> d(0.4, 0.3);
  CHECK(mf2_step(3, 0.0, d) == normal_cdf(0.0, d));
  for (int k : {1, 2, 3, 7, 20})
    for (double q : {0.0, 0.1, 0.5, 0.93, 1.0}) CHECK(binomial_weights(k, q).sum() == doctest::Approx(1.0).epsilon(1e-14));
  const double expected = 0.25 * oracle::cdf(0.0, 0.4, 0.3) + 0.5 * oracle::cdf(0.5, 0.4, 0.3) +
                          0.25 * oracle::cdf(1.0, 0.4, 0.3);
  CHECK(mf2_step(2, 0.5, d) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("mf2_step agrees with a direct binomial expansion") {
  for (int k : {1, 3, 5, 12}) {
    for (double X : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const double mu = 0.35, sigma = 0.2;
      double expected = 0.0;
      for (int j = 0; j <= k; ++j) expected += oracle::binomial_pmf(k, j, X) * oracle::cdf(double(j) / k, mu, sigma);
      CHECK(mf2_step(k, X, Normal<double>(mu, sigma)) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("mf2 with k=1 and nearly degenerate thresholds is the two-point map") {
  const Normal<double> d(0.5, 1e-4);
  for (double X : {0.0, 0.25, 0.9})
    CHECK(mf2_step(1, X, d) == doctest::Approx((1.0 - X) * 0.0 + X * 1.0).epsilon(1e-12));
}

TEST_CASE("DiscretizedDensity: aligned grid and unit mass") {
  const Normal<double> d(0.3, 0.2);
  for (int k : {1, 2, 3, 5}) {
    const auto p = DiscretizedDensity::net_fragility(d, k);
    CHECK(p.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((p.mass() >= 0.0).all());
    const double bins_per_shift = (1.0 / k) / p.bin_width();
    CHECK(std::abs(bins_per_shift - std::round(bins_per_shift)) < 1e-9);
    const double zero_edge = -p.z_min() / p.bin_width();
    CHECK(std::abs(zero_edge - std::round(zero_edge)) < 1e-9);
    CHECK(p.z_min() <= -6 * 0.2 - 0.3 - 1.5 + 1e-12);
    CHECK(p.z_max() >= 2.5 - 1e-12);
    CHECK(p.failing_mass() == doctest::Approx(oracle::cdf(0.0, 0.3, 0.2)).epsilon(1e-9));
  }
}

TEST_CASE("mf3_step: no failing mass leaves the density unchanged") {
  const Normal<double> d(1.5, 0.2);
  const auto p = DiscretizedDensity::net_fragility(d, 3).truncated();
  CHECK(p.failing_mass() == 0.0);
  const auto q = mf3_step(3, p);
  CHECK((q.mass() == p.mass()).all());
}

TEST_CASE("mf3_step: matches a brute-force convolution on the grid") {
  std::mt19937_64 rng(8);
  for (int k : {1, 2, 3, 4}) {
    const Index bins = 12 * k;
    const double h = 1.0 / (k * 2.0);
    const double z_min = -h * bins / 2;
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(bins);
    for (Index b = 0; b < bins / 4; ++b) mass(b) = std::uniform_real_distribution<double>(0.0, 0.05)(rng);
    for (Index b = bins / 2; b < bins / 2 + 3; ++b) mass(b) = 0.1;  // failing mass
    const DiscretizedDensity p(z_min, z_min + h * bins, mass);
    const auto q = mf3_step(k, p);

    // Every healthy bin b moves to the bin holding centre(b) + j/k.
    double xf = 0.0;
    for (Index b = 0; b < bins; ++b)
      if (z_min + (b + 0.5) * h >= 0.0) xf += mass(b);
    std::vector<double> expected(static_cast<std::size_t>(bins), 0.0);
    for (Index b = 0; b < bins; ++b) {
      const double centre = z_min + (b + 0.5) * h;
      if (centre >= 0.0) continue;
      for (int j = 0; j <= k; ++j) {
        const auto target = static_cast<std::size_t>(std::floor((centre + double(j) / k - z_min) / h));
        expected[target] += oracle::binomial_pmf(k, j, xf) * mass(b);
      }
    }
    for (Index b = 0; b < bins; ++b) CHECK(q.mass()(b) == doctest::Approx(expected[static_cast<std::size_t>(b)]).epsilon(1e-12));
    CHECK(q.total_mass() <= p.total_mass() + 1e-15);
  }
}

TEST_CASE("mf3_step: single bin at -0.6 fully failing neighbourhood") {
  // k = 3, X_f = 1: all mass moves by exactly 1.
  const double h = 0.1 / 3.0;
  const Index bins = 90;
  const double z_min = -1.5;
  Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(bins);
  const auto src = static_cast<Index>(std::lround((-0.6 - z_min) / h - 0.5));
  mass(src) = 0.4;
  mass(bins - 1) = 1.0;  // failing mass far to the right; X_f = 1
  const DiscretizedDensity p(z_min, z_min + h * bins, mass);
  const auto q = mf3_step(3, p);
  const auto expected = static_cast<Index>(std::lround((0.4 - z_min) / h - 0.5));
  CHECK(q.mass()(expected) == doctest::Approx(0.4));
  CHECK(q.total_mass() == doctest::Approx(0.4));
}

TEST_CASE("shifting the healthy part preserves its mass") {
  const auto p = DiscretizedDensity::net_fragility(Normal<double>(0.6, 0.2), 3).truncated();
  for (double dz : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 0.01234})
    CHECK(std::abs(p.shifted(dz).total_mass() - p.total_mass()) <= 1e-12);
  CHECK_THROWS_AS(p.shifted(5.0), GridOverflowError);
  CHECK_THROWS_AS(p.shifted(-0.1), std::invalid_argument);
  // The untruncated density carries tail mass in its top bin.
  CHECK_THROWS_AS(DiscretizedDensity::net_fragility(Normal<double>(0.6, 0.2), 3).shifted(0.5), GridOverflowError);
}

TEST_CASE("all solvers give X(1) = Phi(-mu/sigma) from the no-failure state") {
  const Normal<double> d(0.35, 0.15);
  const double x0 = oracle::cdf(0.0, 0.35, 0.15);
  CHECK(mf1_step(ModelClass::constant_load, 0.0, d) == doctest::Approx(x0).epsilon(1e-9));
  CHECK(mf2_step(3, 0.0, d) == doctest::Approx(x0).epsilon(1e-9));
  const auto p = DiscretizedDensity::net_fragility(d, 3);
  CHECK(p.failing_mass() == doctest::Approx(x0).epsilon(1e-9));
}

TEST_CASE("solve_mf3 reaches a fixed point of its recursion") {
  const Normal<double> d(0.4, 0.3);
  const double x = solve_mf3(3, d);
  CHECK(x >= normal_cdf(0.0, d) - 1e-12);
  CHECK(x <= 1.0);
  // Small sigma at mu = 0.2: thresholds too uniform for the reshaped density to cascade.
  CHECK(solve_mf3(3, Normal<double>(0.2, 0.02)) < 1e-6);
  CHECK(solve_fixed_point([](double v) { return mf2_step(3, v, Normal<double>(0.2, 0.02)); },
                          normal_cdf(0.0, Normal<double>(0.2, 0.02))) > 1.0 - 1e-6);
}

TEST_CASE("phase_diagram: layout and invariants") {
  const Eigen::ArrayXd mu = Eigen::ArrayXd::LinSpaced(6, 0.0, 1.0);
  const Eigen::ArrayXd sigma = Eigen::ArrayXd::LinSpaced(5, 0.1, 0.9);
  for (const char* m : {"mf1-i", "mf1-ii", "mf1-iii", "mf2", "mf3"}) {
    PhaseSpec spec;
    spec.method = PhaseSpec::parse_method(m);
    const auto grid = phase_diagram(spec, mu, sigma, {{}, 1000, 2});
    CHECK(grid.x_star.rows() == 6);
    CHECK(grid.x_star.cols() == 5);
    for (Index j = 0; j < 5; ++j) CHECK(grid.x0(0, j) == 0.5);
    CHECK((grid.x_star.array() >= grid.x0.array()).all());
    CHECK((grid.x_star.array() <= 1.0).all());
    CHECK((grid.x0.array() >= 0.0).all());
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 5; ++j)
        CHECK(grid.x_star(i, j) == solve_cell(spec, mu(i), sigma(j), {{}, 1000, 1}));
  }
}

TEST_CASE("phase_diagram: errors name the cell") {
  PhaseSpec spec;
  spec.method = PhaseMethod::mf2;
  const Eigen::ArrayXd mu = Eigen::ArrayXd::LinSpaced(3, 0.0, 1.0);
  CHECK_THROWS_AS(phase_diagram(spec, mu, Eigen::ArrayXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(phase_diagram(spec, Eigen::ArrayXd(), mu), std::invalid_argument);
  CHECK_THROWS_WITH_AS(phase_diagram(spec, mu, Eigen::ArrayXd::Constant(1, 0.3), {{1e-10, 1}, 4000, 1}),
                       doctest::Contains("mf2 at mu=0"), ConvergenceError);
  CHECK_THROWS_AS(PhaseSpec::parse_method("mf4"), std::invalid_argument);
}

TEST_CASE("discontinuities: adjacent jumps above the threshold") {
  PhaseDiagramGrid g;
  g.x_star = (Eigen::MatrixXd(2, 3) << 1.0, 0.9, 0.1, 0.95, 0.2, 0.15).finished();
  const auto jumps = discontinuities(g);
  CHECK(jumps.size() == 3);
}
