#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "r2e/error.hpp"
#include "r2e/model.hpp"

using namespace r2e;

namespace {

ModelParams params_with(double k1, double k2, double k3, double k4, double k5, double k6) {
  ModelParams p;
  p.k1 = k1;
  p.k2 = k2;
  p.k3 = k3;
  p.k4 = k4;
  p.k5 = k5;
  p.k6 = k6;
  return p;
}

std::vector<double> draw(const DriftDiffusion& dd, double barrier, int n, std::uint64_t seed) {
  RandomStream rng(seed, 99);
  std::vector<double> out(n);
  for (auto& v : out) v = sample_hitting_time(dd, barrier, rng);
  return out;
}

}  // namespace

TEST_CASE("drift and diffusion follow the brightness model") {
  auto dd = compute_drift_diffusion(1.0, 2.0, params_with(1, 1, 0, 0, 0, 0));
  CHECK(dd.mu == doctest::Approx(1.0));
  CHECK(dd.sigma == 0.0);

  dd = compute_drift_diffusion(4.0, 0.0, params_with(0, 1e-9, 1, 0, 0, 0));
  CHECK(dd.sigma == doctest::Approx(0.5).epsilon(1e-9));

  const auto p = params_with(3, 7, 2, 1e-6, 5e-7, 3e-5);
  dd = compute_drift_diffusion(0.0, 0.0, p);
  CHECK(dd.mu == p.k4);
  CHECK(dd.sigma == p.k6);
}

TEST_CASE("invalid brightness or parameters are rejected") {
  const ModelParams p;
  CHECK_THROWS_AS(compute_drift_diffusion(-1.0, 0.0, p), Error);
  CHECK_THROWS_AS(compute_drift_diffusion(NAN, 0.0, p), Error);
  CHECK_THROWS_AS(compute_drift_diffusion(1.0, INFINITY, p), Error);
  CHECK_THROWS_AS(compute_drift_diffusion(4.0, 0.0, params_with(0, 0, 1, 0, 0, 0)), Error);
  CHECK_THROWS_AS(compute_drift_diffusion(1.0, 0.0, params_with(-1, 1, 0, 0, 0, 0)), Error);
  ModelParams t;
  t.theta_off = 0.0;
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("hitting time mean equals barrier over drift") {
  const auto s = draw({2.0, 1.0}, 1.0, 100000, 1);
  double mean = 0;
  for (double v : s) mean += v;
  mean /= s.size();
  // sd of the mean: sqrt(m^3/lambda / n) = sqrt(0.125 / 1e5) ~ 1.1e-3
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("vanishing diffusion gives the deterministic hitting time") {
  for (double v : draw({1.0, 1e-9}, 1.0, 1000, 2)) CHECK(std::abs(v - 1.0) < 1e-3);
  RandomStream rng(1, 1);
  CHECK(sample_hitting_time({0.5, 0.0}, 2.0, rng) == 4.0);
}

TEST_CASE("no drift and no diffusion never hits") {
  RandomStream rng(1, 1);
  CHECK(sample_hitting_time({0.0, 0.0}, 1.0, rng) == kNeverHits);
  CHECK_THROWS_AS(sample_hitting_time({1.0, 1.0}, 0.0, rng), Error);
  CHECK_THROWS_AS(sample_hitting_time({1.0, 1.0}, -1.0, rng), Error);
}

TEST_CASE("analytic IG CDF agrees with quadrature of the density") {
  for (double mean : {0.25, 1.0, 4.0})
    for (double shape : {0.0625, 1.0, 16.0})
      for (double x : {0.05, 0.5, 1.0, 3.0, 10.0})
        CHECK(inverse_gaussian_cdf(x, mean, shape) ==
              doctest::Approx(oracle::ig_cdf_quadrature(x, mean, shape)).epsilon(1e-6));
}

TEST_CASE("sampler matches the analytic IG law (KS < 0.01, n = 1e5)") {
  const auto s = draw({1.0, 1.0}, 1.0, 100000, 3);
  const double ks = oracle::ks_statistic(s, [](double x) { return inverse_gaussian_cdf(x, 1.0, 1.0); });
  CHECK(ks < 0.01);
}

TEST_CASE("zero drift uses the Levy law") {
  const double sigma = 0.5, barrier = 2.0;
  const auto s = draw({0.0, sigma}, barrier, 100000, 4);
  const double c = barrier * barrier / (sigma * sigma);
  const double ks = oracle::ks_statistic(s, [&](double x) {
    return std::erfc(std::sqrt(c / (2 * x)));
  });
  CHECK(ks < 0.01);
  // Drift at or below epsilon counts as zero.
  RandomStream a(5, 5), b(5, 5);
  CHECK(sample_hitting_time({1e-13, sigma}, barrier, a) ==
        sample_hitting_time({0.0, sigma}, barrier, b));
}
