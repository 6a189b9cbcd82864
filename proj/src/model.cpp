#include "r2e/model.hpp"

#include <algorithm>
#include <cmath>

#include "r2e/error.hpp"

namespace r2e {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(k1) && std::isfinite(k2) && std::isfinite(k3) &&
              std::isfinite(k4) && std::isfinite(k5) && std::isfinite(k6),
          "model parameters must be finite");
  require(k2 > 0.0, "k2 must be > 0");
  require(k1 >= 0.0 && k3 >= 0.0 && k4 >= 0.0 && k5 >= 0.0 && k6 >= 0.0,
          "k1, k3, k4, k5, k6 must be >= 0");
  require(theta_on > 0.0 && theta_off > 0.0 && std::isfinite(theta_on) &&
              std::isfinite(theta_off),
          "thresholds must be finite and > 0");
}

DriftDiffusion compute_drift_diffusion(double l_bar, double k_dl,
                                       const ModelParams& params) {
  require(std::isfinite(l_bar) && std::isfinite(k_dl),
          "brightness inputs must be finite");
  require(l_bar >= 0.0, "mean brightness must be >= 0");
  params.validate();
  return drift_diffusion_unchecked(l_bar, k_dl, params);
}

double sample_inverse_gaussian(double mean, double shape, RandomStream& rng) {
  const double z = rng.normal();
  const double r = mean * z * z / (2.0 * shape);
  // Smaller root of the quadratic, written without cancellation.
  const double y = mean / (1.0 + r + std::sqrt(r * (r + 2.0)));
  if (rng.uniform() * (mean + y) <= mean) return y;
  return mean * mean / y;
}

double sample_levy(double scale, RandomStream& rng) {
  const double z = rng.normal();
  return scale / (z * z);
}

double sample_hitting_time(const DriftDiffusion& dd, double barrier,
                           RandomStream& rng, double mu_epsilon) {
  require(barrier > 0.0 && std::isfinite(barrier), "barrier must be > 0");
  const double abs_mu = std::abs(dd.mu);
  if (abs_mu > mu_epsilon) {
    if (dd.sigma <= 0.0) return barrier / abs_mu;
    return sample_inverse_gaussian(barrier / abs_mu,
                                   barrier * barrier / (dd.sigma * dd.sigma),
                                   rng);
  }
  if (dd.sigma <= 0.0) return kNeverHits;
  return sample_levy(barrier * barrier / (dd.sigma * dd.sigma), rng);
}

double inverse_gaussian_cdf(double x, double mean, double shape) {
  if (x <= 0.0) return 0.0;
  const double s = std::sqrt(shape / x);
  const double a = std_normal_cdf(s * (x / mean - 1.0));
  // exp(2 shape / mean) * Phi(-s (x/mean + 1)) in log space.
  const double b_arg = -s * (x / mean + 1.0);
  const double tail = 0.5 * std::erfc(-b_arg / std::sqrt(2.0));
  double b = 0.0;
  if (tail > 0.0) b = std::exp(2.0 * shape / mean + std::log(tail));
  return std::min(1.0, a + b);
}

double levy_cdf(double x, double scale) {
  if (x <= 0.0) return 0.0;
  return std::erfc(std::sqrt(scale / (2.0 * x)));
}

}  // namespace r2e
