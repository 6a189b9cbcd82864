#pragma once

#include <limits>

#include "r2e/random.hpp"

namespace r2e {

/// Drift-diffusion constants of the voltage model.
///
/// mu    = k1 / (L + k2) * dL/dt + k4 + k5 * L
/// sigma = k3 / (L + k2) * sqrt(L) + k6
///
/// Brightness L is in sensor DN, time in microseconds.
struct ModelParams {
  double k1 = 5.5;     // sensitivity gain
  double k2 = 20.0;    // brightness offset (DN), must be > 0
  double k3 = 1e-4;    // shot-noise gain
  double k4 = 5e-8;    // dark leakage drift (1/us)
  double k5 = 5e-8;    // parasitic photocurrent drift (1/(DN us))
  double k6 = 5e-5;    // baseline diffusion (1/sqrt(us))
  double theta_on = 1.0;
  double theta_off = 1.0;

  /// Throws r2e::Error(InvalidArgument) if any invariant is violated.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

struct DriftDiffusion {
  double mu = 0.0;     // 1/us, signed
  double sigma = 0.0;  // 1/sqrt(us)
};

inline constexpr double kNeverHits = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultMuEpsilon = 1e-12;

DriftDiffusion compute_drift_diffusion(double l_bar, double k_dl,
                                       const ModelParams& params);

// Unchecked variant for the per-pixel inner loop; inputs must already be
// valid (l_bar >= 0, finite, params validated).
inline DriftDiffusion drift_diffusion_unchecked(double l_bar, double k_dl,
                                                const ModelParams& p) {
  const double inv = 1.0 / (l_bar + p.k2);
  DriftDiffusion dd;
  dd.mu = p.k1 * inv * k_dl + p.k4 + p.k5 * l_bar;
  dd.sigma = p.k3 * inv * std::sqrt(l_bar) + p.k6;
  return dd;
}

/// Inverse Gaussian IG(mean, shape) via the Michael-Schucany-Haas
/// transformation: one normal and one uniform variate.
double sample_inverse_gaussian(double mean, double shape, RandomStream& rng);

/// Levy(0, scale) as scale / Z^2.
double sample_levy(double scale, RandomStream& rng);

/// First time the process mu*t + sigma*W(t) travels `barrier` (> 0) in the
/// drift direction. IG(barrier/|mu|, barrier^2/sigma^2) when |mu| exceeds
/// mu_epsilon, Levy(0, barrier^2/sigma^2) otherwise. Returns kNeverHits for
/// a process with no drift and no diffusion; sigma == 0 with drift gives the
/// deterministic limit barrier/|mu|.
double sample_hitting_time(const DriftDiffusion& dd, double barrier,
                           RandomStream& rng,
                           double mu_epsilon = kDefaultMuEpsilon);

// Analytic CDFs, used by the calibration tests and the acceptance suite.
double inverse_gaussian_cdf(double x, double mean, double shape);
double levy_cdf(double x, double scale);

}  // namespace r2e
