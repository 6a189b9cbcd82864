#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "r2e/events.hpp"
#include "r2e/frames.hpp"
#include "r2e/model.hpp"

namespace r2e {

/// Event tagged with the brightness of the two frames bracketing it.
struct EnrichedEvent {
  Event event;
  double l_bar = 0.0;    // (L_i + L_{i+1}) / 2
  double delta_l = 0.0;  // L_{i+1} - L_i
  std::uint32_t frame_index = 0;  // i
};

struct EnrichResult {
  std::vector<EnrichedEvent> events;
  std::size_t dropped = 0;  // events outside the frames' time coverage
};

/// Frames must be luminance with the stream's geometry.
EnrichResult enrich_events(const EventStream& events, const FrameSequence& frames);

/// Median frame interval in microseconds; k_dL = delta_l / median_dt.
double median_frame_interval(const FrameSequence& frames);

/// Uniform 2D grid over (l_bar, delta_l).
struct BinGrid {
  std::vector<double> l_bar_edges;
  std::vector<double> delta_l_edges;

  static BinGrid uniform(double l_lo, double l_hi, int l_bins, double dl_lo,
                         double dl_hi, int dl_bins);
  /// Spans the observed ranges of the enriched events.
  static BinGrid from_data(std::span<const EnrichedEvent> events, int l_bins,
                           int dl_bins);
  void validate() const;
  double delta_l_cell() const;
};

/// Maximum-likelihood inverse Gaussian fit: mean = sample mean,
/// shape = n / sum(1/x - 1/mean). Zero-variance samples are degenerate.
struct InverseGaussianFit {
  double mean = 0.0;
  double shape = 0.0;
  bool degenerate = false;
};
InverseGaussianFit fit_inverse_gaussian(std::span<const double> samples);

/// Levy(0, c) scale MLE: c = n / sum(1/x).
double fit_levy_scale(std::span<const double> samples);

struct BinStat {
  double l_bar_mid = 0.0;
  double delta_l_mid = 0.0;
  double mu_hat = 0.0;     // 1/us; positive for ON, negative for OFF
  double sigma_hat = 0.0;  // 1/sqrt(us)
  std::size_t n = 0;       // intervals behind the fit
  bool levy = false;       // fitted in the zero-drift band
};

struct BinOccupancy {
  int l_index = 0;
  int dl_index = 0;
  double l_bar_mid = 0.0;
  double delta_l_mid = 0.0;
  std::size_t on_intervals = 0;
  std::size_t off_intervals = 0;
  bool fitted = false;
  bool degenerate = false;
};

struct BinFitOptions {
  std::size_t n_min = 200;
  double theta_on = 1.0;
  double theta_off = 1.0;
};

struct BinFitResult {
  std::vector<BinStat> bins;
  std::vector<BinOccupancy> occupancy;  // every grid cell
  std::size_t intervals = 0;            // usable same-interval gaps
};

/// Collects per-pixel, per-polarity gaps between successive events that
/// share a bracketing frame pair, bins them by (l_bar, delta_l) and fits
/// the hitting-time law per bin. Polarities passing n_min in the same bin
/// are merged by count-weighted averaging.
BinFitResult bin_and_fit(std::span<const EnrichedEvent> enriched,
                         const BinGrid& grid, const BinFitOptions& options = {});

struct Stage1Group {
  double l_bar = 0.0;
  double slope = 0.0;      // a_n
  double intercept = 0.0;  // b_n, 1/us
  double weight = 0.0;     // total N of the group
  std::size_t points = 0;
};

struct Stage1Result {
  std::vector<Stage1Group> groups;
  std::vector<double> skipped;  // l_bar of singular groups
};

/// Per-l_bar weighted fit mu = a_n * k_dL + b_n with k_dL = delta_l * rate.
Stage1Result regress_stage1(std::span<const BinStat> bins, double frame_rate_per_us);

struct Stage2Result {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Weighted fit 1/a_n = L / k1 + k2 / k1 across groups.
Stage2Result regress_stage2(std::span<const Stage1Group> groups);

struct Stage3Result {
  double k1_prime = 0.0;
  double k4 = 0.0;
  double k5 = 0.0;
};

/// Weighted fit mu = k1' * k_dL / (L + k2) + k5 * L + k4.
Stage3Result regress_stage3(std::span<const BinStat> bins, double k2,
                            double frame_rate_per_us);

struct SigmaFit {
  double k3 = 0.0;
  double k6 = 0.0;
};

/// Weighted fit sigma = k3 * sqrt(L) / (L + k2) + k6, both clamped at 0.
SigmaFit fit_sigma_params(std::span<const BinStat> bins, double k2);

struct RegressionResult {
  double k1 = 0.0;
  double k2 = 0.0;
  double k4 = 0.0;
  double k5 = 0.0;
  double k1_prime = 0.0;
  double k3 = 0.0;
  double k6 = 0.0;
  Stage1Result stage1;

  double consistency_ratio() const { return k1 != 0.0 ? k1_prime / k1 : 0.0; }
  /// Model parameters for simulation; negative leakage terms are clamped
  /// to 0 and k2 to a small positive floor.
  ModelParams to_params(double theta_on = 1.0, double theta_off = 1.0) const;
};

/// All three stages plus the sigma fit.
RegressionResult run_regressions(std::span<const BinStat> bins,
                                 double frame_rate_per_us);

/// Full calibration from paired recordings (without the search).
struct CalibrationOptions {
  int l_bins = 16;
  int dl_bins = 16;
  BinFitOptions fit;
  bool explicit_grid = false;
  BinGrid grid;  // used when explicit_grid
};

struct CalibrationResult {
  std::size_t enriched_events = 0;
  std::size_t dropped_events = 0;
  BinGrid grid;
  BinFitResult fit;
  RegressionResult regression;
  double frame_interval_us = 0.0;
};

/// Text table of the non-empty grid cells, one per line.
std::string format_occupancy(const BinFitResult& fit);

/// Throws Degenerate (with the occupancy table in the message) when fewer
/// than three bins survive n_min.
CalibrationResult calibrate(const EventStream& reference, const FrameSequence& frames,
                            const CalibrationOptions& options = {});

}  // namespace r2e
