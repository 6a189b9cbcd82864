#pragma once

#include <cstdint>
#include <vector>

#include "r2e/frames.hpp"

namespace r2e {

// Deterministic synthetic scenes for benchmarks and tests.

struct GratingSpec {
  int width = 346;
  int height = 260;
  double period_px = 40.0;
  double speed_px_per_s = 60.0;
  double mean = 400.0;       // DN
  double amplitude = 300.0;  // DN
  int bit_depth = 10;
};

/// Vertical sinusoidal grating drifting along x.
std::vector<std::uint16_t> grating_frame(const GratingSpec& spec, std::uint64_t t_us);

struct MovingBarSpec {
  int width = 346;
  int height = 260;
  double bar_px = 60.0;    // full-brightness width
  double ramp_px = 8.0;    // linear edge width on each side
  double speed_px_per_s = 200.0;
  double low = 100.0;      // DN
  double high = 700.0;     // DN
  int bit_depth = 10;
};

/// Bright bar with mirror-symmetric edges moving along x and wrapping
/// around the sensor, so rising and falling edges are congruent.
std::vector<std::uint16_t> moving_bar_frame(const MovingBarSpec& spec, std::uint64_t t_us);

/// Uniform-brightness frames at a fixed rate.
FrameSequence constant_sequence(int width, int height, std::uint16_t level,
                                std::size_t frames, std::uint64_t dt_us,
                                int bit_depth = 10);

FrameSequence grating_sequence(const GratingSpec& spec, std::size_t frames,
                               std::uint64_t dt_us);
FrameSequence moving_bar_sequence(const MovingBarSpec& spec, std::size_t frames,
                                  std::uint64_t dt_us);

}  // namespace r2e
