#pragma once

#include <cstdint>
#include <vector>

#include "r2e/calib.hpp"
#include "r2e/frames.hpp"
#include "r2e/generator.hpp"

namespace fixture {

// Brightness sweep for calibration round trips. Each row of the sensor is
// one (L, |dL|) combination: the pixels alternate between L - dL/2 and
// L + dL/2 every frame, so every interval has mean L and a rise or fall of
// dL. 8 mean levels x 4 amplitudes x 2 signs = 64 (L, dL) cells.
struct Sweep {
  static constexpr int kGroups = 8;
  static constexpr int kAmplitudes = 4;
  static constexpr int kWidth = 32;
  static constexpr double kLowestMean = 200.0;
  static constexpr double kMeanStep = 40.0;
  static constexpr double kLowestAmplitude = 160.0;
  static constexpr double kAmplitudeStep = 80.0;

  static double mean(int g) { return kLowestMean + kMeanStep * g; }
  static double amplitude(int a) { return kLowestAmplitude + kAmplitudeStep * a; }

  static r2e::FrameSequence frames(std::size_t n_frames = 31, std::uint64_t dt_us = 50000) {
    r2e::FrameSequence seq{kWidth, kGroups * kAmplitudes, 10, r2e::BayerPattern::None, {}};
    for (std::size_t i = 0; i < n_frames; ++i) {
      r2e::Frame f{i * dt_us, {}};
      for (int g = 0; g < kGroups; ++g)
        for (int a = 0; a < kAmplitudes; ++a) {
          const double sign = i % 2 ? 0.5 : -0.5;
          const auto level = static_cast<std::uint16_t>(mean(g) + sign * amplitude(a));
          f.samples.insert(f.samples.end(), kWidth, level);
        }
      seq.frames.push_back(std::move(f));
    }
    return seq;
  }

  // Grid whose cell midpoints sit on the designed (L, dL) values.
  static r2e::BinGrid grid() {
    r2e::BinGrid g;
    for (int i = 0; i <= kGroups; ++i) g.l_bar_edges.push_back(kLowestMean - kMeanStep / 2 + kMeanStep * i);
    const double top = amplitude(kAmplitudes - 1) + kAmplitudeStep / 2;
    for (double e = -top; e <= top + 1e-9; e += kAmplitudeStep) g.delta_l_edges.push_back(e);
    return g;
  }

  static r2e::ModelParams truth() {
    r2e::ModelParams p;
    p.k1 = 10.0;
    p.k2 = 20.0;
    p.k3 = 0.01;
    p.k4 = 5e-6;
    p.k5 = 1e-8;
    p.k6 = 1e-3;
    return p;
  }
};

}  // namespace fixture
