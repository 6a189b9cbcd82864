#include "r2e/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace r2e {

namespace {

std::uint16_t quantize(double v, int bit_depth) {
  const double top = static_cast<double>((1 << bit_depth) - 1);
  return static_cast<std::uint16_t>(std::clamp(std::floor(v + 0.5), 0.0, top));
}

template <typename Fn>
FrameSequence sequence_of(int width, int height, int bit_depth, std::size_t frames,
                          std::uint64_t dt_us, Fn&& frame_at) {
  FrameSequence seq{width, height, bit_depth, BayerPattern::None, {}};
  seq.frames.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint64_t t = i * dt_us;
    seq.frames.push_back({t, frame_at(t)});
  }
  return seq;
}

}  // namespace

std::vector<std::uint16_t> grating_frame(const GratingSpec& spec, std::uint64_t t_us) {
  std::vector<std::uint16_t> out(static_cast<std::size_t>(spec.width) * spec.height);
  const double shift = spec.speed_px_per_s * static_cast<double>(t_us) * 1e-6;
  std::vector<std::uint16_t> row(static_cast<std::size_t>(spec.width));
  for (int x = 0; x < spec.width; ++x) {
    const double phase = 2.0 * std::numbers::pi * (x - shift) / spec.period_px;
    row[x] = quantize(spec.mean + spec.amplitude * std::sin(phase), spec.bit_depth);
  }
  for (int y = 0; y < spec.height; ++y)
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(y) * spec.width);
  return out;
}

std::vector<std::uint16_t> moving_bar_frame(const MovingBarSpec& spec, std::uint64_t t_us) {
  std::vector<std::uint16_t> out(static_cast<std::size_t>(spec.width) * spec.height);
  const double w = spec.width;
  const double start = std::fmod(spec.speed_px_per_s * static_cast<double>(t_us) * 1e-6, w);
  const double half = 0.5 * spec.bar_px + spec.ramp_px;
  const double center = start + half;
  std::vector<std::uint16_t> row(static_cast<std::size_t>(spec.width));
  for (int x = 0; x < spec.width; ++x) {
    // Circular distance from the bar center.
    double d = std::fmod(std::abs(x - center), w);
    d = std::min(d, w - d);
    double level;
    if (d <= 0.5 * spec.bar_px) {
      level = 1.0;
    } else if (d >= half) {
      level = 0.0;
    } else {
      level = (half - d) / spec.ramp_px;
    }
    row[x] = quantize(spec.low + (spec.high - spec.low) * level, spec.bit_depth);
  }
  for (int y = 0; y < spec.height; ++y)
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(y) * spec.width);
  return out;
}

FrameSequence constant_sequence(int width, int height, std::uint16_t level,
                                std::size_t frames, std::uint64_t dt_us, int bit_depth) {
  const std::vector<std::uint16_t> img(static_cast<std::size_t>(width) * height, level);
  return sequence_of(width, height, bit_depth, frames, dt_us,
                     [&](std::uint64_t) { return img; });
}

FrameSequence grating_sequence(const GratingSpec& spec, std::size_t frames,
                               std::uint64_t dt_us) {
  return sequence_of(spec.width, spec.height, spec.bit_depth, frames, dt_us,
                     [&](std::uint64_t t) { return grating_frame(spec, t); });
}

FrameSequence moving_bar_sequence(const MovingBarSpec& spec, std::size_t frames,
                                  std::uint64_t dt_us) {
  return sequence_of(spec.width, spec.height, spec.bit_depth, frames, dt_us,
                     [&](std::uint64_t t) { return moving_bar_frame(spec, t); });
}

}  // namespace r2e
