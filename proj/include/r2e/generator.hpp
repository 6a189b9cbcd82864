#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "r2e/events.hpp"
#include "r2e/frames.hpp"
#include "r2e/model.hpp"
#include "r2e/random.hpp"

namespace r2e {

struct GeneratorConfig {
  std::uint64_t seed = 0;
  double mu_epsilon = kDefaultMuEpsilon;  // |mu| at or below this uses the Levy law
  ModelParams params;
  int threads = 0;  // 0: OpenMP default; never affects the output

  void validate() const;
};

/// Sub-threshold voltage carried between frame intervals, plus the last
/// emitted timestamp per pixel. Positive residuals move toward the ON
/// barrier, so every residual stays inside (-theta_off, theta_on).
class PixelState {
 public:
  PixelState() = default;
  PixelState(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  double& residual(int x, int y) { return v_res_[index(x, y)]; }
  double residual(int x, int y) const { return v_res_[index(x, y)]; }
  std::int64_t& last_timestamp(int x, int y) { return last_t_[index(x, y)]; }

  std::span<const double> residuals() const { return v_res_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> v_res_;
  std::vector<std::int64_t> last_t_;
};

/// Fraction of each threshold the residual is clamped to.
inline constexpr double kResidualClamp = 0.999;

/// Events of one pixel over the interval [t0, t0 + dt) with brightness
/// moving linearly from l_start to l_end. Appends to `out` in time order.
void generate_events_interval(double l_start, double l_end, std::uint64_t dt,
                              std::uint64_t t0, int x, int y, PixelState& state,
                              const GeneratorConfig& cfg, RandomStream& rng,
                              std::vector<Event>& out);

/// Streaming generator: feed frames in time order, receive the sorted
/// events of each completed interval.
class EventGenerator {
 public:
  EventGenerator(int width, int height, GeneratorConfig cfg);

  /// Returns the events between the previous frame and this one (none for
  /// the first frame). The returned span is valid until the next call.
  std::span<const Event> push_frame(std::uint64_t timestamp_us,
                                    std::span<const std::uint16_t> luma);

  const PixelState& state() const { return state_; }
  std::uint64_t intervals() const { return interval_; }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  void sort_batch(std::uint64_t t0, std::uint64_t dt);

  int width_;
  int height_;
  GeneratorConfig cfg_;
  PixelState state_;
  std::vector<std::uint16_t> previous_;
  std::uint64_t previous_t_ = 0;
  bool has_previous_ = false;
  std::uint64_t interval_ = 0;
  std::vector<std::vector<Event>> rows_;
  std::vector<Event> batch_;
  std::vector<Event> sorted_;
  std::vector<std::uint32_t> bucket_;
};

/// Whole-sequence conversion. Output is sorted by (t, y, x, p) and
/// independent of cfg.threads.
EventStream generate_events_sequence(const FrameSequence& frames,
                                     const GeneratorConfig& cfg);

}  // namespace r2e
