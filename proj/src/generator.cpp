#include "r2e/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "r2e/error.hpp"

namespace r2e {

void GeneratorConfig::validate() const {
  params.validate();
  if (!(mu_epsilon > 0.0) || !std::isfinite(mu_epsilon))
    throw Error(ErrorKind::InvalidArgument, "mu_epsilon must be > 0");
  if (threads < 0) throw Error(ErrorKind::InvalidArgument, "threads must be >= 0");
}

PixelState::PixelState(int width, int height)
    : width_(width),
      height_(height),
      v_res_(static_cast<std::size_t>(width) * height, 0.0),
      last_t_(static_cast<std::size_t>(width) * height, -1) {}

namespace {

// Core of the per-pixel simulation. Residual and last timestamp are passed
// by reference so the streaming generator can avoid PixelState lookups.
void simulate_pixel(double l_start, double l_end, std::uint64_t dt,
                    std::uint64_t t0, std::uint16_t x, std::uint16_t y,
                    double& v_res, std::int64_t& last_t,
                    const GeneratorConfig& cfg, RandomStream& rng,
                    std::vector<Event>& out) {
  const ModelParams& p = cfg.params;
  const double span = static_cast<double>(dt);
  const double l_bar = 0.5 * (l_start + l_end);
  const double k_dl = (l_end - l_start) / span;
  const DriftDiffusion dd = drift_diffusion_unchecked(l_bar, k_dl, p);
  const bool drifting = std::abs(dd.mu) > cfg.mu_epsilon;
  if (!drifting && dd.sigma <= 0.0) {
    v_res = std::clamp(v_res + dd.mu * span, -kResidualClamp * p.theta_off,
                       kResidualClamp * p.theta_on);
    return;
  }

  const std::uint64_t t_end = t0 + dt;
  double elapsed = 0.0;
  for (;;) {
    bool on;
    if (drifting) {
      on = dd.mu > 0.0;
    } else {
      on = rng.uniform() < 0.5;
    }
    const double barrier = on ? p.theta_on - v_res : p.theta_off + v_res;
    const double tau = sample_hitting_time(dd, barrier, rng, cfg.mu_epsilon);
    if (tau > span - elapsed) break;
    elapsed += tau;
    v_res = 0.0;

    std::uint64_t t = t0 + static_cast<std::uint64_t>(elapsed);
    t = std::min(t, t_end - 1);
    if (last_t >= 0 && t <= static_cast<std::uint64_t>(last_t))
      t = static_cast<std::uint64_t>(last_t) + 1;
    if (t >= t_end) continue;  // no free microsecond left in this interval
    last_t = static_cast<std::int64_t>(t);
    out.push_back({t, x, y, static_cast<std::uint8_t>(on ? 1 : 0)});
  }
  v_res += dd.mu * (span - elapsed);
  v_res = std::clamp(v_res, -kResidualClamp * p.theta_off,
                     kResidualClamp * p.theta_on);
}

}  // namespace

void generate_events_interval(double l_start, double l_end, std::uint64_t dt,
                              std::uint64_t t0, int x, int y, PixelState& state,
                              const GeneratorConfig& cfg, RandomStream& rng,
                              std::vector<Event>& out) {
  if (dt == 0) throw Error(ErrorKind::InvalidArgument, "interval length must be > 0");
  if (!(l_start >= 0.0) || !(l_end >= 0.0) || !std::isfinite(l_start) ||
      !std::isfinite(l_end))
    throw Error(ErrorKind::InvalidArgument, "brightness must be finite and >= 0");
  if (x < 0 || y < 0 || x >= state.width() || y >= state.height())
    throw Error(ErrorKind::InvalidArgument, "pixel outside state geometry");
  cfg.validate();
  double& v = state.residual(x, y);
  if (!(v > -cfg.params.theta_off && v < cfg.params.theta_on))
    throw Error(ErrorKind::InvalidArgument, "residual outside threshold interval");
  simulate_pixel(l_start, l_end, dt, t0, static_cast<std::uint16_t>(x),
                 static_cast<std::uint16_t>(y), v, state.last_timestamp(x, y), cfg,
                 rng, out);
}

EventGenerator::EventGenerator(int width, int height, GeneratorConfig cfg)
    : width_(width), height_(height), cfg_(cfg), state_(width, height) {
  if (width <= 0 || height <= 0 || width > 0xFFFF || height > 0xFFFF)
    throw Error(ErrorKind::InvalidArgument, "generator geometry out of range");
  cfg_.validate();
  rows_.resize(static_cast<std::size_t>(height));
}

std::span<const Event> EventGenerator::push_frame(
    std::uint64_t timestamp_us, std::span<const std::uint16_t> luma) {
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  if (luma.size() != n)
    throw Error(ErrorKind::GeometryMismatch,
                "frame has " + std::to_string(luma.size()) + " samples, expected " +
                    std::to_string(n));
  if (!has_previous_) {
    previous_.assign(luma.begin(), luma.end());
    previous_t_ = timestamp_us;
    has_previous_ = true;
    sorted_.clear();
    return sorted_;
  }
  if (timestamp_us <= previous_t_)
    throw Error(ErrorKind::NonMonotonic, "frame timestamps must strictly increase");

  const std::uint64_t t0 = previous_t_;
  const std::uint64_t dt = timestamp_us - previous_t_;
  const std::uint64_t interval = interval_;
  const int threads = cfg_.threads;
  const std::uint16_t* prev = previous_.data();
  const std::uint16_t* next = luma.data();

#pragma omp parallel for schedule(dynamic, 8) num_threads(threads > 0 ? threads : omp_get_max_threads()) if (threads != 1)
  for (int y = 0; y < height_; ++y) {
    auto& row = rows_[static_cast<std::size_t>(y)];
    row.clear();
    const std::size_t base = static_cast<std::size_t>(y) * width_;
    for (int x = 0; x < width_; ++x) {
      RandomStream rng = RandomStream::for_pixel(
          cfg_.seed, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
          interval);
      simulate_pixel(prev[base + x], next[base + x], dt, t0,
                     static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                     state_.residual(x, y), state_.last_timestamp(x, y), cfg_, rng,
                     row);
    }
  }

  batch_.clear();
  for (const auto& row : rows_) batch_.insert(batch_.end(), row.begin(), row.end());
  sort_batch(t0, dt);

  previous_.assign(luma.begin(), luma.end());
  previous_t_ = timestamp_us;
  ++interval_;
  return sorted_;
}

// The batch arrives in (y, x) order with each pixel's events ascending and
// at most one event per pixel and microsecond, so a stable sort on t alone
// yields the canonical (t, y, x, p) order.
void EventGenerator::sort_batch(std::uint64_t t0, std::uint64_t dt) {
  sorted_.resize(batch_.size());
  if (dt <= 4 * batch_.size() + 65536) {
    bucket_.assign(dt + 1, 0);
    for (const Event& e : batch_) ++bucket_[e.t - t0 + 1];
    for (std::size_t i = 1; i < bucket_.size(); ++i) bucket_[i] += bucket_[i - 1];
    for (const Event& e : batch_) sorted_[bucket_[e.t - t0]++] = e;
  } else {
    sorted_ = batch_;
    std::stable_sort(sorted_.begin(), sorted_.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
  }
}

EventStream generate_events_sequence(const FrameSequence& frames,
                                     const GeneratorConfig& cfg) {
  frames.validate();
  if (frames.frames.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "need at least 2 frames");
  FrameSequence converted;
  const FrameSequence* luma = &frames;
  if (frames.pattern != BayerPattern::None) {
    converted = to_luma_sequence(frames);
    luma = &converted;
  }
  EventGenerator gen(luma->width, luma->height, cfg);
  EventStream out{luma->width, luma->height, {}};
  for (const Frame& f : luma->frames) {
    auto batch = gen.push_frame(f.timestamp_us, f.samples);
    out.events.insert(out.events.end(), batch.begin(), batch.end());
  }
  return out;
}

}  // namespace r2e
