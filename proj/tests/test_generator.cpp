#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "r2e/error.hpp"
#include "r2e/generator.hpp"
#include "r2e/stimulus.hpp"

using namespace r2e;

namespace {

GeneratorConfig noise_free(double k1, double k2 = 1e-9) {
  GeneratorConfig cfg;
  cfg.seed = 17;
  cfg.params.k1 = k1;
  cfg.params.k2 = k2;
  cfg.params.k3 = cfg.params.k4 = cfg.params.k5 = cfg.params.k6 = 0.0;
  return cfg;
}

std::vector<Event> one_interval(double l0, double l1, std::uint64_t dt, const GeneratorConfig& cfg,
                                PixelState& state, std::uint64_t interval = 0) {
  std::vector<Event> out;
  auto rng = RandomStream::for_pixel(cfg.seed, 0, 0, interval);
  generate_events_interval(l0, l1, dt, interval * dt, 0, 0, state, cfg, rng, out);
  return out;
}

FrameSequence ramp_fixture(int w, int h, const std::vector<std::uint16_t>& levels,
                           std::uint64_t dt) {
  FrameSequence seq{w, h, 10, BayerPattern::None, {}};
  for (std::size_t i = 0; i < levels.size(); ++i)
    seq.frames.push_back({i * dt, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h, levels[i])});
  return seq;
}

}  // namespace

TEST_CASE("constant brightness without noise emits nothing") {
  PixelState state(1, 1);
  CHECK(one_interval(500, 500, 10000, noise_free(1.0), state).empty());
}

TEST_CASE("rising ramp crosses the ON threshold once") {
  PixelState state(1, 1);
  const auto ev = one_interval(100, 400, 10000, noise_free(1.0), state);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].p == 1);
  // Drift integral 1.2: the crossing happens 1/1.2 of the way through.
  CHECK(ev[0].t == 8333);
  CHECK(state.residual(0, 0) == doctest::Approx(0.2));
}

TEST_CASE("falling ramp emits OFF events") {
  PixelState state(1, 1);
  const auto ev = one_interval(400, 100, 10000, noise_free(2.0), state);
  REQUIRE(ev.size() == 2);  // integral -2.4
  CHECK(ev[0].p == 0);
  CHECK(ev[1].p == 0);
  CHECK(ev[0].t < ev[1].t);
  CHECK(state.residual(0, 0) == doctest::Approx(-0.4));
}

TEST_CASE("dark leakage fires ON events at rate k4 / theta") {
  GeneratorConfig cfg = noise_free(0.0, 1.0);
  cfg.params.k4 = 1e-4;
  cfg.params.k6 = 2e-3;  // keep it stochastic
  PixelState state(1, 1);
  std::vector<Event> all;
  const std::uint64_t dt = 1000000;
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto ev = one_interval(0, 0, dt, cfg, state, i);
    all.insert(all.end(), ev.begin(), ev.end());
  }
  for (const auto& e : all) CHECK(e.p == 1);
  const double rate = static_cast<double>(all.size()) / (50.0 * dt);
  // Expected 1e-4 events/us -> 5000 events; Poisson-ish sd ~ 1.5%.
  CHECK(rate == doctest::Approx(1e-4).epsilon(0.05));
}

TEST_CASE("interval rejects bad preconditions") {
  PixelState state(2, 2);
  std::vector<Event> out;
  auto cfg = noise_free(1.0);
  auto rng = RandomStream::for_pixel(1, 0, 0, 0);
  CHECK_THROWS_AS(generate_events_interval(1, 2, 0, 0, 0, 0, state, cfg, rng, out), Error);
  CHECK_THROWS_AS(generate_events_interval(-1, 2, 10, 0, 0, 0, state, cfg, rng, out), Error);
  CHECK_THROWS_AS(generate_events_interval(1, 2, 10, 0, 2, 0, state, cfg, rng, out), Error);
  state.residual(0, 0) = 1.5;
  CHECK_THROWS_AS(generate_events_interval(1, 2, 10, 0, 0, 0, state, cfg, rng, out), Error);
}

TEST_CASE("identical frames without noise give an empty stream") {
  auto seq = ramp_fixture(8, 6, {300, 300}, 33333);
  CHECK(generate_events_sequence(seq, noise_free(5.0)).events.empty());
}

TEST_CASE("4-frame ramp matches the residual-carrying drift oracle") {
  const double k1 = 3.0, k2 = 1e-9;
  const std::vector<std::uint16_t> levels{100, 400, 150, 400};
  auto seq = ramp_fixture(4, 3, levels, 10000);
  const auto stream = generate_events_sequence(seq, noise_free(k1, k2));
  oracle::DriftCounts expected;
  for (int i = 0; i < 3; ++i)
    oracle::drift_interval(expected, levels[i], levels[i + 1], 10000, k1, k2, 0, 0, 1, 1);
  std::map<std::pair<int, int>, std::pair<int, int>> counts;
  for (const auto& e : stream.events) {
    auto& c = counts[{e.x, e.y}];
    (e.p ? c.first : c.second)++;
  }
  REQUIRE(counts.size() == 12);
  for (const auto& [px, c] : counts) {
    CHECK(c.first == expected.on);
    CHECK(c.second == expected.off);
  }
  // +3.6, -2.73, +2.73 with the residual carried: 3 + 2 ON, 2 OFF.
  CHECK(expected.on == 5);
  CHECK(expected.off == 2);
}

TEST_CASE("stream is sorted, per-pixel strictly increasing and thread independent") {
  GratingSpec g;
  g.width = 64;
  g.height = 32;
  auto seq = grating_sequence(g, 12, 33333);
  GeneratorConfig cfg;
  cfg.seed = 5;
  cfg.params.k6 = 1e-3;  // noisy enough to produce many events
  cfg.threads = 1;
  const auto one = generate_events_sequence(seq, cfg);
  REQUIRE(one.events.size() > 1000);
  CHECK(one.is_sorted());
  std::map<std::pair<int, int>, std::uint64_t> last;
  for (const auto& e : one.events) {
    auto it = last.find({e.x, e.y});
    if (it != last.end()) CHECK(e.t > it->second);
    last[{e.x, e.y}] = e.t;
  }
  for (int threads : {2, 4, 8}) {
    cfg.threads = threads;
    CHECK(generate_events_sequence(seq, cfg) == one);
  }
}

TEST_CASE("residuals stay strictly inside the threshold interval") {
  GratingSpec g;
  g.width = 40;
  g.height = 8;
  GeneratorConfig cfg;
  cfg.params.theta_on = 0.7;
  cfg.params.theta_off = 1.3;
  cfg.params.k6 = 5e-4;
  EventGenerator gen(g.width, g.height, cfg);
  for (int i = 0; i < 30; ++i) {
    gen.push_frame(i * 33333ull, grating_frame(g, i * 33333ull));
    for (double v : gen.state().residuals()) {
      CHECK(v > -cfg.params.theta_off);
      CHECK(v < cfg.params.theta_on);
    }
  }
}

TEST_CASE("polarity follows the sign of the drift when leakage is off") {
  GratingSpec g;
  g.width = 48;
  g.height = 4;
  GeneratorConfig cfg;
  cfg.params.k4 = cfg.params.k5 = 0.0;
  cfg.params.k3 = 0.05;
  cfg.params.k6 = 1e-4;
  EventGenerator gen(g.width, g.height, cfg);
  auto prev = grating_frame(g, 0);
  gen.push_frame(0, prev);
  for (int i = 1; i < 20; ++i) {
    const std::uint64_t t = i * 33333ull;
    auto next = grating_frame(g, t);
    for (const auto& e : gen.push_frame(t, next)) {
      const std::size_t px = static_cast<std::size_t>(e.y) * g.width + e.x;
      const int dl = int{next[px]} - int{prev[px]};
      if (dl == 0) continue;  // zero drift: Levy branch, random polarity
      CHECK(e.p == (dl > 0 ? 1 : 0));
    }
    prev = next;
  }
}

TEST_CASE("all-dark input with k4 = k6 = 0 yields no events") {
  GeneratorConfig cfg;
  cfg.params.k4 = cfg.params.k6 = 0.0;
  cfg.params.k3 = 1.0;  // shot noise vanishes at L = 0
  auto seq = ramp_fixture(16, 16, std::vector<std::uint16_t>(50, 0), 1000000);
  CHECK(generate_events_sequence(seq, cfg).events.empty());
}

TEST_CASE("doubling k4 halves the dark-pixel inter-event interval") {
  auto mean_interval = [](double k4) {
    GeneratorConfig cfg;
    cfg.seed = 9;
    cfg.params.k1 = 0.0;
    cfg.params.k3 = cfg.params.k5 = 0.0;
    cfg.params.k4 = k4;
    cfg.params.k6 = 1e-4;
    auto seq = ramp_fixture(32, 32, std::vector<std::uint16_t>(11, 0), 10000000);
    const auto stream = generate_events_sequence(seq, cfg);
    const auto gaps = collect_intervals(stream);
    double s = 0;
    for (double g : gaps) s += g;
    return std::pair{s / gaps.size(), gaps.size()};
  };
  const auto [m1, n1] = mean_interval(1e-5);
  const auto [m2, n2] = mean_interval(2e-5);
  CHECK(n1 > 50000);
  CHECK(m1 / m2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("sequence rejects mismatched geometry and non-monotonic time") {
  auto seq = ramp_fixture(4, 4, {10, 20, 30}, 100);
  seq.frames[1].samples.pop_back();
  CHECK_THROWS_AS(generate_events_sequence(seq, GeneratorConfig{}), Error);
  seq = ramp_fixture(4, 4, {10, 20, 30}, 100);
  seq.frames[2].timestamp_us = seq.frames[1].timestamp_us;
  CHECK_THROWS_AS(generate_events_sequence(seq, GeneratorConfig{}), Error);
  seq = ramp_fixture(4, 4, {10}, 100);
  CHECK_THROWS_AS(generate_events_sequence(seq, GeneratorConfig{}), Error);
}
