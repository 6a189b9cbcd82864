#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "r2e/error.hpp"
#include "r2e/sync_roi.hpp"

using namespace r2e;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("r2e_sync_" + name);
}

}  // namespace

TEST_CASE("exact clock pair gives the exact offset") {
  ClockPair c;
  for (int i = 0; i < 100; ++i) {
    c.sensor_ts.push_back(1000 + 33333LL * i);
    c.real_ts.push_back(c.sensor_ts.back() + 123456);
  }
  const auto r = estimate_clock_offset(c, 30);
  CHECK(r.offset_us == 123456);
  CHECK(r.interval_gap == 0.0);
}

TEST_CASE("the quiet stretch of the wall clock decides the offset") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> jitter(0.0, 8000.0);
  ClockPair c;
  for (int i = 0; i < 300; ++i) {
    c.sensor_ts.push_back(33333LL * i);
    const bool quiet = i >= 150 && i <= 190;
    const double j = quiet ? 0.0 : std::abs(jitter(rng));  // host delay, never early
    c.real_ts.push_back(c.sensor_ts.back() + 50000 + static_cast<std::int64_t>(j));
  }
  const auto r = estimate_clock_offset(c, 30);
  CHECK(r.offset_us == 50000);
  CHECK(r.window_start >= 150);
  CHECK(r.window_start + 30 <= 190);
}

TEST_CASE("clock offset argument checks") {
  ClockPair c{{0, 1, 2}, {0, 1}};
  CHECK_THROWS_AS(estimate_clock_offset(c, 1), Error);
  c.real_ts.push_back(2);
  CHECK_THROWS_AS(estimate_clock_offset(c, 3), Error);
  c.sensor_ts = {0, 2, 1};
  CHECK_THROWS_AS(estimate_clock_offset(c, 1), Error);
}

TEST_CASE("clock pair CSV") {
  const auto p = temp_path("clock.csv");
  {
    std::ofstream f(p);
    f << "sensor_us,real_us\n0,10\n100,112\n";
  }
  const auto c = read_clock_pair(p);
  CHECK(c.sensor_ts == std::vector<std::int64_t>{0, 100});
  CHECK(c.real_ts == std::vector<std::int64_t>{10, 112});
  {
    std::ofstream f(p);
    f << "a,b\n";
  }
  CHECK_THROWS_AS(read_clock_pair(p), Error);
  std::filesystem::remove(p);
}

TEST_CASE("applying an offset shifts and checks underflow") {
  EventStream s{4, 4, {{100, 0, 0, 1}, {200, 1, 1, 0}}};
  const auto shifted = apply_offset(s, -50);
  CHECK(shifted.events[0].t == 50);
  CHECK(shifted.events[1].t == 150);
  CHECK(apply_offset(shifted, 50).events == s.events);
  CHECK_THROWS_AS(apply_offset(s, -101), Error);

  FrameSequence f{1, 1, 8, BayerPattern::None, {{10, {1}}, {20, {2}}}};
  CHECK(apply_offset(f, 5).frames[1].timestamp_us == 25);
  CHECK_THROWS_AS(apply_offset(f, -11), Error);
}

TEST_CASE("rotated rectangle containment") {
  RoiPose p{0, 10, 10, 4, 2, 0};
  CHECK(roi_contains(p, 14, 12));  // corner, inclusive
  CHECK(!roi_contains(p, 14.01, 10));
  CHECK(!roi_contains(p, 10, 12.01));
  p.angle = std::numbers::pi / 2;  // long side now vertical
  CHECK(roi_contains(p, 10, 14));
  CHECK(!roi_contains(p, 14, 10));
  CHECK(roi_contains(p, 12, 10));
}

TEST_CASE("pose interpolation") {
  RoiTrack track{{{0, 0, 0, 2, 2, 0}, {100, 10, 20, 4, 6, 1}}};
  const auto mid = track.pose_at(50);
  REQUIRE(mid);
  CHECK(mid->cx == doctest::Approx(5));
  CHECK(mid->cy == doctest::Approx(10));
  CHECK(mid->half_w == doctest::Approx(3));
  CHECK(mid->half_h == doctest::Approx(4));
  CHECK(mid->angle == doctest::Approx(0.5));
  CHECK(!track.pose_at(101));

  // Shortest arc across +-pi.
  RoiTrack wrap{{{0, 0, 0, 1, 1, 3.0}, {10, 0, 0, 1, 1, -3.0}}};
  const double a = wrap.pose_at(5)->angle;
  CHECK(std::abs(std::remainder(a - std::numbers::pi, 2 * std::numbers::pi)) < 1e-9);

  RoiTrack single{{{500, 1, 2, 3, 4, 0}}};
  CHECK(single.pose_at(0)->cx == 1.0);
  CHECK(single.pose_at(100000)->cy == 2.0);
}

TEST_CASE("track validation") {
  RoiTrack t{{{10, 0, 0, 1, 1, 0}, {10, 0, 0, 1, 1, 0}}};
  CHECK_THROWS_AS(t.validate(), Error);
  t = {{{10, 0, 0, 0, 1, 0}}};
  CHECK_THROWS_AS(t.validate(), Error);
  t = {};
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("filtering keeps exactly the events inside the moving rectangle") {
  RoiTrack track{{{0, 5, 5, 2, 2, 0}, {1000, 25, 5, 2, 2, 0}}};
  EventStream s{32, 16, {}};
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5000; ++i)
    s.events.push_back({rng() % 1200, static_cast<std::uint16_t>(rng() % 32),
                        static_cast<std::uint16_t>(rng() % 16), static_cast<std::uint8_t>(rng() % 2)});
  std::sort(s.events.begin(), s.events.end(), event_less);
  const auto r = filter_events_roi(s, track);
  std::size_t inside = 0, uncovered = 0;
  for (const auto& e : s.events) {
    if (e.t > 1000) {
      ++uncovered;
      continue;
    }
    const double cx = 5 + 20.0 * static_cast<double>(e.t) / 1000;
    if (std::abs(e.x - cx) <= 2 + 1e-9 && std::abs(e.y - 5.0) <= 2) ++inside;
  }
  CHECK(r.stream.events.size() == inside);
  CHECK(r.outside_coverage == uncovered);
  CHECK(r.outside_roi + inside + uncovered == s.events.size());
  CHECK(r.stream.is_sorted());
}

TEST_CASE("ROI track CSV round trip") {
  const auto p = temp_path("roi.csv");
  RoiTrack t{{{0, 1.5, 2.5, 3, 4, 0.25}, {40, -1, 0, 1, 1, -2}}};
  write_roi_track(p, t);
  const auto back = read_roi_track(p);
  REQUIRE(back.poses.size() == 2);
  CHECK(back.poses[0].cx == 1.5);
  CHECK(back.poses[1].angle == -2.0);
  CHECK(back.poses[1].t_us == 40);
  std::filesystem::remove(p);
}
