#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "r2e/error.hpp"
#include "r2e/events.hpp"

using namespace r2e;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "r2e_test_events";
  fs::create_directories(dir);
  return dir / name;
}

EventStream random_stream(std::mt19937_64& rng, std::size_t n) {
  EventStream s{1 + static_cast<int>(rng() % 400), 1 + static_cast<int>(rng() % 300), {}};
  for (std::size_t i = 0; i < n; ++i)
    s.events.push_back({rng() % 100000, static_cast<std::uint16_t>(rng() % s.width),
                        static_cast<std::uint16_t>(rng() % s.height),
                        static_cast<std::uint8_t>(rng() % 2)});
  std::sort(s.events.begin(), s.events.end(), event_less);
  return s;
}

}  // namespace

TEST_CASE("R2EV round trip on random streams") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_stream(rng, rng() % 300);
    CHECK(decode_events(encode_events(s)) == s);
  }
  const auto s = random_stream(rng, 1000);
  const auto path = temp_path("rt.r2ev");
  write_events(path, s);
  CHECK(read_events(path) == s);
  CHECK(fs::file_size(path) == kEventHeaderBytes + 1000 * kEventRecordBytes);
}

TEST_CASE("empty stream is header only") {
  EventStream s{346, 260, {}};
  const auto bytes = encode_events(s);
  CHECK(bytes.size() == kEventHeaderBytes);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "R2EV");
  CHECK(decode_events(bytes) == s);
}

TEST_CASE("R2EV errors are structured") {
  EventStream unsorted{10, 10, {{5, 0, 0, 1}, {4, 0, 0, 1}}};
  try {
    encode_events(unsorted);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsorted);
  }
  EventStream ok{10, 10, {{4, 0, 0, 1}, {5, 0, 0, 1}}};
  auto bytes = encode_events(ok);
  bytes.pop_back();
  try {
    decode_events(bytes);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Truncated);
  }
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_events(bytes), Error);
  EventStream outside{10, 10, {{4, 10, 0, 1}}};
  CHECK_THROWS_AS(encode_events(outside), Error);
}

TEST_CASE("CSV output has the t,x,y,p header and reads back") {
  EventStream s{8, 8, {{1, 2, 3, 1}, {7, 0, 1, 0}}};
  std::ostringstream out;
  write_events_csv(out, s);
  CHECK(out.str() == "t,x,y,p\n1,2,3,1\n7,0,1,0\n");
  const auto path = temp_path("s.csv");
  save_events(path, s);
  CHECK(read_events_csv(path, 8, 8) == s);
}

TEST_CASE("heatmap counts selected events") {
  EventStream empty{6, 7, {}};
  auto g = accumulate_heatmap(empty, 0, 1000, PolaritySelect::Both);
  CHECK(g.total() == 0);
  CHECK(g.counts.size() == 42);

  EventStream one{6, 7, {{10, 3, 5, 1}}};
  g = accumulate_heatmap(one, 0, 1000, PolaritySelect::Both);
  CHECK(g.at(3, 5) == 1);
  CHECK(g.total() == 1);
  CHECK(accumulate_heatmap(one, 0, 1000, PolaritySelect::Off).total() == 0);
  CHECK(accumulate_heatmap(one, 11, 1000, PolaritySelect::Both).total() == 0);
  CHECK(accumulate_heatmap(one, 0, 10, PolaritySelect::Both).total() == 0);
}

TEST_CASE("heatmap is additive and conserves counts") {
  std::mt19937_64 rng(2);
  const auto s = random_stream(rng, 5000);
  // Time-reversed copy merged back in.
  EventStream doubled = s;
  const std::uint64_t t_max = s.events.back().t;
  for (const auto& e : s.events) doubled.events.push_back({t_max - e.t, e.x, e.y, e.p});
  std::sort(doubled.events.begin(), doubled.events.end(), event_less);
  const auto a = accumulate_heatmap(s, 0, t_max + 1, PolaritySelect::Both);
  const auto b = accumulate_heatmap(doubled, 0, t_max + 1, PolaritySelect::Both);
  for (std::size_t i = 0; i < a.counts.size(); ++i) CHECK(b.counts[i] == 2 * a.counts[i]);
  const auto on = accumulate_heatmap(s, 0, t_max + 1, PolaritySelect::On);
  const auto off = accumulate_heatmap(s, 0, t_max + 1, PolaritySelect::Off);
  CHECK(on.total() + off.total() == s.events.size());
}

TEST_CASE("heatmap PGM is max-normalized with a sidecar") {
  EventStream s{3, 1, {{1, 0, 0, 1}, {2, 0, 0, 1}, {3, 2, 0, 0}, {4, 0, 0, 1}, {5, 0, 0, 1}}};
  const auto path = temp_path("heat.pgm");
  write_heatmap(path, accumulate_heatmap(s, 0, 100, PolaritySelect::Both));
  std::ifstream in(path, std::ios::binary);
  std::string pgm((std::istreambuf_iterator<char>(in)), {});
  CHECK(pgm == std::string("P5\n3 1\n255\n") + std::string{char(255), char(0), char(64)});
  std::ifstream side(path.string() + ".max.txt");
  std::string line;
  std::getline(side, line);
  CHECK(line == "max=4");
}

TEST_CASE("point cloud export keeps every stride-th event") {
  EventStream s{4, 4, {}};
  for (std::uint64_t i = 0; i < 10; ++i) s.events.push_back({i, 1, 2, 1});
  auto rows = [&](std::size_t stride) {
    std::ostringstream out;
    export_point_cloud(out, s, stride);
    const std::string str = out.str();
    return std::count(str.begin(), str.end(), '\n') - 1;
  };
  CHECK(rows(1) == 10);
  CHECK(rows(2) == 5);
  CHECK(rows(50) == 1);
  std::ostringstream out;
  export_point_cloud(out, s, 3);
  CHECK(out.str() == "x,y,t,p\n1,2,0,1\n1,2,3,1\n1,2,6,1\n1,2,9,1\n");
  CHECK_THROWS_AS(export_point_cloud(out, s, 0), Error);
}

TEST_CASE("intervals are per pixel and per polarity") {
  EventStream s{4, 4, {{0, 1, 1, 1}, {100, 1, 1, 1}}};
  const std::vector<double> edges = {0, 50, 150, 300};
  auto h = interval_histogram(s, edges);
  CHECK(h.in_range == 1);
  CHECK(h.density[1] * 100 == doctest::Approx(1.0));
  CHECK(h.density[0] == 0.0);

  // Two interleaved pixels: global gaps would be 10, per-pixel gaps are 20.
  EventStream inter{4, 4, {}};
  for (std::uint64_t i = 0; i < 20; ++i)
    inter.events.push_back({i * 10, static_cast<std::uint16_t>(i % 2), 0, 1});
  const auto gaps = collect_intervals(inter);
  CHECK(gaps.size() == 18);
  for (double g : gaps) CHECK(g == 20.0);

  EventStream polar{4, 4, {{0, 0, 0, 1}, {5, 0, 0, 0}}};
  CHECK(interval_histogram(polar, edges).empty());
}

TEST_CASE("exponential intervals reproduce the exponential density") {
  // Synthetic Poisson pixel: exponential gaps with rate lambda.
  std::mt19937_64 rng(4);
  const double lambda = 1.0 / 500.0;
  std::exponential_distribution<double> gap(lambda);
  EventStream s{1, 1, {}};
  double t = 0;
  for (int i = 0; i < 200000; ++i) {
    t += std::max(1.0, std::round(gap(rng)));
    s.events.push_back({static_cast<std::uint64_t>(t), 0, 0, 1});
  }
  std::vector<double> edges;
  for (int i = 0; i <= 30; ++i) edges.push_back(100.0 * i);
  const auto h = interval_histogram(s, edges);
  double mass = 0;
  for (std::size_t b = 0; b < h.density.size(); ++b) mass += h.density[b] * (edges[b + 1] - edges[b]);
  CHECK(mass == doctest::Approx(1.0));
  // Pearson chi-square against the truncated exponential.
  const double norm = 1.0 - std::exp(-lambda * edges.back());
  double chi2 = 0;
  for (std::size_t b = 0; b < h.density.size(); ++b) {
    const double p = (std::exp(-lambda * edges[b]) - std::exp(-lambda * edges[b + 1])) / norm;
    const double expected = p * h.in_range;
    const double observed = h.density[b] * h.in_range * (edges[b + 1] - edges[b]);
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  // 29 dof: the 99.9% quantile is 58.3.
  CHECK(chi2 < 58.3);
}
