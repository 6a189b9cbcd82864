#include "r2e/sync_roi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "r2e/error.hpp"

namespace r2e {

namespace fs = std::filesystem;

namespace {

std::int64_t median_of(std::vector<std::int64_t> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  const std::int64_t upper = v[m];
  if (v.size() % 2) return upper;
  const std::int64_t lower = *std::max_element(v.begin(), v.begin() + m);
  // Rounded half away from zero.
  const std::int64_t sum = lower + upper;
  return sum >= 0 ? (sum + 1) / 2 : -((-sum + 1) / 2);
}

std::uint64_t shifted(std::uint64_t t, std::int64_t offset) {
  if (offset < 0) {
    const auto mag = static_cast<std::uint64_t>(-(offset + 1)) + 1;
    if (t < mag)
      throw Error(ErrorKind::Underflow, "timestamp " + std::to_string(t) +
                                            " underflows with offset " +
                                            std::to_string(offset));
    return t - mag;
  }
  const auto mag = static_cast<std::uint64_t>(offset);
  if (t > std::numeric_limits<std::uint64_t>::max() - mag)
    throw Error(ErrorKind::Underflow, "timestamp overflows with offset");
  return t + mag;
}

std::vector<std::string> csv_rows(const fs::path& path, std::string_view header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind(header, 0) != 0)
    throw Error(ErrorKind::BadMagic, path.string() + ": expected header " +
                                         std::string(header));
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  return rows;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace

OffsetEstimate estimate_clock_offset(const ClockPair& pair, std::size_t window) {
  const std::size_t n = pair.sensor_ts.size();
  if (pair.real_ts.size() != n)
    throw Error(ErrorKind::GeometryMismatch, "clock sequences differ in length");
  if (window < 1 || n < window + 1)
    throw Error(ErrorKind::InvalidArgument, "need window >= 1 and length >= window + 1");
  for (std::size_t i = 1; i < n; ++i)
    if (pair.sensor_ts[i] < pair.sensor_ts[i - 1] || pair.real_ts[i] < pair.real_ts[i - 1])
      throw Error(ErrorKind::NonMonotonic, "clock timestamps must be non-decreasing");

  // Window over intervals [i, i + window): the mean interval is a telescoping
  // difference, so no prefix sums are needed.
  OffsetEstimate best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + window < n; ++i) {
    const double mean_ds =
        static_cast<double>(pair.sensor_ts[i + window] - pair.sensor_ts[i]) / window;
    const double mean_dr =
        static_cast<double>(pair.real_ts[i + window] - pair.real_ts[i]) / window;
    const double gap = std::abs(mean_dr - mean_ds);
    if (gap < best_gap) {
      best_gap = gap;
      best.window_start = i;
    }
  }
  std::vector<std::int64_t> diffs;
  for (std::size_t i = best.window_start; i <= best.window_start + window; ++i)
    diffs.push_back(pair.real_ts[i] - pair.sensor_ts[i]);
  best.offset_us = median_of(std::move(diffs));
  best.interval_gap = best_gap;
  return best;
}

ClockPair read_clock_pair(const fs::path& path) {
  ClockPair pair;
  for (const auto& row : csv_rows(path, "sensor_us,real_us")) {
    std::istringstream in(row);
    std::int64_t s, r;
    char comma;
    if (!(in >> s >> comma >> r))
      throw Error(ErrorKind::InvalidArgument, path.string() + ": bad row '" + row + "'");
    pair.sensor_ts.push_back(s);
    pair.real_ts.push_back(r);
  }
  return pair;
}

EventStream apply_offset(const EventStream& stream, std::int64_t offset_us) {
  EventStream out = stream;
  for (Event& e : out.events) e.t = shifted(e.t, offset_us);
  return out;
}

FrameSequence apply_offset(const FrameSequence& frames, std::int64_t offset_us) {
  FrameSequence out = frames;
  for (Frame& f : out.frames) f.timestamp_us = shifted(f.timestamp_us, offset_us);
  return out;
}

void RoiTrack::validate() const {
  if (poses.empty()) throw Error(ErrorKind::InvalidArgument, "empty ROI track");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!(poses[i].half_w > 0.0 && poses[i].half_h > 0.0))
      throw Error(ErrorKind::InvalidArgument, "ROI extents must be positive");
    if (i > 0 && poses[i].t_us <= poses[i - 1].t_us)
      throw Error(ErrorKind::NonMonotonic, "ROI track timestamps must increase");
  }
}

std::optional<RoiPose> RoiTrack::pose_at(std::uint64_t t) const {
  if (poses.size() == 1) return poses.front();
  if (t < poses.front().t_us || t > poses.back().t_us) return std::nullopt;
  auto it = std::upper_bound(poses.begin(), poses.end(), t,
                             [](std::uint64_t v, const RoiPose& p) { return v < p.t_us; });
  if (it == poses.end()) return poses.back();
  const RoiPose& b = *it;
  const RoiPose& a = *(it - 1);
  const double s = static_cast<double>(t - a.t_us) / static_cast<double>(b.t_us - a.t_us);
  RoiPose p;
  p.t_us = t;
  p.cx = a.cx + s * (b.cx - a.cx);
  p.cy = a.cy + s * (b.cy - a.cy);
  p.half_w = a.half_w + s * (b.half_w - a.half_w);
  p.half_h = a.half_h + s * (b.half_h - a.half_h);
  p.angle = a.angle + s * wrap_angle(b.angle - a.angle);
  return p;
}

RoiTrack read_roi_track(const fs::path& path) {
  RoiTrack track;
  for (const auto& row : csv_rows(path, "t_us,cx,cy,hw,hh,angle_rad")) {
    std::string cell;
    std::istringstream in(row);
    std::vector<std::string> cells;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw Error(ErrorKind::InvalidArgument, path.string() + ": bad row '" + row + "'");
    try {
      track.poses.push_back({std::stoull(cells[0]), std::stod(cells[1]), std::stod(cells[2]),
                             std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, path.string() + ": bad row '" + row + "'");
    }
  }
  track.validate();
  return track;
}

void write_roi_track(const fs::path& path, const RoiTrack& track) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + path.string());
  out.precision(17);
  out << "t_us,cx,cy,hw,hh,angle_rad\n";
  for (const auto& p : track.poses)
    out << p.t_us << ',' << p.cx << ',' << p.cy << ',' << p.half_w << ',' << p.half_h
        << ',' << p.angle << '\n';
}

bool roi_contains(const RoiPose& pose, double x, double y) {
  const double dx = x - pose.cx;
  const double dy = y - pose.cy;
  const double c = std::cos(pose.angle);
  const double s = std::sin(pose.angle);
  // Rotate into the ROI frame (by -angle).
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  constexpr double eps = 1e-9;
  return std::abs(lx) <= pose.half_w + eps && std::abs(ly) <= pose.half_h + eps;
}

RoiFilterResult filter_events_roi(const EventStream& stream, const RoiTrack& track) {
  track.validate();
  RoiFilterResult out;
  out.stream.width = stream.width;
  out.stream.height = stream.height;
  for (const Event& e : stream.events) {
    const auto pose = track.pose_at(e.t);
    if (!pose) {
      ++out.outside_coverage;
      continue;
    }
    if (roi_contains(*pose, e.x, e.y))
      out.stream.events.push_back(e);
    else
      ++out.outside_roi;
  }
  return out;
}

}  // namespace r2e
