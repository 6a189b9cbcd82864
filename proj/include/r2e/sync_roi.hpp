#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "r2e/events.hpp"
#include "r2e/frames.hpp"

namespace r2e {

/// Per-frame timestamps from the sensor clock (low jitter) and the host
/// wall clock (jittered), both in microseconds.
struct ClockPair {
  std::vector<std::int64_t> sensor_ts;
  std::vector<std::int64_t> real_ts;
};

struct OffsetEstimate {
  std::int64_t offset_us = 0;   // real - sensor
  std::size_t window_start = 0; // first frame of the chosen window
  double interval_gap = 0.0;    // |mean dR - mean dS| over that window, us
};

/// Finds the `window`-interval stretch where the wall clock's frame
/// intervals best match the sensor's and returns the median of
/// real - sensor over the window + 1 frames it spans.
OffsetEstimate estimate_clock_offset(const ClockPair& pair, std::size_t window);

/// CSV with header "sensor_us,real_us".
ClockPair read_clock_pair(const std::filesystem::path& path);

/// Shifts every timestamp; throws Underflow if any would leave [0, 2^64).
EventStream apply_offset(const EventStream& stream, std::int64_t offset_us);
FrameSequence apply_offset(const FrameSequence& frames, std::int64_t offset_us);

struct RoiPose {
  std::uint64_t t_us = 0;
  double cx = 0.0;
  double cy = 0.0;
  double half_w = 0.0;
  double half_h = 0.0;
  double angle = 0.0;  // radians
};

struct RoiTrack {
  std::vector<RoiPose> poses;

  void validate() const;
  /// Pose at t (linear in center/extents, shortest arc in angle); nullopt
  /// outside the track's time span. A single pose is static for all t.
  std::optional<RoiPose> pose_at(std::uint64_t t) const;
};

/// CSV with header "t_us,cx,cy,hw,hh,angle_rad".
RoiTrack read_roi_track(const std::filesystem::path& path);
void write_roi_track(const std::filesystem::path& path, const RoiTrack& track);

/// True iff (x, y) lies inside the rotated rectangle (boundary inclusive).
bool roi_contains(const RoiPose& pose, double x, double y);

struct RoiFilterResult {
  EventStream stream;
  std::size_t outside_coverage = 0;  // dropped: no pose at that time
  std::size_t outside_roi = 0;
};

RoiFilterResult filter_events_roi(const EventStream& stream, const RoiTrack& track);

}  // namespace r2e
