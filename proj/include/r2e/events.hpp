#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <tuple>
#include <vector>

namespace r2e {

enum class Polarity : std::uint8_t { Off = 0, On = 1 };

struct Event {
  std::uint64_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint8_t p = 0;  // 1 = ON, 0 = OFF

  bool operator==(const Event&) const = default;
};

/// Canonical stream order: (t, y, x, p) lexicographic.
inline bool event_less(const Event& a, const Event& b) {
  return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;

  bool is_sorted() const;
  /// Throws Unsorted / InvalidArgument when the stream breaks its invariants.
  void validate() const;

  bool operator==(const EventStream&) const = default;
};

// R2EV binary format: "R2EV", u16 version, u16 width, u16 height,
// u64 count, then 13-byte records (u64 t, u16 x, u16 y, u8 p).
inline constexpr std::size_t kEventHeaderBytes = 18;
inline constexpr std::size_t kEventRecordBytes = 13;

void write_events(const std::filesystem::path& path, const EventStream& stream);
EventStream read_events(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_events(const EventStream& stream);
EventStream decode_events(std::span<const std::uint8_t> bytes);

/// CSV with header "t,x,y,p". Geometry is not stored; the reader infers
/// it from the largest coordinates unless given explicitly.
void write_events_csv(std::ostream& out, const EventStream& stream);
void write_events_csv(const std::filesystem::path& path, const EventStream& stream);
EventStream read_events_csv(const std::filesystem::path& path, int width = 0,
                            int height = 0);

/// R2EV by default, CSV when the extension is .csv.
EventStream load_events(const std::filesystem::path& path);
void save_events(const std::filesystem::path& path, const EventStream& stream);

enum class PolaritySelect { On, Off, Both };

struct CountGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint64_t> counts;  // row-major

  std::uint64_t at(int x, int y) const {
    return counts[static_cast<std::size_t>(y) * width + x];
  }
  std::uint64_t total() const;
  std::uint64_t max() const;
};

/// Counts selected events per pixel over [t_begin, t_end).
CountGrid accumulate_heatmap(const EventStream& stream, std::uint64_t t_begin,
                             std::uint64_t t_end, PolaritySelect polarity);

/// Max-normalized 8-bit PGM plus `<path>.max.txt` holding "max=<count>".
void write_heatmap(const std::filesystem::path& path, const CountGrid& grid);

/// Every stride-th event as CSV rows "x,y,t,p" (header included).
void export_point_cloud(std::ostream& out, const EventStream& stream,
                        std::size_t stride);

/// Successive timestamp differences of same-pixel, same-polarity events.
std::vector<double> collect_intervals(const EventStream& stream);

struct IntervalHistogram {
  std::vector<double> edges;    // bin edges, us
  std::vector<double> density;  // per bin; sum(density * width) == 1
  std::size_t in_range = 0;     // intervals falling inside the edges
  std::size_t total = 0;        // all intervals collected
  bool empty() const { return in_range == 0; }
};

IntervalHistogram interval_histogram(const EventStream& stream,
                                     std::span<const double> edges);
IntervalHistogram histogram_of(std::span<const double> intervals,
                               std::span<const double> edges);

void write_histogram_csv(std::ostream& out, const IntervalHistogram& hist);

}  // namespace r2e
