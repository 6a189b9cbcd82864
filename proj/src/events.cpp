#include "r2e/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "r2e/error.hpp"
#include "r2e/frames.hpp"

namespace r2e {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kEventMagic = "R2EV";
constexpr std::uint16_t kEventVersion = 1;

}  // namespace

bool EventStream::is_sorted() const {
  return std::is_sorted(events.begin(), events.end(), event_less);
}

void EventStream::validate() const {
  if (width <= 0 || height <= 0 || width > 0xFFFF || height > 0xFFFF)
    throw Error(ErrorKind::InvalidArgument, "event stream geometry out of range");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x >= width || e.y >= height || e.p > 1)
      throw Error(ErrorKind::InvalidArgument,
                  "event " + std::to_string(i) + " outside sensor or bad polarity");
    if (i > 0 && event_less(e, events[i - 1]))
      throw Error(ErrorKind::Unsorted,
                  "event " + std::to_string(i) + " breaks (t, y, x, p) order");
  }
}

std::vector<std::uint8_t> encode_events(const EventStream& stream) {
  stream.validate();
  detail::ByteWriter w;
  w.reserve(kEventHeaderBytes + stream.events.size() * kEventRecordBytes);
  w.put_bytes(kEventMagic);
  w.put<std::uint16_t>(kEventVersion);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(stream.width));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(stream.height));
  w.put<std::uint64_t>(stream.events.size());
  for (const Event& e : stream.events) {
    w.put<std::uint64_t>(e.t);
    w.put<std::uint16_t>(e.x);
    w.put<std::uint16_t>(e.y);
    w.put<std::uint8_t>(e.p);
  }
  return w.bytes();
}

EventStream decode_events(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < 4 || r.get_string(4) != kEventMagic)
    throw Error(ErrorKind::BadMagic, "not an R2EV stream");
  const auto version = r.get<std::uint16_t>();
  if (version != kEventVersion)
    throw Error(ErrorKind::BadVersion, "R2EV version " + std::to_string(version));
  EventStream s;
  s.width = r.get<std::uint16_t>();
  s.height = r.get<std::uint16_t>();
  const auto count = r.get<std::uint64_t>();
  if (count > r.remaining() / kEventRecordBytes)
    throw Error(ErrorKind::Truncated, "truncated payload: header announces " +
                                          std::to_string(count) + " records");
  s.events.resize(count);
  for (Event& e : s.events) {
    e.t = r.get<std::uint64_t>();
    e.x = r.get<std::uint16_t>();
    e.y = r.get<std::uint16_t>();
    e.p = r.get<std::uint8_t>();
  }
  s.validate();
  return s;
}

void write_events(const fs::path& path, const EventStream& stream) {
  detail::write_file(path, encode_events(stream));
}

EventStream read_events(const fs::path& path) {
  return decode_events(detail::read_file(path));
}

void write_events_csv(std::ostream& out, const EventStream& stream) {
  stream.validate();
  out << "t,x,y,p\n";
  for (const Event& e : stream.events)
    out << e.t << ',' << e.x << ',' << e.y << ',' << int{e.p} << '\n';
}

void write_events_csv(const fs::path& path, const EventStream& stream) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + path.string());
  write_events_csv(out, stream);
}

EventStream read_events_csv(const fs::path& path, int width, int height) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,y,p", 0) != 0)
    throw Error(ErrorKind::BadMagic, path.string() + ": missing header t,x,y,p");
  EventStream s;
  int max_x = -1, max_y = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t t;
    unsigned x, y, p;
    char c1, c2, c3;
    if (!(row >> t >> c1 >> x >> c2 >> y >> c3 >> p) || x > 0xFFFF || y > 0xFFFF)
      throw Error(ErrorKind::InvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": bad record");
    s.events.push_back({t, static_cast<std::uint16_t>(x),
                        static_cast<std::uint16_t>(y), static_cast<std::uint8_t>(p)});
    max_x = std::max(max_x, static_cast<int>(x));
    max_y = std::max(max_y, static_cast<int>(y));
  }
  s.width = width > 0 ? width : std::max(1, max_x + 1);
  s.height = height > 0 ? height : std::max(1, max_y + 1);
  s.validate();
  return s;
}

EventStream load_events(const fs::path& path) {
  if (path.extension() == ".csv") return read_events_csv(path);
  return read_events(path);
}

void save_events(const fs::path& path, const EventStream& stream) {
  if (path.extension() == ".csv")
    write_events_csv(path, stream);
  else
    write_events(path, stream);
}

std::uint64_t CountGrid::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

std::uint64_t CountGrid::max() const {
  return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

CountGrid accumulate_heatmap(const EventStream& stream, std::uint64_t t_begin,
                             std::uint64_t t_end, PolaritySelect polarity) {
  if (t_end < t_begin) throw Error(ErrorKind::InvalidArgument, "time range reversed");
  CountGrid grid{stream.width, stream.height,
                 std::vector<std::uint64_t>(
                     static_cast<std::size_t>(stream.width) * stream.height, 0)};
  for (const Event& e : stream.events) {
    if (e.t < t_begin || e.t >= t_end) continue;
    if (polarity == PolaritySelect::On && e.p != 1) continue;
    if (polarity == PolaritySelect::Off && e.p != 0) continue;
    ++grid.counts[static_cast<std::size_t>(e.y) * grid.width + e.x];
  }
  return grid;
}

void write_heatmap(const fs::path& path, const CountGrid& grid) {
  const std::uint64_t peak = grid.max();
  Image16 img{grid.width, grid.height, std::vector<std::uint16_t>(grid.counts.size())};
  for (std::size_t i = 0; i < grid.counts.size(); ++i)
    img.samples[i] = peak == 0 ? 0
                               : static_cast<std::uint16_t>(
                                     (grid.counts[i] * 255 + peak / 2) / peak);
  write_pgm(path, img, 255);
  std::ofstream side(path.string() + ".max.txt");
  side << "max=" << peak << "\ntotal=" << grid.total() << '\n';
}

void export_point_cloud(std::ostream& out, const EventStream& stream,
                        std::size_t stride) {
  if (stride == 0) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
  out << "x,y,t,p\n";
  for (std::size_t i = 0; i < stream.events.size(); i += stride) {
    const Event& e = stream.events[i];
    out << e.x << ',' << e.y << ',' << e.t << ',' << int{e.p} << '\n';
  }
}

std::vector<double> collect_intervals(const EventStream& stream) {
  const std::size_t n = static_cast<std::size_t>(stream.width) * stream.height * 2;
  std::vector<std::int64_t> last(n, -1);
  std::vector<double> out;
  for (const Event& e : stream.events) {
    const std::size_t slot =
        (static_cast<std::size_t>(e.y) * stream.width + e.x) * 2 + (e.p & 1);
    if (last[slot] >= 0)
      out.push_back(static_cast<double>(e.t - static_cast<std::uint64_t>(last[slot])));
    last[slot] = static_cast<std::int64_t>(e.t);
  }
  return out;
}

IntervalHistogram histogram_of(std::span<const double> intervals,
                               std::span<const double> edges) {
  if (edges.size() < 2) throw Error(ErrorKind::InvalidArgument, "need >= 2 bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "bin edges must increase");
  IntervalHistogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.density.assign(edges.size() - 1, 0.0);
  h.total = intervals.size();
  std::vector<std::size_t> counts(edges.size() - 1, 0);
  for (double v : intervals) {
    if (v < edges.front() || v >= edges.back()) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
    ++h.in_range;
  }
  if (h.in_range == 0) return h;
  for (std::size_t b = 0; b < counts.size(); ++b)
    h.density[b] = static_cast<double>(counts[b]) /
                   (static_cast<double>(h.in_range) * (edges[b + 1] - edges[b]));
  return h;
}

IntervalHistogram interval_histogram(const EventStream& stream,
                                     std::span<const double> edges) {
  const auto intervals = collect_intervals(stream);
  return histogram_of(intervals, edges);
}

void write_histogram_csv(std::ostream& out, const IntervalHistogram& hist) {
  out << "bin_lo_us,bin_hi_us,density\n";
  for (std::size_t b = 0; b < hist.density.size(); ++b)
    out << hist.edges[b] << ',' << hist.edges[b + 1] << ',' << hist.density[b] << '\n';
}

}  // namespace r2e
