#include "r2e/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "r2e/error.hpp"

namespace r2e {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFrameMagic = "R2EF";
constexpr std::uint16_t kFrameVersion = 1;

[[noreturn]] void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// Offsets of (R, G1, G2, B) inside a 2x2 quad, as row*2 + col.
struct QuadLayout {
  int r, g1, g2, b;
};

QuadLayout quad_layout(BayerPattern pattern) {
  switch (pattern) {
    case BayerPattern::RGGB: return {0, 1, 2, 3};
    case BayerPattern::BGGR: return {3, 1, 2, 0};
    case BayerPattern::GRBG: return {1, 0, 3, 2};
    case BayerPattern::GBRG: return {2, 0, 3, 1};
    case BayerPattern::None: break;
  }
  fail(ErrorKind::InvalidArgument, "bayer pattern required");
}

// Reads the sidecar into frame_index -> timestamp.
std::map<std::size_t, std::uint64_t> read_timestamps(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) fail(ErrorKind::Io, "missing sidecar " + csv.string());
  std::map<std::size_t, std::uint64_t> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && !std::isdigit(static_cast<unsigned char>(line[0])))
      continue;  // header
    std::istringstream row(line);
    std::size_t index = 0;
    std::uint64_t ts = 0;
    char comma = 0;
    if (!(row >> index >> comma >> ts) || comma != ',')
      fail(ErrorKind::InvalidArgument,
           csv.string() + ":" + std::to_string(line_no) + ": bad row");
    out[index] = ts;
  }
  return out;
}

std::vector<fs::path> files_with_extension(const fs::path& dir,
                                           std::string_view ext) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::uint64_t timestamp_for(const std::map<std::size_t, std::uint64_t>& ts,
                            std::size_t index) {
  auto it = ts.find(index);
  if (it == ts.end())
    fail(ErrorKind::InvalidArgument,
         "timestamps.csv has no entry for frame " + std::to_string(index));
  return it->second;
}

}  // namespace

BayerPattern parse_bayer_pattern(std::string_view name) {
  if (name == "none" || name == "luma") return BayerPattern::None;
  if (name == "RGGB" || name == "rggb") return BayerPattern::RGGB;
  if (name == "BGGR" || name == "bggr") return BayerPattern::BGGR;
  if (name == "GRBG" || name == "grbg") return BayerPattern::GRBG;
  if (name == "GBRG" || name == "gbrg") return BayerPattern::GBRG;
  fail(ErrorKind::InvalidArgument, "unknown bayer pattern: " + std::string(name));
}

std::string_view to_string(BayerPattern pattern) {
  switch (pattern) {
    case BayerPattern::None: return "none";
    case BayerPattern::RGGB: return "RGGB";
    case BayerPattern::BGGR: return "BGGR";
    case BayerPattern::GRBG: return "GRBG";
    case BayerPattern::GBRG: return "GBRG";
  }
  return "?";
}

LumaMode parse_luma_mode(std::string_view name) {
  if (name == "green-mean") return LumaMode::GreenMean;
  if (name == "quad-mean") return LumaMode::QuadMean;
  fail(ErrorKind::InvalidArgument, "unknown luma mode: " + std::string(name));
}

void FrameSequence::validate() const {
  if (width <= 0 || height <= 0 || width > 0xFFFF || height > 0xFFFF)
    fail(ErrorKind::InvalidArgument, "frame geometry out of range");
  if (bit_depth != 8 && bit_depth != 10)
    fail(ErrorKind::InvalidArgument, "bit depth must be 8 or 10");
  if (pattern != BayerPattern::None && (width % 2 != 0 || height % 2 != 0))
    fail(ErrorKind::InvalidArgument, "bayer mosaic dimensions must be even");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::uint32_t limit = 1u << bit_depth;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (f.samples.size() != n)
      fail(ErrorKind::GeometryMismatch,
           "frame " + std::to_string(i) + " has " +
               std::to_string(f.samples.size()) + " samples, expected " +
               std::to_string(n));
    if (i > 0 && f.timestamp_us <= frames[i - 1].timestamp_us)
      fail(ErrorKind::NonMonotonic,
           "frame " + std::to_string(i) + " timestamp is not increasing");
    for (std::uint16_t s : f.samples)
      if (s >= limit)
        fail(ErrorKind::InvalidArgument,
             "sample exceeds bit depth in frame " + std::to_string(i));
  }
}

BayerMosaic unpack_csi2p_10bit(std::span<const std::uint8_t> packed, int width,
                               int height, BayerPattern pattern) {
  if (width <= 0 || height <= 0 || width % 4 != 0)
    fail(ErrorKind::InvalidArgument, "RAW10 width must be a positive multiple of 4");
  const std::size_t groups = static_cast<std::size_t>(width / 4) * height;
  if (packed.size() != groups * 5)
    fail(ErrorKind::Truncated, "RAW10 payload is " + std::to_string(packed.size()) +
                                   " bytes, expected " + std::to_string(groups * 5));
  BayerMosaic out{width, height, pattern, {}};
  out.samples.resize(groups * 4);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::uint8_t* in = packed.data() + g * 5;
    const std::uint8_t low = in[4];
    for (int i = 0; i < 4; ++i)
      out.samples[g * 4 + i] = static_cast<std::uint16_t>(
          (in[i] << 2) | ((low >> (2 * i)) & 0x3));
  }
  return out;
}

std::vector<std::uint8_t> pack_csi2p_10bit(const BayerMosaic& mosaic) {
  if (mosaic.width % 4 != 0)
    fail(ErrorKind::InvalidArgument, "RAW10 width must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(mosaic.samples.size() / 4 * 5);
  for (std::size_t g = 0; g + 3 < mosaic.samples.size(); g += 4) {
    std::uint8_t low = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint16_t s = mosaic.samples[g + i];
      if (s > 1023) fail(ErrorKind::InvalidArgument, "sample exceeds 10 bits");
      out.push_back(static_cast<std::uint8_t>(s >> 2));
      low |= static_cast<std::uint8_t>((s & 0x3) << (2 * i));
    }
    out.push_back(low);
  }
  return out;
}

Image16 bayer_to_luma(const BayerMosaic& mosaic, LumaMode mode) {
  const QuadLayout q = quad_layout(mosaic.pattern);
  Image16 out{mosaic.width / 2, mosaic.height / 2, {}};
  out.samples.resize(static_cast<std::size_t>(out.width) * out.height);
  const auto w = static_cast<std::size_t>(mosaic.width);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const std::size_t base = 2 * static_cast<std::size_t>(y) * w + 2 * x;
      const std::uint32_t quad[4] = {mosaic.samples[base], mosaic.samples[base + 1],
                                     mosaic.samples[base + w],
                                     mosaic.samples[base + w + 1]};
      std::uint32_t value;
      if (mode == LumaMode::GreenMean) {
        value = (quad[q.g1] + quad[q.g2] + 1) / 2;
      } else {
        value = (quad[q.r] + quad[q.g1] + quad[q.g2] + quad[q.b] + 2) / 4;
      }
      out.samples[static_cast<std::size_t>(y) * out.width + x] =
          static_cast<std::uint16_t>(value);
    }
  }
  return out;
}

Image16 rgb_to_gray(std::span<const std::uint8_t> rgb, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width <= 0 || height <= 0 || rgb.size() != 3 * n)
    fail(ErrorKind::GeometryMismatch, "RGB buffer does not match geometry");
  Image16 out{width, height, std::vector<std::uint16_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double l = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] +
                     0.114 * rgb[3 * i + 2];
    out.samples[i] = static_cast<std::uint16_t>(std::min(255.0, std::floor(l + 0.5)));
  }
  return out;
}

FrameSequence to_luma_sequence(const FrameSequence& seq, LumaMode mode) {
  if (seq.pattern == BayerPattern::None) return seq;
  FrameSequence out;
  out.width = seq.width / 2;
  out.height = seq.height / 2;
  out.bit_depth = seq.bit_depth;
  out.pattern = BayerPattern::None;
  out.frames.reserve(seq.frames.size());
  for (const Frame& f : seq.frames) {
    BayerMosaic m{seq.width, seq.height, seq.pattern, f.samples};
    out.frames.push_back({f.timestamp_us, bayer_to_luma(m, mode).samples});
  }
  return out;
}

void write_frames(const fs::path& path, const FrameSequence& seq) {
  seq.validate();
  detail::ByteWriter w;
  const std::size_t n = static_cast<std::size_t>(seq.width) * seq.height;
  w.reserve(16 + seq.frames.size() * (8 + 2 * n));
  w.put_bytes(kFrameMagic);
  w.put<std::uint16_t>(kFrameVersion);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(seq.width));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(seq.height));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(seq.bit_depth));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(seq.pattern));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(seq.frames.size()));
  for (const Frame& f : seq.frames) {
    w.put<std::uint64_t>(f.timestamp_us);
    for (std::uint16_t s : f.samples) w.put<std::uint16_t>(s);
  }
  detail::write_file(path, w.bytes());
}

FrameSequence read_frames(const fs::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes);
  if (r.remaining() < 4 || r.get_string(4) != kFrameMagic)
    fail(ErrorKind::BadMagic, path.string() + ": not an R2EF file");
  const auto version = r.get<std::uint16_t>();
  if (version != kFrameVersion)
    fail(ErrorKind::BadVersion, path.string() + ": R2EF version " +
                                    std::to_string(version));
  FrameSequence seq;
  seq.width = r.get<std::uint16_t>();
  seq.height = r.get<std::uint16_t>();
  seq.bit_depth = r.get<std::uint8_t>();
  const auto pattern = r.get<std::uint8_t>();
  if (pattern > 4) fail(ErrorKind::InvalidArgument, "bad bayer pattern code");
  seq.pattern = static_cast<BayerPattern>(pattern);
  const auto count = r.get<std::uint32_t>();
  const std::size_t n = static_cast<std::size_t>(seq.width) * seq.height;
  r.need(static_cast<std::size_t>(count) * (8 + 2 * n));
  seq.frames.resize(count);
  for (Frame& f : seq.frames) {
    f.timestamp_us = r.get<std::uint64_t>();
    f.samples.resize(n);
    for (auto& s : f.samples) s = r.get<std::uint16_t>();
  }
  seq.validate();
  return seq;
}

Image16 read_pgm(const fs::path& path, int* max_value) {
  const auto bytes = detail::read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") fail(ErrorKind::BadMagic, path.string() + ": not a P5 PGM");
  Image16 img;
  int maxval = 0;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    fail(ErrorKind::Truncated, path.string() + ": bad PGM header");
  }
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535)
    fail(ErrorKind::InvalidArgument, path.string() + ": bad PGM header");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  if (bytes.size() < pos + n * bpp)
    fail(ErrorKind::Truncated, path.string() + ": truncated payload");
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    img.samples[i] = bpp == 1 ? bytes[pos + i]
                              : static_cast<std::uint16_t>(
                                    (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
  if (max_value) *max_value = maxval;
  return img;
}

void write_pgm(const fs::path& path, const Image16& image, int max_value) {
  std::ostringstream header;
  header << "P5\n" << image.width << ' ' << image.height << '\n' << max_value << '\n';
  std::vector<std::uint8_t> out;
  const std::string h = header.str();
  out.insert(out.end(), h.begin(), h.end());
  for (std::uint16_t s : image.samples) {
    if (max_value > 255) out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xFF));
  }
  detail::write_file(path, out);
}

FrameSequence read_pgm_directory(const fs::path& dir) {
  const auto ts = read_timestamps(dir / "timestamps.csv");
  const auto files = files_with_extension(dir, ".pgm");
  if (files.empty()) fail(ErrorKind::InvalidArgument, "no .pgm files in " + dir.string());
  FrameSequence seq;
  int max_seen = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    int maxval = 0;
    Image16 img = read_pgm(files[i], &maxval);
    max_seen = std::max(max_seen, maxval);
    if (i == 0) {
      seq.width = img.width;
      seq.height = img.height;
    } else if (img.width != seq.width || img.height != seq.height) {
      fail(ErrorKind::GeometryMismatch, files[i].string() + ": geometry differs");
    }
    seq.frames.push_back({timestamp_for(ts, i), std::move(img.samples)});
  }
  seq.bit_depth = max_seen > 255 ? 10 : 8;
  seq.validate();
  return seq;
}

FrameSequence read_csi2p_directory(const fs::path& dir, int width, int height,
                                   BayerPattern pattern) {
  const auto ts = read_timestamps(dir / "timestamps.csv");
  const auto files = files_with_extension(dir, ".raw");
  if (files.empty()) fail(ErrorKind::InvalidArgument, "no .raw files in " + dir.string());
  FrameSequence seq{width, height, 10, pattern, {}};
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto bytes = detail::read_file(files[i]);
    BayerMosaic m = unpack_csi2p_10bit(bytes, width, height, pattern);
    seq.frames.push_back({timestamp_for(ts, i), std::move(m.samples)});
  }
  seq.validate();
  return seq;
}

FrameSequence load_frames(const fs::path& path) {
  if (fs::is_directory(path)) return read_pgm_directory(path);
  return read_frames(path);
}

}  // namespace r2e
