#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace r2e {

enum class BayerPattern : std::uint8_t {
  None = 0,  // already luminance
  RGGB = 1,
  BGGR = 2,
  GRBG = 3,
  GBRG = 4,
};

BayerPattern parse_bayer_pattern(std::string_view name);
std::string_view to_string(BayerPattern pattern);

/// Single-channel 16-bit image, row-major.
struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> samples;

  std::uint16_t at(int x, int y) const {
    return samples[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const Image16&) const = default;
};

struct BayerMosaic {
  int width = 0;   // even
  int height = 0;  // even
  BayerPattern pattern = BayerPattern::RGGB;
  std::vector<std::uint16_t> samples;

  bool operator==(const BayerMosaic&) const = default;
};

struct Frame {
  std::uint64_t timestamp_us = 0;
  std::vector<std::uint16_t> samples;

  bool operator==(const Frame&) const = default;
};

/// Timestamped frames of constant geometry. When `pattern` is not None the
/// samples are a full-resolution Bayer mosaic rather than luminance.
struct FrameSequence {
  int width = 0;
  int height = 0;
  int bit_depth = 8;  // 8 or 10
  BayerPattern pattern = BayerPattern::None;
  std::vector<Frame> frames;

  /// Checks geometry, sample range and strictly increasing timestamps.
  void validate() const;

  bool operator==(const FrameSequence&) const = default;
};

enum class LumaMode { GreenMean, QuadMean };

LumaMode parse_luma_mode(std::string_view name);

// CSI-2 RAW10 packing: 4 pixels in 5 bytes. Bytes 0-3 hold bits 9..2 of
// pixels 0-3, byte 4 holds bits 1..0 of pixel i at bit position 2i.
BayerMosaic unpack_csi2p_10bit(std::span<const std::uint8_t> packed, int width,
                               int height,
                               BayerPattern pattern = BayerPattern::RGGB);
std::vector<std::uint8_t> pack_csi2p_10bit(const BayerMosaic& mosaic);

/// Half-resolution luminance from each 2x2 quad, rounded half up.
Image16 bayer_to_luma(const BayerMosaic& mosaic,
                      LumaMode mode = LumaMode::GreenMean);

/// Interleaved 8-bit RGB to gray with the 0.299/0.587/0.114 luma weights.
Image16 rgb_to_gray(std::span<const std::uint8_t> rgb, int width, int height);

/// Reduces a Bayer sequence to half-resolution luminance; luminance
/// sequences pass through unchanged.
FrameSequence to_luma_sequence(const FrameSequence& seq,
                               LumaMode mode = LumaMode::GreenMean);

// R2EF container.
void write_frames(const std::filesystem::path& path, const FrameSequence& seq);
FrameSequence read_frames(const std::filesystem::path& path);

/// Directory of P5 PGM files (sorted by name) plus a `timestamps.csv`
/// sidecar with rows `frame_index,timestamp_us`.
FrameSequence read_pgm_directory(const std::filesystem::path& dir);

/// Directory of CSI-2 RAW10 `.raw` files plus `timestamps.csv`.
FrameSequence read_csi2p_directory(const std::filesystem::path& dir, int width,
                                   int height, BayerPattern pattern);

/// Loads R2EF files, PGM directories (with sidecar) by inspecting the path.
FrameSequence load_frames(const std::filesystem::path& path);

// PGM (P5) helpers. Max values above 255 use 16-bit big-endian samples.
Image16 read_pgm(const std::filesystem::path& path, int* max_value = nullptr);
void write_pgm(const std::filesystem::path& path, const Image16& image,
               int max_value);

}  // namespace r2e
