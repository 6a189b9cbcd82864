#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "r2e/events.hpp"

namespace r2e {

using Direction3 = std::array<double, 3>;

/// Sliced 1-Wasserstein settings. Coordinates are normalized as
/// (x / scale_x, y / scale_y, t / scale_t) before projection.
struct EmdOptions {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double scale_t = 1.0;
  std::size_t n_sub = 4096;   // events kept per stream (stride subsampling)
  std::size_t n_proj = 64;    // random unit directions
  std::uint64_t seed = 0;
  std::vector<Direction3> directions;  // overrides n_proj/seed when non-empty

  /// Scales from the reference stream: width, height and duration.
  static EmdOptions for_reference(const EventStream& reference);
};

/// n unit vectors drawn uniformly on the sphere from the seeded stream.
std::vector<Direction3> projection_directions(std::size_t n, std::uint64_t seed);

/// Exact W1 between two empirical distributions with uniform weights;
/// inputs need not be sorted or of equal size.
double wasserstein1_1d(std::vector<double> a, std::vector<double> b);

/// Every ceil(n / n_sub)-th event, starting at the first.
std::vector<Event> stride_subsample(std::span<const Event> events, std::size_t n_sub);

/// Deterministic sliced W1 between two streams. Symmetric, non-negative.
double emd_distance(const EventStream& a, const EventStream& b,
                    const EmdOptions& options);

}  // namespace r2e
