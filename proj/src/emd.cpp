#include "r2e/emd.hpp"

#include <algorithm>
#include <cmath>

#include "r2e/error.hpp"
#include "r2e/random.hpp"

namespace r2e {

EmdOptions EmdOptions::for_reference(const EventStream& reference) {
  EmdOptions o;
  o.scale_x = std::max(1, reference.width);
  o.scale_y = std::max(1, reference.height);
  if (reference.events.size() >= 2)
    o.scale_t = std::max<double>(
        1.0, static_cast<double>(reference.events.back().t - reference.events.front().t));
  return o;
}

std::vector<Direction3> projection_directions(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed, 0xE3D0u, 0x51CEu);
  std::vector<Direction3> dirs;
  dirs.reserve(n);
  while (dirs.size() < n) {
    Direction3 d{rng.normal(), rng.normal(), rng.normal()};
    const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (norm < 1e-12) continue;
    for (double& c : d) c /= norm;
    dirs.push_back(d);
  }
  return dirs;
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::Degenerate, "empty distribution");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Integrate |Qa(q) - Qb(q)| over q in [0, 1] along the merged breakpoints
  // i/na and j/nb, in integer arithmetic on the common denominator na*nb.
  const std::uint64_t na = a.size(), nb = b.size();
  std::uint64_t i = 0, j = 0, q = 0;
  const std::uint64_t total = na * nb;
  double sum = 0.0;
  while (q < total) {
    const std::uint64_t next_a = (i + 1) * nb;
    const std::uint64_t next_b = (j + 1) * na;
    const std::uint64_t next = std::min(next_a, next_b);
    sum += static_cast<double>(next - q) * std::abs(a[i] - b[j]);
    q = next;
    if (next == next_a) ++i;
    if (next == next_b) ++j;
  }
  return sum / static_cast<double>(total);
}

std::vector<Event> stride_subsample(std::span<const Event> events, std::size_t n_sub) {
  if (n_sub == 0) throw Error(ErrorKind::InvalidArgument, "n_sub must be >= 1");
  const std::size_t stride = std::max<std::size_t>(1, (events.size() + n_sub - 1) / n_sub);
  std::vector<Event> out;
  out.reserve(events.size() / stride + 1);
  for (std::size_t i = 0; i < events.size(); i += stride) out.push_back(events[i]);
  return out;
}

double emd_distance(const EventStream& a, const EventStream& b,
                    const EmdOptions& options) {
  if (a.events.empty() || b.events.empty())
    throw Error(ErrorKind::Degenerate, "emd_distance: empty stream");
  if (!(options.scale_x > 0 && options.scale_y > 0 && options.scale_t > 0))
    throw Error(ErrorKind::InvalidArgument, "emd scales must be > 0");
  const auto dirs = options.directions.empty()
                        ? projection_directions(options.n_proj, options.seed)
                        : options.directions;
  if (dirs.empty()) throw Error(ErrorKind::InvalidArgument, "no projection directions");

  auto normalize = [&](const EventStream& s) {
    const auto sub = stride_subsample(s.events, options.n_sub);
    std::vector<Direction3> pts(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i)
      pts[i] = {sub[i].x / options.scale_x, sub[i].y / options.scale_y,
                static_cast<double>(sub[i].t) / options.scale_t};
    return pts;
  };
  const auto pa = normalize(a);
  const auto pb = normalize(b);

  double sum = 0.0;
  std::vector<double> proj_a(pa.size()), proj_b(pb.size());
  for (const auto& d : dirs) {
    for (std::size_t i = 0; i < pa.size(); ++i)
      proj_a[i] = d[0] * pa[i][0] + d[1] * pa[i][1] + d[2] * pa[i][2];
    for (std::size_t i = 0; i < pb.size(); ++i)
      proj_b[i] = d[0] * pb[i][0] + d[1] * pb[i][1] + d[2] * pb[i][2];
    sum += wasserstein1_1d(proj_a, proj_b);
  }
  return sum / static_cast<double>(dirs.size());
}

}  // namespace r2e
