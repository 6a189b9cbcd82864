#include "r2e/calib.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "r2e/error.hpp"
#include "wls.hpp"

namespace r2e {

namespace {

int bin_index(const std::vector<double>& edges, double v) {
  if (v < edges.front() || v > edges.back()) return -1;
  if (v == edges.back()) return static_cast<int>(edges.size()) - 2;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<int>(it - edges.begin()) - 1;
}

std::vector<double> linspace(double lo, double hi, int bins) {
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * i / bins;
  e.back() = hi;
  return e;
}

}  // namespace

EnrichResult enrich_events(const EventStream& events, const FrameSequence& frames) {
  frames.validate();
  if (frames.pattern != BayerPattern::None)
    throw Error(ErrorKind::InvalidArgument, "enrichment expects luminance frames");
  if (frames.width != events.width || frames.height != events.height)
    throw Error(ErrorKind::GeometryMismatch,
                "events are " + std::to_string(events.width) + "x" +
                    std::to_string(events.height) + ", frames are " +
                    std::to_string(frames.width) + "x" + std::to_string(frames.height));
  EnrichResult out;
  const auto& f = frames.frames;
  if (f.size() < 2) {
    out.dropped = events.events.size();
    return out;
  }
  out.events.reserve(events.events.size());
  for (const Event& e : events.events) {
    if (e.t < f.front().timestamp_us || e.t > f.back().timestamp_us) {
      ++out.dropped;
      continue;
    }
    auto it = std::upper_bound(f.begin(), f.end(), e.t,
                               [](std::uint64_t t, const Frame& fr) {
                                 return t < fr.timestamp_us;
                               });
    std::size_t i = static_cast<std::size_t>(it - f.begin()) - 1;
    if (i + 1 >= f.size()) i = f.size() - 2;
    const std::size_t px = static_cast<std::size_t>(e.y) * frames.width + e.x;
    const double l0 = f[i].samples[px];
    const double l1 = f[i + 1].samples[px];
    out.events.push_back({e, 0.5 * (l0 + l1), l1 - l0, static_cast<std::uint32_t>(i)});
  }
  return out;
}

double median_frame_interval(const FrameSequence& frames) {
  if (frames.frames.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "need at least 2 frames for a frame rate");
  std::vector<double> d;
  for (std::size_t i = 1; i < frames.frames.size(); ++i)
    d.push_back(static_cast<double>(frames.frames[i].timestamp_us -
                                    frames.frames[i - 1].timestamp_us));
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size() / 2;
  return d.size() % 2 ? d[m] : 0.5 * (d[m - 1] + d[m]);
}

BinGrid BinGrid::uniform(double l_lo, double l_hi, int l_bins, double dl_lo,
                         double dl_hi, int dl_bins) {
  BinGrid g{linspace(l_lo, l_hi, l_bins), linspace(dl_lo, dl_hi, dl_bins)};
  g.validate();
  return g;
}

BinGrid BinGrid::from_data(std::span<const EnrichedEvent> events, int l_bins,
                           int dl_bins) {
  if (events.empty()) throw Error(ErrorKind::Degenerate, "no events to bin");
  double l_lo = events[0].l_bar, l_hi = l_lo;
  double d_lo = events[0].delta_l, d_hi = d_lo;
  for (const auto& e : events) {
    l_lo = std::min(l_lo, e.l_bar);
    l_hi = std::max(l_hi, e.l_bar);
    d_lo = std::min(d_lo, e.delta_l);
    d_hi = std::max(d_hi, e.delta_l);
  }
  if (l_hi <= l_lo) l_hi = l_lo + 1.0;
  if (d_hi <= d_lo) d_hi = d_lo + 1.0;
  return uniform(l_lo, l_hi, l_bins, d_lo, d_hi, dl_bins);
}

void BinGrid::validate() const {
  auto check = [](const std::vector<double>& e, const char* name) {
    if (e.size() < 2)
      throw Error(ErrorKind::InvalidArgument, std::string(name) + ": need >= 2 edges");
    for (std::size_t i = 1; i < e.size(); ++i)
      if (!(e[i] > e[i - 1]))
        throw Error(ErrorKind::InvalidArgument,
                    std::string(name) + ": edges must strictly increase");
  };
  check(l_bar_edges, "l_bar grid");
  check(delta_l_edges, "delta_l grid");
}

double BinGrid::delta_l_cell() const {
  return (delta_l_edges.back() - delta_l_edges.front()) /
         static_cast<double>(delta_l_edges.size() - 1);
}

InverseGaussianFit fit_inverse_gaussian(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorKind::Degenerate, "no samples");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  InverseGaussianFit fit;
  fit.mean = sum / n;
  double s = 0.0;
  for (double x : samples) s += 1.0 / x - 1.0 / fit.mean;
  // Jensen: s >= 0 with equality iff all samples coincide.
  if (!(s > 1e-12 * n / fit.mean)) {
    fit.degenerate = true;
    fit.shape = std::numeric_limits<double>::infinity();
    return fit;
  }
  fit.shape = n / s;
  return fit;
}

double fit_levy_scale(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorKind::Degenerate, "no samples");
  double s = 0.0;
  for (double x : samples) s += 1.0 / x;
  return static_cast<double>(samples.size()) / s;
}

BinFitResult bin_and_fit(std::span<const EnrichedEvent> enriched, const BinGrid& grid,
                         const BinFitOptions& options) {
  grid.validate();
  const int nl = static_cast<int>(grid.l_bar_edges.size()) - 1;
  const int nd = static_cast<int>(grid.delta_l_edges.size()) - 1;
  const double zero_band = grid.delta_l_cell();

  int width = 1, height = 1;
  for (const auto& e : enriched) {
    width = std::max(width, e.event.x + 1);
    height = std::max(height, e.event.y + 1);
  }

  struct Last {
    std::uint64_t t = 0;
    std::uint32_t frame = 0;
    bool valid = false;
  };
  std::vector<Last> last(static_cast<std::size_t>(width) * height * 2);
  std::vector<std::vector<double>> gaps(static_cast<std::size_t>(nl) * nd * 2);

  BinFitResult result;
  for (const auto& ee : enriched) {
    const Event& e = ee.event;
    Last& l = last[(static_cast<std::size_t>(e.y) * width + e.x) * 2 + (e.p & 1)];
    if (l.valid && l.frame == ee.frame_index && e.t > l.t) {
      const int li = bin_index(grid.l_bar_edges, ee.l_bar);
      const int di = bin_index(grid.delta_l_edges, ee.delta_l);
      if (li >= 0 && di >= 0) {
        gaps[(static_cast<std::size_t>(li) * nd + di) * 2 + (e.p & 1)].push_back(
            static_cast<double>(e.t - l.t));
        ++result.intervals;
      }
    }
    l = {e.t, ee.frame_index, true};
  }

  for (int li = 0; li < nl; ++li) {
    for (int di = 0; di < nd; ++di) {
      BinOccupancy occ;
      occ.l_index = li;
      occ.dl_index = di;
      occ.l_bar_mid = 0.5 * (grid.l_bar_edges[li] + grid.l_bar_edges[li + 1]);
      occ.delta_l_mid = 0.5 * (grid.delta_l_edges[di] + grid.delta_l_edges[di + 1]);
      const std::size_t base = (static_cast<std::size_t>(li) * nd + di) * 2;
      occ.off_intervals = gaps[base].size();
      occ.on_intervals = gaps[base + 1].size();
      const bool levy = std::abs(occ.delta_l_mid) < zero_band;

      double w_sum = 0.0, mu_sum = 0.0, sigma_sum = 0.0;
      for (int p = 0; p < 2; ++p) {
        const auto& g = gaps[base + p];
        if (g.size() < options.n_min || g.empty()) continue;
        const double theta = p == 1 ? options.theta_on : options.theta_off;
        double mu = 0.0, sigma = 0.0;
        if (levy) {
          sigma = theta / std::sqrt(fit_levy_scale(g));
        } else {
          const auto fit = fit_inverse_gaussian(g);
          if (fit.degenerate) {
            occ.degenerate = true;
            continue;
          }
          mu = (p == 1 ? 1.0 : -1.0) * theta / fit.mean;
          sigma = theta / std::sqrt(fit.shape);
        }
        const double w = static_cast<double>(g.size());
        w_sum += w;
        mu_sum += w * mu;
        sigma_sum += w * sigma;
      }
      if (w_sum > 0.0) {
        occ.fitted = true;
        result.bins.push_back({occ.l_bar_mid, occ.delta_l_mid, mu_sum / w_sum,
                               sigma_sum / w_sum, static_cast<std::size_t>(w_sum),
                               levy});
      }
      result.occupancy.push_back(occ);
    }
  }
  return result;
}

Stage1Result regress_stage1(std::span<const BinStat> bins, double frame_rate_per_us) {
  std::map<double, std::vector<const BinStat*>> groups;
  for (const auto& b : bins) groups[b.l_bar_mid].push_back(&b);

  Stage1Result out;
  for (const auto& [l_bar, members] : groups) {
    const auto n = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n), w(n);
    double weight = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = members[i]->delta_l_mid * frame_rate_per_us;
      x(i, 1) = 1.0;
      y[i] = members[i]->mu_hat;
      w[i] = static_cast<double>(members[i]->n);
      weight += w[i];
    }
    const bool distinct = n >= 2 && (x.col(0).array() != x(0, 0)).any();
    const auto beta = distinct ? detail::weighted_least_squares(x, y, w) : std::nullopt;
    if (!beta) {
      out.skipped.push_back(l_bar);
      continue;
    }
    out.groups.push_back({l_bar, (*beta)[0], (*beta)[1], weight,
                          static_cast<std::size_t>(n)});
  }
  return out;
}

Stage2Result regress_stage2(std::span<const Stage1Group> groups) {
  std::vector<const Stage1Group*> usable;
  for (const auto& g : groups)
    if (g.slope != 0.0 && std::isfinite(g.slope)) usable.push_back(&g);
  if (usable.size() < 2)
    throw Error(ErrorKind::Degenerate, "stage 2 needs >= 2 groups with nonzero slope");
  const bool positive = usable.front()->slope > 0.0;
  for (const auto* g : usable)
    if ((g->slope > 0.0) != positive)
      throw Error(ErrorKind::Degenerate, "stage 1 slopes have inconsistent signs");

  const auto n = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = usable[i]->l_bar;
    x(i, 1) = 1.0;
    y[i] = 1.0 / usable[i]->slope;
    w[i] = usable[i]->weight;
  }
  const auto beta = detail::weighted_least_squares(x, y, w);
  if (!beta) throw Error(ErrorKind::Degenerate, "stage 2 design is rank deficient");
  const double slope = (*beta)[0];
  const double scale = y.cwiseAbs().maxCoeff();
  const double l_span = x.col(0).maxCoeff() - x.col(0).minCoeff();
  if (!std::isfinite(slope) || std::abs(slope) * l_span <= 1e-9 * scale)
    throw Error(ErrorKind::Degenerate, "k1 unidentifiable: 1/a_n does not vary with L");
  Stage2Result r;
  r.k1 = 1.0 / slope;
  r.k2 = (*beta)[1] * r.k1;
  return r;
}

Stage3Result regress_stage3(std::span<const BinStat> bins, double k2,
                            double frame_rate_per_us) {
  const auto n = static_cast<Eigen::Index>(bins.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = bins[static_cast<std::size_t>(i)];
    x(i, 0) = b.delta_l_mid * frame_rate_per_us / (b.l_bar_mid + k2);
    x(i, 1) = b.l_bar_mid;
    x(i, 2) = 1.0;
    y[i] = b.mu_hat;
    w[i] = static_cast<double>(b.n);
  }
  const auto beta = detail::weighted_least_squares(x, y, w);
  if (!beta) throw Error(ErrorKind::Degenerate, "stage 3 design is rank deficient");
  return {(*beta)[0], (*beta)[2], (*beta)[1]};
}

SigmaFit fit_sigma_params(std::span<const BinStat> bins, double k2) {
  const auto n = static_cast<Eigen::Index>(bins.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = bins[static_cast<std::size_t>(i)];
    x(i, 0) = std::sqrt(std::max(0.0, b.l_bar_mid)) / (b.l_bar_mid + k2);
    x(i, 1) = 1.0;
    y[i] = b.sigma_hat;
    w[i] = static_cast<double>(b.n);
  }
  const bool constant_regressor = n > 0 && !(x.col(0).array() != x(0, 0)).any();
  if (constant_regressor && n > 0) {
    // Every point shares one L: only the combined level is identifiable.
    return {0.0, std::max(0.0, (w.dot(y)) / w.sum())};
  }
  const auto beta = detail::weighted_least_squares(x, y, w);
  if (!beta) throw Error(ErrorKind::Degenerate, "sigma fit is rank deficient");
  return {std::max(0.0, (*beta)[0]), std::max(0.0, (*beta)[1])};
}

ModelParams RegressionResult::to_params(double theta_on, double theta_off) const {
  ModelParams p;
  p.k1 = std::max(0.0, k1);
  p.k2 = std::max(1e-6, k2);
  p.k3 = std::max(0.0, k3);
  p.k4 = std::max(0.0, k4);
  p.k5 = std::max(0.0, k5);
  p.k6 = std::max(0.0, k6);
  p.theta_on = theta_on;
  p.theta_off = theta_off;
  return p;
}

RegressionResult run_regressions(std::span<const BinStat> bins,
                                 double frame_rate_per_us) {
  RegressionResult r;
  r.stage1 = regress_stage1(bins, frame_rate_per_us);
  const auto s2 = regress_stage2(r.stage1.groups);
  r.k1 = s2.k1;
  r.k2 = s2.k2;
  const auto s3 = regress_stage3(bins, r.k2, frame_rate_per_us);
  r.k1_prime = s3.k1_prime;
  r.k4 = s3.k4;
  r.k5 = s3.k5;
  const auto sig = fit_sigma_params(bins, std::max(1e-6, r.k2));
  r.k3 = sig.k3;
  r.k6 = sig.k6;
  return r;
}

std::string format_occupancy(const BinFitResult& fit) {
  std::string out = "l_index,dl_index,l_bar_mid,delta_l_mid,on,off,fitted\n";
  for (const auto& o : fit.occupancy) {
    if (o.on_intervals + o.off_intervals == 0) continue;
    out += std::to_string(o.l_index) + ',' + std::to_string(o.dl_index) + ',' +
           std::to_string(o.l_bar_mid) + ',' + std::to_string(o.delta_l_mid) + ',' +
           std::to_string(o.on_intervals) + ',' + std::to_string(o.off_intervals) +
           ',' + (o.fitted ? "1" : "0") + '\n';
  }
  return out;
}

CalibrationResult calibrate(const EventStream& reference, const FrameSequence& frames,
                            const CalibrationOptions& options) {
  if (reference.events.empty()) throw Error(ErrorKind::Degenerate, "no events");
  CalibrationResult out;
  const FrameSequence luma = to_luma_sequence(frames);
  auto enriched = enrich_events(reference, luma);
  if (enriched.events.empty())
    throw Error(ErrorKind::Degenerate, "no events inside the frames' time coverage");
  out.grid = options.explicit_grid
                 ? options.grid
                 : BinGrid::from_data(enriched.events, options.l_bins, options.dl_bins);
  out.fit = bin_and_fit(enriched.events, out.grid, options.fit);
  out.frame_interval_us = median_frame_interval(luma);
  out.enriched_events = enriched.events.size();
  out.dropped_events = enriched.dropped;
  if (out.fit.bins.size() < 3)
    throw Error(ErrorKind::Degenerate,
                "insufficient bins: " + std::to_string(out.fit.bins.size()) +
                    " of " + std::to_string(out.fit.occupancy.size()) +
                    " cells reached n_min=" + std::to_string(options.fit.n_min) +
                    "\n" + format_occupancy(out.fit));
  out.regression = run_regressions(out.fit.bins, 1.0 / out.frame_interval_us);
  return out;
}

}  // namespace r2e
