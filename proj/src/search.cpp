#include "r2e/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "r2e/error.hpp"
#include "r2e/random.hpp"

namespace r2e {

ParamBounds ParamBounds::recommended() {
  return {{{{1.0, 10.0}, {1.0, 200.0}, {0.0, 1e-3}, {0.0, 1e-7}, {0.0, 1e-7},
            {0.0, 1e-4}}}};
}

void ParamBounds::validate() const {
  for (int i = 0; i < 6; ++i) {
    const auto [lo, hi] = k[i];
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi || lo < 0.0)
      throw Error(ErrorKind::InvalidArgument,
                  "bounds for k" + std::to_string(i + 1) + " must be finite, >= 0, lo <= hi");
  }
  if (k[1].second <= 0.0) throw Error(ErrorKind::InvalidArgument, "k2 bounds must allow k2 > 0");
}

bool ParamBounds::contains(const ModelParams& p) const {
  for (int i = 0; i < 6; ++i) {
    const double v = get_k(p, i);
    if (v < k[i].first || v > k[i].second) return false;
  }
  return true;
}

ModelParams ParamBounds::clamp(const ModelParams& p) const {
  ModelParams out = p;
  for (int i = 0; i < 6; ++i) set_k(out, i, std::clamp(get_k(p, i), k[i].first, k[i].second));
  return out;
}

double get_k(const ModelParams& p, int index) {
  switch (index) {
    case 0: return p.k1;
    case 1: return p.k2;
    case 2: return p.k3;
    case 3: return p.k4;
    case 4: return p.k5;
    case 5: return p.k6;
  }
  throw Error(ErrorKind::InvalidArgument, "k index out of range");
}

void set_k(ModelParams& p, int index, double value) {
  switch (index) {
    case 0: p.k1 = value; return;
    case 1: p.k2 = value; return;
    case 2: p.k3 = value; return;
    case 3: p.k4 = value; return;
    case 4: p.k5 = value; return;
    case 5: p.k6 = value; return;
  }
  throw Error(ErrorKind::InvalidArgument, "k index out of range");
}

namespace {

class Objective {
 public:
  Objective(const FrameSequence& frames, const EventStream& reference,
            const SearchOptions& options)
      : frames_(frames), reference_(reference), options_(options) {}

  Trial evaluate(const ModelParams& params) const {
    Trial trial{params, std::numeric_limits<double>::infinity(), false};
    try {
      GeneratorConfig cfg = options_.generator;
      cfg.params = params;
      const EventStream sim = generate_events_sequence(frames_, cfg);
      if (sim.events.empty()) return trial;
      trial.emd = emd_distance(sim, reference_, options_.emd);
      trial.feasible = std::isfinite(trial.emd);
    } catch (const Error&) {
      trial.feasible = false;
    }
    return trial;
  }

 private:
  const FrameSequence& frames_;
  const EventStream& reference_;
  const SearchOptions& options_;
};

// Value of coordinate i for a log-uniform draw around `center`.
double log_uniform_around(double center, double spread, std::pair<double, double> range,
                          RandomStream& rng) {
  const auto [lo, hi] = range;
  if (lo == hi) return lo;
  if (center <= 0.0) {
    // No multiplicative neighbourhood at zero: draw uniformly in range.
    return lo + (hi - lo) * rng.uniform();
  }
  const double factor = std::exp((2.0 * rng.uniform() - 1.0) * std::log(spread));
  return std::clamp(center * factor, lo, hi);
}

}  // namespace

SearchReport search_params(const FrameSequence& frames, const EventStream& reference,
                           const ModelParams& init, const ParamBounds& bounds,
                           const SearchOptions& options) {
  bounds.validate();
  if (options.budget < 1) throw Error(ErrorKind::InvalidArgument, "budget must be >= 1");
  if (!(options.spread > 1.0))
    throw Error(ErrorKind::InvalidArgument, "spread must be > 1");
  if (reference.events.empty()) throw Error(ErrorKind::Degenerate, "no events");

  const Objective objective(frames, reference, options);
  RandomStream rng(options.seed, 0x5EA4u);
  SearchReport report;
  std::size_t incumbent = 0;

  auto record = [&](const ModelParams& p) {
    report.trials.push_back(objective.evaluate(p));
    const Trial& t = report.trials.back();
    const Trial& best = report.trials[incumbent];
    const bool better = t.feasible && (!best.feasible || t.emd < best.emd);
    if (better) incumbent = report.trials.size() - 1;
    const Trial& now = report.trials[incumbent];
    report.best_so_far.push_back(now.feasible ? now.emd
                                              : std::numeric_limits<double>::infinity());
    return better;
  };

  const ModelParams start = bounds.clamp(init);
  record(start);

  const std::size_t random_trials = static_cast<std::size_t>(
      static_cast<double>(options.budget - 1) * options.random_fraction);
  for (std::size_t i = 0; i < random_trials && report.trials.size() < options.budget; ++i) {
    ModelParams p = start;
    for (int k = 0; k < 6; ++k)
      set_k(p, k, log_uniform_around(get_k(start, k), options.spread, bounds.k[k], rng));
    record(p);
  }

  std::vector<int> free_coords;
  for (int k = 0; k < 6; ++k)
    if (bounds.k[k].first < bounds.k[k].second) free_coords.push_back(k);

  double step = 2.0;
  bool improved_in_sweep = false;
  std::size_t cursor = 0;
  while (report.trials.size() < options.budget) {
    if (free_coords.empty()) {
      record(start);
      continue;
    }
    const int k = free_coords[cursor % free_coords.size()];
    const auto [lo, hi] = bounds.k[k];
    for (double dir : {step, 1.0 / step}) {
      if (report.trials.size() >= options.budget) break;
      ModelParams p = report.trials[incumbent].params;
      double base = get_k(p, k);
      if (base <= 0.0) base = std::max(lo, 1e-3 * hi);
      set_k(p, k, std::clamp(base * dir, lo, hi));
      if (record(p)) {
        improved_in_sweep = true;
        break;
      }
    }
    ++cursor;
    if (cursor % free_coords.size() == 0) {
      if (!improved_in_sweep) step = std::max(1.0 + 1e-3, std::sqrt(step));
      improved_in_sweep = false;
    }
  }

  report.best_params = report.trials[incumbent].params;
  report.best_emd = report.trials[incumbent].emd;
  return report;
}

}  // namespace r2e
