#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "r2e/emd.hpp"
#include "r2e/events.hpp"
#include "r2e/frames.hpp"
#include "r2e/generator.hpp"
#include "r2e/model.hpp"

namespace r2e {

/// Closed search interval for each of k1..k6.
struct ParamBounds {
  std::array<std::pair<double, double>, 6> k;

  /// k1 in [1, 10], k4 and k5 in [0, 1e-7], k6 in [0, 1e-4] as recommended;
  /// k2 in [1, 200] and k3 in [0, 1e-3].
  static ParamBounds recommended();
  void validate() const;
  bool contains(const ModelParams& p) const;
  ModelParams clamp(const ModelParams& p) const;

  bool operator==(const ParamBounds&) const = default;
};

double get_k(const ModelParams& p, int index);  // index 0..5 -> k1..k6
void set_k(ModelParams& p, int index, double value);

struct SearchOptions {
  std::size_t budget = 200;   // total trials, including the initial point
  std::uint64_t seed = 0;     // drives candidate sampling
  double spread = 4.0;        // log-uniform factor range around the init
  double random_fraction = 0.5;
  GeneratorConfig generator;  // seed/threads/thresholds for every trial
  EmdOptions emd;
};

struct Trial {
  ModelParams params;
  double emd = 0.0;
  bool feasible = true;
};

struct SearchReport {
  ModelParams best_params;
  double best_emd = 0.0;
  std::vector<Trial> trials;        // in trial order; trials[0] is the init
  std::vector<double> best_so_far;  // running minimum of feasible emd
};

/// Derivative-free minimization of the sliced-W1 distance between events
/// simulated from `frames` and the reference events. Starts at `init`,
/// samples log-uniformly around it, then refines the incumbent one
/// coordinate at a time with shrinking multiplicative steps.
SearchReport search_params(const FrameSequence& frames, const EventStream& reference,
                           const ModelParams& init, const ParamBounds& bounds,
                           const SearchOptions& options);

}  // namespace r2e
