#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "r2e/model.hpp"
#include "r2e/search.hpp"

namespace r2e {

/// Flat key=value run configuration shared by all subcommands.
///
/// Model parameters are set by name (k1..k6, theta_on, theta_off) or via
/// the user-facing aliases:
///   sensitivity=<k1>        contrast=<k1>,<k4>     bright-leak=<k5>
///   jitter=<k3>,<k6>        dark-noise=<k4>        global-noise=<k6>
/// Search bounds use `bounds.kN=lo:hi`.
struct RunConfig {
  ModelParams params;
  double mu_epsilon = kDefaultMuEpsilon;
  std::uint64_t seed = 0;
  int threads = 0;

  std::string input;
  std::string output;
  std::string reference;
  std::string roi_track;
  std::string luma_mode = "green-mean";

  int grid_l = 16;
  int grid_dl = 16;
  std::size_t n_min = 200;

  std::size_t budget = 0;
  ParamBounds bounds = ParamBounds::recommended();
  bool bounds_declared = false;
  std::uint64_t search_seed = 1;
  std::size_t emd_subsample = 4096;
  std::size_t emd_projections = 64;

  std::size_t window = 30;

  std::string polarity = "both";  // on | off | both
  std::size_t stride = 1;
  std::string hist_edges = "log:100:10000000:60";
  std::uint64_t t_begin = 0;
  std::uint64_t t_end = UINT64_MAX;

  int bench_width = 346;
  int bench_height = 260;
  std::size_t bench_frames = 120;
  double bench_fps = 30.0;

  /// Applies one key (canonical or alias). Throws InvalidArgument.
  void set(std::string_view key, std::string_view value);
  /// Throws when values are out of range or params fall outside declared
  /// bounds.
  void validate() const;

  /// Canonical text form (no aliases); parse(serialize()) == *this.
  std::string serialize() const;
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  bool operator==(const RunConfig&) const = default;
};

/// Canonical keys accepted by RunConfig::set, aliases included.
const std::vector<std::string>& config_keys();

/// "linear:lo:hi:n", "log:lo:hi:n" or an explicit comma list.
std::vector<double> parse_bin_edges(std::string_view spec);

std::string format_double(double v);

}  // namespace r2e
