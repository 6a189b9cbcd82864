// r2e: frames-to-events simulator, calibration and tooling.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "r2e/calib.hpp"
#include "r2e/config.hpp"
#include "r2e/error.hpp"
#include "r2e/events.hpp"
#include "r2e/frames.hpp"
#include "r2e/generator.hpp"
#include "r2e/search.hpp"
#include "r2e/stimulus.hpp"
#include "r2e/sync_roi.hpp"

namespace {

using Clock = std::chrono::steady_clock;

// Flags are applied as config keys, after the config file and in the order
// given here, so a flag always wins over the file.
struct Overrides {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<std::string> sets;  // raw key=value from --set
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

r2e::RunConfig build_config(const Overrides& o) {
  r2e::RunConfig cfg;
  try {
    if (!o.config_path.empty()) cfg = r2e::RunConfig::load(o.config_path);
    // R2E_THREADS only fills in when neither the file nor a flag chose.
    if (const char* env = std::getenv("R2E_THREADS"); env && *env && cfg.threads == 0)
      cfg.set("threads", env);
    for (const auto& [k, v] : o.keys) cfg.set(k, v);
    for (const auto& kv : o.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const r2e::Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw UsageError(std::string("missing ") + what);
}

r2e::GeneratorConfig generator_config(const r2e::RunConfig& cfg) {
  r2e::GeneratorConfig g;
  g.seed = cfg.seed;
  g.mu_epsilon = cfg.mu_epsilon;
  g.params = cfg.params;
  g.threads = cfg.threads;
  return g;
}

r2e::FrameSequence load_luma(const r2e::RunConfig& cfg, const std::string& path) {
  return r2e::to_luma_sequence(r2e::load_frames(path), r2e::parse_luma_mode(cfg.luma_mode));
}

r2e::PolaritySelect polarity(const r2e::RunConfig& cfg) {
  if (cfg.polarity == "on") return r2e::PolaritySelect::On;
  if (cfg.polarity == "off") return r2e::PolaritySelect::Off;
  return r2e::PolaritySelect::Both;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw r2e::Error(r2e::ErrorKind::Io, "cannot create " + path);
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int cmd_convert(const r2e::RunConfig& cfg) {
  require(cfg.input, "--input (frames)");
  require(cfg.output, "--output (events)");
  const auto frames = load_luma(cfg, cfg.input);
  const auto start = Clock::now();
  const auto events = r2e::generate_events_sequence(frames, generator_config(cfg));
  const double wall = seconds_since(start);
  r2e::save_events(cfg.output, events);

  std::size_t on = 0;
  for (const auto& e : events.events) on += e.p;
  std::cout << "frames=" << frames.frames.size() << '\n'
            << "events=" << events.events.size() << '\n'
            << "on=" << on << '\n'
            << "off=" << events.events.size() - on << '\n'
            << "wall_s=" << r2e::format_double(wall) << '\n'
            << "events_per_s=" << r2e::format_double(wall > 0 ? events.events.size() / wall : 0.0)
            << '\n';
  return 0;
}

void write_params(std::ostream& out, const std::string& prefix, const r2e::ModelParams& p) {
  for (int i = 0; i < 6; ++i)
    out << prefix << 'k' << i + 1 << '=' << r2e::format_double(r2e::get_k(p, i)) << '\n';
}

int cmd_calibrate(const r2e::RunConfig& cfg) {
  require(cfg.input, "--input (frames)");
  require(cfg.reference, "--reference (events)");
  const auto frames = load_luma(cfg, cfg.input);
  const auto reference = r2e::load_events(cfg.reference);
  if (reference.events.empty())
    throw r2e::Error(r2e::ErrorKind::Degenerate, "no events in " + cfg.reference);

  r2e::CalibrationOptions opt;
  opt.l_bins = cfg.grid_l;
  opt.dl_bins = cfg.grid_dl;
  opt.fit.n_min = cfg.n_min;
  opt.fit.theta_on = cfg.params.theta_on;
  opt.fit.theta_off = cfg.params.theta_off;
  const auto cal = r2e::calibrate(reference, frames, opt);
  const auto& reg = cal.regression;

  std::ostringstream report;
  report << "# calibration report\n"
         << "enriched_events=" << cal.enriched_events << '\n'
         << "dropped_events=" << cal.dropped_events << '\n'
         << "intervals=" << cal.fit.intervals << '\n'
         << "bins=" << cal.fit.bins.size() << '\n'
         << "frame_interval_us=" << r2e::format_double(cal.frame_interval_us) << '\n'
         << "regression.k1=" << r2e::format_double(reg.k1) << '\n'
         << "regression.k2=" << r2e::format_double(reg.k2) << '\n'
         << "regression.k3=" << r2e::format_double(reg.k3) << '\n'
         << "regression.k4=" << r2e::format_double(reg.k4) << '\n'
         << "regression.k5=" << r2e::format_double(reg.k5) << '\n'
         << "regression.k6=" << r2e::format_double(reg.k6) << '\n'
         << "regression.k1_prime=" << r2e::format_double(reg.k1_prime) << '\n'
         << "regression.consistency=" << r2e::format_double(reg.consistency_ratio()) << '\n';

  auto result = reg.to_params(cfg.params.theta_on, cfg.params.theta_off);
  std::string trials;
  if (cfg.budget > 0) {
    r2e::SearchOptions so;
    so.budget = cfg.budget;
    so.seed = cfg.search_seed;
    so.generator = generator_config(cfg);
    so.emd = r2e::EmdOptions::for_reference(reference);
    so.emd.n_sub = cfg.emd_subsample;
    so.emd.n_proj = cfg.emd_projections;
    so.emd.seed = cfg.search_seed;
    const auto sr = r2e::search_params(frames, reference, cfg.bounds.clamp(result), cfg.bounds, so);
    result = sr.best_params;
    report << "search.budget=" << cfg.budget << '\n'
           << "search.initial_emd=" << r2e::format_double(sr.trials.front().emd) << '\n'
           << "search.best_emd=" << r2e::format_double(sr.best_emd) << '\n';
    std::ostringstream t;
    t << "trial,k1,k2,k3,k4,k5,k6,emd,feasible\n";
    for (std::size_t i = 0; i < sr.trials.size(); ++i) {
      t << i;
      for (int k = 0; k < 6; ++k) t << ',' << r2e::format_double(r2e::get_k(sr.trials[i].params, k));
      t << ',' << r2e::format_double(sr.trials[i].emd) << ',' << sr.trials[i].feasible << '\n';
    }
    trials = t.str();
  }
  write_params(report, "", result);
  report << "\n[occupancy]\n" << r2e::format_occupancy(cal.fit);
  if (!trials.empty()) report << "\n[trials]\n" << trials;

  if (cfg.output.empty()) {
    std::cout << report.str();
  } else {
    open_output(cfg.output) << report.str();
    write_params(std::cout, "", result);
  }
  return 0;
}

bool is_frame_file(const std::string& path) {
  return std::filesystem::path(path).extension() == ".r2ef";
}

int cmd_sync(const r2e::RunConfig& cfg, const std::string& apply) {
  require(cfg.input, "--input (clock CSV)");
  const auto pair = r2e::read_clock_pair(cfg.input);
  const auto est = r2e::estimate_clock_offset(pair, cfg.window);
  std::cout << "offset=" << est.offset_us << '\n'
            << "window_start=" << est.window_start << '\n'
            << "interval_gap_us=" << r2e::format_double(est.interval_gap) << '\n';
  if (!apply.empty()) {
    require(cfg.output, "--output (shifted copy)");
    if (is_frame_file(apply))
      r2e::write_frames(cfg.output, r2e::apply_offset(r2e::read_frames(apply), est.offset_us));
    else
      r2e::save_events(cfg.output, r2e::apply_offset(r2e::load_events(apply), est.offset_us));
  }
  return 0;
}

int cmd_filter(const r2e::RunConfig& cfg) {
  require(cfg.input, "--input (events)");
  require(cfg.roi_track, "--roi-track");
  require(cfg.output, "--output (events)");
  const auto r = r2e::filter_events_roi(r2e::load_events(cfg.input), r2e::read_roi_track(cfg.roi_track));
  r2e::save_events(cfg.output, r.stream);
  std::cout << "kept=" << r.stream.events.size() << '\n'
            << "outside_roi=" << r.outside_roi << '\n'
            << "outside_coverage=" << r.outside_coverage << '\n';
  return 0;
}

int cmd_viz(const r2e::RunConfig& cfg, const std::string& mode) {
  require(cfg.input, "--input (events)");
  require(cfg.output, "--output");
  const auto events = r2e::load_events(cfg.input);
  if (mode == "heatmap") {
    const auto grid = r2e::accumulate_heatmap(events, cfg.t_begin, cfg.t_end, polarity(cfg));
    r2e::write_heatmap(cfg.output, grid);
    std::cout << "max=" << grid.max() << "\ntotal=" << grid.total() << '\n';
  } else if (mode == "cloud") {
    auto out = open_output(cfg.output);
    r2e::export_point_cloud(out, events, cfg.stride);
  } else {
    const auto edges = r2e::parse_bin_edges(cfg.hist_edges);
    const auto hist = r2e::interval_histogram(events, edges);
    auto out = open_output(cfg.output);
    r2e::write_histogram_csv(out, hist);
    std::cout << "intervals=" << hist.total << "\nin_range=" << hist.in_range << '\n';
  }
  return 0;
}

struct BenchResult {
  double fps = 0.0;
  double events_per_s = 0.0;
};

template <typename FrameFn>
BenchResult run_bench(int width, int height, std::size_t n_frames, std::uint64_t dt,
                      r2e::GeneratorConfig gen, FrameFn&& frame_at) {
  std::vector<std::vector<std::uint16_t>> frames;
  for (std::size_t i = 0; i < n_frames; ++i) frames.push_back(frame_at(i * dt));
  r2e::EventGenerator g(width, height, gen);
  std::size_t events = 0;
  g.push_frame(0, frames[0]);
  const auto start = Clock::now();
  for (std::size_t i = 1; i < n_frames; ++i) events += g.push_frame(i * dt, frames[i]).size();
  const double wall = seconds_since(start);
  return {(n_frames - 1) / wall, events / wall};
}

int cmd_bench(const r2e::RunConfig& cfg) {
  const auto dt = static_cast<std::uint64_t>(1e6 / cfg.bench_fps);
  const int multi = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
  std::vector<std::pair<int, int>> sizes{{346, 260}};
  if (cfg.bench_width != 346 || cfg.bench_height != 260)
    sizes.emplace_back(cfg.bench_width, cfg.bench_height);

  for (const auto& [w, h] : sizes) {
    r2e::GratingSpec spec;
    spec.width = w;
    spec.height = h;
    for (const bool moving : {true, false}) {
      for (const int threads : {1, multi}) {
        auto gen = generator_config(cfg);
        gen.threads = threads;
        const auto r = run_bench(w, h, cfg.bench_frames, dt, gen, [&](std::uint64_t t) {
          return r2e::grating_frame(spec, moving ? t : 0);
        });
        std::cout << "workload=" << (moving ? "grating" : "static") << " width=" << w
                  << " height=" << h << " threads=" << threads
                  << " fps=" << r2e::format_double(r.fps)
                  << " events_per_s=" << r2e::format_double(r.events_per_s) << '\n';
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"r2e: frame-to-event simulation and calibration"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  std::optional<std::string> input, output, seed, threads, budget, grid, window, roi, reference;
  std::optional<std::string> k[6];
  std::optional<std::string> sensitivity, contrast, bright_leak, jitter, dark_noise, global_noise;

  app.add_option("--config", o.config_path, "key=value config file");
  app.add_option("--input", input, "input path");
  app.add_option("--output", output, "output path");
  app.add_option("--reference", reference, "reference events (calibrate)");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--threads", threads, "worker threads (0 = all)");
  for (int i = 0; i < 6; ++i) app.add_option("--k" + std::to_string(i + 1), k[i]);
  app.add_option("--sensitivity", sensitivity, "k1");
  app.add_option("--contrast", contrast, "k1,k4");
  app.add_option("--bright-leak", bright_leak, "k5");
  app.add_option("--jitter", jitter, "k3,k6");
  app.add_option("--dark-noise", dark_noise, "k4");
  app.add_option("--global-noise", global_noise, "k6");
  app.add_option("--budget", budget, "search trials (0 = regression only)");
  app.add_option("--grid", grid, "calibration grid as LxDL, e.g. 16x16");
  app.add_option("--window", window, "clock sync window (intervals)");
  app.add_option("--roi-track", roi, "ROI track CSV");
  app.add_option("--set", o.sets, "any config key as key=value");

  auto* convert = app.add_subcommand("convert", "simulate events from frames");
  auto* calibrate = app.add_subcommand("calibrate", "fit model parameters to reference events");
  auto* sync = app.add_subcommand("sync", "estimate the sensor-to-wall clock offset");
  std::string apply;
  sync->add_option("--apply", apply, "event or frame file to shift by the offset");
  auto* filter = app.add_subcommand("filter", "keep events inside a tracked ROI");
  auto* viz = app.add_subcommand("viz", "heatmap, point cloud or interval histogram");
  std::string mode = "heatmap";
  viz->add_option("--mode", mode)->check(CLI::IsMember({"heatmap", "cloud", "hist"}));
  auto* bench = app.add_subcommand("bench", "throughput on a synthetic grating");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto add = [&](const char* key, const std::optional<std::string>& v) {
    if (v) o.keys.emplace_back(key, *v);
  };
  add("input", input);
  add("output", output);
  add("reference", reference);
  add("seed", seed);
  add("threads", threads);
  add("sensitivity", sensitivity);
  add("contrast", contrast);
  add("bright-leak", bright_leak);
  add("jitter", jitter);
  add("dark-noise", dark_noise);
  add("global-noise", global_noise);
  for (int i = 0; i < 6; ++i) add(("k" + std::to_string(i + 1)).c_str(), k[i]);
  add("budget", budget);
  add("window", window);
  add("roi_track", roi);
  if (grid) {
    const auto x = grid->find('x');
    if (x == std::string::npos) {
      std::cerr << "error: --grid expects LxDL, e.g. 16x16\n";
      return 1;
    }
    o.keys.emplace_back("grid_l", grid->substr(0, x));
    o.keys.emplace_back("grid_dl", grid->substr(x + 1));
  }

  r2e::RunConfig cfg;
  try {
    cfg = build_config(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*convert) return cmd_convert(cfg);
    if (*calibrate) return cmd_calibrate(cfg);
    if (*sync) return cmd_sync(cfg, apply);
    if (*filter) return cmd_filter(cfg);
    if (*viz) return cmd_viz(cfg, mode);
    if (*bench) return cmd_bench(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const r2e::Error& e) {
    std::cerr << "error [" << r2e::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
