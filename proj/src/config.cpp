#include "r2e/config.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>
#include <cmath>
#include <fstream>
#include <sstream>

#include "r2e/error.hpp"

namespace r2e {

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorKind::InvalidArgument, std::string(key) + "=" + std::string(value) +
                                              ": " + std::string(why));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    bad(key, v, "expected a finite number");
  return out;
}

template <typename T>
T to_integer(std::string_view key, std::string_view v) {
  v = trim(v);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "expected an integer");
  return out;
}

std::pair<double, double> to_pair(std::string_view key, std::string_view v, char sep) {
  const auto pos = v.find(sep);
  if (pos == std::string_view::npos) bad(key, v, std::string("expected two values separated by '") + sep + "'");
  return {to_double(key, v.substr(0, pos)), to_double(key, v.substr(pos + 1))};
}

constexpr const char* kKNames[6] = {"k1", "k2", "k3", "k4", "k5", "k6"};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "k1", "k2", "k3", "k4", "k5", "k6", "theta_on", "theta_off", "mu_epsilon",
      "sensitivity", "contrast", "bright-leak", "jitter", "dark-noise", "global-noise",
      "seed", "threads", "input", "output", "reference", "roi_track", "luma_mode",
      "grid_l", "grid_dl", "n_min", "budget", "bounds.k1", "bounds.k2", "bounds.k3",
      "bounds.k4", "bounds.k5", "bounds.k6", "search_seed", "emd_subsample",
      "emd_projections", "window", "polarity", "stride", "hist_edges", "t_begin",
      "t_end", "bench_width", "bench_height", "bench_frames", "bench_fps"};
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  for (int i = 0; i < 6; ++i) {
    if (key == kKNames[i]) return set_k(params, i, to_double(key, value));
    if (key == std::string("bounds.") + kKNames[i]) {
      bounds.k[i] = to_pair(key, value, ':');
      bounds_declared = true;
      return;
    }
  }
  if (key == "theta_on") params.theta_on = to_double(key, value);
  else if (key == "theta_off") params.theta_off = to_double(key, value);
  else if (key == "mu_epsilon") mu_epsilon = to_double(key, value);
  else if (key == "sensitivity") params.k1 = to_double(key, value);
  else if (key == "contrast") std::tie(params.k1, params.k4) = to_pair(key, value, ',');
  else if (key == "bright-leak") params.k5 = to_double(key, value);
  else if (key == "jitter") std::tie(params.k3, params.k6) = to_pair(key, value, ',');
  else if (key == "dark-noise") params.k4 = to_double(key, value);
  else if (key == "global-noise") params.k6 = to_double(key, value);
  else if (key == "seed") seed = to_integer<std::uint64_t>(key, value);
  else if (key == "threads") threads = to_integer<int>(key, value);
  else if (key == "input") input = value;
  else if (key == "output") output = value;
  else if (key == "reference") reference = value;
  else if (key == "roi_track") roi_track = value;
  else if (key == "luma_mode") luma_mode = value;
  else if (key == "grid_l") grid_l = to_integer<int>(key, value);
  else if (key == "grid_dl") grid_dl = to_integer<int>(key, value);
  else if (key == "n_min") n_min = to_integer<std::size_t>(key, value);
  else if (key == "budget") budget = to_integer<std::size_t>(key, value);
  else if (key == "search_seed") search_seed = to_integer<std::uint64_t>(key, value);
  else if (key == "emd_subsample") emd_subsample = to_integer<std::size_t>(key, value);
  else if (key == "emd_projections") emd_projections = to_integer<std::size_t>(key, value);
  else if (key == "window") window = to_integer<std::size_t>(key, value);
  else if (key == "polarity") polarity = value;
  else if (key == "stride") stride = to_integer<std::size_t>(key, value);
  else if (key == "hist_edges") hist_edges = value;
  else if (key == "t_begin") t_begin = to_integer<std::uint64_t>(key, value);
  else if (key == "t_end") t_end = to_integer<std::uint64_t>(key, value);
  else if (key == "bench_width") bench_width = to_integer<int>(key, value);
  else if (key == "bench_height") bench_height = to_integer<int>(key, value);
  else if (key == "bench_frames") bench_frames = to_integer<std::size_t>(key, value);
  else if (key == "bench_fps") bench_fps = to_double(key, value);
  else throw Error(ErrorKind::InvalidArgument, "unknown config key: " + std::string(key));
}

void RunConfig::validate() const {
  params.validate();
  if (!(mu_epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu_epsilon must be > 0");
  if (threads < 0) throw Error(ErrorKind::InvalidArgument, "threads must be >= 0");
  if (grid_l < 1 || grid_dl < 1) throw Error(ErrorKind::InvalidArgument, "grid must be >= 1x1");
  if (window < 1) throw Error(ErrorKind::InvalidArgument, "window must be >= 1");
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
  if (emd_subsample < 1 || emd_projections < 1)
    throw Error(ErrorKind::InvalidArgument, "emd_subsample and emd_projections must be >= 1");
  if (polarity != "on" && polarity != "off" && polarity != "both")
    throw Error(ErrorKind::InvalidArgument, "polarity must be on, off or both");
  if (luma_mode != "green-mean" && luma_mode != "quad-mean")
    throw Error(ErrorKind::InvalidArgument, "luma_mode must be green-mean or quad-mean");
  if (bench_width < 1 || bench_height < 1 || bench_frames < 2 || !(bench_fps > 0.0))
    throw Error(ErrorKind::InvalidArgument, "bench geometry/frames/fps out of range");
  bounds.validate();
  if (bounds_declared && !bounds.contains(params))
    throw Error(ErrorKind::InvalidArgument, "model parameters fall outside declared bounds");
  parse_bin_edges(hist_edges);
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  for (int i = 0; i < 6; ++i) out << kKNames[i] << '=' << format_double(get_k(params, i)) << '\n';
  out << "theta_on=" << format_double(params.theta_on) << '\n'
      << "theta_off=" << format_double(params.theta_off) << '\n'
      << "mu_epsilon=" << format_double(mu_epsilon) << '\n'
      << "seed=" << seed << '\n'
      << "threads=" << threads << '\n'
      << "input=" << input << '\n'
      << "output=" << output << '\n'
      << "reference=" << reference << '\n'
      << "roi_track=" << roi_track << '\n'
      << "luma_mode=" << luma_mode << '\n'
      << "grid_l=" << grid_l << '\n'
      << "grid_dl=" << grid_dl << '\n'
      << "n_min=" << n_min << '\n'
      << "budget=" << budget << '\n';
  if (bounds_declared)
    for (int i = 0; i < 6; ++i)
      out << "bounds." << kKNames[i] << '=' << format_double(bounds.k[i].first) << ':'
          << format_double(bounds.k[i].second) << '\n';
  out << "search_seed=" << search_seed << '\n'
      << "emd_subsample=" << emd_subsample << '\n'
      << "emd_projections=" << emd_projections << '\n'
      << "window=" << window << '\n'
      << "polarity=" << polarity << '\n'
      << "stride=" << stride << '\n'
      << "hist_edges=" << hist_edges << '\n'
      << "t_begin=" << t_begin << '\n'
      << "t_end=" << t_end << '\n'
      << "bench_width=" << bench_width << '\n'
      << "bench_height=" << bench_height << '\n'
      << "bench_frames=" << bench_frames << '\n'
      << "bench_fps=" << format_double(bench_fps) << '\n';
  return out.str();
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::InvalidArgument,
                  "config line " + std::to_string(line_no) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::vector<double> parse_bin_edges(std::string_view spec) {
  std::vector<double> edges;
  const auto colon = spec.find(':');
  if (colon != std::string_view::npos) {
    const std::string_view kind = spec.substr(0, colon);
    std::string rest(spec.substr(colon + 1));
    std::replace(rest.begin(), rest.end(), ':', ' ');
    std::istringstream in(rest);
    double lo, hi;
    int n;
    if (!(in >> lo >> hi >> n) || n < 1 || !(hi > lo))
      bad("hist_edges", spec, "expected kind:lo:hi:n with hi > lo, n >= 1");
    for (int i = 0; i <= n; ++i) {
      if (kind == "linear") {
        edges.push_back(lo + (hi - lo) * i / n);
      } else if (kind == "log") {
        if (!(lo > 0)) bad("hist_edges", spec, "log edges need lo > 0");
        edges.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / n));
      } else {
        bad("hist_edges", spec, "kind must be linear or log");
      }
    }
    return edges;
  }
  std::string cell;
  std::istringstream in{std::string(spec)};
  while (std::getline(in, cell, ',')) edges.push_back(to_double("hist_edges", cell));
  if (edges.size() < 2) bad("hist_edges", spec, "need >= 2 edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) bad("hist_edges", spec, "edges must increase");
  return edges;
}

}  // namespace r2e
