#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxsim/grid.hpp"
#include "mxsim/integrate.hpp"
#include "mxsim/physics.hpp"
#include "mxsim/sequence.hpp"

// Sectioned key-value run configuration. Frequencies are written in linear
// hertz (bare numbers or Hz / kHz / MHz suffixes) and converted to the core's
// angular units exactly once, in to_physics(). Durations are plain seconds,
// angles plain radians. Every parse error carries its line number; unknown
// keys come with the nearest known key as a suggestion.

namespace mxsim {

// linear-frequency mirror of PhysicsParams, the shape the config file speaks
struct PhysicsConfig {
  double n_atoms = 1000;
  double g0_hz = 0.48e6;
  double kappa_hz = 56e3;
  double kappa1_hz = 28e3;    // tracks kappa/2 unless set explicitly
  double delta_a_hz = 500e6;
  double omega_z_hz = 200e3;
  double delta_d_hz = 300e3;
  double flux = 3.5e8;        // photons/s
  double sigma_p = 0.05;      // hbar*k
  double sigma_in_hz = 0;     // when nonzero, overrides sigma_p via the recoil map
  int n_bins = 64;
};

inline PhysicsParams to_physics(const PhysicsConfig& c) {
  PhysicsParams p;
  p.n_atoms = c.n_atoms;
  p.g0 = two_pi * c.g0_hz;
  p.kappa = two_pi * c.kappa_hz;
  p.kappa1 = two_pi * c.kappa1_hz;
  p.delta_a = two_pi * c.delta_a_hz;
  p.omega_z = two_pi * c.omega_z_hz;
  p.delta_d = two_pi * c.delta_d_hz;
  p.flux_d = c.flux;
  p.sigma_p = c.sigma_in_hz > 0 ? sigma_p_for_sigma_in(two_pi * c.sigma_in_hz)
                                : c.sigma_p;
  p.n_bins = c.n_bins;
  p.validate();
  return p;
}

// per-experiment grid knobs; defaults reproduce the shipped presets
struct ScanConfig {
  // fig2d detuning scan
  int points = 81;
  double span = 2.0;  // half-width in units of omega_z
  // fig2e population scan
  int jz_points = 9;
  double jz_span = 0.8;
  // shared interferometer timing
  double theta1 = pi / 4;
  double t_delay = 25e-6;
  double t_dress = 25e-6;
  // fig3a delay scan
  double ratio = 0.5;           // chi N / sigma_in
  std::vector<double> delays;   // empty: 13 points spanning [0, 3/sigma_in]
  // fig3c / fig4a dressing-time traces
  std::vector<double> ratios = {0.0, 0.5, 1.7, 2.8, 4.0};
  double arm = 70e-6;
  double extra_delay = 0;
  double t_max = 600e-6;
  double dt_sample = 5e-6;
  // fig2a transfer
  double trace_t_max = 60e-6;
  int trace_samples = 61;
  int half_points = 8;
  double fraction = 0.01;
  // fig4e echo imbalance
  std::vector<double> early_ratios = {0.0, 3.0, 8.0};
  double late_ratio = 8.0;
  double dress_start = 25e-6;
  double late_start = 400e-6;
  double echo_arm = 600e-6;
  double dt_min = -150e-6;
  double dt_max = 100e-6;
  double dt_step = 5e-6;
};

struct RunConfig {
  PhysicsConfig physics;
  IntegratorConfig integrator;
  std::string preset = "rates";
  std::string model = "effective";  // effective | pure_oat | full_cavity
  std::string pulse_mode = "instantaneous";
  bool superradiance = true;
  std::string output_dir = ".";
  ScanConfig scan;
  std::vector<PulseEvent> sequence;      // custom preset prefix, applied to |down>^N
  std::vector<std::string> defaulted;    // "section.key" entries left at defaults
};

inline const std::vector<std::string>& known_presets() {
  static const std::vector<std::string> v = {"rates",  "fig2a", "fig2d", "fig2e",
                                             "fig3a",  "fig3c", "fig4a", "fig4e",
                                             "oracle", "custom"};
  return v;
}

inline ModelKind model_kind(const std::string& name) {
  if (name == "effective") return ModelKind::effective;
  if (name == "pure_oat") return ModelKind::pure_oat;
  if (name == "full_cavity") return ModelKind::full_cavity;
  throw std::invalid_argument("config: unknown model '" + name + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = int(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = int(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string nearest(const std::string& key, const std::vector<std::string>& known) {
  std::string best;
  int best_d = 1 << 30;
  for (const auto& k : known) {
    const int d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best_d <= std::max<int>(2, int(key.size()) / 2) ? best : "";
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
  throw std::runtime_error("config: line " + std::to_string(line) + ": " + msg);
}

inline double parse_number(const std::string& tok, int line) {
  double v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    fail(line, "expected a number, got '" + tok + "'");
  return v;
}

// "<number> [Hz|kHz|MHz]" -> linear hertz
inline double parse_frequency(const std::string& val, int line) {
  std::istringstream in(val);
  std::string num, unit, extra;
  in >> num >> unit >> extra;
  if (!extra.empty()) fail(line, "trailing tokens after '" + unit + "'");
  double scale = 1;
  if (!unit.empty()) {
    const std::string u = lower(unit);
    if (u == "hz") scale = 1;
    else if (u == "khz") scale = 1e3;
    else if (u == "mhz") scale = 1e6;
    else fail(line, "unknown frequency unit '" + unit + "' (use Hz, kHz, MHz)");
  }
  return parse_number(num, line) * scale;
}

inline double parse_plain(const std::string& val, const std::string& key, int line) {
  std::istringstream in(val);
  std::string num, unit;
  in >> num >> unit;
  if (!unit.empty())
    fail(line, "key '" + key + "' does not take a unit (got '" + unit + "')");
  return parse_number(num, line);
}

inline bool parse_bool(const std::string& val, int line) {
  const std::string v = lower(trim(val));
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  fail(line, "expected a boolean, got '" + val + "'");
}

inline std::vector<double> parse_list(const std::string& val, int line) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(val);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty entry in list");
    out.push_back(parse_number(item, line));
  }
  if (out.empty()) fail(line, "expected a comma-separated list");
  return out;
}

inline PulseEvent parse_event(const std::string& val, int line) {
  std::istringstream in(val);
  std::string kind;
  in >> kind;
  std::vector<std::string> args;
  std::string a;
  while (in >> a) args.push_back(a);
  PulseEvent e;
  if (kind == "bragg") {
    if (args.empty() || args.size() > 2)
      fail(line, "bragg takes theta [phi], in radians");
    e = bragg_pulse(parse_number(args[0], line),
                    args.size() > 1 ? parse_number(args[1], line) : 0.0);
  } else if (kind == "free") {
    if (args.size() != 1) fail(line, "free takes one duration in seconds");
    e = free_flight(parse_number(args[0], line));
  } else if (kind == "dressing") {
    if (args.empty() || args.size() > 2)
      fail(line, "dressing takes duration [flux_scale]");
    e = dressing(parse_number(args[0], line),
                 args.size() > 1 ? parse_number(args[1], line) : 1.0);
  } else if (kind == "mark") {
    if (args.size() != 1) fail(line, "mark takes one label");
    e = mark(args[0]);
  } else {
    fail(line, "unknown event '" + kind + "' (bragg, free, dressing, mark)");
  }
  return e;
}

inline void check_positive(double v, const std::string& key, int line) {
  if (!(v > 0)) fail(line, "'" + key + "' must be positive");
}

inline void check_nonneg(double v, const std::string& key, int line) {
  if (!(v >= 0)) fail(line, "'" + key + "' must be >= 0");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  RunConfig cfg;
  std::vector<std::string> provided;
  bool kappa1_set = false;

  static const std::vector<std::string> physics_keys = {
      "n_atoms", "g0",      "kappa",    "kappa1", "delta_a", "omega_z",
      "delta_d", "flux",    "sigma_p",  "sigma_in", "n_bins"};
  static const std::vector<std::string> integrator_keys = {
      "rel_tol", "abs_tol", "max_step", "fixed_step", "dt"};
  static const std::vector<std::string> run_keys = {
      "preset", "model", "pulse_mode", "superradiance", "output_dir"};
  static const std::vector<std::string> scan_keys = {
      "points",      "span",        "jz_points",  "jz_span",    "theta1",
      "t_delay",     "t_dress",     "ratio",      "delays",     "ratios",
      "arm",         "extra_delay", "t_max",      "dt_sample",  "trace_t_max",
      "trace_samples", "half_points", "fraction", "early_ratios", "late_ratio",
      "dress_start", "late_start",  "echo_arm",   "dt_min",     "dt_max",
      "dt_step"};

  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "physics" && section != "integrator" && section != "run" &&
          section != "scan" && section != "sequence")
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) fail(line, "expected 'key = value'");
    if (section.empty()) fail(line, "key '" + key + "' appears before any [section]");

    auto unknown = [&](const std::vector<std::string>& known) {
      const std::string hint = nearest(key, known);
      fail(line, "unknown key '" + key + "' in [" + section + "]" +
                     (hint.empty() ? "" : " (did you mean '" + hint + "'?)"));
    };

    if (section == "physics") {
      auto& ph = cfg.physics;
      if (key == "n_atoms") {
        ph.n_atoms = parse_plain(val, key, line);
        if (!(ph.n_atoms >= 1)) fail(line, "'n_atoms' must be >= 1");
      } else if (key == "g0") {
        ph.g0_hz = parse_frequency(val, line);
        check_positive(ph.g0_hz, key, line);
      } else if (key == "kappa") {
        ph.kappa_hz = parse_frequency(val, line);
        check_positive(ph.kappa_hz, key, line);
      } else if (key == "kappa1") {
        ph.kappa1_hz = parse_frequency(val, line);
        check_positive(ph.kappa1_hz, key, line);
        kappa1_set = true;
      } else if (key == "delta_a") {
        ph.delta_a_hz = parse_frequency(val, line);
        if (ph.delta_a_hz == 0) fail(line, "'delta_a' must be nonzero");
      } else if (key == "omega_z") {
        ph.omega_z_hz = parse_frequency(val, line);
        check_positive(ph.omega_z_hz, key, line);
      } else if (key == "delta_d") {
        ph.delta_d_hz = parse_frequency(val, line);
      } else if (key == "flux") {
        ph.flux = parse_plain(val, key, line);
        check_nonneg(ph.flux, key, line);
      } else if (key == "sigma_p") {
        ph.sigma_p = parse_plain(val, key, line);
        check_nonneg(ph.sigma_p, key, line);
      } else if (key == "sigma_in") {
        ph.sigma_in_hz = parse_frequency(val, line);
        check_nonneg(ph.sigma_in_hz, key, line);
      } else if (key == "n_bins") {
        ph.n_bins = int(parse_plain(val, key, line));
        if (ph.n_bins < 1) fail(line, "'n_bins' must be >= 1");
      } else {
        unknown(physics_keys);
      }
    } else if (section == "integrator") {
      auto& ic = cfg.integrator;
      if (key == "rel_tol") {
        ic.rel_tol = parse_plain(val, key, line);
        check_positive(ic.rel_tol, key, line);
      } else if (key == "abs_tol") {
        ic.abs_tol = parse_plain(val, key, line);
        check_positive(ic.abs_tol, key, line);
      } else if (key == "max_step") {
        ic.max_step = parse_plain(val, key, line);
        check_nonneg(ic.max_step, key, line);
      } else if (key == "fixed_step") {
        ic.fixed_step = parse_bool(val, line);
      } else if (key == "dt") {
        ic.dt = parse_plain(val, key, line);
        check_nonneg(ic.dt, key, line);
      } else {
        unknown(integrator_keys);
      }
    } else if (section == "run") {
      if (key == "preset") {
        if (std::find(known_presets().begin(), known_presets().end(), val) ==
            known_presets().end()) {
          const std::string hint = nearest(val, known_presets());
          fail(line, "unknown preset '" + val + "'" +
                         (hint.empty() ? "" : " (did you mean '" + hint + "'?)"));
        }
        cfg.preset = val;
      } else if (key == "model") {
        if (val != "effective" && val != "pure_oat" && val != "full_cavity")
          fail(line, "model must be effective, pure_oat, or full_cavity");
        cfg.model = val;
      } else if (key == "pulse_mode") {
        if (val != "instantaneous" && val != "finite")
          fail(line, "pulse_mode must be instantaneous or finite");
        cfg.pulse_mode = val;
      } else if (key == "superradiance") {
        cfg.superradiance = parse_bool(val, line);
      } else if (key == "output_dir") {
        cfg.output_dir = val;
      } else {
        unknown(run_keys);
      }
    } else if (section == "scan") {
      auto& sc = cfg.scan;
      if (key == "points") sc.points = int(parse_plain(val, key, line));
      else if (key == "span") sc.span = parse_plain(val, key, line);
      else if (key == "jz_points") sc.jz_points = int(parse_plain(val, key, line));
      else if (key == "jz_span") sc.jz_span = parse_plain(val, key, line);
      else if (key == "theta1") sc.theta1 = parse_plain(val, key, line);
      else if (key == "t_delay") sc.t_delay = parse_plain(val, key, line);
      else if (key == "t_dress") sc.t_dress = parse_plain(val, key, line);
      else if (key == "ratio") sc.ratio = parse_plain(val, key, line);
      else if (key == "delays") sc.delays = parse_list(val, line);
      else if (key == "ratios") sc.ratios = parse_list(val, line);
      else if (key == "arm") sc.arm = parse_plain(val, key, line);
      else if (key == "extra_delay") sc.extra_delay = parse_plain(val, key, line);
      else if (key == "t_max") sc.t_max = parse_plain(val, key, line);
      else if (key == "dt_sample") sc.dt_sample = parse_plain(val, key, line);
      else if (key == "trace_t_max") sc.trace_t_max = parse_plain(val, key, line);
      else if (key == "trace_samples") sc.trace_samples = int(parse_plain(val, key, line));
      else if (key == "half_points") sc.half_points = int(parse_plain(val, key, line));
      else if (key == "fraction") sc.fraction = parse_plain(val, key, line);
      else if (key == "early_ratios") sc.early_ratios = parse_list(val, line);
      else if (key == "late_ratio") sc.late_ratio = parse_plain(val, key, line);
      else if (key == "dress_start") sc.dress_start = parse_plain(val, key, line);
      else if (key == "late_start") sc.late_start = parse_plain(val, key, line);
      else if (key == "echo_arm") sc.echo_arm = parse_plain(val, key, line);
      else if (key == "dt_min") sc.dt_min = parse_plain(val, key, line);
      else if (key == "dt_max") sc.dt_max = parse_plain(val, key, line);
      else if (key == "dt_step") sc.dt_step = parse_plain(val, key, line);
      else unknown(scan_keys);
    } else {  // sequence
      if (key != "event")
        fail(line, "only 'event' entries are allowed in [sequence]");
      cfg.sequence.push_back(parse_event(val, line));
    }
    if (section != "sequence") provided.push_back(section + "." + key);
  }

  if (!kappa1_set) cfg.physics.kappa1_hz = cfg.physics.kappa_hz / 2;
  if (cfg.physics.kappa1_hz > cfg.physics.kappa_hz)
    throw std::runtime_error("config: kappa1 must not exceed kappa");
  if (cfg.preset == "custom" && cfg.sequence.empty())
    throw std::runtime_error("config: the custom preset needs a [sequence] block");

  // every known key not provided was defaulted; echoed into the run record
  auto note = [&](const std::string& sec, const std::vector<std::string>& keys) {
    for (const auto& k : keys)
      if (std::find(provided.begin(), provided.end(), sec + "." + k) == provided.end())
        cfg.defaulted.push_back(sec + "." + k);
  };
  note("physics", physics_keys);
  note("integrator", integrator_keys);
  note("run", run_keys);
  note("scan", scan_keys);
  return cfg;
}

inline PulseSequence to_sequence(const RunConfig& cfg) {
  PulseSequence seq;
  seq.events = cfg.sequence;
  seq.model = model_kind(cfg.model);
  seq.pulse_mode = cfg.pulse_mode == "finite" ? PulseMode::finite
                                              : PulseMode::instantaneous;
  seq.superradiance = cfg.superradiance;
  return seq;
}

}  // namespace mxsim
