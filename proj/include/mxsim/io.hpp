#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mxsim/config.hpp"
#include "mxsim/physics.hpp"

// Deterministic output: CSV for curves, JSON for run records. Numbers are
// printed with std::to_chars, the shortest form that parses back to the same
// double, so identical configs produce byte-identical files. Timing lives
// only in the run record, never in data files.

namespace mxsim {

inline constexpr const char* mxsim_version = "0.1.0";

inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

template <class Row, class Fmt>
void write_csv_impl(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<Row>& rows, Fmt&& fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot open '" + path + "' for writing");
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << csv_field(header[i]);
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::logic_error("io: row width does not match the header");
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << fmt(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("io: short write to '" + path + "'");
}

}  // namespace detail

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  detail::write_csv_impl(path, header, rows,
                         [](double v) { return format_double(v); });
}

// for tables with labeled columns; numeric cells should come pre-formatted
// with format_double so determinism still holds
inline void write_csv_text(const std::string& path,
                           const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
  detail::write_csv_impl(path, header, rows,
                         [](const std::string& v) { return detail::csv_field(v); });
}

inline std::string serialize_event(const PulseEvent& e) {
  switch (e.kind) {
    case EventKind::bragg:
      return "bragg " + format_double(e.theta) + " " + format_double(e.phi);
    case EventKind::free_flight:
      return "free " + format_double(e.duration);
    case EventKind::dressing:
      return "dressing " + format_double(e.duration) + " " +
             format_double(e.flux_scale);
    case EventKind::mark:
      return "mark " + e.label;
  }
  throw std::logic_error("io: unhandled event kind");
}

// Canonical text for a fully resolved config: every key explicit, frequencies
// in bare hertz. Parsing this text reproduces the struct exactly, which is
// what lets a run record re-run bit-for-bit.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  auto num = [&](const std::string& k, double v) { kv(k, format_double(v)); };
  auto hz = [&](const std::string& k, double v) {
    kv(k, format_double(v) + " Hz");
  };
  auto list = [&](const std::string& k, const std::vector<double>& v) {
    if (v.empty()) return;
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + format_double(v[i]);
    kv(k, s);
  };

  out += "[physics]\n";
  num("n_atoms", cfg.physics.n_atoms);
  hz("g0", cfg.physics.g0_hz);
  hz("kappa", cfg.physics.kappa_hz);
  hz("kappa1", cfg.physics.kappa1_hz);
  hz("delta_a", cfg.physics.delta_a_hz);
  hz("omega_z", cfg.physics.omega_z_hz);
  hz("delta_d", cfg.physics.delta_d_hz);
  num("flux", cfg.physics.flux);
  num("sigma_p", cfg.physics.sigma_p);
  if (cfg.physics.sigma_in_hz > 0) hz("sigma_in", cfg.physics.sigma_in_hz);
  num("n_bins", cfg.physics.n_bins);

  out += "\n[integrator]\n";
  num("rel_tol", cfg.integrator.rel_tol);
  num("abs_tol", cfg.integrator.abs_tol);
  num("max_step", cfg.integrator.max_step);
  kv("fixed_step", cfg.integrator.fixed_step ? "true" : "false");
  num("dt", cfg.integrator.dt);

  out += "\n[run]\n";
  kv("preset", cfg.preset);
  kv("model", cfg.model);
  kv("pulse_mode", cfg.pulse_mode);
  kv("superradiance", cfg.superradiance ? "true" : "false");
  kv("output_dir", cfg.output_dir);

  out += "\n[scan]\n";
  num("points", cfg.scan.points);
  num("span", cfg.scan.span);
  num("jz_points", cfg.scan.jz_points);
  num("jz_span", cfg.scan.jz_span);
  num("theta1", cfg.scan.theta1);
  num("t_delay", cfg.scan.t_delay);
  num("t_dress", cfg.scan.t_dress);
  num("ratio", cfg.scan.ratio);
  list("delays", cfg.scan.delays);
  list("ratios", cfg.scan.ratios);
  num("arm", cfg.scan.arm);
  num("extra_delay", cfg.scan.extra_delay);
  num("t_max", cfg.scan.t_max);
  num("dt_sample", cfg.scan.dt_sample);
  num("trace_t_max", cfg.scan.trace_t_max);
  num("trace_samples", cfg.scan.trace_samples);
  num("half_points", cfg.scan.half_points);
  num("fraction", cfg.scan.fraction);
  list("early_ratios", cfg.scan.early_ratios);
  num("late_ratio", cfg.scan.late_ratio);
  num("dress_start", cfg.scan.dress_start);
  num("late_start", cfg.scan.late_start);
  num("echo_arm", cfg.scan.echo_arm);
  num("dt_min", cfg.scan.dt_min);
  num("dt_max", cfg.scan.dt_max);
  num("dt_step", cfg.scan.dt_step);

  if (!cfg.sequence.empty()) {
    out += "\n[sequence]\n";
    for (const auto& e : cfg.sequence) kv("event", serialize_event(e));
  }
  return out;
}

// resolved config, derived rates, and everything needed to re-run one run;
// wall time is the only nondeterministic field and stays out of the data files
inline nlohmann::json run_record(const RunConfig& cfg,
                                 const std::vector<std::string>& outputs,
                                 double wall_ms) {
  const PhysicsParams p = to_physics(cfg.physics);
  const CouplingRates r = compute_rates(p);
  nlohmann::json j;
  j["version"] = mxsim_version;
  j["preset"] = cfg.preset;
  j["config_snapshot"] = serialize_config(cfg);
  j["defaults_applied"] = cfg.defaulted;
  j["physics"] = {
      {"n_atoms", p.n_atoms},          {"g0_hz", cfg.physics.g0_hz},
      {"kappa_hz", cfg.physics.kappa_hz}, {"kappa1_hz", cfg.physics.kappa1_hz},
      {"delta_a_hz", cfg.physics.delta_a_hz}, {"omega_z_hz", cfg.physics.omega_z_hz},
      {"delta_d_hz", cfg.physics.delta_d_hz}, {"flux_per_s", p.flux_d},
      {"sigma_p", p.sigma_p},          {"n_bins", p.n_bins},
  };
  j["derived_rates"] = {
      {"dispersive_shift_hz", p.dispersive_shift() / two_pi},
      {"alpha0_re", r.alpha0.real()},
      {"alpha0_im", r.alpha0.imag()},
      {"photon_number", std::norm(r.alpha0)},
      {"chi_plus_hz", r.chi_plus / two_pi},
      {"chi_minus_hz", r.chi_minus / two_pi},
      {"chi_hz", r.chi() / two_pi},
      {"gamma_plus_hz", r.gamma_plus / two_pi},
      {"gamma_minus_hz", r.gamma_minus / two_pi},
      {"sigma_in_hz", omega_in_per_hbar_k * p.sigma_p / two_pi},
      {"pert_ratio", r.pert_ratio},
  };
  j["outputs"] = outputs;
  j["wall_ms"] = wall_ms;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("io: short write to '" + path + "'");
}

}  // namespace mxsim
