#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mxsim/config.hpp"
#include "mxsim/experiments.hpp"
#include "mxsim/io.hpp"
#include "mxsim/oracle.hpp"

namespace fs = std::filesystem;
using namespace mxsim;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

RunConfig load_config(const std::string& path, const std::string& preset_override,
                      const std::string& outdir_override) {
  RunConfig cfg = parse_config(path.empty() ? "" : read_file(path));
  if (!preset_override.empty()) cfg.preset = preset_override;
  if (const char* env = std::getenv("MXSIM_OUTPUT_DIR"); env && *env)
    cfg.output_dir = env;
  if (!outdir_override.empty()) cfg.output_dir = outdir_override;
  return cfg;
}

bool was_defaulted(const RunConfig& cfg, const std::string& key) {
  return std::find(cfg.defaulted.begin(), cfg.defaulted.end(), key) !=
         cfg.defaulted.end();
}

void maybe_banner(const RunConfig& cfg, std::ostream& err) {
  const auto r = compute_rates(to_physics(cfg.physics));
  if (r.pert_ratio >= 0.05)
    err << "warning: pert_ratio = " << format_double(r.pert_ratio)
        << " >= 0.05; sqrt(N) alpha0 u is not small against the sideband gap, "
           "so the adiabatic elimination is marginal here\n";
}

void print_rates(const PhysicsParams& p, std::ostream& out) {
  const auto r = compute_rates(p);
  auto line = [&](const std::string& k, double v) {
    out << k << " = " << format_double(v) << "\n";
  };
  line("dispersive_shift_hz", p.dispersive_shift() / two_pi);
  out << "alpha0 = " << format_double(r.alpha0.real()) << " "
      << (r.alpha0.imag() < 0 ? "-" : "+") << " "
      << format_double(std::abs(r.alpha0.imag())) << "i\n";
  line("photon_number", std::norm(r.alpha0));
  line("chi_plus_hz", r.chi_plus / two_pi);
  line("chi_minus_hz", r.chi_minus / two_pi);
  line("chi_hz", r.chi() / two_pi);
  line("gamma_plus_hz", r.gamma_plus / two_pi);
  line("gamma_minus_hz", r.gamma_minus / two_pi);
  line("sigma_in_hz", omega_in_per_hbar_k * p.sigma_p / two_pi);
  line("recoil_splitting_hz", p.omega_z / two_pi);
  line("pert_ratio", r.pert_ratio);
}

std::vector<std::string> execute_preset(const RunConfig& cfg, nlohmann::json& extras,
                                        bool quiet) {
  const PhysicsParams p = to_physics(cfg.physics);
  const auto& sc = cfg.scan;
  const IntegratorConfig& ic = cfg.integrator;
  const double n = p.n_atoms;
  const double sigma_in = omega_in_per_hbar_k * p.sigma_p;
  const fs::path dir = cfg.output_dir;
  std::vector<std::string> files;
  auto add = [&](const std::string& f) {
    files.push_back(f);
    return (dir / f).string();
  };

  if (cfg.preset == "rates") {
    if (!quiet) print_rates(p, std::cout);
  } else if (cfg.preset == "fig2a") {
    const auto trace =
        superradiant_transfer_trace(p, n, sc.trace_t_max, sc.trace_samples, ic);
    std::vector<std::vector<double>> rows;
    for (const auto& q : trace) rows.push_back({q.t * 1e6, q.n_up, q.n_down, q.leaked});
    write_csv(add("fig2a_trace.csv"), {"time_us", "n_up", "n_down", "leaked"}, rows);
    const auto scan = transfer_rate_scan(p, n, sc.half_points, sc.fraction, ic);
    rows.clear();
    for (const auto& q : scan)
      rows.push_back({q.delta_d / two_pi, q.rate_small, q.rate_large, q.ratio});
    write_csv(add("fig2a_scan.csv"),
              {"delta_d_hz", "fractional_rate_per_s", "fractional_rate_2n_per_s",
               "ratio"},
              rows);
  } else if (cfg.preset == "fig2d") {
    const auto pts = phase_vs_detuning_scan(p, n, p.sigma_p, p.n_bins, sc.points,
                                            sc.span, sc.theta1, sc.t_delay,
                                            sc.t_dress, ic);
    std::vector<std::vector<double>> rows;
    for (const auto& q : pts)
      rows.push_back({q.delta_d / two_pi, q.delta_phi, q.chi / two_pi, q.contrast});
    write_csv(add("fig2d.csv"), {"delta_d_hz", "delta_phi_rad", "chi_hz", "contrast"},
              rows);
  } else if (cfg.preset == "fig2e") {
    for (const int sign : {1, -1}) {
      const auto fit = phase_vs_jz_scan(p, n, sign, p.sigma_p, p.n_bins, sc.jz_points,
                                        sc.jz_span, sc.t_delay, sc.t_dress, ic);
      std::vector<std::vector<double>> rows;
      for (const auto& q : fit.points)
        rows.push_back({q.jz, q.theta1, q.delta_phi, q.contrast});
      const std::string tag = sign > 0 ? "above" : "below";
      write_csv(add("fig2e_" + tag + ".csv"),
                {"jz", "theta1_rad", "delta_phi_rad", "contrast"}, rows);
      extras["fit_" + tag] = {{"slope_rad_per_atom", fit.slope},
                              {"intercept_rad", fit.intercept},
                              {"r_squared", fit.r_squared},
                              {"chi_hz", fit.chi / two_pi},
                              {"delta_d_hz", fit.delta_d / two_pi}};
    }
  } else if (cfg.preset == "fig3a") {
    const std::vector<double> delays =
        sc.delays.empty() ? linspace(0.0, 3.0 / sigma_in, 13) : sc.delays;
    const auto pts = phase_vs_delay_scan(p, n, sc.ratio, sigma_in, delays, p.n_bins,
                                         sc.theta1, sc.t_dress, ic);
    std::vector<std::vector<double>> rows;
    for (const auto& q : pts)
      rows.push_back({q.t_delay * 1e6, q.phi_exchange, q.contrast_exchange,
                      q.phi_oat, q.contrast_oat});
    write_csv(add("fig3a.csv"),
              {"t_delay_us", "delta_phi_exchange_rad", "contrast_exchange",
               "delta_phi_oat_rad", "contrast_oat"},
              rows);
  } else if (cfg.preset == "fig3c" || cfg.preset == "fig4a") {
    // 4a keeps a deliberate gap between the echo overlap and the drive
    double extra = sc.extra_delay;
    if (cfg.preset == "fig4a" && was_defaulted(cfg, "scan.extra_delay"))
      extra = 40e-6;
    const auto pts = gap_protection_traces(p, n, sc.ratios, sigma_in, sc.arm, extra,
                                           sc.t_max, sc.dt_sample, p.n_bins,
                                           cfg.superradiance, true, ic);
    std::vector<std::vector<double>> rows;
    for (const auto& q : pts)
      rows.push_back({q.ratio, q.superradiance ? 1.0 : 0.0, q.t_dress * 1e6,
                      q.contrast, q.leaked});
    write_csv(add(cfg.preset + ".csv"),
              {"chi_n_over_sigma", "superradiance", "t_dress_us", "contrast",
               "leaked"},
              rows);
  } else if (cfg.preset == "fig4e") {
    const auto pts = echo_imbalance_scan(p, n, sigma_in, sc.early_ratios,
                                         sc.late_ratio, sc.echo_arm, sc.dress_start,
                                         sc.late_start, sc.t_dress, sc.dt_min,
                                         sc.dt_max, sc.dt_step, p.n_bins,
                                         cfg.superradiance, ic);
    std::vector<std::vector<std::string>> rows;
    for (const auto& q : pts)
      rows.push_back({format_double(q.ratio), q.placement,
                      format_double(q.dt * 1e6), format_double(q.contrast)});
    write_csv_text(add("fig4e.csv"),
                   {"chi_n_over_sigma", "placement", "dt_us", "contrast"}, rows);
  } else if (cfg.preset == "oracle") {
    std::vector<std::vector<std::string>> rows;
    const std::vector<std::pair<std::string, std::vector<int>>> table = {
        {"oat_phase", {4, 6, 8, 10, 12}},
        {"two_group", {4, 8, 12}},
        {"weak_dissipation", {3, 5, 7}},
        {"free", {5, 9}},
    };
    for (const auto& [scenario, grid] : table)
      for (const auto& row : meanfield_vs_exact(grid, scenario))
        rows.push_back({format_double(row.n_atoms), row.scenario,
                        format_double(row.phase_error), format_double(row.jz_error)});
    write_csv_text(add("oracle_meanfield.csv"),
                   {"n_atoms", "scenario", "phase_error_rad", "jz_error"}, rows);

    // shared-excitation pinning vs exchange strength, detunings on the
    // quadrature nodes the mean-field grid would use
    const int nr = 8;
    auto g = MomentumGrid::gauss_hermite(nr, sigma_p_for_sigma_in(1.0));
    const VectorX<double> det = g.omega_in;
    const double spread = std::sqrt((det - det.mean()).square().mean());
    std::vector<std::vector<double>> recoil;
    for (const double ratio : {0.0, 1.0, 2.0, 5.0, 20.0, 100.0}) {
      const auto rep =
          collective_recoil_check(nr, ratio * spread / nr, 0.0, det, 5.0 / spread, 32);
      recoil.push_back({ratio, rep.max_prob_deviation, rep.prob_variance,
                        rep.dicke_overlap, rep.norm_error});
    }
    write_csv(add("oracle_recoil.csv"),
              {"chi_n_over_spread", "max_prob_deviation", "prob_variance",
               "dicke_overlap", "norm_error"},
              recoil);
  } else if (cfg.preset == "custom") {
    const auto grid = make_grid(p.n_bins, p.sigma_p);
    const auto s0 = init_state(grid, n);
    const auto fr = fringe_scan(s0, to_sequence(cfg), p, default_phase_grid(), ic);
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < fr.phis.size(); ++i)
      rows.push_back({fr.phis[i], fr.jz[i]});
    write_csv(add("custom_fringe.csv"), {"phi_rad", "jz"}, rows);
    extras["fringe"] = {{"delta_phi_rad", fr.phase},
                        {"contrast", fr.contrast},
                        {"amplitude", fr.amplitude},
                        {"offset", fr.offset},
                        {"rms_residual", fr.rms_residual}};
  } else {
    throw std::runtime_error("unknown preset '" + cfg.preset + "'");
  }
  return files;
}

int do_run(const RunConfig& cfg, bool quiet = false) {
  fs::create_directories(cfg.output_dir);
  if (!quiet) maybe_banner(cfg, std::cerr);
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json extras;
  const auto files = execute_preset(cfg, extras, quiet);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  auto record = run_record(cfg, files, wall_ms);
  if (!extras.empty()) record["results"] = extras;
  const std::string record_name = cfg.preset + "_record.json";
  write_json((fs::path(cfg.output_dir) / record_name).string(), record);
  if (!quiet) {
    std::cout << cfg.preset << ": wrote " << record_name;
    for (const auto& f : files) std::cout << ", " << f;
    std::cout << " in " << cfg.output_dir << "\n";
  }
  return 0;
}

size_t worker_count(size_t jobs) {
  size_t w = 1;
  if (const char* env = std::getenv("MXSIM_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end || v < 1 || v > 256)
      throw std::runtime_error("MXSIM_WORKERS must be an integer in [1, 256]");
    w = v;
  }
  return std::min(w, jobs);
}

int do_sweep(const RunConfig& base, const std::string& key,
             const std::string& values_csv) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
    throw std::runtime_error("sweep key must look like section.key");
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);

  std::vector<std::string> values;
  std::string item;
  std::istringstream in(values_csv);
  while (std::getline(in, item, ',')) values.push_back(detail::trim(item));
  if (values.empty()) throw std::runtime_error("sweep needs at least one value");

  // overrides ride through the parser so they get the same validation and
  // error reporting as a config file would
  std::vector<RunConfig> points;
  for (size_t i = 0; i < values.size(); ++i) {
    RunConfig c;
    try {
      c = parse_config(serialize_config(base) + "\n[" + section + "]\n" + name +
                       " = " + values[i] + "\n");
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep value '" + values[i] + "': " + e.what());
    }
    c.output_dir =
        (fs::path(base.output_dir) / ("sweep_" + std::to_string(i))).string();
    points.push_back(std::move(c));
    maybe_banner(points.back(), std::cerr);
  }

  std::vector<std::string> errors(points.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (size_t i = cursor.fetch_add(1); i < points.size(); i = cursor.fetch_add(1)) {
      try {
        do_run(points[i], true);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < worker_count(points.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int rc = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (errors[i].empty()) {
      std::cout << "sweep " << i << " (" << key << " = " << values[i] << "): wrote "
                << points[i].output_dir << "\n";
    } else {
      std::cerr << "sweep " << i << " (" << key << " = " << values[i]
                << "): error: " << errors[i] << "\n";
      rc = 1;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavity-mediated momentum-exchange interferometer simulator"};
  app.require_subcommand(1);
  std::string config_path, outdir, sweep_key, sweep_values;

  const std::vector<std::pair<std::string, std::string>> presets = {
      {"run", "run the preset selected by the config file"},
      {"rates", "print the coupling rates derived from the configured constants"},
      {"fig2a", "superradiant transfer trace and its detuning/atom-number scan"},
      {"fig2d", "interferometer phase shift vs drive-cavity detuning"},
      {"fig2e", "phase shift vs initial population imbalance, both detuning sides"},
      {"fig3a", "exchange vs twisting-only phase as the drive is delayed"},
      {"fig3c", "contrast vs dressing time across interaction strengths"},
      {"fig4a", "gap-protected contrast revivals after the echo overlap"},
      {"fig4e", "echo contrast peak shift under early vs late dressing"},
      {"oracle", "few-atom exact model vs mean-field error tables"},
  };
  for (const auto& [name, blurb] : presets) {
    auto* cmd = app.add_subcommand(name, blurb);
    cmd->add_option("-c,--config", config_path, "config file (sectioned key-value)");
    cmd->add_option("-o,--output-dir", outdir, "output directory");
  }
  auto* sweep_cmd =
      app.add_subcommand("sweep", "re-run the configured preset over a value grid");
  sweep_cmd->add_option("-c,--config", config_path, "config file");
  sweep_cmd->add_option("-o,--output-dir", outdir, "output directory");
  sweep_cmd->add_option("-k,--key", sweep_key, "config key to vary, e.g. physics.delta_d")
      ->required();
  sweep_cmd->add_option("-v,--values", sweep_values, "comma-separated values")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("sweep"))
      return do_sweep(load_config(config_path, "", outdir), sweep_key, sweep_values);
    for (const auto& [name, blurb] : presets) {
      (void)blurb;
      if (app.got_subcommand(name))
        return do_run(load_config(config_path, name == "run" ? "" : name, outdir));
    }
    throw std::runtime_error("no subcommand dispatched");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
