#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxsim/sequence.hpp"

// Named measurement presets built on the sequence executor. Each returns
// plain row structs ready for CSV output and is deterministic in its inputs.
// Experiments run at double precision; the templated core stays underneath.

namespace mxsim {

using PhysicsParams = PhysicsParamsT<double>;
using SpinField = SpinFieldT<double>;
using MomentumGrid = MomentumGridT<double>;

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * double(i) / double(n - 1);
  return out;
}

// Drive power multiplier that realizes a requested exchange-to-spread ratio
// chi*N/sigma_in; chi scales linearly with incident photon flux, and the
// superradiant rates ride along with the same factor.
inline double drive_scale_for_ratio(const PhysicsParams& p, double ratio,
                                    double sigma_in, double n_atoms) {
  const double chi1 = compute_rates(p, 1.0).chi();
  if (ratio == 0) return 0;
  const double scale = ratio * sigma_in / (n_atoms * chi1);
  if (!(scale > 0))
    throw std::invalid_argument(
        "drive_scale_for_ratio: chi at this detuning has the wrong sign for "
        "the requested ratio");
  return scale;
}

inline MomentumGrid make_grid(int n_bins, double sigma_p) {
  if (n_bins <= 1 || sigma_p <= 0) return MomentumGrid::homogeneous();
  return MomentumGrid::gauss_hermite(n_bins, sigma_p);
}

// ---- collective population transfer on the sideband resonance (fig2a) ----

struct TransferTracePoint {
  double t = 0;
  double n_up = 0;
  double n_down = 0;
  double leaked = 0;
};

inline std::vector<TransferTracePoint> superradiant_transfer_trace(
    const PhysicsParams& p, double n_atoms, double t_max, int n_samples,
    const IntegratorConfig& cfg = {}) {
  const auto r = compute_rates(p);
  auto s = init_state(MomentumGrid::homogeneous(), n_atoms, 0.0);
  std::vector<TransferTracePoint> out;
  out.reserve(n_samples + 1);
  double t = 0;
  const double dt = t_max / n_samples;
  for (int i = 0; i <= n_samples; ++i) {
    TransferTracePoint row;
    row.t = t;
    row.n_up = n_atoms / 2 + s.jz.sum();
    row.n_down = n_atoms / 2 - s.jz.sum();
    row.leaked = s.leaked;
    out.push_back(row);
    if (i < n_samples) {
      evolve_effective(s, r, dt, cfg);
      t += dt;
    }
  }
  return out;
}

// Fraction of the ensemble transferred per unit time (either direction),
// measured over the window in which the first `fraction` of atoms moves.
// Starts from the equator state, where the collective transfer rate is
// largest.
inline double fractional_transfer_rate(const PhysicsParams& p, double n_atoms,
                                       double fraction = 0.01,
                                       const IntegratorConfig& cfg = {}) {
  const auto r = compute_rates(p);
  const double slope0 =
      std::abs(r.gamma_minus - r.gamma_plus) * n_atoms / 4;
  if (!(slope0 > 0))
    throw std::invalid_argument(
        "fractional_transfer_rate: superradiant rates balance at this "
        "detuning");
  auto s = init_state(MomentumGrid::homogeneous(), n_atoms, 0.0);
  const double jz0 = s.jz.sum();
  const double dt = fraction / slope0 / 8;
  double t = 0, prev = 0;
  for (int i = 0; i < 10000; ++i) {
    evolve_effective(s, r, dt, cfg);
    t += dt;
    const double moved = std::abs(s.jz.sum() - jz0) / n_atoms;
    if (moved >= fraction) {
      // linear interpolation inside the last step
      const double tc = t - dt * (moved - fraction) / (moved - prev);
      return fraction / tc;
    }
    prev = moved;
  }
  throw std::runtime_error(
      "fractional_transfer_rate: transfer window not reached");
}

struct TransferRatePoint {
  double delta_d = 0;     // rad/s
  double rate_small = 0;  // fractional transfer rate at n_atoms, 1/s
  double rate_large = 0;  // at 2 * n_atoms
  double ratio = 0;
};

// Scan the dressing detuning across the sideband in steps of kappa/2 and
// measure the fractional transfer rate at two atom numbers; the collective
// rate doubles when N doubles and peaks on resonance.
inline std::vector<TransferRatePoint> transfer_rate_scan(
    PhysicsParams p, double n_atoms, int half_points = 8,
    double fraction = 0.01, const IntegratorConfig& cfg = {}) {
  std::vector<TransferRatePoint> out;
  out.reserve(2 * half_points + 1);
  for (int k = -half_points; k <= half_points; ++k) {
    p.delta_d = p.omega_z + k * p.kappa / 2;
    TransferRatePoint row;
    row.delta_d = p.delta_d;
    row.rate_small = fractional_transfer_rate(p, n_atoms, fraction, cfg);
    row.rate_large = fractional_transfer_rate(p, 2 * n_atoms, fraction, cfg);
    row.ratio = row.rate_large / row.rate_small;
    out.push_back(row);
  }
  return out;
}

// ---- dressed-echo sequence shared by the phase-shift scans ----

// [theta1 pulse, free t_delay, dressing t_dress, pi about y, dressing
// t_dress, analysis pi/2]; the twist phases written in the two windows add
// under the echo while Doppler phases cancel.
inline PulseSequence dressed_echo_sequence(double theta1, double t_delay,
                                           double t_dress, double flux_scale,
                                           bool superradiance) {
  PulseSequence seq;
  seq.events = {bragg_pulse(theta1, 0.0), free_flight(t_delay),
                dressing(t_dress, flux_scale), bragg_pulse(pi, pi / 2),
                dressing(t_dress, flux_scale)};
  seq.superradiance = superradiance;
  return seq;
}

// ---- fringe phase versus dressing detuning (fig2d) ----

struct DetuningScanPoint {
  double delta_d = 0;    // rad/s
  double delta_phi = 0;  // rad, unwrapped along the scan
  double chi = 0;        // rad/s
  double contrast = 0;
};

inline std::vector<DetuningScanPoint> phase_vs_detuning_scan(
    PhysicsParams p, double n_atoms, double sigma_p = 0.05, int n_bins = 64,
    int n_points = 81, double span = 2.0, double theta1 = pi / 4,
    double t_delay = 25e-6, double t_dress = 25e-6,
    const IntegratorConfig& cfg = {}) {
  const auto grid = make_grid(n_bins, sigma_p);
  const auto s0 = init_state(grid, n_atoms, -1.0);
  const auto phis = default_phase_grid();
  std::vector<DetuningScanPoint> out;
  out.reserve(n_points);
  for (int k = 0; k < n_points; ++k) {
    p.delta_d = p.omega_z * span * (2.0 * k / (n_points - 1) - 1.0);
    const auto seq = dressed_echo_sequence(theta1, t_delay, t_dress, 1.0, true);
    FringeResult<double> fit;
    try {
      fit = fringe_scan(s0, seq, p, phis, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("phase_vs_detuning_scan: point " +
                               std::to_string(k) + ": " + e.what());
    }
    DetuningScanPoint row;
    row.delta_d = p.delta_d;
    row.delta_phi = fit.phase;
    row.chi = compute_rates(p).chi();
    row.contrast = fit.contrast;
    out.push_back(row);
  }
  VectorX<double> ph(out.size());
  for (size_t i = 0; i < out.size(); ++i) ph[i] = out[i].delta_phi;
  unwrap_phases(ph);
  for (size_t i = 0; i < out.size(); ++i) out[i].delta_phi = ph[i];
  return out;
}

// ---- fringe phase versus initial spin projection (fig2e) ----

struct JzScanPoint {
  double jz = 0;  // initial <Jz> set by the first pulse area
  double theta1 = 0;
  double delta_phi = 0;
  double contrast = 0;
};

struct JzScanResult {
  std::vector<JzScanPoint> points;
  double slope = 0;  // d(delta_phi)/d<Jz>, rad per unit Jz
  double intercept = 0;
  double r_squared = 0;
  double chi = 0;
  double delta_d = 0;
};

// Varies the first pulse area to scan the initial spin projection at fixed
// drive power, chi_sign picks which side of the sideband the dressing laser
// sits on (delta_d = omega_z + sign * kappa/2), which flips the slope.
// Superradiance is off here: this preset isolates the linear phase law.
inline JzScanResult phase_vs_jz_scan(PhysicsParams p, double n_atoms,
                                     int chi_sign, double sigma_p = 0.05,
                                     int n_bins = 64, int n_points = 9,
                                     double jz_span = 0.8,
                                     double t_delay = 25e-6,
                                     double t_dress = 25e-6,
                                     const IntegratorConfig& cfg = {}) {
  if (chi_sign != 1 && chi_sign != -1)
    throw std::invalid_argument("phase_vs_jz_scan: chi_sign must be +1 or -1");
  p.delta_d = p.omega_z + chi_sign * p.kappa / 2;
  const auto grid = make_grid(n_bins, sigma_p);
  const auto phis = default_phase_grid();
  JzScanResult res;
  res.chi = compute_rates(p).chi();
  res.delta_d = p.delta_d;
  res.points.reserve(n_points);
  for (const double frac : linspace(-jz_span, jz_span, n_points)) {
    const double theta1 = std::acos(-frac);
    const auto s0 = init_state(grid, n_atoms, -1.0);
    const auto seq =
        dressed_echo_sequence(theta1, t_delay, t_dress, 1.0, false);
    const auto fit = fringe_scan(s0, seq, p, phis, cfg);
    JzScanPoint row;
    row.jz = frac * n_atoms / 2;
    row.theta1 = theta1;
    row.delta_phi = fit.phase;
    row.contrast = fit.contrast;
    res.points.push_back(row);
  }
  // least-squares line delta_phi = slope * jz + intercept
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(res.points.size());
  for (const auto& q : res.points) {
    sx += q.jz;
    sy += q.delta_phi;
    sxx += q.jz * q.jz;
    sxy += q.jz * q.delta_phi;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  res.intercept = (sy - res.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (const auto& q : res.points) {
    const double f = res.slope * q.jz + res.intercept;
    ss_res += (q.delta_phi - f) * (q.delta_phi - f);
    ss_tot += (q.delta_phi - sy / n) * (q.delta_phi - sy / n);
  }
  res.r_squared = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
  return res;
}

// ---- written phase versus delay before the interaction (fig3a) ----

struct DelayScanPoint {
  double t_delay = 0;
  double phi_exchange = 0;
  double contrast_exchange = 0;
  double phi_oat = 0;
  double contrast_oat = 0;
};

// The dressed echo with a free flight of t_delay on both sides. The
// exchange model only writes its twist phase while the collective coherence
// is alive, so the phase dies out on the 1/sigma_in dephasing scale; the
// pure one-axis-twisting reference is delay-independent.
inline std::vector<DelayScanPoint> phase_vs_delay_scan(
    const PhysicsParams& p, double n_atoms, double ratio, double sigma_in,
    const std::vector<double>& delays, int n_bins = 128, double theta1 = pi / 4,
    double t_dress = 25e-6, const IntegratorConfig& cfg = {}) {
  const double scale = drive_scale_for_ratio(p, ratio, sigma_in, n_atoms);
  const auto grid = make_grid(n_bins, sigma_p_for_sigma_in(sigma_in));
  const auto s0 = init_state(grid, n_atoms, -1.0);
  const auto phis = default_phase_grid();
  std::vector<DelayScanPoint> out;
  out.reserve(delays.size());
  for (const double td : delays) {
    PulseSequence seq;
    seq.events = {bragg_pulse(theta1, 0.0), free_flight(td),
                  dressing(t_dress, scale), bragg_pulse(pi, pi / 2),
                  dressing(t_dress, scale), free_flight(td)};
    DelayScanPoint row;
    row.t_delay = td;
    const auto fx = fringe_scan(s0, seq, p, phis, cfg);
    row.phi_exchange = fx.phase;
    row.contrast_exchange = fx.contrast;
    seq.model = ModelKind::pure_oat;
    const auto fo = fringe_scan(s0, seq, p, phis, cfg);
    row.phi_oat = fo.phase;
    row.contrast_oat = fo.contrast;
    out.push_back(row);
  }
  return out;
}

// ---- contrast under dressing after the echo closes (fig3c, fig4a) ----

struct ContrastTracePoint {
  double ratio = 0;
  bool superradiance = false;
  double t_dress = 0;
  double contrast = 0;
  double leaked = 0;
};

// Runs a balanced echo, waits extra_delay (zero starts the interaction at
// maximum reoverlap), then turns the dressing on and samples the contrast
// while it runs. One curve per requested chi*N/sigma_in ratio, with and
// without the superradiant rates.
inline std::vector<ContrastTracePoint> gap_protection_traces(
    const PhysicsParams& p, double n_atoms, const std::vector<double>& ratios,
    double sigma_in, double arm = 70e-6, double extra_delay = 0,
    double t_max = 600e-6, double dt_sample = 5e-6, int n_bins = 128,
    bool with_superradiance = true, bool without_superradiance = true,
    const IntegratorConfig& cfg = {}) {
  const auto grid = make_grid(n_bins, sigma_p_for_sigma_in(sigma_in));
  auto echoed = init_state(grid, n_atoms, -1.0);
  PulseSequence prep;
  prep.events = {bragg_pulse(pi / 2, 0.0), free_flight(arm),
                 bragg_pulse(pi, pi / 2), free_flight(arm),
                 free_flight(extra_delay)};
  run_sequence(echoed, prep, p, cfg);

  const int n_samples = int(std::lround(t_max / dt_sample));
  std::vector<ContrastTracePoint> out;
  std::vector<bool> sr_variants;
  if (with_superradiance) sr_variants.push_back(true);
  if (without_superradiance) sr_variants.push_back(false);
  for (const double ratio : ratios) {
    const double scale = drive_scale_for_ratio(p, ratio, sigma_in, n_atoms);
    for (const bool sr : sr_variants) {
      auto r = compute_rates(p, scale);
      if (!sr) r.gamma_plus = r.gamma_minus = 0;
      auto s = echoed;
      for (int i = 0; i <= n_samples; ++i) {
        ContrastTracePoint row;
        row.ratio = ratio;
        row.superradiance = sr;
        row.t_dress = i * dt_sample;
        row.contrast = contrast(s);
        row.leaked = s.leaked;
        out.push_back(row);
        if (i < n_samples) evolve_effective(s, r, dt_sample, cfg);
      }
    }
  }
  return out;
}

// ---- contrast versus readout-time imbalance (fig4e) ----

struct EchoImbalancePoint {
  double ratio = 0;
  std::string placement;  // "none", "early", "late"
  double dt = 0;          // readout time minus the balanced echo time
  double contrast = 0;
};

// Mach-Zehnder with arm duration `arm`; a dressing window of t_dress is
// inserted into the first arm at dress_start ("early", while the ensemble
// is still coherent) or late_start ("late", after it has dephased), and the
// readout time is scanned around the balanced echo point. Binding the
// ensemble pauses its dephasing, so early dressing pulls the contrast
// maximum to negative dt; late dressing finds no coherence to bind and
// leaves the echo untouched.
inline std::vector<EchoImbalancePoint> echo_imbalance_scan(
    const PhysicsParams& p, double n_atoms, double sigma_in,
    const std::vector<double>& early_ratios = {0.0, 3.0, 8.0},
    double late_ratio = 8.0, double arm = 600e-6, double dress_start = 25e-6,
    double late_start = 400e-6, double t_dress = 25e-6, double dt_min = -150e-6,
    double dt_max = 100e-6, double dt_step = 5e-6, int n_bins = 128,
    bool superradiance = true, const IntegratorConfig& cfg = {}) {
  const auto grid = make_grid(n_bins, sigma_p_for_sigma_in(sigma_in));
  const int n_samples = int(std::lround((dt_max - dt_min) / dt_step));
  std::vector<EchoImbalancePoint> out;

  auto run_curve = [&](double ratio, const std::string& placement,
                       double start) {
    const double scale = drive_scale_for_ratio(p, ratio, sigma_in, n_atoms);
    auto s = init_state(grid, n_atoms, -1.0);
    PulseSequence seq;
    seq.events.push_back(bragg_pulse(pi / 2, 0.0));
    if (scale > 0) {
      seq.events.push_back(free_flight(start));
      seq.events.push_back(dressing(t_dress, scale));
      seq.events.push_back(free_flight(arm - start - t_dress));
    } else {
      seq.events.push_back(free_flight(arm));
    }
    seq.events.push_back(bragg_pulse(pi, pi / 2));
    seq.events.push_back(free_flight(arm + dt_min));
    seq.superradiance = superradiance;
    run_sequence(s, seq, p, cfg);
    for (int i = 0; i <= n_samples; ++i) {
      EchoImbalancePoint row;
      row.ratio = ratio;
      row.placement = placement;
      row.dt = dt_min + i * dt_step;
      row.contrast = contrast(s);
      out.push_back(row);
      if (i < n_samples) evolve_free(s, dt_step);
    }
  };

  for (const double ratio : early_ratios)
    run_curve(ratio, ratio == 0 ? "none" : "early", dress_start);
  if (late_ratio > 0) run_curve(late_ratio, "late", late_start);
  return out;
}

}  // namespace mxsim
