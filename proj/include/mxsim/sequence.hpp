#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxsim/dynamics.hpp"

// Pulse-sequence executor and fringe readout. A sequence is a flat list of
// events applied in order to a SpinField: Bragg rotations, free flight,
// cavity-dressed interaction windows, and named marks that snapshot
// observables. Beamsplitters are conventionally about x (phi = 0), mirror pi
// pulses about y (phi = pi/2), and the analysis pulse's azimuth is the fringe
// variable; with that convention a bare Mach-Zehnder echo fits to zero phase.

namespace mxsim {

enum class EventKind { bragg, free_flight, dressing, mark };

struct PulseEvent {
  EventKind kind = EventKind::free_flight;
  double theta = 0;       // bragg rotation angle, rad
  double phi = 0;         // bragg rotation axis azimuth, rad
  double duration = 0;    // free_flight / dressing length, s
  double flux_scale = 1;  // dressing drive power multiplier
  std::string label;      // mark name
};

inline PulseEvent bragg_pulse(double theta, double phi = 0) {
  PulseEvent e;
  e.kind = EventKind::bragg;
  e.theta = theta;
  e.phi = phi;
  return e;
}
inline PulseEvent free_flight(double duration) {
  PulseEvent e;
  e.kind = EventKind::free_flight;
  e.duration = duration;
  return e;
}
inline PulseEvent dressing(double duration, double flux_scale = 1) {
  PulseEvent e;
  e.kind = EventKind::dressing;
  e.duration = duration;
  e.flux_scale = flux_scale;
  return e;
}
inline PulseEvent mark(std::string label) {
  PulseEvent e;
  e.kind = EventKind::mark;
  e.label = std::move(label);
  return e;
}

enum class ModelKind { effective, pure_oat, full_cavity };
enum class PulseMode { instantaneous, finite };
enum class CavityInit { steady, zero };

struct PulseSequence {
  std::vector<PulseEvent> events;
  ModelKind model = ModelKind::effective;
  PulseMode pulse_mode = PulseMode::instantaneous;
  double rabi = two_pi * 8.3e3;  // two-photon Rabi rate for finite pulses
  CavityInit cavity_init = CavityInit::steady;
  bool superradiance = true;  // effective model only: false zeroes gamma+-
};

// Instantaneous rotation by theta about the equatorial axis at azimuth phi,
// bin by bin. With a = u e^{-i phi}:
//   u' = e^{i phi} [ a (1+cos)/2 + conj(a) (1-cos)/2 - i w sin ]
//   w' = w cos + sin * Im(a)
template <class Scalar>
void apply_bragg(SpinFieldT<Scalar>& s, Scalar theta, Scalar phi = 0) {
  using C = std::complex<Scalar>;
  const Scalar cs = std::cos(theta), sn = std::sin(theta);
  const C ax = std::polar(Scalar(1), phi);
  for (Eigen::Index i = 0; i < s.bins(); ++i) {
    const C a = s.jplus[i] * std::conj(ax);
    const Scalar w = s.jz[i];
    s.jplus[i] = ax * (a * ((1 + cs) / 2) + std::conj(a) * ((1 - cs) / 2) -
                       C(0, w * sn));
    s.jz[i] = w * cs + sn * std::imag(a);
  }
}

// Finite-duration Bragg pulse at Rabi rate `rabi`: the Doppler offsets keep
// precessing while the pulse rotates, which is the leading pulse-area error
// for the outer bins.
template <class Scalar>
void apply_bragg_finite(SpinFieldT<Scalar>& s, Scalar theta, Scalar phi,
                        Scalar rabi, const IntegratorConfig& cfg = {}) {
  using C = std::complex<Scalar>;
  using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  if (!(rabi > 0)) throw std::invalid_argument("bragg: rabi rate must be positive");
  const Eigen::Index nb = s.bins();
  Vec y(2 * nb + 1);
  for (Eigen::Index i = 0; i < nb; ++i) y[i] = s.jplus[i];
  for (Eigen::Index i = 0; i < nb; ++i) y[nb + i] = C(s.jz[i], 0);
  y[2 * nb] = C(s.rel_position, 0);
  const C ax = std::polar(Scalar(1), phi);
  auto rhs = [&](Scalar, const Vec& v, Vec& dv) {
    for (Eigen::Index i = 0; i < nb; ++i) {
      const C u = v[i];
      const Scalar w = v[nb + i].real();
      dv[i] = C(0, s.grid.omega_in[i]) * u - C(0, rabi) * ax * w;
      dv[nb + i] = C(rabi * std::imag(u * std::conj(ax)), 0);
    }
    dv[2 * nb] =
        C(detail::rel_velocity_of(s.grid, [&](Eigen::Index i) { return v[nb + i].real(); },
                                  s.n_atoms, s.arm_parity),
          0);
  };
  integrate(rhs, y, Scalar(0), theta / rabi, cfg);
  for (Eigen::Index i = 0; i < nb; ++i) s.jplus[i] = y[i];
  for (Eigen::Index i = 0; i < nb; ++i) s.jz[i] = y[nb + i].real();
  s.rel_position = y[2 * nb].real();
}

template <class Scalar = double>
struct MarkSample {
  std::string label;
  Scalar t = 0;
  CollectiveJ<Scalar> J;
  Scalar contrast = 0;
  Scalar leaked = 0;
  WavepacketSummary<Scalar> wavepacket;
};

template <class Scalar = double>
struct SequenceResult {
  Scalar t_end = 0;
  std::vector<MarkSample<Scalar>> marks;
};

// Run a sequence in place. Time is tracked globally so the full-cavity
// model's rotating-frame phase stays continuous across events; a fresh run
// starts at t = 0. Dressing windows in the full-cavity model start from the
// configured cavity state (steady: the no-atom driven field) and the residual
// field is discarded at the window end, mirroring drive switch-off.
template <class Scalar>
SequenceResult<Scalar> run_sequence(SpinFieldT<Scalar>& s, const PulseSequence& seq,
                                    const PhysicsParamsT<Scalar>& p,
                                    const IntegratorConfig& cfg = {}) {
  SequenceResult<Scalar> out;
  Scalar t = 0;
  for (const PulseEvent& e : seq.events) {
    switch (e.kind) {
      case EventKind::bragg: {
        if (seq.pulse_mode == PulseMode::instantaneous) {
          apply_bragg(s, Scalar(e.theta), Scalar(e.phi));
        } else {
          apply_bragg_finite(s, Scalar(e.theta), Scalar(e.phi), Scalar(seq.rabi), cfg);
          t += Scalar(e.theta) / Scalar(seq.rabi);
        }
        if (std::abs(e.theta - pi) < 0.05) s.arm_parity = -s.arm_parity;
        break;
      }
      case EventKind::free_flight: {
        evolve_free(s, Scalar(e.duration));
        t += Scalar(e.duration);
        break;
      }
      case EventKind::dressing: {
        const Scalar scale = Scalar(e.flux_scale);
        if (seq.model == ModelKind::effective) {
          CouplingRatesT<Scalar> r = compute_rates(p, scale);
          if (!seq.superradiance) r.gamma_plus = r.gamma_minus = 0;
          evolve_effective(s, r, Scalar(e.duration), cfg);
        } else if (seq.model == ModelKind::pure_oat) {
          evolve_pure_oat(s, compute_rates(p, scale).chi(), Scalar(e.duration));
        } else {
          CavityStateT<Scalar> cav;
          if (seq.cavity_init == CavityInit::steady) {
            cav.a_mean = compute_alpha0(p, scale);
            cav.photon_number = std::norm(cav.a_mean);
          }
          evolve_full_cavity(s, cav, p, scale, t, Scalar(e.duration), cfg);
        }
        t += Scalar(e.duration);
        break;
      }
      case EventKind::mark: {
        MarkSample<Scalar> m;
        m.label = e.label;
        m.t = t;
        m.J = collective_J(s);
        m.contrast = contrast(s);
        m.leaked = s.leaked;
        m.wavepacket = wavepacket_summary(s);
        out.marks.push_back(std::move(m));
        break;
      }
    }
  }
  out.t_end = t;
  return out;
}

template <class Scalar = double>
struct FringeResult {
  Scalar amplitude = 0;  // >= 0
  Scalar phase = 0;      // rad, in (-pi, pi]
  Scalar offset = 0;
  Scalar rms_residual = 0;
  Scalar contrast = 0;   // 2*amplitude / retained population
  VectorX<Scalar> phis;
  VectorX<Scalar> jz;    // measured <Jz> per analysis azimuth
};

inline VectorX<double> default_phase_grid(int n = 16) {
  VectorX<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = two_pi * i / n;
  return g;
}

// Scan the analysis-pulse azimuth and fit <Jz>(phi) = A cos(phi - dphi) + B.
// The shared part of the sequence runs once; each azimuth reuses the stored
// pre-readout state. The fit is linear least squares in (A cos dphi,
// A sin dphi, B); on a uniform 2pi grid it coincides with the first DFT bin.
template <class Scalar>
FringeResult<Scalar> fringe_scan(const SpinFieldT<Scalar>& initial,
                                 const PulseSequence& prefix,
                                 const PhysicsParamsT<Scalar>& p,
                                 const VectorX<Scalar>& phis,
                                 const IntegratorConfig& cfg = {}) {
  if (phis.size() < 3)
    throw std::invalid_argument("fringe_scan: need at least 3 analysis phases");
  SpinFieldT<Scalar> shared = initial;
  run_sequence(shared, prefix, p, cfg);

  FringeResult<Scalar> out;
  out.phis = phis;
  out.jz.resize(phis.size());
  for (Eigen::Index k = 0; k < phis.size(); ++k) {
    SpinFieldT<Scalar> r = shared;
    if (prefix.pulse_mode == PulseMode::instantaneous)
      apply_bragg(r, Scalar(pi / 2), phis[k]);
    else
      apply_bragg_finite(r, Scalar(pi / 2), phis[k], Scalar(prefix.rabi), cfg);
    out.jz[k] = collective_J(r).jz;
  }

  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Mat design(phis.size(), 3);
  for (Eigen::Index k = 0; k < phis.size(); ++k) {
    design(k, 0) = std::cos(phis[k]);
    design(k, 1) = std::sin(phis[k]);
    design(k, 2) = 1;
  }
  Vec rhs = out.jz.matrix();
  Vec sol = design.colPivHouseholderQr().solve(rhs);
  out.amplitude = std::hypot(sol[0], sol[1]);
  out.phase = std::atan2(sol[1], sol[0]);
  out.offset = sol[2];
  out.rms_residual = std::sqrt((design * sol - rhs).squaredNorm() / Scalar(phis.size()));

  if (!(out.amplitude > Scalar(1e-6) * shared.n_atoms / 2))
    throw std::runtime_error("fringe_scan: fringe amplitude below 1e-6 of N/2, "
                             "phase fit is degenerate");
  const Scalar kept = shared.n_atoms - shared.leaked;
  out.contrast = kept > 0 ? 2 * out.amplitude / kept : Scalar(0);
  return out;
}

// Nearest-continuation unwrap for phases sampled along a sweep axis.
template <class Scalar>
void unwrap_phases(VectorX<Scalar>& ph) {
  for (Eigen::Index i = 1; i < ph.size(); ++i) {
    const Scalar d = ph[i] - ph[i - 1];
    ph[i] -= two_pi * std::round(d / two_pi);
  }
}

}  // namespace mxsim
