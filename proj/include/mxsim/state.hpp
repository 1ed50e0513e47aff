#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "mxsim/grid.hpp"

// Mean-field spin state of the ensemble, resolved over momentum bins. Each bin
// carries a Bloch vector (j~+, j_z) for the local two-level system spanned by
// the p0 -+ hbar*k momentum states; j~+ is stored in the frame rotating at the
// mean splitting omega_z, so only the per-bin offset omega_in(p) precesses it.

namespace mxsim {

template <class Scalar = double>
struct SpinFieldT {
  using Complex = std::complex<Scalar>;

  MomentumGridT<Scalar> grid;
  VectorX<Complex> jplus;  // per-bin transverse spin, rotating frame
  VectorX<Scalar> jz;      // per-bin population imbalance /2
  Scalar n_atoms = 0;
  Scalar leaked = 0;         // population bookkept as pushed outside the window
  Scalar rel_position = 0;   // integral of the arm relative velocity, m
  Scalar arm_parity = 1;     // sign of the arm separation rate; pi pulses flip it

  Eigen::Index bins() const { return grid.size(); }
};

using SpinField = SpinFieldT<double>;

// Coherent spin state with polar angle set by jz_fraction = <Jz>/(N/2) and
// azimuth `phase`, identically prepared in every bin.
template <class Scalar>
SpinFieldT<Scalar> init_state(const MomentumGridT<Scalar>& grid, Scalar n_atoms,
                              Scalar jz_fraction = -1, Scalar phase = 0) {
  if (!(n_atoms > 0)) throw std::invalid_argument("state: n_atoms must be positive");
  if (!(std::abs(jz_fraction) <= 1))
    throw std::invalid_argument("state: |jz_fraction| must be <= 1");
  SpinFieldT<Scalar> s;
  s.grid = grid;
  s.n_atoms = n_atoms;
  const Scalar jperp = std::sqrt(std::max(Scalar(0), 1 - jz_fraction * jz_fraction));
  const std::complex<Scalar> u = std::polar(jperp, phase);
  s.jplus = (n_atoms / 2 * grid.weight).template cast<std::complex<Scalar>>() * u;
  s.jz = n_atoms / 2 * jz_fraction * grid.weight;
  return s;
}

template <class Scalar = double>
struct CollectiveJ {
  std::complex<Scalar> jplus{0, 0};
  Scalar jz = 0;
};

template <class Scalar>
CollectiveJ<Scalar> collective_J(const SpinFieldT<Scalar>& s) {
  return {s.jplus.sum(), s.jz.sum()};
}

// Collective spin restricted to one side of the momentum distribution
// (sign > 0: bins with p > 0). A bin exactly at p = 0 contributes half to
// each side so the two partials always sum to the full collective spin.
template <class Scalar>
CollectiveJ<Scalar> partial_J(const SpinFieldT<Scalar>& s, int sign) {
  CollectiveJ<Scalar> out;
  for (Eigen::Index i = 0; i < s.bins(); ++i) {
    Scalar f = 0;
    if (s.grid.p[i] == Scalar(0)) f = Scalar(0.5);
    else if ((sign > 0) == (s.grid.p[i] > 0)) f = 1;
    out.jplus += f * s.jplus[i];
    out.jz += f * s.jz[i];
  }
  return out;
}

template <class Scalar = double>
struct WavepacketSummary {
  Scalar mean_p_up = 0;    // mean momentum of the upper packet, hbar*k rel. p0
  Scalar mean_p_down = 0;  // ... lower packet
  Scalar rel_position = 0; // accumulated packet separation, m
};

// Population-weighted momentum centroids of the two packets. The upper packet
// sits at +1 hbar*k plus the within-window centroid of its bin populations.
template <class Scalar>
WavepacketSummary<Scalar> wavepacket_summary(const SpinFieldT<Scalar>& s) {
  const Scalar half = s.n_atoms / 2;
  const Scalar wp = (s.grid.weight * s.grid.p).sum();
  const Scalar jp = (s.jz * s.grid.p).sum();
  const Scalar n_up = half + s.jz.sum();
  const Scalar n_dn = half - s.jz.sum();
  WavepacketSummary<Scalar> out;
  const Scalar eps = Scalar(1e-12) * s.n_atoms;
  out.mean_p_up = 1 + (n_up > eps ? (half * wp + jp) / n_up : Scalar(0));
  out.mean_p_down = -1 + (n_dn > eps ? (half * wp - jp) / n_dn : Scalar(0));
  out.rel_position = s.rel_position;
  return out;
}

// Instantaneous separation velocity of the packet centroids (m/s), including
// the arm-swap sign.
template <class Scalar>
Scalar rel_velocity(const SpinFieldT<Scalar>& s) {
  const auto w = wavepacket_summary(s);
  return s.arm_parity * (w.mean_p_up - w.mean_p_down) * Scalar(hbar) * Scalar(k_d2) /
         Scalar(mass_rb87);
}

// Largest violation of |j(p)| = w(p)*N/2 across bins; zero-decay dynamics must
// keep this at roundoff.
template <class Scalar>
Scalar bloch_length_error(const SpinFieldT<Scalar>& s) {
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < s.bins(); ++i) {
    const Scalar len = std::hypot(std::abs(s.jplus[i]), s.jz[i]);
    worst = std::max(worst, std::abs(len - s.grid.weight[i] * s.n_atoms / 2));
  }
  return worst;
}

// Fringe amplitude normalized to the retained population.
template <class Scalar>
Scalar contrast(const SpinFieldT<Scalar>& s) {
  const Scalar kept = s.n_atoms - s.leaked;
  return kept > 0 ? 2 * std::abs(collective_J(s).jplus) / kept : Scalar(0);
}

}  // namespace mxsim
