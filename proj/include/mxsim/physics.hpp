#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxsim/constants.hpp"

// Cavity-mediated coupling rates for the two-momentum-state ensemble.
// All frequencies are angular (rad/s); photon flux is photons/s; momenta are
// in units of hbar*k. Conversion from linear Hz happens once, at the config
// boundary, never here.

namespace mxsim {

template <class Scalar>
using VectorX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <class Scalar = double>
struct PhysicsParamsT {
  Scalar n_atoms = 1000;
  Scalar g0 = two_pi * 0.48e6;       // single atom-cavity coupling
  Scalar kappa = two_pi * 56e3;      // total cavity linewidth
  Scalar kappa1 = two_pi * 28e3;     // input coupler rate
  Scalar delta_a = two_pi * 500e6;   // drive-atom detuning (blue)
  Scalar omega_z = two_pi * 200e3;   // splitting of the two momentum states
  Scalar delta_d = two_pi * 300e3;   // drive-cavity detuning
  Scalar flux_d = 3.5e8;             // incident drive flux, photons/s
  Scalar sigma_p = 0.05;             // rms momentum half-width, hbar*k
  int n_bins = 64;

  // dispersive shift of the cavity per atom in either momentum state
  Scalar dispersive_shift() const { return g0 * g0 / (4 * delta_a); }

  void validate() const {
    if (!(n_atoms >= 1)) throw std::invalid_argument("physics: n_atoms must be >= 1");
    if (!(g0 > 0)) throw std::invalid_argument("physics: g0 must be positive");
    if (!(kappa > 0)) throw std::invalid_argument("physics: kappa must be positive");
    if (!(kappa1 > 0 && kappa1 <= kappa))
      throw std::invalid_argument("physics: kappa1 must lie in (0, kappa]");
    if (delta_a == Scalar(0)) throw std::invalid_argument("physics: delta_a must be nonzero");
    if (!(omega_z > 0)) throw std::invalid_argument("physics: omega_z must be positive");
    if (!(flux_d >= 0)) throw std::invalid_argument("physics: flux_d must be >= 0");
    if (!(sigma_p >= 0)) throw std::invalid_argument("physics: sigma_p must be >= 0");
    if (n_bins < 1) throw std::invalid_argument("physics: n_bins must be >= 1");
  }
};

using PhysicsParams = PhysicsParamsT<double>;

// Intracavity field amplitude with no atoms. drive_scale multiplies the
// photon flux, so the amplitude picks up sqrt(drive_scale).
template <class Scalar>
std::complex<Scalar> compute_alpha0(const PhysicsParamsT<Scalar>& p, Scalar drive_scale = 1) {
  const Scalar alpha_d = std::sqrt(p.flux_d * drive_scale);
  return alpha_d * std::sqrt(p.kappa1) /
         std::complex<Scalar>(p.delta_d, p.kappa / 2);
}

template <class Scalar = double>
struct CouplingRatesT {
  Scalar chi_plus = 0;    // twist rate from the upper sideband path
  Scalar chi_minus = 0;   // ... lower sideband path
  Scalar gamma_plus = 0;  // superradiant rate, (delta_d + omega_z) resonance
  Scalar gamma_minus = 0; // ... (delta_d - omega_z) resonance
  std::complex<Scalar> alpha0{0, 0};
  Scalar pert_ratio = 0;

  Scalar chi() const { return chi_plus + chi_minus; }
  Scalar gamma_diff() const { return gamma_plus - gamma_minus; }
};

using CouplingRates = CouplingRatesT<double>;

// Lorentzian dispersion/absorption pair at offset x from resonance.
// Kept as free helpers so the odd symmetry of chi in delta_d is exact in
// floating point: fl(-a+b) == -fl(a-b) and the summation order commutes.
template <class Scalar>
Scalar lorentz_disp(Scalar x, Scalar kappa) {
  return x / (x * x + kappa * kappa / 4);
}
template <class Scalar>
Scalar lorentz_abs(Scalar x, Scalar kappa) {
  return kappa / (x * x + kappa * kappa / 4);
}

template <class Scalar>
Scalar compute_pert_ratio(const PhysicsParamsT<Scalar>& p, Scalar drive_scale = 1) {
  const Scalar a0 = std::abs(compute_alpha0(p, drive_scale));
  const Scalar gap = std::min(std::abs(p.delta_d - p.omega_z), std::abs(p.delta_d + p.omega_z));
  return std::sqrt(p.n_atoms) * a0 * p.dispersive_shift() / gap;
}

template <class Scalar>
CouplingRatesT<Scalar> compute_rates(const PhysicsParamsT<Scalar>& p, Scalar drive_scale = 1) {
  p.validate();
  CouplingRatesT<Scalar> r;
  r.alpha0 = compute_alpha0(p, drive_scale);
  const Scalar n_ph = std::norm(r.alpha0);
  const Scalar u2 = p.dispersive_shift() * p.dispersive_shift();
  const Scalar up = p.delta_d + p.omega_z;
  const Scalar dn = p.delta_d - p.omega_z;
  r.chi_plus = n_ph * u2 * lorentz_disp(up, p.kappa);
  r.chi_minus = n_ph * u2 * lorentz_disp(dn, p.kappa);
  r.gamma_plus = n_ph * u2 * lorentz_abs(up, p.kappa);
  r.gamma_minus = n_ph * u2 * lorentz_abs(dn, p.kappa);
  r.pert_ratio = compute_pert_ratio(p, drive_scale);
  return r;
}

// chi as a function of drive detuning, other parameters held fixed
template <class Scalar>
VectorX<Scalar> chi_detuning_curve(const PhysicsParamsT<Scalar>& p,
                                   const VectorX<Scalar>& deltas) {
  VectorX<Scalar> out(deltas.size());
  PhysicsParamsT<Scalar> q = p;
  for (Eigen::Index i = 0; i < deltas.size(); ++i) {
    q.delta_d = deltas[i];
    out[i] = compute_rates(q).chi();
  }
  return out;
}

// Soft checks that the adiabatic elimination behind the effective model is
// justified. Violations are reported, not fatal: the full-cavity model stays
// valid and is the tool for quantifying the error.
template <class Scalar>
std::vector<std::string> validity_warnings(const PhysicsParamsT<Scalar>& p,
                                           Scalar drive_scale = 1) {
  std::vector<std::string> w;
  const Scalar ratio = compute_pert_ratio(p, drive_scale);
  if (!(ratio <= Scalar(0.1)))
    w.push_back("perturbative ratio sqrt(N)|alpha0|U/min|delta_d -+ omega_z| = " +
                std::to_string(double(ratio)) +
                " exceeds 0.1; effective-model rates are unreliable here");
  return w;
}

}  // namespace mxsim
