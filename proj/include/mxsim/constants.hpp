#pragma once

// Physical constants for the 87Rb D2 cavity setup. Everything downstream is
// derived from these, so tests and runtime always agree on recoil scales.

namespace mxsim {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double mass_rb87 = 1.44316060e-25;  // kg
inline constexpr double lambda_d2 = 780.241209686e-9;  // m, 87Rb D2 line

inline constexpr double k_d2 = two_pi / lambda_d2;  // 1/m

// single-photon recoil: v_rec = hbar*k/m ~ 5.88 mm/s
inline constexpr double recoil_velocity = hbar * k_d2 / mass_rb87;

// omega_in(p) = (2 hbar k^2 / m) * p with p in units of hbar*k.
// Numerically 2pi x 15.084 kHz per hbar*k (four photon recoils).
inline constexpr double omega_in_per_hbar_k = 2.0 * hbar * k_d2 * k_d2 / mass_rb87;

}  // namespace mxsim
