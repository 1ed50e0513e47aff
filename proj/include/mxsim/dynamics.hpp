#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "mxsim/integrate.hpp"
#include "mxsim/physics.hpp"
#include "mxsim/state.hpp"

// Equations of motion. Three tiers of the same physics:
//   evolve_effective   - cavity adiabatically eliminated; exchange (chi) and
//                        collective decay (gamma) act through the bin sums
//   evolve_pure_oat    - one-axis twisting only; per-bin populations frozen
//   evolve_full_cavity - explicit intracavity field, no rotating-wave drops
// plus the printed two-ensemble minimal model used in the delay study.

namespace mxsim {

template <class Scalar = double>
struct CavityStateT {
  std::complex<Scalar> a_mean{0, 0};
  Scalar photon_number = 0;
};

using CavityState = CavityStateT<double>;

namespace detail {

// d(rel_position)/dt from the current bin populations; parity carries the
// arm swap applied by mirror pulses
template <class Scalar, class JzView>
Scalar rel_velocity_of(const MomentumGridT<Scalar>& g, const JzView& jz,
                       Scalar n_atoms, Scalar parity) {
  const Scalar half = n_atoms / 2;
  Scalar jz_tot = 0, jp = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    jz_tot += jz(i);
    jp += jz(i) * g.p[i];
  }
  const Scalar wp = (g.weight * g.p).sum();
  const Scalar n_up = half + jz_tot, n_dn = half - jz_tot;
  const Scalar eps = Scalar(1e-12) * n_atoms;
  const Scalar cu = n_up > eps ? (half * wp + jp) / n_up : Scalar(0);
  const Scalar cd = n_dn > eps ? (half * wp - jp) / n_dn : Scalar(0);
  return parity * (2 + cu - cd) * Scalar(hbar) * Scalar(k_d2) / Scalar(mass_rb87);
}

}  // namespace detail

// Momentum-exchange mean field. Per bin (u = j~+(p), w = j_z(p), J = sum u,
// J* its conjugate):
//   du/dt = i omega_in(p) u - i (2 chi + i (gamma+ - gamma-)) w J
//   dw/dt = 2 chi Im(J* u) - (gamma+ - gamma-) Re(u J*)
// Bins talk to each other only through J, which is what gaps the
// relative-phase dynamics. Summing over bins recovers the collective
// equations; with gamma+ = gamma- every bin Bloch length and the total <Jz>
// are conserved exactly.
template <class Scalar>
void evolve_effective(SpinFieldT<Scalar>& s, const CouplingRatesT<Scalar>& r,
                      Scalar duration, const IntegratorConfig& cfg = {}) {
  using C = std::complex<Scalar>;
  using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  const Eigen::Index nb = s.bins();
  Vec y(2 * nb + 2);
  for (Eigen::Index i = 0; i < nb; ++i) y[i] = s.jplus[i];
  for (Eigen::Index i = 0; i < nb; ++i) y[nb + i] = C(s.jz[i], 0);
  y[2 * nb] = C(s.leaked, 0);
  y[2 * nb + 1] = C(s.rel_position, 0);

  const Scalar chi = r.chi();
  const Scalar gd = r.gamma_diff();
  const C coef(-gd, 2 * chi);  // i*(2chi + i*(gamma+ - gamma-))

  auto rhs = [&](Scalar, const Vec& v, Vec& dv) {
    C J(0, 0);
    for (Eigen::Index i = 0; i < nb; ++i) J += v[i];
    const C Jc = std::conj(J);
    for (Eigen::Index i = 0; i < nb; ++i) {
      const C u = v[i];
      const Scalar w = v[nb + i].real();
      dv[i] = C(0, s.grid.omega_in[i]) * u - coef * (w * J);
      dv[nb + i] = C(2 * chi * std::imag(Jc * u) - gd * std::real(u * Jc), 0);
    }
    dv[2 * nb] = C(std::abs(gd) * std::norm(J), 0);
    dv[2 * nb + 1] =
        C(detail::rel_velocity_of(s.grid, [&](Eigen::Index i) { return v[nb + i].real(); },
                                  s.n_atoms, s.arm_parity),
          0);
  };

  integrate(rhs, y, Scalar(0), duration, cfg);

  for (Eigen::Index i = 0; i < nb; ++i) s.jplus[i] = y[i];
  for (Eigen::Index i = 0; i < nb; ++i) s.jz[i] = y[nb + i].real();
  s.leaked = y[2 * nb].real();
  s.rel_position = y[2 * nb + 1].real();
}

// Free flight: nothing couples the bins, so this is a closed-form phase wind.
template <class Scalar>
void evolve_free(SpinFieldT<Scalar>& s, Scalar duration) {
  for (Eigen::Index i = 0; i < s.bins(); ++i)
    s.jplus[i] *= std::polar(Scalar(1), s.grid.omega_in[i] * duration);
  s.rel_position += rel_velocity(s) * duration;  // jz static, velocity constant
}

// One-axis twisting with the populations frozen: the collective Jz is then a
// constant of motion and the evolution is an exact phase wind per bin.
template <class Scalar>
void evolve_pure_oat(SpinFieldT<Scalar>& s, Scalar chi, Scalar duration) {
  const Scalar jz_tot = s.jz.sum();
  for (Eigen::Index i = 0; i < s.bins(); ++i)
    s.jplus[i] *= std::polar(Scalar(1), (s.grid.omega_in[i] - 2 * chi * jz_tot) * duration);
  s.rel_position += rel_velocity(s) * duration;
}

// Atoms plus driven cavity mode, spins kept in the omega_z rotating frame via
// an exact change of variables (the counter-rotating pieces stay; t is the
// absolute sequence time so the frame phase is continuous across events).
// drive_scale multiplies the photon flux of the drive.
template <class Scalar>
void evolve_full_cavity(SpinFieldT<Scalar>& s, CavityStateT<Scalar>& cav,
                        const PhysicsParamsT<Scalar>& p, Scalar drive_scale,
                        Scalar t_start, Scalar duration,
                        const IntegratorConfig& cfg = {}) {
  using C = std::complex<Scalar>;
  using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  const Eigen::Index nb = s.bins();
  Vec y(2 * nb + 3);
  for (Eigen::Index i = 0; i < nb; ++i) y[i] = s.jplus[i];
  for (Eigen::Index i = 0; i < nb; ++i) y[nb + i] = C(s.jz[i], 0);
  y[2 * nb] = cav.a_mean;
  y[2 * nb + 1] = C(cav.photon_number, 0);
  y[2 * nb + 2] = C(s.rel_position, 0);

  const Scalar u1 = p.dispersive_shift();
  const Scalar drive = std::sqrt(p.kappa1 * p.flux_d * drive_scale);
  const C pole(p.delta_d, p.kappa / 2);

  auto rhs = [&](Scalar t, const Vec& v, Vec& dv) {
    const C E = std::polar(Scalar(1), p.omega_z * t);  // e^{+i omega_z t}
    C J(0, 0);
    for (Eigen::Index i = 0; i < nb; ++i) J += v[i];
    const C a = v[2 * nb];
    const Scalar nph = v[2 * nb + 1].real();
    for (Eigen::Index i = 0; i < nb; ++i) {
      const C u = v[i];
      const Scalar w = v[nb + i].real();
      dv[i] = C(0, s.grid.omega_in[i]) * u - C(0, 2 * u1 * nph * w) * std::conj(E);
      dv[nb + i] = C(2 * u1 * nph * std::imag(u * E), 0);
    }
    dv[2 * nb] = C(0, 1) * pole * a - C(0, drive) -
                 C(0, u1) * (2 * std::real(J * E)) * a;
    dv[2 * nb + 1] = C(-2 * drive * std::imag(a) - p.kappa * nph, 0);
    dv[2 * nb + 2] =
        C(detail::rel_velocity_of(s.grid, [&](Eigen::Index i) { return v[nb + i].real(); },
                                  s.n_atoms, s.arm_parity),
          0);
  };

  integrate(rhs, y, t_start, t_start + duration, cfg);

  for (Eigen::Index i = 0; i < nb; ++i) s.jplus[i] = y[i];
  for (Eigen::Index i = 0; i < nb; ++i) s.jz[i] = y[nb + i].real();
  cav.a_mean = y[2 * nb];
  cav.photon_number = y[2 * nb + 1].real();
  s.rel_position = y[2 * nb + 2].real();
}

// Field equation alone, spins prescribed as a constant rotating-frame
// coherence. Reference dynamics for the first-order sideband expansion.
template <class Scalar>
void drive_cavity_frozen_spins(CavityStateT<Scalar>& cav,
                               const PhysicsParamsT<Scalar>& p,
                               std::complex<Scalar> jplus_rot, Scalar drive_scale,
                               Scalar t_start, Scalar duration,
                               const IntegratorConfig& cfg = {}) {
  using C = std::complex<Scalar>;
  using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  Vec y(1);
  y[0] = cav.a_mean;
  const Scalar u1 = p.dispersive_shift();
  const Scalar drive = std::sqrt(p.kappa1 * p.flux_d * drive_scale);
  const C pole(p.delta_d, p.kappa / 2);
  auto rhs = [&](Scalar t, const Vec& v, Vec& dv) {
    const C E = std::polar(Scalar(1), p.omega_z * t);
    dv[0] = C(0, 1) * pole * v[0] - C(0, drive) -
            C(0, u1) * (2 * std::real(jplus_rot * E)) * v[0];
  };
  integrate(rhs, y, t_start, t_start + duration, cfg);
  cav.a_mean = y[0];
  cav.photon_number = std::norm(y[0]);
}

// First-order sideband expansion of the driven field around alpha0 for a
// frozen coherence: carrier phase modulation Theta plus one sideband at each
// of +- omega_z, weighted by the cavity response at delta_d -+ omega_z.
template <class Scalar>
std::complex<Scalar> bessel_field_firstorder(const PhysicsParamsT<Scalar>& p,
                                             std::complex<Scalar> jplus_rot,
                                             Scalar t, Scalar drive_scale = 1) {
  using C = std::complex<Scalar>;
  const C alpha0 = compute_alpha0(p, drive_scale);
  const Scalar u1 = p.dispersive_shift();
  const Scalar jx = std::real(jplus_rot), jy = std::imag(jplus_rot);
  const Scalar wt = p.omega_z * t;
  const Scalar theta =
      (2 * u1 / p.omega_z) * (jy - jx * std::sin(wt) - jy * std::cos(wt));
  const C pole(p.delta_d, p.kappa / 2);
  const C up = (u1 / p.omega_z) * jplus_rot * pole /
               C(p.delta_d - p.omega_z, p.kappa / 2) * std::polar(Scalar(1), wt);
  const C dn = (u1 / p.omega_z) * std::conj(jplus_rot) * pole /
               C(p.delta_d + p.omega_z, p.kappa / 2) * std::polar(Scalar(1), -wt);
  return alpha0 * std::polar(Scalar(1), theta) * (Scalar(1) + up - dn);
}

// Minimal two-ensemble model for the delayed-interaction study, exactly the
// printed form: full exchange vs. the twisting-only truncation that keeps the
// populations and the detuning frozen.
template <class Scalar = double>
struct TwoEnsembleStateT {
  std::complex<Scalar> jp1{0, 0}, jp2{0, 0};
  Scalar jz1 = 0, jz2 = 0;
};

using TwoEnsembleState = TwoEnsembleStateT<double>;

enum class TwoEnsembleModel { exchange, oat };

template <class Scalar>
void evolve_two_ensemble(TwoEnsembleStateT<Scalar>& st, TwoEnsembleModel model,
                         Scalar chi, Scalar delta, Scalar duration,
                         const IntegratorConfig& cfg = {}) {
  using C = std::complex<Scalar>;
  using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  Vec y(4);
  y << st.jp1, st.jp2, C(st.jz1, 0), C(st.jz2, 0);
  const bool exch = model == TwoEnsembleModel::exchange;
  auto rhs = [&](Scalar, const Vec& v, Vec& dv) {
    const C sum = v[0] + v[1];
    const C tw = C(0, -2 * chi);
    dv[0] = tw * sum * v[2].real();
    dv[1] = tw * sum * v[3].real();
    if (exch) {
      dv[0] += C(0, delta) * v[0];
      dv[1] -= C(0, delta) * v[1];
      const Scalar flow = -2 * chi * std::imag(std::conj(v[0]) * v[1]);
      dv[2] = C(flow, 0);
      dv[3] = C(-flow, 0);
    } else {
      dv[2] = C(0, 0);
      dv[3] = C(0, 0);
    }
  };
  integrate(rhs, y, Scalar(0), duration, cfg);
  st.jp1 = y[0];
  st.jp2 = y[1];
  st.jz1 = y[2].real();
  st.jz2 = y[3].real();
}

}  // namespace mxsim
