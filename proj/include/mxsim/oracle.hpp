#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxsim/dynamics.hpp"
#include "mxsim/grid.hpp"
#include "mxsim/integrate.hpp"
#include "mxsim/physics.hpp"
#include "mxsim/state.hpp"

// Brute-force few-atom reference for the adiabatically eliminated model. Basis
// states are bit patterns over n atoms (bit set = upper momentum state), so
// the ladder operators act by bit flips and
//   H = chi+ J+J- + chi- J-J+ + sum_i (delta_i/2) sigma_z(i)
// is assembled without any truncation. Dissipation enters through the single
// collective jump operator L = c+ J+ + c- J-, at which point the state is
// promoted to a density matrix. The mean-field engines are measured against
// this solver, never the other way around.

namespace mxsim {

inline constexpr int exact_max_atoms = 12;          // pure states, 2^n amplitudes
inline constexpr int exact_max_atoms_density = 7;   // density matrices, 4^n entries

struct ExactState {
  int n_atoms = 0;
  VectorX<double> detunings;  // per-atom Doppler offsets delta_i, rad/s
  Eigen::VectorXcd psi;       // amplitudes while the state stays pure
  Eigen::MatrixXcd rho;       // density matrix once dissipation acts

  bool is_density() const { return rho.size() > 0; }
  Eigen::Index dim() const { return Eigen::Index(1) << n_atoms; }
};

namespace detail {

inline VectorX<double> checked_detunings(int n, const VectorX<double>& det) {
  if (det.size() == 0) return VectorX<double>::Zero(n);
  if (det.size() != n)
    throw std::invalid_argument("exact: need one detuning per atom");
  return det;
}

// out = J+ in, summing sigma+(i) over atoms: each clear bit flips to set
inline void apply_jplus(int n, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
  out.setZero();
  const long d = 1L << n;
  for (long b = 0; b < d; ++b) {
    const std::complex<double> a = in[b];
    if (a == std::complex<double>(0, 0)) continue;
    for (int i = 0; i < n; ++i)
      if (!(b >> i & 1)) out[b | (1L << i)] += a;
  }
}

inline void apply_jminus(int n, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
  out.setZero();
  const long d = 1L << n;
  for (long b = 0; b < d; ++b) {
    const std::complex<double> a = in[b];
    if (a == std::complex<double>(0, 0)) continue;
    for (int i = 0; i < n; ++i)
      if (b >> i & 1) out[b & ~(1L << i)] += a;
  }
}

// diagonal of sum_i (delta_i/2) sigma_z(i)
inline VectorX<double> splitting_diagonal(int n, const VectorX<double>& det) {
  const long d = 1L << n;
  VectorX<double> diag(d);
  for (long b = 0; b < d; ++b) {
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += (b >> i & 1) ? det[i] : -det[i];
    diag[b] = acc / 2;
  }
  return diag;
}

inline Eigen::MatrixXcd dense_jplus(int n) {
  const long d = 1L << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (long b = 0; b < d; ++b)
    for (int i = 0; i < n; ++i)
      if (!(b >> i & 1)) m(b | (1L << i), b) = 1;
  return m;
}

// The ladder entries are 0/1 and the products count paths, so the assembled
// matrix equals its conjugate transpose exactly, not just to roundoff.
inline Eigen::MatrixXcd dense_hamiltonian(int n, const VectorX<double>& det,
                                          double chi_plus, double chi_minus) {
  const Eigen::MatrixXcd jp = dense_jplus(n);
  Eigen::MatrixXcd h = chi_plus * (jp * jp.adjoint()) + chi_minus * (jp.adjoint() * jp);
  const VectorX<double> diag = splitting_diagonal(n, det);
  for (Eigen::Index b = 0; b < h.rows(); ++b) h(b, b) += diag[b];
  return h;
}

}  // namespace detail

// Product state with polar angle theta from +z, identical for every atom. The
// azimuth is placed so <sigma+> = (sin(theta)/2) e^{i phi}, matching the
// mean-field init_state convention.
inline ExactState exact_coherent_state(int n_atoms, double theta, double phi,
                                       const VectorX<double>& detunings = {}) {
  if (n_atoms < 1 || n_atoms > exact_max_atoms)
    throw std::invalid_argument("exact: n_atoms must lie in [1, 12]");
  ExactState s;
  s.n_atoms = n_atoms;
  s.detunings = detail::checked_detunings(n_atoms, detunings);
  const std::complex<double> up = std::polar(std::cos(theta / 2), -phi);
  const std::complex<double> dn = std::sin(theta / 2);
  std::vector<std::complex<double>> up_pow(n_atoms + 1), dn_pow(n_atoms + 1);
  up_pow[0] = dn_pow[0] = 1;
  for (int i = 1; i <= n_atoms; ++i) {
    up_pow[i] = up_pow[i - 1] * up;
    dn_pow[i] = dn_pow[i - 1] * dn;
  }
  s.psi.resize(s.dim());
  for (long b = 0; b < s.dim(); ++b) {
    const int k = std::popcount(static_cast<unsigned long>(b));
    s.psi[b] = up_pow[k] * dn_pow[n_atoms - k];
  }
  return s;
}

// Symmetric one-excitation state (1/sqrt(n)) sum_i |0..1_i..0>
inline ExactState exact_dicke_one_excitation(int n_atoms,
                                             const VectorX<double>& detunings = {}) {
  if (n_atoms < 1 || n_atoms > exact_max_atoms)
    throw std::invalid_argument("exact: n_atoms must lie in [1, 12]");
  ExactState s;
  s.n_atoms = n_atoms;
  s.detunings = detail::checked_detunings(n_atoms, detunings);
  s.psi = Eigen::VectorXcd::Zero(s.dim());
  for (int i = 0; i < n_atoms; ++i)
    s.psi[1L << i] = 1.0 / std::sqrt(double(n_atoms));
  return s;
}

struct JumpAmplitudes {
  std::complex<double> c_plus{0, 0};   // multiplies J+; |c+|^2 = gamma-
  std::complex<double> c_minus{0, 0};  // multiplies J-; |c-|^2 = gamma+
};

// Amplitudes of the collective jump operator obtained by eliminating the two
// scattered sidebands: c+- = K / (+-omega_z - delta_d - i kappa/2) with
// K = u alpha0 sqrt(kappa).
inline JumpAmplitudes exact_jump_amplitudes(const PhysicsParams& p,
                                            double drive_scale = 1) {
  const std::complex<double> k_amp =
      p.dispersive_shift() * compute_alpha0(p, drive_scale) * std::sqrt(p.kappa);
  JumpAmplitudes j;
  j.c_plus = k_amp / std::complex<double>(p.omega_z - p.delta_d, -p.kappa / 2);
  j.c_minus = k_amp / std::complex<double>(-p.omega_z - p.delta_d, -p.kappa / 2);
  return j;
}

inline std::complex<double> exact_jplus(const ExactState& s) {
  std::complex<double> acc(0, 0);
  const long d = s.dim();
  for (long b = 0; b < d; ++b)
    for (int i = 0; i < s.n_atoms; ++i) {
      if (b >> i & 1) continue;
      const long bu = b | (1L << i);
      acc += s.is_density() ? s.rho(b, bu) : std::conj(s.psi[bu]) * s.psi[b];
    }
  return acc;
}

inline double exact_jz(const ExactState& s) {
  double acc = 0;
  const long d = s.dim();
  for (long b = 0; b < d; ++b) {
    const double w = s.is_density() ? s.rho(b, b).real() : std::norm(s.psi[b]);
    acc += w * (std::popcount(static_cast<unsigned long>(b)) - s.n_atoms / 2.0);
  }
  return acc;
}

inline VectorX<double> exact_excitation_probs(const ExactState& s) {
  VectorX<double> p = VectorX<double>::Zero(s.n_atoms);
  const long d = s.dim();
  for (long b = 0; b < d; ++b) {
    const double w = s.is_density() ? s.rho(b, b).real() : std::norm(s.psi[b]);
    for (int i = 0; i < s.n_atoms; ++i)
      if (b >> i & 1) p[i] += w;
  }
  return p;
}

inline double exact_norm_error(const ExactState& s) {
  if (s.is_density()) return std::abs(s.rho.trace() - std::complex<double>(1, 0));
  return std::abs(s.psi.squaredNorm() - 1.0);
}

inline double exact_energy(const ExactState& s, double chi_plus, double chi_minus) {
  const Eigen::MatrixXcd h =
      detail::dense_hamiltonian(s.n_atoms, s.detunings, chi_plus, chi_minus);
  if (s.is_density()) return (h * s.rho).trace().real();
  return s.psi.dot(h * s.psi).real();
}

inline double exact_dicke_overlap(const ExactState& s) {
  const double amp = 1.0 / std::sqrt(double(s.n_atoms));
  if (s.is_density()) {
    std::complex<double> acc(0, 0);
    for (int i = 0; i < s.n_atoms; ++i)
      for (int j = 0; j < s.n_atoms; ++j)
        acc += s.rho(1L << i, 1L << j);
    return acc.real() * amp * amp;
  }
  std::complex<double> acc(0, 0);
  for (int i = 0; i < s.n_atoms; ++i) acc += s.psi[1L << i];
  return std::norm(acc * amp);
}

// Propagate for `duration` under the exact model. Pure states take the
// eigendecomposition route up to 8 atoms and a matrix-free ODE beyond; any
// nonzero jump amplitude promotes the state to a density matrix and evolves
// the full Lindblad right-hand side.
inline void exact_evolve(ExactState& s, double chi_plus, double chi_minus,
                         std::complex<double> c_plus, std::complex<double> c_minus,
                         double duration,
                         const IntegratorConfig& cfg = {1e-12, 1e-14}) {
  using C = std::complex<double>;
  const bool jumps = std::norm(c_plus) + std::norm(c_minus) > 0;
  const int n = s.n_atoms;
  const Eigen::Index d = s.dim();

  if (jumps || s.is_density()) {
    if (n > exact_max_atoms_density)
      throw std::invalid_argument("exact: at most 7 atoms once dissipation acts");
    if (!s.is_density()) {
      s.rho = s.psi * s.psi.adjoint();
      s.psi.resize(0);
    }
    const Eigen::MatrixXcd h =
        detail::dense_hamiltonian(n, s.detunings, chi_plus, chi_minus);
    Eigen::MatrixXcd l, ldag, ll;
    if (jumps) {
      const Eigen::MatrixXcd jp = detail::dense_jplus(n);
      l = c_plus * jp + c_minus * jp.adjoint();
      ldag = l.adjoint();
      ll = ldag * l;
    }
    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(s.rho.data(), d * d);
    auto rhs = [&](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
      const Eigen::Map<const Eigen::MatrixXcd> r(v.data(), d, d);
      Eigen::Map<Eigen::MatrixXcd> dr(dv.data(), d, d);
      dr = C(0, -1) * (h * r - r * h);
      if (jumps) dr += l * r * ldag - 0.5 * (ll * r + r * ll);
    };
    integrate(rhs, y, 0.0, duration, cfg);
    s.rho = Eigen::Map<const Eigen::MatrixXcd>(y.data(), d, d);
    return;
  }

  if (n <= 8) {
    const Eigen::MatrixXcd h =
        detail::dense_hamiltonian(n, s.detunings, chi_plus, chi_minus);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(d);
    for (Eigen::Index i = 0; i < d; ++i)
      phases[i] = std::polar(1.0, -es.eigenvalues()[i] * duration);
    s.psi = es.eigenvectors() *
            (phases.asDiagonal() * (es.eigenvectors().adjoint() * s.psi));
    return;
  }

  const VectorX<C> diag = detail::splitting_diagonal(n, s.detunings).cast<C>();
  Eigen::VectorXcd tmp(d), tmp2(d);
  auto rhs = [&](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
    dv.array() = diag * v.array();
    if (chi_plus != 0) {
      detail::apply_jminus(n, v, tmp);
      detail::apply_jplus(n, tmp, tmp2);
      dv += chi_plus * tmp2;
    }
    if (chi_minus != 0) {
      detail::apply_jplus(n, v, tmp);
      detail::apply_jminus(n, tmp, tmp2);
      dv += chi_minus * tmp2;
    }
    dv *= C(0, -1);
  };
  integrate(rhs, s.psi, 0.0, duration, cfg);
}

struct MeanfieldErrorRow {
  int n_atoms = 0;
  std::string scenario;
  double phase_error = 0;  // |arg<J+>_mf - arg<J+>_exact| at the end, rad
  double jz_error = 0;     // max over the trace of the Jz gap, units of n/2
};

// Mean-field vs exact error table at fixed interaction area chi n t, so the
// rows isolate how the factorization error scales with atom number.
// Scenarios: "oat_phase" twisting only, "two_group" two detuning groups vs the
// two-ensemble exchange model, "weak_dissipation" superradiant jumps vs the
// effective equations, "free" bare precession (agreement to roundoff).
inline std::vector<MeanfieldErrorRow> meanfield_vs_exact(
    const std::vector<int>& n_grid, const std::string& scenario) {
  using C = std::complex<double>;
  const int n_steps = 8;
  const IntegratorConfig tight{1e-12, 1e-14};
  std::vector<MeanfieldErrorRow> rows;

  for (const int n : n_grid) {
    MeanfieldErrorRow row;
    row.n_atoms = n;
    row.scenario = scenario;
    const double half = n / 2.0;

    if (scenario == "oat_phase") {
      const double theta = pi / 3, chi_p = 1.0;
      const double dt = 0.12 / (chi_p * n) / n_steps;
      ExactState ex = exact_coherent_state(n, theta, 0.0);
      auto mf = init_state(MomentumGrid::homogeneous(), double(n), std::cos(theta), 0.0);
      C mf_jp(0, 0), ex_jp(0, 0);
      for (int k = 0; k < n_steps; ++k) {
        exact_evolve(ex, chi_p, 0.0, {}, {}, dt);
        evolve_pure_oat(mf, chi_p, dt);
        mf_jp = collective_J(mf).jplus;
        ex_jp = exact_jplus(ex);
        row.jz_error = std::max(row.jz_error,
                                std::abs(collective_J(mf).jz - exact_jz(ex)) / half);
      }
      row.phase_error = std::abs(std::arg(mf_jp / ex_jp));
    } else if (scenario == "two_group") {
      if (n % 2)
        throw std::invalid_argument("exact: two_group needs an even atom number");
      const double chi_p = 1.0;
      const double delta0 = 0.4 * chi_p * n;
      const double dt = 0.3 / (chi_p * n) / n_steps;
      VectorX<double> det(n);
      for (int i = 0; i < n; ++i) det[i] = i < n / 2 ? delta0 : -delta0;
      ExactState ex = exact_coherent_state(n, pi / 2, 0.0, det);
      TwoEnsembleState mf;
      mf.jp1 = mf.jp2 = n / 4.0;
      mf.jz1 = mf.jz2 = 0;
      for (int k = 0; k < n_steps; ++k) {
        exact_evolve(ex, chi_p, 0.0, {}, {}, dt);
        evolve_two_ensemble(mf, TwoEnsembleModel::exchange, chi_p, delta0, dt, tight);
        const VectorX<double> probs = exact_excitation_probs(ex);
        double ex_jz1 = -n / 4.0;
        for (int i = 0; i < n / 2; ++i) ex_jz1 += probs[i];
        row.jz_error = std::max(row.jz_error, std::abs(mf.jz1 - ex_jz1) / half);
      }
      row.phase_error = std::abs(std::arg((mf.jp1 + mf.jp2) / exact_jplus(ex)));
    } else if (scenario == "weak_dissipation") {
      if (n > exact_max_atoms_density)
        throw std::invalid_argument("exact: weak_dissipation is capped at 7 atoms");
      const double chi_p = 1.0, gamma = 0.2 * chi_p / 0.12;
      const double dt = 0.12 / (chi_p * n) / n_steps;
      ExactState ex = exact_coherent_state(n, pi / 2, 0.0);
      auto mf = init_state(MomentumGrid::homogeneous(), double(n), 0.0, 0.0);
      CouplingRates r;
      r.chi_plus = chi_p;
      r.gamma_minus = gamma;  // |c+|^2, pumps toward the upper state
      C mf_jp(0, 0), ex_jp(0, 0);
      for (int k = 0; k < n_steps; ++k) {
        exact_evolve(ex, chi_p, 0.0, std::sqrt(gamma), 0.0, dt);
        evolve_effective(mf, r, dt, tight);
        mf_jp = collective_J(mf).jplus;
        ex_jp = exact_jplus(ex);
        row.jz_error = std::max(row.jz_error,
                                std::abs(collective_J(mf).jz - exact_jz(ex)) / half);
      }
      row.phase_error = std::abs(std::arg(mf_jp / ex_jp));
    } else if (scenario == "free") {
      const double sigma_delta = 1.2, dt = 1.0 / n_steps;
      auto g = MomentumGrid::gauss_hermite(n, sigma_p_for_sigma_in(sigma_delta));
      // atoms are equal-weight stand-ins at the quadrature nodes
      g.weight = VectorX<double>::Constant(n, 1.0 / n);
      ExactState ex = exact_coherent_state(n, pi / 2, 0.0, g.omega_in);
      auto mf = init_state(g, double(n), 0.0, 0.0);
      for (int k = 0; k < n_steps; ++k) {
        exact_evolve(ex, 0.0, 0.0, {}, {}, dt);
        evolve_free(mf, dt);
        row.jz_error = std::max(row.jz_error,
                                std::abs(collective_J(mf).jz - exact_jz(ex)) / half);
      }
      row.phase_error = std::abs(std::arg(collective_J(mf).jplus / exact_jplus(ex)));
    } else {
      throw std::invalid_argument("exact: unknown scenario '" + scenario + "'");
    }
    rows.push_back(row);
  }
  return rows;
}

struct RecoilCheckReport {
  double max_prob_deviation = 0;  // max over time and atoms of |p_i - 1/n|
  double prob_variance = 0;       // max over time of the cross-atom variance
  double dicke_overlap = 0;       // |<W|psi>|^2 at the final time
  double norm_error = 0;
};

// Follow a single shared excitation: with zero splittings it stays uniformly
// delocalized (p_i = 1/n for all time), detuning spreads pull it apart, and a
// collective exchange rate chi n much larger than the spread pins it back.
inline RecoilCheckReport collective_recoil_check(int n_atoms, double chi_plus,
                                                 double chi_minus,
                                                 const VectorX<double>& detunings,
                                                 double duration, int n_steps = 16) {
  ExactState s = exact_dicke_one_excitation(n_atoms, detunings);
  RecoilCheckReport rep;
  for (int k = 0; k < n_steps; ++k) {
    exact_evolve(s, chi_plus, chi_minus, {}, {}, duration / n_steps);
    const VectorX<double> p = exact_excitation_probs(s);
    rep.max_prob_deviation =
        std::max(rep.max_prob_deviation, (p - 1.0 / n_atoms).abs().maxCoeff());
    rep.prob_variance = std::max(rep.prob_variance, (p - p.mean()).square().mean());
    rep.norm_error = std::max(rep.norm_error, exact_norm_error(s));
  }
  rep.dicke_overlap = exact_dicke_overlap(s);
  return rep;
}

}  // namespace mxsim
