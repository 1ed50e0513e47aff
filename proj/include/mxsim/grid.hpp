#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "mxsim/constants.hpp"
#include "mxsim/physics.hpp"

// Discretization of the initial momentum distribution. Bins are Gauss-Hermite
// nodes of the Gaussian envelope, so low moments of the distribution are
// integrated exactly with few bins. p is measured in hbar*k relative to the
// packet center p0; only offsets within the (-1, 1) Bragg window are kept.

namespace mxsim {

template <class Scalar = double>
struct MomentumGridT {
  VectorX<Scalar> p;         // bin centers, hbar*k
  VectorX<Scalar> weight;    // population fractions, sums to 1
  VectorX<Scalar> omega_in;  // Doppler splitting offset per bin, rad/s
  Scalar sigma_p = 0;

  Eigen::Index size() const { return p.size(); }

  // Golub-Welsch on the Hermite Jacobi matrix: nodes are eigenvalues, weights
  // are squared first components of the normalized eigenvectors, so the
  // weights sum to 1 up to roundoff before we even renormalize.
  static MomentumGridT gauss_hermite(int n, Scalar sigma_p) {
    if (n < 1) throw std::invalid_argument("grid: need at least one bin");
    MomentumGridT g;
    g.sigma_p = sigma_p;
    if (n == 1 || sigma_p == Scalar(0)) {
      g.p = VectorX<Scalar>::Zero(1);
      g.weight = VectorX<Scalar>::Ones(1);
      g.omega_in = VectorX<Scalar>::Zero(1);
      return g;
    }

    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat jac = Mat::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      const Scalar b = std::sqrt(Scalar(i) / 2);
      jac(i, i - 1) = b;
      jac(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(jac);
    VectorX<Scalar> x = es.eigenvalues().array();
    VectorX<Scalar> w = es.eigenvectors().row(0).array().square();

    // enforce the exact +- symmetry of the Hermite nodes; eigenvalues come
    // out sorted, so node i pairs with node n-1-i
    for (int i = 0; i < n / 2; ++i) {
      const int j = n - 1 - i;
      const Scalar xm = (x[i] - x[j]) / 2;
      x[i] = xm;
      x[j] = -xm;
      const Scalar wm = (w[i] + w[j]) / 2;
      w[i] = wm;
      w[j] = wm;
    }
    if (n % 2 == 1) x[n / 2] = 0;

    VectorX<Scalar> pf = std::sqrt(Scalar(2)) * sigma_p * x;

    // discard bins outside the Bragg window and renormalize what is left
    int kept = 0;
    for (int i = 0; i < n; ++i) kept += std::abs(pf[i]) < Scalar(1) ? 1 : 0;
    g.p.resize(kept);
    g.weight.resize(kept);
    int m = 0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(pf[i]) < Scalar(1)) {
        g.p[m] = pf[i];
        g.weight[m] = w[i];
        ++m;
      }
    }
    g.weight /= g.weight.sum();
    g.omega_in = Scalar(omega_in_per_hbar_k) * g.p;
    return g;
  }

  static MomentumGridT homogeneous() { return gauss_hermite(1, Scalar(0)); }
};

using MomentumGrid = MomentumGridT<double>;

template <class Scalar = double>
struct InhomogeneityProfileT {
  Scalar sigma_in = 0;  // weighted rms spread of omega_in, rad/s
  Scalar omega_z = 0;
};

using InhomogeneityProfile = InhomogeneityProfileT<double>;

template <class Scalar>
InhomogeneityProfileT<Scalar> inhomogeneity_profile(const MomentumGridT<Scalar>& g,
                                                    Scalar omega_z) {
  const Scalar mean = (g.weight * g.omega_in).sum();
  const Scalar var = (g.weight * (g.omega_in - mean).square()).sum();
  return {std::sqrt(std::max(var, Scalar(0))), omega_z};
}

// sigma_p needed so the grid's omega_in spread comes out at sigma_in
template <class Scalar>
Scalar sigma_p_for_sigma_in(Scalar sigma_in) {
  return sigma_in / Scalar(omega_in_per_hbar_k);
}

}  // namespace mxsim
