#include "doctest.h"

#include <cmath>
#include <complex>

#include "mxsim/grid.hpp"
#include "mxsim/state.hpp"

using namespace mxsim;

TEST_CASE("Gauss-Hermite grid reproduces Gaussian moments") {
  const auto g = MomentumGrid::gauss_hermite(64, 0.05);
  CHECK(g.size() == 64);  // nothing clipped at this width
  CHECK(std::abs(g.weight.sum() - 1.0) < 1e-14);
  CHECK(std::abs((g.weight * g.p).sum()) < 1e-15);
  CHECK((g.weight * g.p.square()).sum() == doctest::Approx(0.05 * 0.05).epsilon(1e-12));
  CHECK((g.weight * g.p.square().square()).sum() ==
        doctest::Approx(3 * std::pow(0.05, 4)).epsilon(1e-11));
  // exact +- symmetry, bin i against bin n-1-i
  for (int i = 0; i < 64; ++i) {
    CHECK(g.p[i] == -g.p[63 - i]);
    CHECK(g.weight[i] == g.weight[63 - i]);
  }
  CHECK(g.omega_in[40] == doctest::Approx(omega_in_per_hbar_k * g.p[40]).epsilon(1e-15));
}

TEST_CASE("grid clips bins outside the Bragg window and renormalizes") {
  const double sp = sigma_p_for_sigma_in(two_pi * 2e3);
  CHECK(sp == doctest::Approx(0.1325917197354325).epsilon(1e-12));
  const auto g = MomentumGrid::gauss_hermite(64, sp);
  // a fair count of nodes sits past |p| = 1 at this width, but together they
  // carry ~1e-13 of the weight
  CHECK(g.size() < 64);
  CHECK(g.size() >= 34);
  CHECK(g.size() <= 44);
  CHECK(std::abs(g.weight.sum() - 1.0) < 1e-14);
  CHECK(g.p.abs().maxCoeff() < 1.0);
  // the clipped tail mass is ~1e-13, so the realized spread still matches
  const auto prof = inhomogeneity_profile(g, two_pi * 200e3);
  CHECK(prof.sigma_in == doctest::Approx(two_pi * 2e3).epsilon(1e-9));
}

TEST_CASE("single-bin grid is the homogeneous limit") {
  const auto g = MomentumGrid::homogeneous();
  CHECK(g.size() == 1);
  CHECK(g.p[0] == 0.0);
  CHECK(g.weight[0] == 1.0);
  CHECK(inhomogeneity_profile(g, two_pi * 200e3).sigma_in == 0.0);
}

TEST_CASE("default width maps to the frozen Doppler spread") {
  const auto g = MomentumGrid::gauss_hermite(64, 0.05);
  const auto prof = inhomogeneity_profile(g, two_pi * 200e3);
  CHECK(prof.sigma_in == doctest::Approx(4738.746370977592).epsilon(1e-12));
}

TEST_CASE("init_state prepares a coherent state bin by bin") {
  const auto g = MomentumGrid::gauss_hermite(32, 0.05);
  const auto s = init_state(g, 1000.0, 0.0, pi / 3);
  for (Eigen::Index i = 0; i < s.bins(); ++i) {
    CHECK(std::abs(s.jplus[i]) ==
          doctest::Approx(500.0 * g.weight[i]).epsilon(1e-13));
    CHECK(std::arg(s.jplus[i]) == doctest::Approx(pi / 3).epsilon(1e-13));
    CHECK(s.jz[i] == 0.0);
  }
  const auto J = collective_J(s);
  CHECK(std::abs(J.jplus) == doctest::Approx(500.0).epsilon(1e-13));
  CHECK(J.jz == 0.0);
  CHECK(bloch_length_error(s) < 1e-10);
  CHECK(contrast(s) == doctest::Approx(1.0).epsilon(1e-13));

  const auto down = init_state(g, 1000.0, -1.0);
  CHECK(std::abs(collective_J(down).jplus) == 0.0);
  CHECK(collective_J(down).jz == doctest::Approx(-500.0).epsilon(1e-13));

  CHECK_THROWS_AS(init_state(g, 1000.0, 1.5), std::invalid_argument);
}

TEST_CASE("partial spins split the distribution at p = 0") {
  // even bin count: no bin at zero, halves are mirror images
  const auto g = MomentumGrid::gauss_hermite(16, 0.05);
  const auto s = init_state(g, 800.0, 0.0, 0.0);
  const auto up = partial_J(s, +1);
  const auto dn = partial_J(s, -1);
  CHECK(std::abs(up.jplus - dn.jplus) < 1e-12);
  CHECK(std::abs(up.jplus + dn.jplus - collective_J(s).jplus) < 1e-12);

  // odd bin count: the p = 0 bin contributes half to each side
  const auto go = MomentumGrid::gauss_hermite(5, 0.05);
  const auto so = init_state(go, 800.0, 0.3, 0.0);
  const auto uo = partial_J(so, +1);
  const auto no = partial_J(so, -1);
  CHECK(std::abs(uo.jplus + no.jplus - collective_J(so).jplus) < 1e-12);
  CHECK(uo.jz + no.jz == doctest::Approx(collective_J(so).jz).epsilon(1e-13));
}

TEST_CASE("wavepacket summary reports packet centroids") {
  MomentumGrid g;
  g.p.resize(2);
  g.p << -0.2, 0.2;
  g.weight.resize(2);
  g.weight << 0.5, 0.5;
  g.omega_in = omega_in_per_hbar_k * g.p;
  g.sigma_p = 0.2;

  auto s = init_state(g, 1000.0, 0.0, 0.0);
  s.jz[0] = -125;
  s.jz[1] = 125;
  const auto w = wavepacket_summary(s);
  CHECK(w.mean_p_up == doctest::Approx(1.1).epsilon(1e-13));
  CHECK(w.mean_p_down == doctest::Approx(-1.1).epsilon(1e-13));

  // balanced state separates at two photon recoils
  auto b = init_state(g, 1000.0, 0.0, 0.0);
  CHECK(rel_velocity(b) == doctest::Approx(2 * hbar * k_d2 / mass_rb87).epsilon(1e-13));

  // everything in the lower state: upper centroid defaults to the bare offset
  const auto d = init_state(g, 1000.0, -1.0);
  const auto wd = wavepacket_summary(d);
  CHECK(wd.mean_p_up == doctest::Approx(1.0));
  CHECK(wd.mean_p_down == doctest::Approx(-1.0));
}
