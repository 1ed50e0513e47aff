#include "doctest.h"

#include <cmath>
#include <complex>

#include "mxsim/sequence.hpp"

using namespace mxsim;
using C = std::complex<double>;

TEST_CASE("bragg rotation algebra") {
  const auto g = MomentumGrid::gauss_hermite(8, 0.05);
  auto s = init_state(g, 1000.0, -1.0);  // everything in the lower state

  SUBCASE("pi/2 about x lifts the south pole to +y") {
    apply_bragg(s, pi / 2, 0.0);
    const auto J = collective_J(s);
    CHECK(std::abs(J.jplus - C(0.0, 500.0)) < 1e-10);
    CHECK(std::abs(J.jz) < 1e-10);
  }

  SUBCASE("two quarter turns make a half turn") {
    auto t = s;
    apply_bragg(s, pi / 2, 0.7);
    apply_bragg(s, pi / 2, 0.7);
    apply_bragg(t, pi, 0.7);
    for (Eigen::Index i = 0; i < s.bins(); ++i) {
      CHECK(std::abs(s.jplus[i] - t.jplus[i]) < 1e-12 * 500);
      CHECK(s.jz[i] == doctest::Approx(t.jz[i]).epsilon(1e-12));
    }
  }

  SUBCASE("pi about y conjugates the coherence and flips jz") {
    apply_bragg(s, pi / 2, 0.3);
    auto before = s;
    apply_bragg(s, pi, pi / 2);
    for (Eigen::Index i = 0; i < s.bins(); ++i) {
      // u -> e^{2 i phi_axis} conj(u) = -conj(u) for phi_axis = pi/2
      CHECK(std::abs(s.jplus[i] + std::conj(before.jplus[i])) < 1e-12 * 500);
      CHECK(s.jz[i] == doctest::Approx(-before.jz[i]).epsilon(1e-12));
    }
  }

  SUBCASE("rotations preserve Bloch length") {
    apply_bragg(s, 1.234, 2.1);
    apply_bragg(s, 0.456, -0.9);
    CHECK(bloch_length_error(s) < 1e-9);
  }
}

TEST_CASE("finite pulse reduces to the instantaneous rotation at zero Doppler") {
  auto a = init_state(MomentumGrid::homogeneous(), 800.0, -1.0);
  auto b = a;
  apply_bragg(a, pi / 2, 0.4);
  apply_bragg_finite(b, pi / 2, 0.4, two_pi * 8.3e3);
  CHECK(std::abs(a.jplus[0] - b.jplus[0]) < 1e-8 * 400);
  CHECK(a.jz[0] == doctest::Approx(b.jz[0]).epsilon(1e-8));
}

TEST_CASE("finite pi pulse takes theta over rabi seconds") {
  auto s = init_state(MomentumGrid::homogeneous(), 100.0, -1.0);
  PulseSequence seq;
  seq.pulse_mode = PulseMode::finite;
  seq.rabi = two_pi * 8.3e3;
  seq.events = {bragg_pulse(pi, pi / 2)};
  const auto res = run_sequence(s, seq, PhysicsParams{});
  CHECK(res.t_end == doctest::Approx(60.2e-6).epsilon(2e-3));
}

TEST_CASE("finite pulses lose area for Doppler-detuned bins") {
  // a single off-center bin: the pulse is slightly detuned, so a nominal pi
  // pulse leaves a bit of population behind
  MomentumGrid g;
  g.p.resize(1);
  g.p << 0.1;
  g.weight.resize(1);
  g.weight << 1.0;
  g.omega_in = omega_in_per_hbar_k * g.p;
  g.sigma_p = 0;
  auto s = init_state(g, 100.0, -1.0);
  apply_bragg_finite(s, pi, 0.0, two_pi * 8.3e3);
  CHECK(s.jz[0] > 0.8 * 50.0);   // mostly transferred
  CHECK(s.jz[0] < 0.999 * 50.0); // but measurably short of complete
}

TEST_CASE("Mach-Zehnder echo refocuses to a zero-phase fringe") {
  const auto g = MomentumGrid::gauss_hermite(48, 0.05);
  const auto s0 = init_state(g, 1000.0, -1.0);
  PulseSequence seq;
  seq.events = {bragg_pulse(pi / 2, 0.0), free_flight(80e-6),
                bragg_pulse(pi, pi / 2), free_flight(80e-6)};
  const auto fr = fringe_scan(s0, seq, PhysicsParams{}, default_phase_grid());
  CHECK(std::abs(fr.phase) < 1e-9);
  CHECK(fr.amplitude == doctest::Approx(500.0).epsilon(1e-9));
  CHECK(std::abs(fr.offset) < 1e-9);
  CHECK(fr.contrast == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fr.rms_residual < 1e-9);
}

TEST_CASE("dressed echo picks up the one-axis-twisting phase") {
  // homogeneous and lossless: fitted phase must equal 2 chi <Jz> t_total
  // (both dressing windows count; the echo flips Jz and the accumulated
  // twist together, so the contributions add)
  PhysicsParams p;
  p.flux_d = 2e7;  // keep the twist below a radian
  const CouplingRates r = compute_rates(p);
  const double tx = 25e-6;

  const auto s0 = init_state(MomentumGrid::homogeneous(), 1000.0, -1.0);
  PulseSequence seq;
  seq.superradiance = false;
  seq.events = {bragg_pulse(pi / 4, 0.0), free_flight(25e-6), dressing(tx),
                bragg_pulse(pi, pi / 2), dressing(tx), free_flight(25e-6)};
  const auto fr = fringe_scan(s0, seq, p, default_phase_grid());

  const double jz1 = -500.0 * std::cos(pi / 4);  // after the pi/4 splitter
  const double expect = 2 * r.chi() * jz1 * 2 * tx;
  CHECK(fr.phase == doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("relative position integrates the packet separation") {
  const auto g = MomentumGrid::gauss_hermite(16, 0.05);
  auto s = init_state(g, 1000.0, -1.0);
  PulseSequence seq;
  seq.events = {bragg_pulse(pi / 2, 0.0), free_flight(100e-6), mark("mid"),
                bragg_pulse(pi, pi / 2), free_flight(100e-6), mark("close")};
  const auto res = run_sequence(s, seq, PhysicsParams{});
  const double v2 = 2 * hbar * k_d2 / mass_rb87;
  REQUIRE(res.marks.size() == 2);
  CHECK(res.marks[0].wavepacket.rel_position ==
        doctest::Approx(v2 * 100e-6).epsilon(1e-12));
  // after the mirror the arms close again: back to zero separation
  CHECK(std::abs(res.marks[1].wavepacket.rel_position) < 1e-15);
  CHECK(res.marks[1].t == doctest::Approx(200e-6).epsilon(1e-12));
}

TEST_CASE("fringe fit rejects a dephased interferometer") {
  // a state with no coherence left reads out the same population at every
  // analysis phase, so the fit is degenerate and must refuse
  const auto g = MomentumGrid::gauss_hermite(64, sigma_p_for_sigma_in(two_pi * 2e3));
  auto s0 = init_state(g, 1000.0, 0.0);
  s0.jplus.setZero();
  PulseSequence seq;
  CHECK_THROWS_AS(fringe_scan(s0, seq, PhysicsParams{}, default_phase_grid()),
                  std::runtime_error);
}

TEST_CASE("phase unwrap follows nearest continuation") {
  VectorX<double> ph(5);
  ph << 3.0, -3.0, 2.9, -3.1, 3.1;
  unwrap_phases(ph);
  CHECK(ph[1] == doctest::Approx(3.0 + (two_pi - 6.0)).epsilon(1e-12));
  for (int i = 1; i < 5; ++i) CHECK(std::abs(ph[i] - ph[i - 1]) < pi);
}

TEST_CASE("contrast probe equals the fringe amplitude for ideal readout") {
  PhysicsParams p;
  const auto g = MomentumGrid::gauss_hermite(32, 0.05);
  const auto s0 = init_state(g, 1000.0, -1.0);
  PulseSequence seq;
  seq.events = {bragg_pulse(pi / 2, 0.0), free_flight(60e-6), dressing(25e-6),
                bragg_pulse(pi, pi / 2), free_flight(60e-6)};
  auto probe = s0;
  run_sequence(probe, seq, p);
  const auto fr = fringe_scan(s0, seq, p, default_phase_grid());
  CHECK(fr.contrast == doctest::Approx(contrast(probe)).epsilon(1e-10));
}
