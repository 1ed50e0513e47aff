// End-to-end acceptance gate: eleven numbered physics checks, one PASS/FAIL
// line each, nonzero exit if any fails or overruns its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mxsim/dynamics.hpp"
#include "mxsim/experiments.hpp"
#include "mxsim/io.hpp"
#include "mxsim/oracle.hpp"
#include "mxsim/physics.hpp"
#include "mxsim/sequence.hpp"
#include "mxsim/state.hpp"

using namespace mxsim;
using C = std::complex<double>;

namespace {

int failures = 0;

void check(int idx, const char* name, double cap_s,
           const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt > cap_s) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over the ") +
              format_double(cap_s) + " s budget";
  }
  std::printf("[%s] %2d %-46s %7.2f s  %s\n", ok ? "PASS" : "FAIL", idx, name, dt,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Peak {
  double t = 0;
  double c = 0;
  double prominence = 0;
};

// local maxima with classic prominence: height above the deeper of the two
// valleys separating the peak from higher ground (or the trace ends)
std::vector<Peak> find_peaks(const std::vector<double>& ts,
                             const std::vector<double>& cs, double min_prominence) {
  std::vector<Peak> out;
  const int n = int(cs.size());
  for (int i = 1; i + 1 < n; ++i) {
    if (!(cs[i] > cs[i - 1] && cs[i] >= cs[i + 1])) continue;
    double lo_l = cs[i];
    for (int j = i - 1; j >= 0 && cs[j] <= cs[i]; --j) lo_l = std::min(lo_l, cs[j]);
    double lo_r = cs[i];
    for (int j = i + 1; j < n && cs[j] <= cs[i]; ++j) lo_r = std::min(lo_r, cs[j]);
    const double prom = cs[i] - std::max(lo_l, lo_r);
    if (prom > min_prominence) out.push_back({ts[i], cs[i], prom});
  }
  return out;
}

void criterion_1() {
  check(1, "triple-dispersive chi with exact odd symmetry", 1.0, [](std::string& d) {
    PhysicsParams p;
    const int n = 4000;  // half-grid over (0, 2 omega_z], symmetric by negation
    std::vector<double> curve(2 * n);
    double worst_odd = 0;
    for (int k = 0; k < n; ++k) {
      const double x = (k + 0.5) * (2 * p.omega_z / n);
      PhysicsParams q = p;
      q.delta_d = x;
      const double cp = compute_rates(q).chi();
      q.delta_d = -x;
      const double cn = compute_rates(q).chi();
      worst_odd = std::max(worst_odd, std::abs(cp + cn));
      curve[n + k] = cp;
      curve[n - 1 - k] = cn;
    }
    int crossings = 0;
    for (size_t i = 0; i + 1 < curve.size(); ++i)
      if (curve[i] * curve[i + 1] < 0) ++crossings;
    d = "zero crossings " + std::to_string(crossings) + ", worst |chi(x)+chi(-x)| " +
        format_double(worst_odd) + " rad/s";
    return crossings == 3 && worst_odd < 1e-18;
  });
}

void criterion_2() {
  check(2, "dressed-echo phase equals 2 chi <Jz> t_total", 10.0, [](std::string& d) {
    std::mt19937 rng(20260822u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto s0 = init_state(MomentumGrid::homogeneous(), 1000.0, -1.0);
    const auto phis = default_phase_grid();
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      PhysicsParams p;
      double scale = 0, theta1 = 0, tx = 0, expect = 0;
      for (int draw = 0; draw < 100; ++draw) {
        p.delta_d = u01(rng) < 0.5 ? two_pi * (150e3 + 40e3 * u01(rng))
                                   : two_pi * (240e3 + 120e3 * u01(rng));
        scale = 0.05 + 0.5 * u01(rng);
        theta1 = 0.3 + 2.5 * u01(rng);
        tx = (5 + 20 * u01(rng)) * 1e-6;
        const double jz1 = -500.0 * std::cos(theta1);
        expect = 2 * compute_rates(p, scale).chi() * jz1 * 2 * tx;
        if (std::abs(expect) < 2.5) break;  // keep clear of the fringe wrap
      }
      const auto fr = fringe_scan(
          s0, dressed_echo_sequence(theta1, 25e-6, tx, scale, false), p, phis);
      worst = std::max(worst, std::abs(fr.phase - expect));
    }
    d = "worst |fit - 2 chi Jz (2 t_x)| " + format_double(worst) + " rad, 20 draws";
    return worst < 1e-6;
  });
}

void criterion_3() {
  check(3, "Jz linearity and slope flip across the sideband", 30.0,
        [](std::string& d) {
          PhysicsParams p;
          const auto above = phase_vs_jz_scan(p, 1000.0, +1, 0.05, 64);
          const auto below = phase_vs_jz_scan(p, 1000.0, -1, 0.05, 64);
          d = "R^2 " + format_double(above.r_squared) + " / " +
              format_double(below.r_squared) + ", slopes " +
              format_double(above.slope) + " / " + format_double(below.slope);
          return above.points.size() == 9 && below.points.size() == 9 &&
                 above.r_squared > 0.9999 && below.r_squared > 0.9999 &&
                 above.slope * below.slope < 0;
        });
}

void criterion_4() {
  check(4, "Gaussian dephasing baseline at sigma_in 2 kHz", 5.0, [](std::string& d) {
    const double sigma_in = two_pi * 2000;
    const auto g = MomentumGrid::gauss_hermite(128, sigma_p_for_sigma_in(sigma_in));
    if (g.size() < 48) {
      d = "only " + std::to_string(g.size()) + " bins survive the window";
      return false;
    }
    auto s = init_state(g, 1000.0, 0.0, 0.0);
    double worst = 0;
    const double dt = 5e-6;
    double t = 0;
    for (int i = 0; i <= 36; ++i) {  // 0 to 180 us
      const double law = std::exp(-0.5 * sigma_in * sigma_in * t * t);
      worst = std::max(worst, std::abs(contrast(s) - law) / law);
      evolve_free(s, dt);
      t += dt;
    }
    d = std::to_string(g.size()) + " bins, worst relative deviation " +
        format_double(worst);
    return worst < 0.01;
  });
}

void criterion_5() {
  check(5, "exchange phase dies with delay, pure OAT does not", 30.0,
        [](std::string& d) {
          PhysicsParams p;
          const double sigma_in = omega_in_per_hbar_k * p.sigma_p;
          const auto delays = linspace(0.0, 3.0 / sigma_in, 13);
          const auto pts = phase_vs_delay_scan(p, 1000.0, 0.5, sigma_in, delays, 128);
          const double base = std::abs(pts.front().phi_exchange);
          const double tail = std::abs(pts.back().phi_exchange);
          double oat_lo = pts.front().phi_oat, oat_hi = oat_lo;
          for (const auto& q : pts) {
            oat_lo = std::min(oat_lo, q.phi_oat);
            oat_hi = std::max(oat_hi, q.phi_oat);
          }
          d = "exchange " + format_double(base) + " -> " + format_double(tail) +
              " rad at 3/sigma_in, OAT span " + format_double(oat_hi - oat_lo);
          return tail < 0.1 * base && (oat_hi - oat_lo) < 1e-6;
        });
}

void criterion_6() {
  check(6, "gap-protection transition and revival frequency", 120.0,
        [](std::string& d) {
          // all sequence times scaled together with 1/sigma_in so two revival
          // periods of the slowest tested ratio fit inside the 600 us window
          PhysicsParams p;
          const double sigma_in = two_pi * 4000;
          const std::vector<double> ratios = {0.5, 1.7, 2.8, 4.0};
          const auto rows =
              gap_protection_traces(p, 1000.0, ratios, sigma_in, 35e-6, 20e-6,
                                    600e-6, 2.5e-6, 512, false, true);
          std::string counts;
          bool ok = true;
          double prev_freq = 0;
          for (const double ratio : ratios) {
            std::vector<double> ts, cs;
            for (const auto& r : rows)
              if (r.ratio == ratio) {
                ts.push_back(r.t_dress);
                cs.push_back(r.contrast);
              }
            const auto peaks = find_peaks(ts, cs, 0.01);
            counts += (counts.empty() ? "" : ", ") + format_double(ratio) + ": " +
                      std::to_string(peaks.size());
            if (ratio <= 0.5) {
              ok = ok && peaks.empty();
              continue;
            }
            if (peaks.size() < 2) {
              ok = false;
              continue;
            }
            const double freq =
                (peaks.size() - 1) / (peaks.back().t - peaks.front().t);
            ok = ok && freq > prev_freq;
            prev_freq = freq;
          }
          d = "peaks above 1% prominence {" + counts + "}";
          return ok;
        });
}

void criterion_7() {
  check(7, "echo peak shifts early, stays put late", 120.0, [](std::string& d) {
    PhysicsParams p;
    const double sigma_in = two_pi * 2000;
    const double step = 1e-6;
    const auto rows =
        echo_imbalance_scan(p, 1000.0, sigma_in, {0.0, 3.0, 8.0}, 8.0, 600e-6,
                            25e-6, 400e-6, 25e-6, -150e-6, 100e-6, step, 128, true);
    auto argmax = [&](double ratio, const std::string& placement) {
      double best_dt = 0, best_c = -1;
      for (const auto& r : rows)
        if (r.ratio == ratio && r.placement == placement && r.contrast > best_c) {
          best_c = r.contrast;
          best_dt = r.dt;
        }
      return best_dt;
    };
    const double none = argmax(0.0, "none");
    const double early3 = argmax(3.0, "early");
    const double early8 = argmax(8.0, "early");
    const double late = argmax(8.0, "late");
    d = "argmax dt (us): none " + format_double(none * 1e6) + ", early x3 " +
        format_double(early3 * 1e6) + ", early x8 " + format_double(early8 * 1e6) +
        ", late " + format_double(late * 1e6);
    return std::abs(none) < step / 2 && early3 < -step / 2 &&
           early8 < early3 - step / 2 && std::abs(late) < step / 2;
  });
}

void criterion_8() {
  check(8, "full cavity model against the eliminated one", 120.0,
        [](std::string& d) {
          struct Set {
            double n_atoms, scale, delta_d_hz, jz_frac, t;
          };
          const Set sets[5] = {{200, 0.05, 300e3, -0.5, 200e-6},
                               {500, 0.04, 300e3, -0.9, 200e-6},
                               {200, 0.05, 250e3, -0.5, 200e-6},
                               {1000, 0.02, 400e3, -0.9, 200e-6},
                               {200, 0.01, 172e3, -0.8, 300e-6}};
          double worst_rel = 0, worst_pert = 0;
          for (const auto& set : sets) {
            PhysicsParams p;
            p.n_atoms = set.n_atoms;
            p.delta_d = two_pi * set.delta_d_hz;
            worst_pert = std::max(worst_pert, compute_pert_ratio(p, set.scale));
            auto eff = init_state(MomentumGrid::homogeneous(), set.n_atoms,
                                  set.jz_frac);
            auto full = eff;
            CavityState cav;
            cav.a_mean = compute_alpha0(p, set.scale);
            cav.photon_number = std::norm(cav.a_mean);
            evolve_effective(eff, compute_rates(p, set.scale), set.t);
            evolve_full_cavity(full, cav, p, set.scale, 0.0, set.t, {});
            const double phi_e = std::arg(collective_J(eff).jplus);
            const double phi_f = std::arg(collective_J(full).jplus);
            worst_rel = std::max(worst_rel, std::abs(phi_f - phi_e) /
                                                std::abs(phi_e));
          }
          if (worst_pert >= 0.05) {
            d = "a set violates pert_ratio < 0.05";
            return false;
          }

          PhysicsParams p;
          auto vac = init_state(MomentumGrid::homogeneous(), 100.0, -1.0);
          vac.jplus.setZero();
          vac.jz.setZero();  // unpolarized: no back-action on the field
          CavityState cav;
          evolve_full_cavity(vac, cav, p, 1.0, 0.0, 30.0 / p.kappa, {});
          const C a0 = compute_alpha0(p);
          const double ring_err = std::abs(cav.a_mean - a0) / std::abs(a0);

          const C jrot = std::polar(25.0, 0.4);
          CavityState sb;
          sb.a_mean = a0;
          sb.photon_number = std::norm(a0);
          IntegratorConfig tight;
          tight.rel_tol = 1e-10;
          drive_cavity_frozen_spins(sb, p, jrot, 1.0, 0.0, 60e-6, tight);
          double t = 60e-6, worst_sb = 0;
          const double period = two_pi / p.omega_z;
          for (int i = 0; i < 24; ++i) {
            drive_cavity_frozen_spins(sb, p, jrot, 1.0, t, period / 24, tight);
            t += period / 24;
            const C ref = bessel_field_firstorder(p, jrot, t);
            worst_sb =
                std::max(worst_sb, std::abs(std::abs(sb.a_mean) - std::abs(ref)));
          }
          d = "worst phase mismatch " + format_double(worst_rel) +
              ", ring-up error " + format_double(ring_err) + ", sideband field " +
              format_double(worst_sb / std::abs(a0)) + " of alpha0";
          return worst_rel < 0.05 && ring_err < 1e-6 &&
                 worst_sb < 0.01 * std::abs(a0);
        });
}

void criterion_9() {
  check(9, "lossless conservation laws", 10.0, [](std::string& d) {
    PhysicsParams p;
    const double n = 1000.0;
    const auto grid = MomentumGrid::gauss_hermite(128, 0.05);
    auto s = init_state(grid, n);
    auto r = compute_rates(p);
    r.gamma_plus = r.gamma_minus = 0;
    const auto seq =
        dressed_echo_sequence(pi / 4, 25e-6, 25e-6, 1.0, false).events;
    double worst_jz = 0;
    for (const auto& ev : seq) {
      const double jz_before = collective_J(s).jz;
      switch (ev.kind) {
        case EventKind::bragg:
          apply_bragg(s, ev.theta, ev.phi);
          continue;  // pulses move Jz by design
        case EventKind::free_flight:
          evolve_free(s, ev.duration);
          break;
        case EventKind::dressing:
          evolve_effective(s, r, ev.duration);
          break;
        case EventKind::mark:
          continue;
      }
      worst_jz = std::max(worst_jz,
                          std::abs(collective_J(s).jz - jz_before) / (n / 2));
    }
    double worst_len = 0;
    for (Eigen::Index i = 0; i < s.bins(); ++i) {
      const double len = std::hypot(std::abs(s.jplus[i]), s.jz[i]);
      const double ref = s.grid.weight[i] * n / 2;
      worst_len = std::max(worst_len, std::abs(len - ref) / (n / 2));
    }

    TwoEnsembleState two;
    two.jp1 = std::polar(230.0, 0.3);
    two.jp2 = std::polar(180.0, -0.2);
    two.jz1 = 120.0;
    two.jz2 = -60.0;
    const double sum0 = two.jz1 + two.jz2;
    auto ex = two;
    evolve_two_ensemble(ex, TwoEnsembleModel::exchange, 35.0, two_pi * 2000,
                        300e-6);
    const double sum_err = std::abs(ex.jz1 + ex.jz2 - sum0) / (n / 2);
    auto oat = two;
    evolve_two_ensemble(oat, TwoEnsembleModel::oat, 35.0, two_pi * 2000,
                        300e-6);
    const double oat_err = std::max(std::abs(oat.jz1 - two.jz1),
                                    std::abs(oat.jz2 - two.jz2)) /
                           (n / 2);
    d = "segment Jz drift " + format_double(worst_jz) + ", bin length drift " +
        format_double(worst_len) + ", exchange J1z+J2z " +
        format_double(sum_err) + ", OAT individual " + format_double(oat_err);
    return worst_jz < 1e-8 && worst_len < 1e-8 && sum_err < 1e-9 &&
           oat_err < 1e-9;
  });
}

void criterion_10() {
  check(10, "mean-field phase error shrinks as 1/N", 60.0, [](std::string& d) {
    const auto rows = meanfield_vs_exact({4, 6, 8, 10, 12}, "oat_phase");
    bool mono = true, bounded = true;
    std::string table;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && !(rows[i].phase_error < rows[i - 1].phase_error)) mono = false;
      if (!(rows[i].phase_error < 0.3 / rows[i].n_atoms)) bounded = false;
      table += (i ? ", " : "") + std::string("N=") +
               std::to_string(rows[i].n_atoms) + ": " +
               format_double(rows[i].phase_error);
    }
    const auto rep = collective_recoil_check(8, 0.35, 0.0,
                                             VectorX<double>::Zero(8), 4.0, 24);
    d = "phase error {" + table + "}, Dicke probability deviation " +
        format_double(rep.max_prob_deviation);
    return mono && bounded && rep.max_prob_deviation < 1e-12;
  });
}

void criterion_11() {
  check(11, "superradiant transfer scales with N, peaks on resonance", 30.0,
        [](std::string& d) {
          PhysicsParams p;
          p.delta_d = p.omega_z;
          const double r1 = fractional_transfer_rate(p, 1000.0);
          const double r2 = fractional_transfer_rate(p, 2000.0);
          const double ratio = r2 / r1;
          const auto scan = transfer_rate_scan(p, 1000.0);
          double best_rate = -1, best_delta = 0;
          for (const auto& q : scan)
            if (q.rate_small > best_rate) {
              best_rate = q.rate_small;
              best_delta = q.delta_d;
            }
          d = "doubling ratio " + format_double(ratio) + ", peak at delta_d " +
              format_double(best_delta / two_pi) + " Hz";
          return std::abs(ratio - 2.0) <= 0.05 && best_delta == p.omega_z;
        });
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
