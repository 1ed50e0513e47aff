#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

// Explicit Runge-Kutta steppers for the mean-field equations of motion.
// integrate() runs embedded Dormand-Prince 5(4) with the usual mixed
// absolute/relative error control, or classic fixed-step RK4 when the config
// asks for it (used by the convergence tests). State is any Eigen vector;
// the right-hand side is called as f(t, y, dydt).

namespace mxsim {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0;     // seconds; 0 means unlimited
  bool fixed_step = false;
  double dt = 0;           // fixed-step size when fixed_step is set
};

namespace detail {

template <class Vec>
double error_norm(const Vec& err, const Vec& y0, const Vec& y1,
                  double atol, double rtol) {
  double acc = 0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double e = std::abs(err[i]) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / double(err.size()));
}

}  // namespace detail

template <class Vec, class Rhs>
void integrate_rk4(Rhs&& f, Vec& y, double t0, double t1, double dt) {
  const double span = t1 - t0;
  if (span == 0) return;
  if (!(dt > 0)) throw std::invalid_argument("integrate: fixed-step dt must be positive");
  const long n = std::lround(std::ceil(span / dt - 1e-12));
  const double h = span / double(std::max(n, 1L));
  Vec k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  double t = t0;
  for (long i = 0; i < std::max(n, 1L); ++i) {
    f(t, y, k1);
    tmp = y + (h / 2) * k1;
    f(t + h / 2, tmp, k2);
    tmp = y + (h / 2) * k2;
    f(t + h / 2, tmp, k3);
    tmp = y + h * k3;
    f(t + h, tmp, k4);
    y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    t = t0 + (i + 1) * span / double(std::max(n, 1L));
  }
}

template <class Vec, class Rhs>
void integrate_dopri5(Rhs&& f, Vec& y, double t0, double t1,
                      const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  if (span == 0) return;
  if (span < 0) throw std::invalid_argument("integrate: t1 must be >= t0");

  // Dormand-Prince coefficients; last stage doubles as the first of the next
  // step (FSAL)
  static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
  static constexpr double a21 = 1. / 5;
  static constexpr double a31 = 3. / 40, a32 = 9. / 40;
  static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187,
                          a53 = 64448. / 6561, a54 = -212. / 729;
  static constexpr double a61 = 9017. / 3168, a62 = -355. / 33,
                          a63 = 46732. / 5247, a64 = 49. / 176,
                          a65 = -5103. / 18656;
  static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192,
                          b5 = -2187. / 6784, b6 = 11. / 84;
  static constexpr double e1 = 35. / 384 - 5179. / 57600,
                          e3 = 500. / 1113 - 7571. / 16695,
                          e4 = 125. / 192 - 393. / 640,
                          e5 = -2187. / 6784 + 92097. / 339200,
                          e6 = 11. / 84 - 187. / 2100, e7 = -1. / 40;

  const double hmax = cfg.max_step > 0 ? std::min(cfg.max_step, span) : span;
  double h = hmax / 16;
  double t = t0;
  Vec k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()),
      k6(y.size()), k7(y.size()), ynew(y.size()), tmp(y.size()), err(y.size());
  // k1 always holds f at the current (t, y): seeded here, then refreshed by
  // the FSAL swap on accepted steps and left untouched on rejected ones
  f(t, y, k1);

  while (t < t1) {
    // underflow is judged on the controller's step, not the end-clamped one,
    // so a rounding sliver at t1 cannot trip it
    if (!(h > std::abs(t) * 1e-15 + 1e-18))
      throw std::runtime_error("integrate: step size underflow at t = " +
                               std::to_string(t) + " s");
    const bool last = h >= t1 - t;
    const double hs = last ? t1 - t : h;

    tmp = y + hs * (a21 * k1);
    f(t + c2 * hs, tmp, k2);
    tmp = y + hs * (a31 * k1 + a32 * k2);
    f(t + c3 * hs, tmp, k3);
    tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * hs, tmp, k4);
    tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * hs, tmp, k5);
    tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + hs, tmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + hs, ynew, k7);

    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::error_norm(err, y, ynew, cfg.abs_tol, cfg.rel_tol);

    if (!std::isfinite(en)) {
      // the right-hand side blew up inside the trial step; retry smaller
      h = hs * 0.2;
      continue;
    }
    if (en <= 1.0) {
      t = last ? t1 : t + hs;
      y.swap(ynew);
      k1.swap(k7);
    }
    const double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
    h = hs * std::min(5.0, std::max(0.2, fac));
    h = std::min(h, hmax);
  }
}

template <class Vec, class Rhs>
void integrate(Rhs&& f, Vec& y, double t0, double t1, const IntegratorConfig& cfg) {
  if (cfg.fixed_step) integrate_rk4(f, y, t0, t1, cfg.dt);
  else integrate_dopri5(f, y, t0, t1, cfg);
}

}  // namespace mxsim
