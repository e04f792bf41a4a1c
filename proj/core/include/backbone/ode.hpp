#pragma once

// Embedded Runge-Kutta (Dormand-Prince 5(4)) integrator for small fixed-size
// systems. Integrates forward or backward; the step size carries over between
// calls so marching a grid point by point stays cheap.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "backbone/errors.hpp"

namespace backbone::ode {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct Options {
  double rtol = 1e-10;
  State<N> atol{};  // per component; zero means pure relative control
  double initial_step = 1e-3;
  double min_step = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 20'000'000;
};

template <std::size_t N>
class DormandPrince45 {
 public:
  using StateType = State<N>;

  DormandPrince45() : DormandPrince45(Options<N>{}) {}
  explicit DormandPrince45(Options<N> opts) : opts_(opts), h_(opts.initial_step) {}

  /// Advances y from x to x_end. After every accepted step `observer(x, y)` is
  /// called; returning false stops the integration early. Returns the abscissa
  /// reached.
  template <class Rhs, class Observer>
  double integrate(Rhs&& f, double x, StateType& y, double x_end, Observer&& observer) {
    if (x == x_end) return x;
    const double dir = x_end > x ? 1.0 : -1.0;
    double h = std::min(std::abs(h_), opts_.max_step);
    StateType k1 = f(x, y);
    long steps = 0;
    while (dir * (x_end - x) > 0.0) {
      if (++steps > opts_.max_steps) {
        throw NumericError("ode: step budget exhausted at x=" + std::to_string(x));
      }
      bool last = false;
      if (h >= std::abs(x_end - x)) {
        h = std::abs(x_end - x);
        last = true;
      }
      const double hs = dir * h;
      StateType y_new;
      StateType k7;
      const double err = attempt(f, x, y, k1, hs, y_new, k7);
      if (!std::isfinite(err)) {
        h *= 0.25;
        check_step(h, x);
        continue;
      }
      if (err <= 1.0) {
        x = last ? x_end : x + hs;
        y = y_new;
        k1 = k7;
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        const double h_next = std::min(h * factor, opts_.max_step);
        // a step truncated to land on x_end says nothing about the natural size
        if (!last) h_ = h_next;
        h = h_next;
        if (!observer(x, static_cast<const StateType&>(y))) return x;
      } else {
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        check_step(h, x);
      }
    }
    return x;
  }

  template <class Rhs>
  double integrate(Rhs&& f, double x, StateType& y, double x_end) {
    return integrate(std::forward<Rhs>(f), x, y, x_end,
                     [](double, const StateType&) { return true; });
  }

  const Options<N>& options() const noexcept { return opts_; }

 private:
  void check_step(double h, double x) const {
    if (h < opts_.min_step * std::max(1.0, std::abs(x))) {
      throw NumericError("ode: step size collapsed at x=" + std::to_string(x));
    }
  }

  template <class Rhs>
  double attempt(Rhs& f, double x, const StateType& y, const StateType& k1, double h,
                 StateType& y_new, StateType& k7) const {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    StateType tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const StateType k2 = f(x + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const StateType k3 = f(x + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const StateType k4 = f(x + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const StateType k5 = f(x + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const StateType k6 = f(x + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = f(x + h, y_new);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = opts_.atol[i] + opts_.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double ratio = std::abs(e) / std::max(scale, std::numeric_limits<double>::min());
      if (!std::isfinite(y_new[i])) return std::numeric_limits<double>::infinity();
      err = std::max(err, ratio);
    }
    return err;
  }

  Options<N> opts_;
  double h_;
};

}  // namespace backbone::ode
