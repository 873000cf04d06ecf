#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace sgeo::ode {

// Dormand-Prince 5(4) with the 4th-order dense output of Hairer's DOPRI5.
template <std::size_t N>
struct Dopri5 {
  using State = std::array<double, N>;

  struct Result {
    State y;
    State dydt;  // derivative at the new point (FSAL)
    double error = 0.0;  // RMS of scaled local error; <= 1 is acceptable
    std::array<State, 5> dense{};
  };

  // One trial step of size h from (t, y) with dydt = rhs(t, y). Only the
  // first n components are used. A non-finite stage yields error = +inf.
  template <class Rhs>
  static Result step(Rhs&& rhs, double t, const State& y, const State& dydt, double h, std::size_t n, double rtol,
                     double atol, bool want_dense) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                     d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                     d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    const State& k1 = dydt;
    State tmp{}, k2{}, k3{}, k4{}, k5{}, k6{};
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(t + c2 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * h, tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t + h, tmp);

    Result out;
    for (std::size_t i = 0; i < n; ++i)
      out.y[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    out.dydt = rhs(t + h, out.y);
    const State& k7 = out.dydt;

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(out.y[i]));
      acc += (err / scale) * (err / scale);
    }
    out.error = std::sqrt(acc / static_cast<double>(n));
    if (!std::isfinite(out.error)) out.error = INFINITY;

    if (want_dense) {
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = out.y[i] - y[i];
        const double bspl = h * k1[i] - diff;
        out.dense[0][i] = y[i];
        out.dense[1][i] = diff;
        out.dense[2][i] = bspl;
        out.dense[3][i] = diff - h * k7[i] - bspl;
        out.dense[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
    }
    return out;
  }

  // s in [0, 1] is the fraction of the step.
  static State interpolate(const std::array<State, 5>& dense, double s, std::size_t n) {
    const double s1 = 1.0 - s;
    State out{};
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = dense[0][i] +
               s * (dense[1][i] + s1 * (dense[2][i] + s * (dense[3][i] + s1 * dense[4][i])));
    }
    return out;
  }

  // Standard controller: safety 0.9, growth clamped to [0.2, 5].
  static double next_step(double h, double error) {
    if (!(error > 0.0)) return 5.0 * h;
    if (!std::isfinite(error)) return 0.5 * h;
    return h * std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
  }
};

}  // namespace sgeo::ode
