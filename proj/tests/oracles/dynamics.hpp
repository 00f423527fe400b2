#pragma once

// Reference rigid-body dynamics written from the equations of motion as
// linear systems in the accelerations, solved by Cramer's rule.

#include <algorithm>
#include <array>
#include <cmath>

namespace oracle {

using State4 = std::array<double, 4>;

// Cart-pole with a uniform rod of half-length l on a frictionless cart:
//   (M + m) xdd + m l cos(th) thdd = F + m l thd^2 sin(th)
//   cos(th) xdd + (4/3) l thdd     = g sin(th)
inline State4 cartpole_accel(const State4& s, double force) {
    constexpr double g = 9.8, mc = 1.0, mp = 0.1, l = 0.5;
    const double th = s[2], thd = s[3];
    const double a11 = mc + mp, a12 = mp * l * std::cos(th);
    const double a21 = std::cos(th), a22 = 4.0 / 3.0 * l;
    const double b1 = force + mp * l * thd * thd * std::sin(th);
    const double b2 = g * std::sin(th);
    const double det = a11 * a22 - a12 * a21;
    return {0.0, (b1 * a22 - a12 * b2) / det, 0.0, (a11 * b2 - a21 * b1) / det};
}

// Explicit Euler with tau = 0.02: positions use the pre-step velocities.
inline State4 cartpole_step(const State4& s, int action) {
    constexpr double tau = 0.02;
    const auto a = cartpole_accel(s, action == 1 ? 10.0 : -10.0);
    return {s[0] + tau * s[1], s[1] + tau * a[1], s[2] + tau * s[3], s[3] + tau * a[3]};
}

// Acrobot (two-link, torque at the second joint), Lagrangian form:
//   d11 th1dd + d12 th2dd + h1 + phi1 = 0
//   d12 th1dd + d22 th2dd + h2 + phi2 = tau
// with the second link's velocity-product term matching the standard
// "book" variant used by the reference benchmark.
inline State4 acrobot_deriv(const State4& s, double torque) {
    constexpr double m1 = 1.0, m2 = 1.0, l1 = 1.0, lc1 = 0.5, lc2 = 0.5, i1 = 1.0, i2 = 1.0, g = 9.8;
    const double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
    const double d11 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(t2)) + i1 + i2;
    const double d12 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
    const double d22 = m2 * lc2 * lc2 + i2;
    const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - M_PI / 2);
    const double phi1 = -m2 * l1 * lc2 * w2 * w2 * std::sin(t2) - 2 * m2 * l1 * lc2 * w2 * w1 * std::sin(t2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(t1 - M_PI / 2) + phi2;
    const double h2 = m2 * l1 * lc2 * w1 * w1 * std::sin(t2);
    const double b1 = -phi1;
    const double b2 = torque - h2 - phi2;
    const double det = d11 * d22 - d12 * d12;
    const double a1 = (b1 * d22 - d12 * b2) / det;
    const double a2 = (d11 * b2 - d12 * b1) / det;
    return {w1, w2, a1, a2};
}

inline State4 axpy(const State4& x, double h, const State4& k) {
    return {x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2], x[3] + h * k[3]};
}

inline double wrap(double x) {
    const double two_pi = 2 * M_PI;
    while (x > M_PI) x -= two_pi;
    while (x < -M_PI) x += two_pi;
    return x;
}

inline State4 acrobot_step(const State4& s, int action) {
    constexpr double dt = 0.2;
    const double torque = static_cast<double>(action) - 1.0;
    const auto k1 = acrobot_deriv(s, torque);
    const auto k2 = acrobot_deriv(axpy(s, dt / 2, k1), torque);
    const auto k3 = acrobot_deriv(axpy(s, dt / 2, k2), torque);
    const auto k4 = acrobot_deriv(axpy(s, dt, k3), torque);
    State4 n;
    for (int i = 0; i < 4; ++i) n[i] = s[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    n[0] = wrap(n[0]);
    n[1] = wrap(n[1]);
    n[2] = std::clamp(n[2], -4 * M_PI, 4 * M_PI);
    n[3] = std::clamp(n[3], -9 * M_PI, 9 * M_PI);
    return n;
}

}  // namespace oracle
