#pragma once

// Scalar functions entering the heat-kernel weights, evaluated over the full
// real line without 0/0 or overflow.

#include <cmath>
#include <numbers>

namespace carnot::special {

inline constexpr double kSeriesCutoff = 1e-4;
inline constexpr double kAsymptoticCutoff = 30.0;

/// j(x) = x / sinh(x), with j(0) = 1.
inline double x_over_sinh(double x) {
    const double ax = std::abs(x);
    if (ax < kSeriesCutoff) {
        const double x2 = ax * ax;
        return 1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0;
    }
    if (ax > kAsymptoticCutoff) {
        return 2.0 * ax * std::exp(-ax) / (1.0 - std::exp(-2.0 * ax));
    }
    return ax / std::sinh(ax);
}

/// log j(x). Finite for every finite x.
inline double log_x_over_sinh(double x) {
    const double ax = std::abs(x);
    if (ax < kSeriesCutoff) {
        const double x2 = ax * ax;
        return -x2 / 6.0 + x2 * x2 / 180.0;
    }
    if (ax > kAsymptoticCutoff) {
        return std::log(2.0 * ax) - ax - std::log1p(-std::exp(-2.0 * ax));
    }
    return std::log(ax / std::sinh(ax));
}

/// x / tanh(x) = j(x) cosh(x), with value 1 at 0. Always >= 1.
inline double x_over_tanh(double x) {
    const double ax = std::abs(x);
    if (ax < kSeriesCutoff) {
        const double x2 = ax * ax;
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0;
    }
    if (ax > kAsymptoticCutoff) {
        const double e = std::exp(-2.0 * ax);
        return ax * (1.0 + e) / (1.0 - e);
    }
    return ax / std::tanh(ax);
}

/// sin(a x) / x with the removable singularity filled in.
inline double sin_over_x(double a, double x) {
    const double ax = a * x;
    if (std::abs(ax) < 1e-6) return a * (1.0 - ax * ax / 6.0);
    return std::sin(ax) / x;
}

inline constexpr double inv_sqrt_4pi = 0.28209479177387814347;  // 1/sqrt(4 pi)
inline constexpr double four_over_sqrt_pi = 2.25675833419102514872;

/// Surface area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

} // namespace carnot::special
