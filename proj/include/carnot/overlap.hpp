#pragma once

// Overlap C(h) = |E cap E h^-1| = |{g in E : g o h in E}| of a region with its
// right translate. The heat deficit is 2 Int q_t(h) (|E| - C(h)) dh.

#include <boost/math/special_functions/beta.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "carnot/group.hpp"
#include "carnot/quadrature.hpp"
#include "carnot/regions.hpp"
#include "carnot/special.hpp"

namespace carnot {

namespace detail {

/// Volume of the intersection of two d-balls of radius r whose centres are a apart.
inline double lens_volume(int d, double r, double a) {
    if (a >= 2.0 * r) return 0.0;
    switch (d) {
    case 1: return 2.0 * r - a;
    case 2: return 2.0 * r * r * std::acos(a / (2.0 * r)) - 0.5 * a * std::sqrt(4.0 * r * r - a * a);
    case 3: return std::numbers::pi * (4.0 * r + a) * (2.0 * r - a) * (2.0 * r - a) / 12.0;
    default:
        return special::unit_ball_volume(d) * std::pow(r, d) *
               boost::math::ibeta(0.5 * (d + 1), 0.5, 1.0 - a * a / (4.0 * r * r));
    }
}

/// Orthonormal basis of the complement of a unit vector, as columns.
inline Mat complement_basis(const Vec& u) {
    const int m = static_cast<int>(u.size());
    Eigen::HouseholderQR<Mat> qr(u);
    Mat Qm = qr.householderQ() * Mat::Identity(m, m);
    return Qm.rightCols(m - 1);
}

} // namespace detail

/// Overlap for a vertical cylinder when k = 1. Slicing the lens
/// B(z0, R) cap B(z0 - w, R) orthogonally to e = J^T w/|J^T w| gives
///   C = Int lens_{m-1}(sqrt(R^2 - eta^2), |w|) max(0, L - |c0 + c1 eta|) d eta,
/// c0 = tau + 1/2 <J z0, w>, c1 = 1/2 |J^T w|. For m = 2 the integral is
/// evaluated with exact antiderivatives.
inline double overlap_cylinder_k1(const GroupSpec& G, const VerticalCylinder& E, const double* w, double tau) {
    const int m = G.m();
    const Mat& J = G.J(0);
    const double R = E.R, L = E.b[0] - E.a[0];
    Eigen::Map<const Vec> wv(w, m);
    const double a = wv.norm();
    if (a >= 2.0 * R) return 0.0;
    const double c0 = tau + 0.5 * (J * E.center).dot(wv);
    const double c1 = 0.5 * (J.transpose() * wv).norm();
    if (a <= 1e-300) return special::unit_ball_volume(m) * std::pow(R, m) * std::max(0.0, L - std::abs(tau));
    const double eta_star = std::sqrt(std::max(0.0, R * R - 0.25 * a * a));
    std::array<double, 5> cuts{-eta_star, eta_star, eta_star, eta_star, eta_star};
    int nc = 1;
    if (c1 > 0.0)
        for (double v : {-L, 0.0, L}) {
            const double e = (v - c0) / c1;
            if (e > -eta_star && e < eta_star) cuts[nc++] = e;
        }
    cuts[nc++] = eta_star;
    std::sort(cuts.begin(), cuts.begin() + nc);
    const double R2 = R * R;
    auto A = [&](double e) {
        const double s = std::sqrt(std::max(0.0, R2 - e * e));
        return e * s + R2 * std::asin(std::clamp(e / R, -1.0, 1.0)) - a * e;
    };
    auto Bm = [&](double e) {
        const double s2 = std::max(0.0, R2 - e * e);
        return -(2.0 / 3.0) * s2 * std::sqrt(s2) - 0.5 * a * e * e;
    };
    double total = 0.0;
    for (int s = 0; s + 1 < nc; ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        if (hi <= lo) continue;
        const double mid = 0.5 * (lo + hi);
        const double arg = c0 + c1 * mid;
        if (std::abs(arg) >= L) continue;
        const double sg = arg >= 0.0 ? 1.0 : -1.0;
        const double alpha = L - sg * c0, beta = -sg * c1;
        if (m == 2) {
            total += alpha * (A(hi) - A(lo)) + beta * (Bm(hi) - Bm(lo));
        } else {
            // eta = eta* sin(phi) removes the square-root behaviour at +-eta*
            const double p0 = std::asin(std::clamp(lo / eta_star, -1.0, 1.0));
            const double p1 = std::asin(std::clamp(hi / eta_star, -1.0, 1.0));
            const auto rule = quad::gauss_legendre(p0, p1, 16);
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double e = eta_star * std::sin(rule.x[i]);
                const double r = std::sqrt(std::max(0.0, R2 - e * e));
                total += rule.w[i] * eta_star * std::cos(rule.x[i]) * detail::lens_volume(m - 1, r, a) * (alpha + beta * e);
            }
        }
    }
    return std::max(0.0, total);
}

/// Overlap for a vertical cylinder with k >= 1 by quadrature over the
/// (m-1)-ball orthogonal to w; the sigma factors are products of hat functions.
inline double overlap_cylinder_generic(const GroupSpec& G, const VerticalCylinder& E, const double* w,
                                       const double* tau, int order = 10) {
    const int m = G.m(), k = G.k();
    Eigen::Map<const Vec> wv(w, m);
    const double a = wv.norm(), R = E.R;
    if (a >= 2.0 * R) return 0.0;
    const Vec L = E.b - E.a;
    if (a <= 1e-300) {
        double prod = 1.0;
        for (int l = 0; l < k; ++l) prod *= std::max(0.0, L[l] - std::abs(tau[l]));
        return special::unit_ball_volume(m) * std::pow(R, m) * prod;
    }
    const Vec what = wv / a;
    const Mat basis = detail::complement_basis(what);  // m x (m-1)
    Vec c0(k);
    Mat c1(k, m - 1);
    for (int l = 0; l < k; ++l) {
        c0[l] = tau[l] + 0.5 * (G.J(l) * E.center).dot(wv);
        c1.row(l) = 0.5 * a * (basis.transpose() * (G.J(l).transpose() * what)).transpose();
    }
    const double eta_star = std::sqrt(std::max(0.0, R * R - 0.25 * a * a));
    const int d = m - 1;
    // y = rho * omega, rho = eta* sin(phi), omega on S^(d-1)
    std::vector<quad::Rule1D> rules;
    rules.push_back(quad::composite(0.0, 0.5 * std::numbers::pi, 0.125 * std::numbers::pi, order));
    if (d >= 2)
        for (const auto& [lo, hi] : detail::sphere_domain(d)) rules.push_back(quad::composite(lo, hi, (hi - lo) / 8.0, order));
    double total = 0.0;
    Vec y(d);
    quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double wt) {
        const double rho = eta_star * std::sin(p[0]);
        const double drho = eta_star * std::cos(p[0]);
        double jac = wt * drho;
        if (d == 1) {
            // both signs of the single coordinate
            for (double s : {-1.0, 1.0}) {
                y[0] = s * rho;
                double prod = 2.0 * std::sqrt(std::max(0.0, R * R - rho * rho)) - a;
                for (int l = 0; l < k; ++l) prod *= std::max(0.0, L[l] - std::abs(c0[l] + c1.row(l).dot(y)));
                total += jac * prod;
            }
            return;
        }
        y = rho * detail::sphere_point(p.data() + 1, d);
        jac *= std::pow(rho, d - 1) * detail::sphere_jacobian(p.data() + 1, d);
        double prod = 2.0 * std::sqrt(std::max(0.0, R * R - rho * rho)) - a;
        for (int l = 0; l < k; ++l) prod *= std::max(0.0, L[l] - std::abs(c0[l] + c1.row(l).dot(y)));
        total += jac * prod;
    });
    return std::max(0.0, total);
}

/// Overlap for a coordinate box: z' ranges over a rectangle, the sigma factors
/// are hat functions of affine forms in z'.
inline double overlap_box(const GroupSpec& G, const CoordinateBox& E, const double* w, const double* tau,
                          int order = 8, int panels = 4) {
    const int m = G.m(), k = G.k();
    std::vector<quad::Rule1D> rules;
    for (int i = 0; i < m; ++i) {
        const double lo = std::max(E.lo[i], E.lo[i] - w[i]), hi = std::min(E.hi[i], E.hi[i] - w[i]);
        if (hi <= lo) return 0.0;
        rules.push_back(quad::composite(lo, hi, (hi - lo) / panels, order));
    }
    Eigen::Map<const Vec> wv(w, m);
    Mat Jw(k, m);
    for (int l = 0; l < k; ++l) Jw.row(l) = 0.5 * (G.J(l).transpose() * wv).transpose();
    double total = 0.0;
    Vec z(m);
    quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double wt) {
        for (int i = 0; i < m; ++i) z[i] = p[i];
        double prod = 1.0;
        for (int l = 0; l < k; ++l) {
            const double L = E.hi[m + l] - E.lo[m + l];
            // sigma' + tau + 1/2 <J z', w> must stay in (lo, hi): shift by tau + <J^T w, z'>/2
            prod *= std::max(0.0, L - std::abs(tau[l] + Jw.row(l).dot(z)));
        }
        total += wt * prod;
    });
    return total;
}

/// Overlap for a Euclidean ball by Halton quasi-Monte Carlo over its bounding box.
inline double overlap_ball(const GroupSpec& G, const EuclideanBall& E, const double* w, const double* tau,
                           int points = 2048) {
    const int m = G.m(), k = G.k(), n = m + k;
    GroupPoint h{Eigen::Map<const Vec>(w, m), Eigen::Map<const Vec>(tau, k)};
    int hits = 0;
    GroupPoint g = GroupPoint::identity(m, k);
    for (int i = 1; i <= points; ++i) {
        Vec x(n);
        for (int d = 0; d < n; ++d) x[d] = E.center[d] + E.rho * (2.0 * quad::radical_inverse(i, quad::kPrimes[d]) - 1.0);
        g.z = x.head(m);
        g.sigma = x.tail(k);
        if (!contains(Region(E), g)) continue;
        if (contains(Region(E), multiply(G, g, h))) ++hits;
    }
    return std::pow(2.0 * E.rho, n) * hits / static_cast<double>(points);
}

/// C(h) for h = (w, tau).
inline double overlap(const GroupSpec& G, const Region& E, const double* w, const double* tau) {
    if (const auto* c = std::get_if<VerticalCylinder>(&E)) {
        if (G.k() == 1) return overlap_cylinder_k1(G, *c, w, tau[0]);
        return overlap_cylinder_generic(G, *c, w, tau);
    }
    if (const auto* b = std::get_if<CoordinateBox>(&E)) return overlap_box(G, *b, w, tau);
    if (const auto* s = std::get_if<EuclideanBall>(&E)) return overlap_ball(G, *s, w, tau);
    throw Error(Errc::Unbounded, "overlap of an unbounded region");
}

} // namespace carnot
