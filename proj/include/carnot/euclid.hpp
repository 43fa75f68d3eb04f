#pragma once

// Euclidean reference values: the fractional perimeter of balls, the Davila
// constant, the caloric Besov seminorm and its Gagliardo equivalence, and the
// half-space Ledoux identity. These run through the same curve and
// extrapolation code as the group computations.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "carnot/functionals.hpp"
#include "carnot/overlap.hpp"

namespace carnot {

struct EuclideanSetup {
    int n = 1;
    Region region;
};

inline int region_dimension(const Region& E) {
    return std::visit(
        [](const auto& r) -> int {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, CoordinateBox>) return static_cast<int>(r.lo.size());
            else if constexpr (std::is_same_v<T, EuclideanBall>) return static_cast<int>(r.center.size());
            else if constexpr (std::is_same_v<T, HorizontalHalfSpace>) return static_cast<int>(r.nu.size());
            else return -1;
        },
        E);
}

inline void validate(const EuclideanSetup& S) {
    require(S.n >= 1, Errc::InvalidArgument, "dimension must be >= 1");
    require(!std::holds_alternative<VerticalCylinder>(S.region), Errc::Unsupported,
            "Euclidean regions are balls, boxes or half-spaces");
    validate(S.region);
    require(region_dimension(S.region) == S.n, Errc::DimensionMismatch, "region does not live in R^n");
}

/// Fractional perimeter of the unit ball of R^n.
inline double ps_ball_exact(int n, double s) {
    require(n >= 1, Errc::InvalidArgument, "dimension must be >= 1");
    require(s > 0.0 && s < 0.5, Errc::InvalidArgument, "s must lie in (0, 1/2)");
    using std::tgamma;
    return n * std::pow(std::numbers::pi, n) * tgamma(1.0 - 2.0 * s) /
           (s * tgamma(0.5 * n + 1.0) * tgamma(1.0 - s) * tgamma(0.5 * (n + 2.0 - 2.0 * s)));
}

/// Int_{S^(n-1)} |<e_n, w>| dw.
inline double davila_constant(int n) {
    require(n >= 1, Errc::InvalidArgument, "dimension must be >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * (n - 1)) / std::tgamma(0.5 * (n + 1));
}

/// N_{s,p}(f)^p = equivalence_constant(n, s, p) [f]_{s,p}^p.
inline double equivalence_constant(int n, double s, double p) {
    return std::pow(2.0, s * p) * std::tgamma(0.5 * (n + s * p)) / std::pow(std::numbers::pi, 0.5 * n);
}

struct QuadValue {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

/// Distance from x to the boundary of a convex region along the unit vector w.
inline double exit_distance(const Region& E, const Vec& x, const Vec& w) {
    if (const auto* b = std::get_if<EuclideanBall>(&E)) {
        const Vec y = x - b->center;
        const double yw = y.dot(w);
        return -yw + std::sqrt(std::max(0.0, yw * yw + b->rho * b->rho - y.squaredNorm()));
    }
    const auto& box = std::get<CoordinateBox>(E);
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < x.size(); ++i) {
        if (w[i] > 0.0) d = std::min(d, (box.hi[i] - x[i]) / w[i]);
        else if (w[i] < 0.0) d = std::min(d, (box.lo[i] - x[i]) / w[i]);
    }
    return d;
}

} // namespace detail

namespace detail {

/// Gauss panels halving in width toward the marked ends of [a, b].
inline quad::Rule1D graded_rule(double a, double b, int levels, int order, bool to_a, bool to_b) {
    quad::Rule1D out;
    if (to_a && to_b) {
        const double m = 0.5 * (a + b);
        out = graded_rule(a, m, levels, order, true, false);
        out.append(graded_rule(m, b, levels, order, false, true));
        return out;
    }
    if (!to_a && !to_b) return quad::gauss_legendre(a, b, order);
    double lo = a, hi = b;
    for (int l = 0; l < levels; ++l) {
        if (to_a) {
            const double mid = a + 0.5 * (hi - a);
            out.append(quad::gauss_legendre(mid, hi, order));
            hi = mid;
        } else {
            const double mid = b - 0.5 * (b - lo);
            out.append(quad::gauss_legendre(lo, mid, order));
            lo = mid;
        }
    }
    out.append(quad::gauss_legendre(lo, hi, order));
    return out;
}

} // namespace detail

/// [1_E]_{1, 2s} = Int Int |1_E(x) - 1_E(y)| / |x - y|^(n + 2s) for convex E in
/// dimension n <= 2. In polar coordinates about x the y-integral over E^c is
/// Int_{S^(n-1)} d(x, w)^(-2s) / (2s) dw with d the exit distance, so
///   value = (1/s) Int_E Int_{S^(n-1)} d(x, w)^(-2s) dw dx.
/// Gauss panels are graded toward the boundary in x (parametrised by the
/// distance to it) and toward the directions where d is smallest.
/// Error: change under a lower order plus the change under coarser grading.
inline QuadValue gagliardo_bruteforce(const EuclideanSetup& S, double s, int levels = 80) {
    validate(S);
    require(S.n <= 2, Errc::Unsupported, "brute force Gagliardo integral supports n <= 2");
    require(is_bounded(S.region), Errc::Unbounded, "region must be bounded");
    require(s > 0.0 && s < 0.5, Errc::InvalidArgument, "s must lie in (0, 1/2)");
    require(levels >= 8, Errc::InvalidArgument, "need at least 8 grading levels");
    const auto& E = S.region;
    auto run = [&](int order, int lv) {
        if (S.n == 1) {
            const double L = std::holds_alternative<EuclideanBall>(E) ? 2.0 * std::get<EuclideanBall>(E).rho
                                                                        : std::get<CoordinateBox>(E).hi[0] - std::get<CoordinateBox>(E).lo[0];
            // S^0 = {-1, 1}: the exit distances are u = x - lo and L - u; each
            // half is parametrised by the distance to its own end
            const auto r = detail::graded_rule(0.0, 0.5 * L, lv, order, true, false);
            double acc = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) acc += 2.0 * r.w[i] * (std::pow(r.x[i], -2.0 * s) + std::pow(L - r.x[i], -2.0 * s));
            return acc / s;
        }
        if (const auto* b = std::get_if<EuclideanBall>(&E)) {
            // x at radius r = rho - delta on the first axis; the angular
            // integrand is even and peaks at w = e_1 with width sqrt(delta)
            const double rho = b->rho;
            const auto dr = detail::graded_rule(0.0, rho, lv, order, true, false);
            const auto th = detail::graded_rule(0.0, std::numbers::pi, lv / 2 + 2, order, true, false);
            double acc = 0.0;
            for (std::size_t i = 0; i < dr.size(); ++i) {
                const double delta = dr.x[i], r = rho - delta, q = delta * (2.0 * rho - delta);
                double inner = 0.0;
                for (std::size_t j = 0; j < th.size(); ++j) {
                    const double c = r * std::cos(th.x[j]);
                    const double d = c >= 0.0 ? q / (c + std::sqrt(c * c + q)) : -c + std::sqrt(c * c + q);
                    inner += th.w[j] * std::pow(d, -2.0 * s);
                }
                acc += dr.w[i] * r * 2.0 * inner;
            }
            return 2.0 * std::numbers::pi * acc / s;
        }
        const auto& box = std::get<CoordinateBox>(E);
        const int lx = std::min(lv, 12);  // the 2-d box is the expensive case
        const auto r0 = detail::graded_rule(box.lo[0], box.hi[0], lx, order, true, true);
        const auto r1 = detail::graded_rule(box.lo[1], box.hi[1], lx, order, true, true);
        double acc = 0.0;
        Vec x(2), w(2);
        for (std::size_t i = 0; i < r0.size(); ++i)
            for (std::size_t j = 0; j < r1.size(); ++j) {
                x << r0.x[i], r1.x[j];
                // split at the axis directions (where the peaks sit) and the corners (kinks)
                std::vector<double> cuts{0.0, 0.5 * std::numbers::pi, std::numbers::pi, 1.5 * std::numbers::pi, 2.0 * std::numbers::pi};
                for (double cx : {box.lo[0], box.hi[0]})
                    for (double cy : {box.lo[1], box.hi[1]}) {
                        double a = std::atan2(cy - x[1], cx - x[0]);
                        if (a < 0.0) a += 2.0 * std::numbers::pi;
                        cuts.push_back(a);
                    }
                std::sort(cuts.begin(), cuts.end());
                double inner = 0.0;
                for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                    if (cuts[c + 1] - cuts[c] <= 0.0) continue;
                    auto on_axis = [](double a) {
                        const double q = a / (0.5 * std::numbers::pi);
                        return std::abs(q - std::round(q)) < 1e-12;
                    };
                    const auto th = detail::graded_rule(cuts[c], cuts[c + 1], lx, order, on_axis(cuts[c]), on_axis(cuts[c + 1]));
                    for (std::size_t k = 0; k < th.size(); ++k) {
                        w << std::cos(th.x[k]), std::sin(th.x[k]);
                        inner += th.w[k] * std::pow(detail::exit_distance(E, x, w), -2.0 * s);
                    }
                }
                acc += r0.w[i] * r1.w[j] * inner;
            }
        return acc / s;
    };
    const bool box2 = S.n == 2 && std::holds_alternative<CoordinateBox>(E);
    const int order = box2 ? 8 : 10;
    const int lv = box2 ? 12 : levels;
    QuadValue out;
    out.value = run(order, lv);
    out.error = std::abs(out.value - run(order - 2, lv)) + std::abs(out.value - run(order, lv - 2));
    return out;
}

// ---------------------------------------------------------------------------

/// Deficit of the half-space per unit boundary area, Int_R |P_t 1_H - 1_H|
/// with P_t 1_H(x) = erfc(x / (2 sqrt t)) / 2, integrated numerically.
inline double halfspace_deficit(double t) {
    require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
    boost::math::quadrature::exp_sinh<double> es;
    const double a = 2.0 * std::sqrt(t);
    return a * es.integrate([](double u) { return std::erfc(u); }, 0.0, std::numeric_limits<double>::infinity());
}

/// sqrt(4/t) times the half-space deficit per unit area; the same in every dimension.
inline double halfspace_ledoux(int n, double t) {
    require(n >= 1, Errc::InvalidArgument, "dimension must be >= 1");
    return std::sqrt(4.0 / t) * halfspace_deficit(t);
}

/// Int_{t0}^{t1} t^(-s-1) (2 sqrt t / sqrt pi) dt, the half-space integrand on a window.
inline double halfspace_window_exact(double s, double t0, double t1) {
    const double x = 0.5 - s;
    return 2.0 / std::sqrt(std::numbers::pi) * (std::pow(t1, x) - std::pow(t0, x)) / x;
}

/// The same window integral by Gauss-Legendre in ln t over the numerical deficit.
inline QuadValue halfspace_window(double s, double t0, double t1) {
    require(t0 > 0.0 && t1 > t0, Errc::InvalidArgument, "bad window");
    auto run = [&](int order) {
        const auto r = quad::composite(std::log(t0), std::log(t1), 1.0, order);
        double acc = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double t = std::exp(r.x[i]);
            acc += r.w[i] * std::pow(t, -s) * halfspace_deficit(t);
        }
        return acc;
    };
    const double v = run(10);
    return {v, std::abs(v - run(8))};
}

/// ||P_t 1_E - 1_E||_1 for the Euclidean heat semigroup.
///   box:  2 (|E| - prod_j c(L_j, t)) with the closed form
///         c(L, t) = Int_I P_t 1_I = L erf(L / 2 sqrt t) - 2 sqrt(t / pi)(1 - e^(-L^2 / 4t));
///   ball: 2 Int (|B| - |B cap (B + h)|) G_t(h) dh, a radial integral of the lens volume.
inline DeficitValue euclidean_deficit(const EuclideanSetup& S, double t) {
    validate(S);
    require(is_bounded(S.region), Errc::Unbounded, "use halfspace_deficit for half-spaces");
    require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
    const int n = S.n;
    if (const auto* box = std::get_if<CoordinateBox>(&S.region)) {
        double vol = 1.0, prod = 1.0;
        for (int j = 0; j < n; ++j) {
            const double L = box->hi[j] - box->lo[j];
            const double c = L * std::erf(L / (2.0 * std::sqrt(t))) - 2.0 * std::sqrt(t / std::numbers::pi) * -std::expm1(-L * L / (4.0 * t));
            vol *= L;
            prod *= c;
        }
        return {2.0 * (vol - prod), 1e-15 * vol};
    }
    const auto& b = std::get<EuclideanBall>(S.region);
    const double vol = special::unit_ball_volume(n) * std::pow(b.rho, n);
    const double R = 2.0 * b.rho;
    const double st = std::sqrt(t);
    auto run = [&](int order) {
        const double hi = std::min(R, 20.0 * st);
        const auto r = quad::composite(0.0, hi, std::min(0.5 * st, 0.05), order);
        double acc = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double h = r.x[i];
            acc += r.w[i] * (vol - detail::lens_volume(n, b.rho, h)) * special::unit_sphere_area(n) * std::pow(h, n - 1) *
                   std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-h * h / (4.0 * t));
        }
        // beyond 2 rho the translate is disjoint
        if (hi >= R) acc += vol * boost::math::gamma_q(0.5 * n, R * R / (4.0 * t));
        return 2.0 * acc;
    };
    const double v = run(10);
    return {v, std::abs(v - run(8)) + 1e-15 * vol};
}

/// Uniform log-grid used for the Euclidean curves: wide enough that the head
/// and tail models carry no visible error.
inline std::vector<double> euclidean_grid(const QuadratureBudget& b = {}) { return log_grid(1e-6, 1e4, b.t_ratio); }

inline DeficitCurve euclidean_curve(const EuclideanSetup& S, const std::vector<double>& ts) {
    DeficitCurve c;
    c.volume = volume(S.region);
    for (double t : ts) {
        const auto d = euclidean_deficit(S, t);
        c.t.push_back(t);
        c.deficit.push_back(d.value);
        c.error.push_back(d.error);
    }
    return c;
}

/// N_{2s,1}(1_E) = Int_0^inf t^(-s-1) ||P_t 1_E - 1_E||_1 dt.
inline SPerimeter taibleson_indicator(const EuclideanSetup& S, double s, const QuadratureBudget& budget = {}) {
    require(s > 0.0 && s < 0.5, Errc::InvalidArgument, "s must lie in (0, 1/2)");
    return s_perimeter(euclidean_curve(S, euclidean_grid(budget)), s);
}

/// (1 - 2s) N_{2s,1}(1_E) for E = (-1, 1), extrapolated to s = 1/2.
inline ConvergenceReport dav2_check(const std::vector<double>& s_grid = {0.40, 0.44, 0.47, 0.49},
                                    const QuadratureBudget& budget = {}) {
    const EuclideanSetup S{1, EuclideanBall{Vec::Zero(1), 1.0}};
    return bbm_limit(euclidean_curve(S, euclidean_grid(budget)), s_grid, special::four_over_sqrt_pi * 2.0);
}

/// The same sequence from the closed-form ball perimeter and the equivalence constant.
inline ConvergenceReport dav2_closed_form(const std::vector<double>& s_grid = {0.40, 0.44, 0.47, 0.49}) {
    require(s_grid.size() >= 3, Errc::TooFewGridPoints, "need at least three s values");
    ConvergenceReport r;
    r.parameter = "s";
    r.target = special::four_over_sqrt_pi * 2.0;
    std::vector<double> x;
    for (double s : s_grid) {
        r.grid.push_back(s);
        r.values.push_back((1.0 - 2.0 * s) * equivalence_constant(1, 2.0 * s, 1.0) * ps_ball_exact(1, s));
        r.errors.push_back(0.0);
        x.push_back(0.5 - s);
    }
    extrapolate(r, x);
    return r;
}

// ---------------------------------------------------------------------------

struct EquivalenceResult {
    double lhs = 0.0;        // N_{s,p}(f)^p through the heat semigroup
    double rhs = 0.0;        // constant * [f]_{s,p}^p
    double deviation = 0.0;  // |lhs / rhs - 1|
    double error = 0.0;      // estimated relative quadrature error
};

/// Both sides of N_{s,p}(f)^p = c(n, s, p) [f]_{s,p}^p for f supported in a box,
/// n <= 2. With A(r) = Int_{S^(n-1)} Int |f(x + r w) - f(x)|^p dx dw:
///   [f]^p = Int_0^inf r^(-1-sp) A(r) dr,
///   N^p   = Int_0^inf t^(-sp/2-1) Int_0^inf (4 pi t)^(-n/2) e^(-r^2/4t) r^(n-1) A(r) dr dt,
/// the second evaluated as a t-integral of the heat-smoothed difference.
inline EquivalenceResult equivalence_check(int n, const std::function<double(const Vec&)>& f, const CoordinateBox& support,
                                           double s, double p, const QuadratureBudget& budget = {}) {
    require(n == 1 || n == 2, Errc::Unsupported, "equivalence check supports n <= 2");
    require(support.lo.size() == n && support.hi.size() == n, Errc::DimensionMismatch, "support must be a box in R^n");
    require(p >= 1.0, Errc::InvalidArgument, "p must be >= 1");
    require(s > 0.0 && s < 1.0, Errc::InvalidArgument, "s must lie in (0, 1)");
    (void)budget;
    const double diam = (support.hi - support.lo).norm();
    const int xo = 8;
    const double xpanel = n == 1 ? 0.02 : 0.125;

    // Int |f(x + h) - f(x)|^p dx on the union of the support and its shift
    auto delta = [&](const Vec& h) {
        std::vector<quad::Rule1D> rules;
        for (int j = 0; j < n; ++j) {
            std::vector<double> br{support.lo[j], support.hi[j], support.lo[j] - h[j], support.hi[j] - h[j]};
            std::sort(br.begin(), br.end());
            quad::Rule1D r;
            for (std::size_t i = 0; i + 1 < br.size(); ++i) {
                if (br[i + 1] - br[i] < 1e-15) continue;
                const auto piece = quad::composite(br[i], br[i + 1], xpanel, xo);
                r.x.insert(r.x.end(), piece.x.begin(), piece.x.end());
                r.w.insert(r.w.end(), piece.w.begin(), piece.w.end());
            }
            rules.push_back(std::move(r));
        }
        double acc = 0.0;
        Vec x(n), xh(n);
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> pt, double w) {
            for (int j = 0; j < n; ++j) x[j] = pt[j], xh[j] = pt[j] + h[j];
            auto inside = [&](const Vec& y) {
                for (int j = 0; j < n; ++j)
                    if (y[j] <= support.lo[j] || y[j] >= support.hi[j]) return 0.0;
                return f(y);
            };
            acc += w * std::pow(std::abs(inside(xh) - inside(x)), p);
        });
        return acc;
    };
    const int nang = 12;
    auto A = [&](double r) {
        if (n == 1) return 2.0 * delta(Vec::Constant(1, r));  // Delta(h) = Delta(-h)
        double acc = 0.0;
        for (int a = 0; a < nang; ++a) {  // half circle, same symmetry
            const double th = std::numbers::pi * (a + 0.5) / nang;
            Vec h(2);
            h << r * std::cos(th), r * std::sin(th);
            acc += delta(h);
        }
        return 2.0 * std::numbers::pi * acc / nang;
    };
    // ||f||_p^p; A(r) = |S^(n-1)| 2 ||f||_p^p once r exceeds the diameter
    double norm_p = 0.0;
    {
        std::vector<quad::Rule1D> rules;
        for (int j = 0; j < n; ++j) rules.push_back(quad::composite(support.lo[j], support.hi[j], xpanel, xo));
        Vec x(n);
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> pt, double w) {
            for (int j = 0; j < n; ++j) x[j] = pt[j];
            norm_p += w * std::pow(std::abs(f(x)), p);
        });
    }
    const double A_inf = special::unit_sphere_area(n) * 2.0 * norm_p;

    // r-rule: geometric panels near 0, then uniform up to the diameter
    const double r_min = n == 1 ? 1e-8 : 1e-5, r_geo = 1.0 / 64.0;
    auto r_rule = [&](int order) {
        quad::Rule1D r;
        for (double a = r_min; a < r_geo; a *= 2.0) {
            const auto piece = quad::gauss_legendre(a, std::min(2.0 * a, r_geo), order);
            r.x.insert(r.x.end(), piece.x.begin(), piece.x.end());
            r.w.insert(r.w.end(), piece.w.begin(), piece.w.end());
        }
        const auto rest = quad::composite(r_geo, diam, n == 1 ? 0.05 : 0.1, order);
        r.x.insert(r.x.end(), rest.x.begin(), rest.x.end());
        r.w.insert(r.w.end(), rest.w.begin(), rest.w.end());
        return r;
    };
    const double sp = s * p;
    auto both = [&](int order, double& lhs, double& rhs) {
        const auto rr = r_rule(order);
        std::vector<double> Ar(rr.size());
        for (std::size_t i = 0; i < rr.size(); ++i) Ar[i] = A(rr.x[i]);
        const double A0 = A(r_min);
        // Gagliardo side: A ~ r^p below r_min, constant beyond the diameter
        rhs = A0 * std::pow(r_min, -sp) / (p - sp) + A_inf * std::pow(diam, -sp) / sp;
        for (std::size_t i = 0; i < rr.size(); ++i) rhs += rr.w[i] * std::pow(rr.x[i], -1.0 - sp) * Ar[i];
        // heat side
        auto I = [&](double t) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rr.size(); ++i)
                acc += rr.w[i] * std::exp(-rr.x[i] * rr.x[i] / (4.0 * t)) * std::pow(rr.x[i], n - 1) * Ar[i];
            acc *= std::pow(4.0 * std::numbers::pi * t, -0.5 * n);
            return acc + 2.0 * norm_p * boost::math::gamma_q(0.5 * n, diam * diam / (4.0 * t));
        };
        const double t0 = 1e-10, t1 = 1e10;
        const auto tr = quad::composite(std::log(t0), std::log(t1), 0.5, order);
        lhs = I(t0) * std::pow(t0, -0.5 * sp) / (0.5 * (p - sp)) + I(t1) * std::pow(t1, -0.5 * sp) / (0.5 * sp);
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double t = std::exp(tr.x[i]);
            lhs += tr.w[i] * std::pow(t, -0.5 * sp) * I(t);
        }
        rhs *= equivalence_constant(n, s, p);
    };
    EquivalenceResult out;
    both(10, out.lhs, out.rhs);
    double l2 = 0.0, r2 = 0.0;
    both(8, l2, r2);
    if (out.rhs == 0.0) return out;
    out.deviation = std::abs(out.lhs / out.rhs - 1.0);
    out.error = std::abs(l2 - out.lhs) / std::abs(out.lhs) + std::abs(r2 - out.rhs) / std::abs(out.rhs);
    return out;
}

/// Product of cosine windows cos^2(pi x_j / 2) on [-1, 1]^n.
inline double cosine_bump(const Vec& x) {
    double v = 1.0;
    for (int j = 0; j < x.size(); ++j) {
        if (std::abs(x[j]) >= 1.0) return 0.0;
        const double c = std::cos(0.5 * std::numbers::pi * x[j]);
        v *= c * c;
    }
    return v;
}

} // namespace carnot
