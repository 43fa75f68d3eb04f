#pragma once

// Heat deficit ||P_t 1_E - 1_E||_1, the Ledoux functional, the nonlocal
// s-perimeter and the small-parameter experiments built on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "carnot/overlap.hpp"
#include "carnot/semigroup.hpp"

namespace carnot {

struct DeficitValue {
    double value = 0.0;
    double error = 0.0;
};

/// Deficit samples on an ascending t-grid.
struct DeficitCurve {
    std::vector<double> t, deficit, error;
    double volume = 0.0;

    std::size_t size() const { return t.size(); }
    double ledoux(std::size_t i) const { return std::sqrt(4.0 / t[i]) * deficit[i]; }
};

struct ConvergenceReport {
    std::string parameter;             // name of the grid variable
    std::vector<double> grid, values, errors;
    std::vector<double> coefficients;  // fit in the extrapolation variable, constant term first
    double limit = 0.0;
    double limit_error = 0.0;          // propagated + residual
    double propagated_error = 0.0;
    double residual = 0.0;             // RMS of fit residuals
    double target = std::numeric_limits<double>::quiet_NaN();
    double deviation = std::numeric_limits<double>::quiet_NaN();  // |limit - target| / target
};

/// Geometric grid from t_min to t_max with ratio close to `ratio` and an
/// interval count divisible by 4 (so Simpson on every second point is defined).
inline std::vector<double> log_grid(double t_min, double t_max, double ratio) {
    require(t_min > 0.0 && t_max > t_min && ratio > 1.0, Errc::InvalidArgument, "bad t-grid");
    int n = static_cast<int>(std::ceil(std::log(t_max / t_min) / std::log(ratio)));
    n = std::max(4, (n + 3) / 4 * 4);
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / n);
    t.back() = t_max;
    return t;
}

inline std::vector<double> log_grid(const QuadratureBudget& b) { return log_grid(b.t_min, b.t_max, b.t_ratio); }

/// Deficit through the overlap function: by stochastic completeness and the
/// symmetry of the kernel,
///   ||P_t 1_E - 1_E||_1 = 2 (|E| - Int_E P_t 1_E) = 2 Int q_t(h) (|E| - C(h)) dh.
/// The error combines the difference to the coarser measure (or the sampling
/// error) with the measure's missing mass.
inline DeficitValue heat_deficit(const HeatSemigroup& S, const Region& E, double t) {
    const auto& G = S.group();
    check_region(G, E);
    require(is_bounded(E), Errc::Unbounded, "heat deficit needs a bounded region");
    require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
    const double vol = volume(E);
    const int m = G.m(), k = G.k();
    const double st = std::sqrt(t);
    auto run = [&](const HeatMeasure& mu, double& err) {
        const auto res = integrate(mu, S.budget().workers, [&](std::size_t i) {
            const double* u = mu.node(i);
            double w[16], tau[4];
            for (int d = 0; d < m; ++d) w[d] = st * u[d];
            for (int l = 0; l < k; ++l) tau[l] = t * u[m + l];
            return vol - overlap(G, E, w, tau);
        });
        const double eps = 1.0 - mu.mass();
        // missing mass sits where the overlap is somewhere in [0, |E|]
        err = 2.0 * res.error + std::abs(eps) * vol;
        return 2.0 * res.value + eps * vol;
    };
    DeficitValue out;
    double err = 0.0;
    out.value = run(S.measure(0), err);
    out.error = err;
    if (!S.measure(0).sampled()) {
        double err2 = 0.0;
        const double coarse = run(S.measure(-1), err2);
        out.error += std::abs(out.value - coarse);
    }
    return out;
}

inline DeficitCurve deficit_curve(const HeatSemigroup& S, const Region& E, const std::vector<double>& ts) {
    require(!ts.empty() && std::is_sorted(ts.begin(), ts.end()), Errc::InvalidArgument, "t-grid must ascend");
    DeficitCurve c;
    c.volume = volume(E);
    for (double t : ts) {
        const auto d = heat_deficit(S, E, t);
        c.t.push_back(t);
        c.deficit.push_back(d.value);
        c.error.push_back(d.error);
    }
    return c;
}

inline DeficitCurve deficit_curve(const HeatSemigroup& S, const Region& E) { return deficit_curve(S, E, log_grid(S.budget())); }

/// sqrt(4/t) ||P_t 1_E - 1_E||_1.
inline DeficitValue ledoux(const HeatSemigroup& S, const Region& E, double t) {
    auto d = heat_deficit(S, E, t);
    const double f = std::sqrt(4.0 / t);
    return {f * d.value, f * d.error};
}

// ---------------------------------------------------------------------------
// Direct evaluation of the deficit as Int_E P_t 1_{E^c} + Int_{E^c} P_t 1_E,
// restricted to a collar around the boundary.

struct CollarResult {
    double value = 0.0;
    double error = 0.0;
    double neglected = 0.0;  // estimated mass outside the collar
};

/// Collar integration for a vertical cylinder centred on the sigma axis of an
/// H-type group with m = 2, k = 1. Rotations about the axis are automorphisms
/// fixing the cylinder, so the outer integral runs over (r, sigma).
inline CollarResult heat_deficit_collar(const HeatSemigroup& S, const VerticalCylinder& cyl, double t, int order = 6) {
    const auto& G = S.group();
    require(S.has_profile(), Errc::Unsupported, "collar route needs an H-type group with m = 2, k = 1");
    require(cyl.center.norm() == 0.0, Errc::Unsupported, "collar route needs a cylinder centred on the axis");
    const Region E = cyl;
    check_region(G, E);
    const double c = S.budget().collar_c;
    const double st = std::sqrt(t);
    const double a = cyl.a[0], b = cyl.b[0], R = cyl.R;
    const double Jn = G.J(0).norm() / std::sqrt(2.0);  // operator norm for an H-type J
    const double wz = c * std::sqrt(2.0 * t) + c * t;
    const double ws = 0.5 * Jn * (R + wz) * c * std::sqrt(2.0 * t) + c * t;
    const double r_lo = std::max(0.0, R - wz), r_hi = R + wz;
    const double s_lo = a - ws, s_hi = b + ws;

    auto panels = [&](double lo, double hi, std::vector<double> marks, double fine) {
        // width `fine` within 2 fine-widths of the marks, four times that elsewhere
        std::vector<double> cuts{lo, hi};
        for (double x : marks)
            for (double d : {-2.0 * fine, 0.0, 2.0 * fine})
                if (x + d > lo && x + d < hi) cuts.push_back(x + d);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        quad::Rule1D rule;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
            bool near = false;
            for (double x : marks) near = near || std::abs(mid - x) < 2.0 * fine;
            rule.append(quad::composite(cuts[i], cuts[i + 1], near ? fine : 4.0 * fine, order));
        }
        return rule;
    };
    const auto rr = panels(r_lo, r_hi, {R}, 0.5 * st);
    const auto sr = panels(s_lo, s_hi, {a, b}, 0.5 * std::min(st, t + 0.5 * Jn * R * st));

    // g with |z| < R - wz and sigma inside (a + ws, b - ws) contributes below the collar tolerance
    std::vector<double> col(sr.size() * rr.size(), 0.0);
    par::for_blocks(rr.size(), S.budget().workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double r = rr.x[i];
            for (std::size_t j = 0; j < sr.size(); ++j) {
                GroupPoint g{Vec(2), Vec(1)};
                g.z << r, 0.0;
                g.sigma << sr.x[j];
                const bool in = contains(E, g);
                const auto v = indicator_planar(S, E, g, t, in, order);
                col[i * sr.size() + j] = v.value;
            }
        }
    });
    CollarResult out;
    double acc = 0.0;
    for (std::size_t i = 0; i < rr.size(); ++i)
        for (std::size_t j = 0; j < sr.size(); ++j) acc += 2.0 * std::numbers::pi * rr.x[i] * rr.w[i] * sr.w[j] * col[i * sr.size() + j];
    out.value = acc;
    // Gaussian tail of the z-marginal beyond the collar, per unit boundary area
    const double area = 2.0 * std::numbers::pi * R * (b - a) + 2.0 * std::numbers::pi * R * R;
    out.neglected = area * 2.0 * st * std::exp(-wz * wz / (4.0 * t));
    // embedded lower-order rule: reuse nodes by re-weighting is not possible for
    // Gauss rules, so estimate from the inner rule difference at a few nodes
    double inner = 0.0;
    for (std::size_t i = 0; i < rr.size(); i += std::max<std::size_t>(1, rr.size() / 8)) {
        for (std::size_t j = 0; j < sr.size(); j += std::max<std::size_t>(1, sr.size() / 8)) {
            GroupPoint g{Vec(2), Vec(1)};
            g.z << rr.x[i], 0.0;
            g.sigma << sr.x[j];
            const auto v = indicator_planar(S, E, g, t, contains(E, g), order - 2);
            inner = std::max(inner, std::abs(v.value - col[i * sr.size() + j]));
        }
    }
    out.error = inner * 2.0 * std::numbers::pi * r_hi * (r_hi - r_lo) * (s_hi - s_lo) + out.neglected;
    return out;
}

// ---------------------------------------------------------------------------

/// Small-time model of the deficit below t_min.
enum class HeadModel {
    LedouxAtTmin,  // D(t) = (sqrt t / 2) L(t_min)
    SqrtAffine,    // D(t) = (sqrt t / 2)(a + b sqrt t), fitted to the first three points
};

struct SPerimeter {
    double value = 0.0;
    double error = 0.0;
    double head = 0.0, body = 0.0, tail = 0.0;
    double head_error = 0.0, body_error = 0.0, tail_error = 0.0;
};

namespace detail {

inline bool uniform_in_log(const std::vector<double>& t) {
    if (t.size() < 3) return false;
    const double h = std::log(t[1] / t[0]);
    for (std::size_t i = 1; i + 1 < t.size(); ++i)
        if (std::abs(std::log(t[i + 1] / t[i]) - h) > 1e-9 * std::max(1.0, h)) return false;
    return true;
}

/// Least-squares polynomial fit y ~ sum_j c_j x^j. Returns coefficients and the
/// weights of the constant term in terms of the data.
inline std::pair<Vec, Vec> poly_fit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const int n = static_cast<int>(x.size());
    Mat X(n, degree + 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= degree; ++j) X(i, j) = std::pow(x[i], j);
    Vec Y = Eigen::Map<const Vec>(y.data(), n);
    const Mat pinv = X.completeOrthogonalDecomposition().pseudoInverse();
    return {pinv * Y, pinv.row(0).transpose()};
}

} // namespace detail

/// Int_0^inf t^(-1-s) D(t) dt from a deficit curve on a uniform log-grid.
/// Body: Simpson in ln t, error |S_h - S_2h| plus propagated deficit errors.
/// Head: D(t) = (sqrt t / 2) L with L the Ledoux value at t_min; its error is
/// the change when L is replaced by an affine-in-sqrt(t) fit of the first points.
/// Tail: D between D(t_max) and 2|E|; midpoint with half-range error.
inline SPerimeter s_perimeter(const DeficitCurve& c, double s, HeadModel model = HeadModel::LedouxAtTmin) {
    require(s > 0.0 && s < 0.5, Errc::InvalidArgument, "s must lie in (0, 1/2)");
    require(c.size() >= 5 && detail::uniform_in_log(c.t), Errc::InsufficientCurve, "curve must be a uniform log-grid");
    require((c.size() - 1) % 2 == 0, Errc::InsufficientCurve, "curve needs an even number of intervals");
    const std::size_t n = c.size();
    const double h = std::log(c.t[1] / c.t[0]);
    std::vector<double> y(n), y2;
    double prop = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::pow(c.t[i], -s) * c.deficit[i];
        const double w = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        prop += w * h / 3.0 * std::pow(c.t[i], -s) * c.error[i];
    }
    for (std::size_t i = 0; i < n; i += 2) y2.push_back(y[i]);
    SPerimeter out;
    out.body = quad::simpson(y, h);
    const double coarse = quad::simpson(y2, 2.0 * h);
    out.body_error = std::abs(out.body - coarse) + prop;

    const double t0 = c.t[0];
    const double L0 = c.ledoux(0);
    const double x = 0.5 - s;
    const double constant_head = 0.5 * L0 * std::pow(t0, x) / x;
    {
        std::vector<double> sx, ly;
        for (std::size_t i = 0; i < 3; ++i) {
            sx.push_back(std::sqrt(c.t[i]));
            ly.push_back(c.ledoux(i));
        }
        const auto [coef, unused] = detail::poly_fit(sx, ly, 1);
        (void)unused;
        // D = (a/2) sqrt t + (b/2) t
        const double affine_head = 0.5 * coef[0] * std::pow(t0, x) / x + 0.5 * coef[1] * std::pow(t0, 1.0 - s) / (1.0 - s);
        out.head = model == HeadModel::LedouxAtTmin ? constant_head : affine_head;
        out.head_error = std::abs(constant_head - affine_head) + std::sqrt(4.0 / t0) * c.error[0] * 0.5 * std::pow(t0, x) / x;
    }
    const double tm = c.t.back();
    const double lo = c.deficit.back() * std::pow(tm, -s) / s, hi = 2.0 * c.volume * std::pow(tm, -s) / s;
    out.tail = 0.5 * (lo + hi);
    out.tail_error = 0.5 * std::abs(hi - lo);
    out.value = out.head + out.body + out.tail;
    out.error = out.head_error + out.body_error + out.tail_error;
    return out;
}

inline SPerimeter s_perimeter(const HeatSemigroup& S, const Region& E, double s) {
    require(s > 0.0 && s < 0.5, Errc::InvalidArgument, "s must lie in (0, 1/2)");
    return s_perimeter(deficit_curve(S, E), s);
}

/// Polynomial extrapolation of values to x = 0 (affine, quadratic from five points).
inline void extrapolate(ConvergenceReport& r, const std::vector<double>& x) {
    const int degree = r.grid.size() >= 5 ? 2 : 1;
    const auto [coef, c0] = detail::poly_fit(x, r.values, degree);
    r.coefficients.assign(coef.data(), coef.data() + coef.size());
    r.limit = coef[0];
    double prop = 0.0, res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        prop += c0[i] * c0[i] * r.errors[i] * r.errors[i];
        double fit = 0.0;
        for (int j = 0; j <= degree; ++j) fit += coef[j] * std::pow(x[i], j);
        res += (r.values[i] - fit) * (r.values[i] - fit);
    }
    r.propagated_error = std::sqrt(prop);
    r.residual = std::sqrt(res / x.size());
    r.limit_error = r.propagated_error + r.residual;
    if (std::isfinite(r.target) && r.target != 0.0) r.deviation = std::abs(r.limit - r.target) / std::abs(r.target);
}

/// Values (1 - 2s) P_{H,s}(E) over s_grid, extrapolated to s = 1/2 in (1/2 - s).
inline ConvergenceReport bbm_limit(const DeficitCurve& c, const std::vector<double>& s_grid,
                                   double target = std::numeric_limits<double>::quiet_NaN(),
                                   HeadModel model = HeadModel::LedouxAtTmin) {
    require(s_grid.size() >= 3, Errc::TooFewGridPoints, "bbm_limit needs at least three s values");
    for (std::size_t i = 0; i + 1 < s_grid.size(); ++i)
        require(s_grid[i] != s_grid[i + 1], Errc::InvalidArgument, "s_grid must be strictly monotone");
    const bool up = s_grid[1] > s_grid[0];
    for (std::size_t i = 0; i + 1 < s_grid.size(); ++i)
        require((s_grid[i + 1] > s_grid[i]) == up, Errc::InvalidArgument, "s_grid must be strictly monotone");
    ConvergenceReport r;
    r.parameter = "s";
    r.target = target;
    std::vector<double> x;
    for (double s : s_grid) {
        const auto sp = s_perimeter(c, s, model);
        r.grid.push_back(s);
        r.values.push_back((1.0 - 2.0 * s) * sp.value);
        r.errors.push_back((1.0 - 2.0 * s) * sp.error);
        x.push_back(0.5 - s);
    }
    extrapolate(r, x);
    return r;
}

inline ConvergenceReport bbm_limit(const HeatSemigroup& S, const Region& E, const std::vector<double>& s_grid) {
    require(s_grid.size() >= 3, Errc::TooFewGridPoints, "bbm_limit needs at least three s values");
    const auto per = horizontal_perimeter(S.group(), E, S.budget());
    return bbm_limit(deficit_curve(S, E), s_grid, special::four_over_sqrt_pi * per.value);
}

/// Ledoux values at the given times, extrapolated affinely in sqrt(t).
inline ConvergenceReport ledoux_plateau(const DeficitCurve& c, double target = std::numeric_limits<double>::quiet_NaN()) {
    require(c.size() >= 3, Errc::TooFewGridPoints, "plateau fit needs at least three times");
    ConvergenceReport r;
    r.parameter = "t";
    r.target = target;
    std::vector<double> x;
    for (std::size_t i = 0; i < c.size(); ++i) {
        r.grid.push_back(c.t[i]);
        r.values.push_back(c.ledoux(i));
        r.errors.push_back(std::sqrt(4.0 / c.t[i]) * c.error[i]);
        x.push_back(std::sqrt(c.t[i]));
    }
    const int degree = 1;
    const auto [coef, c0] = detail::poly_fit(x, r.values, degree);
    r.coefficients.assign(coef.data(), coef.data() + coef.size());
    r.limit = coef[0];
    double prop = 0.0, res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        prop += c0[i] * c0[i] * r.errors[i] * r.errors[i];
        const double fit = coef[0] + coef[1] * x[i];
        res += (r.values[i] - fit) * (r.values[i] - fit);
    }
    r.propagated_error = std::sqrt(prop);
    r.residual = std::sqrt(res / x.size());
    // a three-point affine fit has one residual degree of freedom; scale the
    // residual by the sensitivity of the intercept
    r.limit_error = r.propagated_error + r.residual * c0.norm() * std::sqrt(static_cast<double>(x.size()));
    if (std::isfinite(target) && target != 0.0) r.deviation = std::abs(r.limit - target) / std::abs(target);
    return r;
}

inline ConvergenceReport ledoux_plateau(const HeatSemigroup& S, const Region& E, const std::vector<double>& ts) {
    const auto per = horizontal_perimeter(S.group(), E, S.budget());
    return ledoux_plateau(deficit_curve(S, E, ts), special::four_over_sqrt_pi * per.value);
}

struct BoundCheck {
    double margin = 0.0;  // RHS - LHS
    double error = 0.0;
    double lhs = 0.0, rhs = 0.0;
    double sup = 0.0;     // sup over curve points below eps of t^-1/2 D(t)
};

/// Upper bound for P_{H,s}(E) in terms of the small-time deficit:
///   (1/2 - s)^-1 sup_{t < eps} t^-1/2 D(t) eps^(1/2 - s) + (2|E|/s) eps^-s.
inline BoundCheck check_upper_bound_ve(const DeficitCurve& c, double s, double eps) {
    require(s > 0.0 && s < 0.5, Errc::InvalidArgument, "s must lie in (0, 1/2)");
    require(c.size() > 0 && eps > c.t.front(), Errc::InsufficientCurve, "no curve points below eps");
    require(eps <= c.t.back(), Errc::InsufficientCurve, "eps beyond the last curve point");
    BoundCheck out;
    double sup_err = 0.0;
    for (std::size_t i = 0; i < c.size() && c.t[i] < eps; ++i) {
        const double v = c.deficit[i] / std::sqrt(c.t[i]);
        if (v > out.sup) {
            out.sup = v;
            sup_err = c.error[i] / std::sqrt(c.t[i]);
        }
    }
    const auto sp = s_perimeter(c, s);
    const double x = 0.5 - s;
    out.lhs = sp.value;
    out.rhs = out.sup * std::pow(eps, x) / x + 2.0 * c.volume * std::pow(eps, -s) / s;
    out.margin = out.rhs - out.lhs;
    out.error = sp.error + sup_err * std::pow(eps, x) / x;
    return out;
}

inline BoundCheck check_upper_bound_ve(const HeatSemigroup& S, const Region& E, double s, double eps) {
    return check_upper_bound_ve(deficit_curve(S, E), s, eps);
}

struct SandwichReport {
    ConvergenceReport bbm, plateau;
    double difference = 0.0;
    double combined_error = 0.0;
    bool agree = false;
};

/// The BBM extrapolation and the small-time Ledoux plateau estimate the same
/// quantity; report both with the combined error.
inline SandwichReport sandwich_diagnostic(const DeficitCurve& c, const std::vector<double>& s_grid, std::size_t plateau_points = 3,
                                          double target = std::numeric_limits<double>::quiet_NaN()) {
    SandwichReport r;
    r.bbm = bbm_limit(c, s_grid, target);
    DeficitCurve head;
    head.volume = c.volume;
    for (std::size_t i = 0; i < std::min(plateau_points, c.size()); ++i) {
        head.t.push_back(c.t[i]);
        head.deficit.push_back(c.deficit[i]);
        head.error.push_back(c.error[i]);
    }
    r.plateau = ledoux_plateau(head, target);
    r.difference = std::abs(r.bbm.limit - r.plateau.limit);
    r.combined_error = r.bbm.limit_error + r.plateau.limit_error;
    r.agree = r.difference <= r.combined_error;
    return r;
}

inline SandwichReport sandwich_diagnostic(const HeatSemigroup& S, const Region& E,
                                          const std::vector<double>& s_grid = {0.40, 0.44, 0.47, 0.49}) {
    const auto per = horizontal_perimeter(S.group(), E, S.budget());
    return sandwich_diagnostic(deficit_curve(S, E), s_grid, 3, special::four_over_sqrt_pi * per.value);
}

// ---------------------------------------------------------------------------

struct SeminormResult {
    double value = 0.0;
    double error = 0.0;
};

/// N_{s,p}(f)^p = Int_0^inf t^(-sp/2-1) Int Int p_t(g, g') |f(g') - f(g)|^p dg' dg dt
/// for f supported in the bounded region `support`. Inner integrals by
/// quasi-Monte Carlo in g over the support's bounding box and a sampled heat
/// measure in h = g^-1 g'; points leaving the support contribute |f(g)|^p.
inline SeminormResult besov_seminorm(const HeatSemigroup& S, const std::function<double(const GroupPoint&)>& f,
                                     const Region& support, double s, double p, std::size_t g_points = 512,
                                     std::size_t h_points = 2048) {
    require(p >= 1.0, Errc::InvalidArgument, "p must be >= 1");
    require(s > 0.0 && s < 1.0, Errc::InvalidArgument, "s must lie in (0, 1)");
    const auto& G = S.group();
    check_region(G, support);
    require(is_bounded(support), Errc::Unbounded, "support must be bounded");
    const int m = G.m(), k = G.k(), n = m + k;
    // bounding box of the support
    Vec lo(n), hi(n);
    if (const auto* c = std::get_if<VerticalCylinder>(&support)) {
        lo << (c->center.array() - c->R).matrix(), c->a;
        hi << (c->center.array() + c->R).matrix(), c->b;
    } else if (const auto* b = std::get_if<CoordinateBox>(&support)) {
        lo = b->lo;
        hi = b->hi;
    } else {
        const auto& e = std::get<EuclideanBall>(support);
        lo = (e.center.array() - e.rho).matrix();
        hi = (e.center.array() + e.rho).matrix();
    }
    const double box = (hi - lo).prod();
    std::vector<GroupPoint> gs;
    std::vector<double> fg;
    for (std::size_t i = 1; i <= g_points; ++i) {
        GroupPoint g{Vec(m), Vec(k)};
        for (int d = 0; d < n; ++d) {
            const double u = quad::radical_inverse(i, quad::kPrimes[d]);
            (d < m ? g.z[d] : g.sigma[d - m]) = lo[d] + (hi[d] - lo[d]) * u;
        }
        if (!contains(support, g)) continue;
        gs.push_back(g);
        fg.push_back(f(g));
    }
    const double cell = box / static_cast<double>(g_points);
    double norm_p = 0.0;
    for (double v : fg) norm_p += cell * std::pow(std::abs(v), p);
    if (norm_p == 0.0) return {0.0, 0.0};
    const HeatMeasure mu = sampled_heat_measure(S.kernel(), h_points, 0x42455356);
    const auto ts = log_grid(S.budget());
    DeficitCurve curve;  // I(t) in place of the deficit
    curve.volume = 0.5 * norm_p;  // so that 2|E| becomes 2 ||f||_p^p
    for (double t : ts) {
        const double st = std::sqrt(t);
        const auto res = integrate(mu, S.budget().workers, [&](std::size_t i) {
            const double* u = mu.node(i);
            GroupPoint h{Eigen::Map<const Vec>(u, m) * st, Eigen::Map<const Vec>(u + m, k) * t};
            double acc = 0.0;
            for (std::size_t a = 0; a < gs.size(); ++a) {
                const GroupPoint gp = multiply(G, gs[a], h);
                const double fp = contains(support, gp) ? f(gp) : 0.0;
                acc += std::pow(std::abs(fp - fg[a]), p);
                if (!contains(support, gp)) acc += std::pow(std::abs(fg[a]), p);
            }
            return cell * acc;
        });
        curve.t.push_back(t);
        curve.deficit.push_back(res.value);
        curve.error.push_back(res.error);
    }
    // N^p = Int t^(-1 - sp/2) I(t) dt; reuse the s-perimeter quadrature with s' = sp/2
    const double sp2 = 0.5 * s * p;
    require(sp2 < 0.5, Errc::Unsupported, "s p / 2 must be below 1/2 for the head model");
    const auto r = s_perimeter(curve, sp2);
    SeminormResult out;
    out.value = std::pow(r.value, 1.0 / p);
    out.error = out.value * r.error / (p * r.value);
    return out;
}

/// Indicator inputs: N_{s,1}(1_E) = P_{H, s/2}(E).
inline SeminormResult besov_seminorm(const HeatSemigroup& S, const Region& E, double s) {
    require(s > 0.0 && s < 1.0, Errc::InvalidArgument, "s must lie in (0, 1)");
    const auto r = s_perimeter(S, E, 0.5 * s);
    return {r.value, r.error};
}

} // namespace carnot
