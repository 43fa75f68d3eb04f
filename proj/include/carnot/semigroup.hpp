#pragma once

// The heat semigroup applied to indicators, and kernel self-tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "carnot/budget.hpp"
#include "carnot/heat_kernel.hpp"
#include "carnot/heat_measure.hpp"
#include "carnot/regions.hpp"

namespace carnot {

/// A heat kernel together with lazily built discretisations of its measure.
/// Logically immutable; safe to share between threads.
class HeatSemigroup {
public:
    explicit HeatSemigroup(GroupSpec G, QuadratureBudget budget = {}) : K_(std::move(G), budget) { budget.validate(); }

    const HeatKernel& kernel() const { return K_; }
    const GroupSpec& group() const { return K_.group(); }
    const QuadratureBudget& budget() const { return K_.budget(); }

    /// Main measure (offset 0) and the coarser companion (offset -1) used for
    /// discretisation error estimates.
    const HeatMeasure& measure(int offset = 0) const {
        std::lock_guard lock(mutex_);
        auto& slot = offset == 0 ? main_ : companion_;
        if (!slot) slot = std::make_unique<HeatMeasure>(heat_measure(K_, offset));
        return *slot;
    }

    bool has_profile() const { return group().k() == 1 && group().m() == 2 && RadialProfile::is_htype_scaled(group()); }

    const RadialProfile& profile() const {
        std::lock_guard lock(mutex_);
        if (!profile_) profile_ = std::make_unique<RadialProfile>(K_);
        return *profile_;
    }

private:
    HeatKernel K_;
    mutable std::mutex mutex_;
    mutable std::unique_ptr<HeatMeasure> main_, companion_;
    mutable std::unique_ptr<RadialProfile> profile_;
};

struct IndicatorValue {
    double value = 0.0;
    double error = 0.0;
    double clamped = 0.0;  // amount moved back into [0, 1]
};

namespace detail {

/// Convex base of a region in the rescaled w-plane, w = (z' - z_g)/sqrt(t).
struct PlanarBase {
    bool disc = true;
    Eigen::Vector2d center{0.0, 0.0};
    double radius = 0.0;
    std::vector<Eigen::Vector2d> normals;  // polygon: n . w <= off
    std::vector<double> offsets;
    std::vector<Eigen::Vector2d> vertices;

    /// Interval of y with x e1 + y e2 inside, in the frame (e1, e2).
    bool chord(double x, const Eigen::Vector2d& e1, const Eigen::Vector2d& e2, double& lo, double& hi) const {
        if (disc) {
            const double cx = center.dot(e1), cy = center.dot(e2);
            const double h2 = radius * radius - (x - cx) * (x - cx);
            if (h2 <= 0.0) return false;
            lo = cy - std::sqrt(h2);
            hi = cy + std::sqrt(h2);
            return true;
        }
        lo = -std::numeric_limits<double>::infinity();
        hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < normals.size(); ++i) {
            const double a = normals[i].dot(e2), b = offsets[i] - x * normals[i].dot(e1);
            if (std::abs(a) < 1e-300) {
                if (b < 0.0) return false;
            } else if (a > 0.0) {
                hi = std::min(hi, b / a);
            } else {
                lo = std::max(lo, b / a);
            }
        }
        return hi > lo;
    }

    /// x-coordinates where the chord length is not smooth.
    std::vector<double> x_breaks(const Eigen::Vector2d& e1) const {
        if (disc) return {center.dot(e1) - radius, center.dot(e1) + radius};
        std::vector<double> out;
        for (const auto& v : vertices) out.push_back(v.dot(e1));
        return out;
    }
};

} // namespace detail

/// P_t 1_F(g) with F = E (or its complement) for an H-type group with m = 2,
/// k = 1 and a sigma-box region. The w-integral is done in a frame aligned
/// with J^T z_g, so the sigma window depends on one coordinate only; the tau
/// integral uses the radial CDF profile.
inline IndicatorValue indicator_planar(const HeatSemigroup& S, const Region& E, const GroupPoint& g, double t,
                                       bool complement, int order) {
    const auto& G = S.group();
    const RadialProfile& prof = S.profile();
    const double st = std::sqrt(t);
    double a = 0.0, b = 0.0;
    detail::PlanarBase base;
    if (const auto* c = std::get_if<VerticalCylinder>(&E)) {
        a = c->a[0];
        b = c->b[0];
        base.center = (c->center - g.z) / st;
        base.radius = c->R / st;
    } else if (const auto* bx = std::get_if<CoordinateBox>(&E)) {
        a = bx->lo[2];
        b = bx->hi[2];
        base.disc = false;
        const Eigen::Vector2d lo((bx->lo[0] - g.z[0]) / st, (bx->lo[1] - g.z[1]) / st);
        const Eigen::Vector2d hi((bx->hi[0] - g.z[0]) / st, (bx->hi[1] - g.z[1]) / st);
        base.normals = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        base.offsets = {hi[0], -lo[0], hi[1], -lo[1]};
        base.vertices = {{lo[0], lo[1]}, {hi[0], lo[1]}, {hi[0], hi[1]}, {lo[0], hi[1]}};
    } else {
        throw Error(Errc::Unsupported, "planar indicator needs a cylinder or box");
    }
    // tau window: a < sigma_g + t tau + sqrt(t)/2 <J z_g, w> < b
    const Eigen::Vector2d v = (G.J(0).transpose() * g.z).head<2>();
    const double vn = v.norm();
    const Eigen::Vector2d e1 = vn > 0.0 ? Eigen::Vector2d(v / vn) : Eigen::Vector2d(1.0, 0.0);
    const Eigen::Vector2d e2(-e1[1], e1[0]);
    const double slope = 0.5 * st * vn / t;  // d tau_i / dx
    const double tau_a = (a - g.sigma[0]) / t, tau_b = (b - g.sigma[0]) / t;
    const double X = prof.rho_max(), T = prof.tau_max();

    std::vector<double> breaks{0.0};
    std::vector<std::pair<double, double>> fine_bands;
    for (double xb : base.x_breaks(e1))
        if (std::abs(xb) < X) breaks.push_back(xb);
    if (slope > 0.0) {
        for (double tc : {tau_a, tau_b}) {
            // tau_i(x) = tc - slope x crosses [-T, T] on this band
            const double x0 = tc / slope, half = T / slope;
            breaks.push_back(std::clamp(x0, -X, X));
            fine_bands.emplace_back(x0 - half, x0 + half);
        }
    }
    std::sort(breaks.begin(), breaks.end());
    const double hx_band = std::min(0.5, 0.5 / std::max(slope, 1e-300));

    auto chord_sum = [&](double x) {
        // integral over y of the sigma-window mass at w = x e1 + y e2
        const double Y2 = X * X - x * x;
        if (Y2 <= 0.0) return 0.0;
        const double Y = std::sqrt(Y2);
        const double t1 = tau_a - slope * x, t2 = tau_b - slope * x;
        auto in_mass = [&](double rho) { return prof.mass(rho, t1, t2); };
        auto out_mass = [&](double rho) { return prof.mass(rho, -T, T) - prof.mass(rho, t1, t2); };
        auto full = [&](double rho) { return prof.mass(rho, -T, T); };
        auto seg = [&](double lo, double hi, auto&& f) {
            lo = std::max(lo, -Y);
            hi = std::min(hi, Y);
            if (hi <= lo) return 0.0;
            const double yb[] = {0.0};
            const auto rule = quad::composite(lo, hi, 1.0, order, yb);
            double s = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) s += rule.w[i] * f(std::hypot(x, rule.x[i]));
            return s;
        };
        double lo = 0.0, hi = 0.0;
        const bool hit = base.chord(x, e1, e2, lo, hi);
        if (!complement) return hit ? seg(lo, hi, in_mass) : 0.0;
        if (!hit) return seg(-Y, Y, full);
        return seg(-Y, lo, full) + seg(lo, hi, out_mass) + seg(hi, Y, full);
    };

    double total = 0.0;
    std::vector<double> cuts{-X};
    for (double xb : breaks)
        if (xb > -X && xb < X) cuts.push_back(xb);
    cuts.push_back(X);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto base_breaks = base.x_breaks(e1);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        const double mid = 0.5 * (lo + hi);
        double h = 1.0;
        for (const auto& [bl, bh] : fine_bands)
            if (hi > bl && lo < bh) h = std::min(h, hx_band);
        // chord length has square-root endpoints at disc extremes: grade toward them
        const bool sqrt_lo = base.disc && std::any_of(base_breaks.begin(), base_breaks.end(), [&](double xb) { return std::abs(xb - lo) < 1e-12; });
        const bool sqrt_hi = base.disc && std::any_of(base_breaks.begin(), base_breaks.end(), [&](double xb) { return std::abs(xb - hi) < 1e-12; });
        quad::Rule1D rule;
        if (sqrt_lo || sqrt_hi) {
            // x = mid + half * sin(theta) clusters nodes at both ends
            const double half = 0.5 * (hi - lo);
            const int panels = std::max(2, static_cast<int>(std::ceil((hi - lo) / h)));
            const auto tr = quad::composite(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi, std::numbers::pi / panels, order);
            for (std::size_t i = 0; i < tr.size(); ++i) {
                rule.x.push_back(mid + half * std::sin(tr.x[i]));
                rule.w.push_back(tr.w[i] * half * std::cos(tr.x[i]));
            }
        } else {
            rule = quad::composite(lo, hi, h, order);
        }
        for (std::size_t i = 0; i < rule.size(); ++i) total += rule.w[i] * chord_sum(rule.x[i]);
    }
    IndicatorValue out;
    out.value = total;
    return out;
}

/// Sum_i W_i 1_F(g o delta_sqrt(t) u_i) over the discretised heat measure.
inline IndicatorValue indicator_measure(const HeatSemigroup& S, const Region& E, const GroupPoint& g, double t,
                                        bool complement, const HeatMeasure& mu) {
    const auto& G = S.group();
    const int m = G.m(), k = G.k();
    const double st = std::sqrt(t);
    const auto res = integrate(mu, S.budget().workers, [&](std::size_t i) {
        const double* u = mu.node(i);
        GroupPoint h{Eigen::Map<const Vec>(u, m) * st, Eigen::Map<const Vec>(u + m, k) * t};
        const bool in = contains(E, multiply(G, g, h));
        return (in != complement) ? 1.0 : 0.0;
    });
    IndicatorValue out;
    out.value = res.value;
    out.error = res.error + std::abs(1.0 - mu.mass());
    return out;
}

/// P_t 1_E(g) (or P_t 1_{E^c}(g) when `complement`), clamped to [0, 1].
inline IndicatorValue apply_to_indicator(const HeatSemigroup& S, const Region& E, const GroupPoint& g, double t,
                                         bool complement = false) {
    const auto& G = S.group();
    check_region(G, E);
    G.check_point(g);
    require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
    if (!is_bounded(E) && !complement) throw Error(Errc::Unbounded, "indicator of an unbounded region");
    IndicatorValue out;
    const bool planar = S.has_profile() && (std::holds_alternative<VerticalCylinder>(E) || std::holds_alternative<CoordinateBox>(E));
    if (planar) {
        const int order = std::max(8, S.budget().panel_order + 2);
        out = indicator_planar(S, E, g, t, complement, order);
        const auto coarse = indicator_planar(S, E, g, t, complement, order - 2);
        out.error = std::abs(out.value - coarse.value);
    } else {
        require(is_bounded(E), Errc::Unbounded, "indicator of an unbounded region");
        out = indicator_measure(S, E, g, t, complement, S.measure());
    }
    if (out.value < 0.0) {
        out.clamped = -out.value;
        out.value = 0.0;
    } else if (out.value > 1.0) {
        out.clamped = out.value - 1.0;
        out.value = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Self-tests

struct SelfTestResult {
    double deviation = 0.0;
    double error = 0.0;
};

/// |Int p(e, g', t) dg' - 1|. The measure is a quadrature of the kernel over
/// the truncated domain; the error adds the Gaussian tail bounds and pruned mass.
inline SelfTestResult selftest_normalization(const HeatSemigroup& S, double t = 1.0) {
    require(t > 0.0, Errc::InvalidArgument, "t must be positive");
    const auto& mu = S.measure();
    SelfTestResult r;
    // the integral at time t equals the one at t = 1 after the change of variables
    r.deviation = std::abs(mu.mass() - 1.0);
    const int m = S.group().m();
    const double Z = S.budget().table_z_half;
    // z-tail: the z-marginal is N(0, 2 I); sigma tail of the kernel is below exp(-T)
    const double ztail = m * std::erfc(Z / 2.0);
    const double stail = std::exp(-S.budget().table_sigma_half);
    if (mu.sampled()) {
        const auto one = integrate(mu, S.budget().workers, [](std::size_t) { return 1.0; });
        r.error = one.error;
    } else {
        r.error = ztail + stail + mu.pruned + mu.clamped;
    }
    return r;
}

/// max over samples of |p(delta_r g, e, r^2 t) - r^-Q p(g, e, t)| / p(g, e, t).
inline double selftest_scaling(const HeatSemigroup& S, const std::vector<GroupPoint>& samples, double r, double t = 1.0) {
    const auto& G = S.group();
    const auto e = GroupPoint::identity(G.m(), G.k());
    double worst = 0.0;
    for (const auto& g : samples) {
        const double base = S.kernel()(g, e, t).value;
        const double scaled = S.kernel()(dilate(G, r, g), e, r * r * t).value;
        const double rel = std::abs(scaled - std::pow(r, -G.Q()) * base) / base;
        worst = std::max(worst, rel);
    }
    return worst;
}

/// |p(g, g'', t + s) - Int p(g, g', t) p(g', g'', s) dg'| using a sampled
/// heat measure for the intermediate point.
inline SelfTestResult selftest_chapman_kolmogorov(const HeatSemigroup& S, const GroupPoint& g, const GroupPoint& gpp,
                                                  double t, double s, std::size_t samples = 4096) {
    const auto& G = S.group();
    const int m = G.m(), k = G.k();
    const HeatMeasure mu = sampled_heat_measure(S.kernel(), samples, 0x43484b);
    const double st = std::sqrt(t);
    const auto res = integrate(mu, S.budget().workers, [&](std::size_t i) {
        const double* u = mu.node(i);
        GroupPoint h{Eigen::Map<const Vec>(u, m) * st, Eigen::Map<const Vec>(u + m, k) * t};
        return S.kernel()(multiply(G, g, h), gpp, s).value;
    });
    const double direct = S.kernel()(g, gpp, t + s).value;
    return {std::abs(direct - res.value), res.error};
}

/// Int_R p((z, sigma), (z', sigma'), t) d sigma' for k = 1 by quadrature in sigma'.
inline SelfTestResult vertical_marginal(const HeatSemigroup& S, const GroupPoint& g, const Vec& zp, double t) {
    const auto& G = S.group();
    require(G.k() == 1, Errc::Unsupported, "vertical marginal check is for k = 1");
    const double d2 = (g.z - zp).squaredNorm();
    // phase theta = sigma' - sigma + 1/2 <J z', z>; integrate over theta / t
    const double shift = g.sigma[0] - 0.5 * (G.J(0) * zp).dot(g.z);
    const double Theta = 14.0 + 2.0 * d2 / t;
    auto run = [&](int order) {
        const auto rule = quad::composite(-Theta, Theta, 0.25, order);
        double acc = 0.0, err = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            GroupPoint gp{zp, Vec::Constant(1, shift + t * rule.x[i])};
            const auto kv = S.kernel()(g, gp, t);
            acc += rule.w[i] * t * kv.value;
            err += rule.w[i] * t * kv.error;
        }
        return std::make_pair(acc, err);
    };
    const auto [fine, kerr] = run(8);
    const auto [coarse, unused] = run(6);
    (void)unused;
    const double exact = std::pow(4.0 * std::numbers::pi * t, -0.5 * G.m()) * std::exp(-d2 / (4.0 * t));
    return {std::abs(fine - exact), std::abs(fine - coarse) + kerr};
}

} // namespace carnot
