#pragma once

// Test sets E in exponential coordinates (z, sigma) and their boundaries.
// Regions are open sets; boundary points are outside.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "carnot/budget.hpp"
#include "carnot/error.hpp"
#include "carnot/group.hpp"
#include "carnot/quadrature.hpp"
#include "carnot/special.hpp"

namespace carnot {

/// {|z - center| < R} x prod_l (a_l, b_l).
struct VerticalCylinder {
    Vec center;
    double R = 1.0;
    Vec a, b;
};

/// prod_i (lo_i, hi_i) over all m + k coordinates.
struct CoordinateBox {
    Vec lo, hi;
};

/// Euclidean ball in R^(m+k).
struct EuclideanBall {
    Vec center;
    double rho = 1.0;
};

/// {<z, nu> < c}; unbounded.
struct HorizontalHalfSpace {
    Vec nu;
    double c = 0.0;
};

using Region = std::variant<VerticalCylinder, CoordinateBox, EuclideanBall, HorizontalHalfSpace>;

inline void validate(const Region& E) {
    std::visit(
        [](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, VerticalCylinder>) {
                require(r.R > 0.0, Errc::InvalidArgument, "cylinder radius must be positive");
                require(r.a.size() == r.b.size() && r.a.size() >= 1, Errc::DimensionMismatch, "cylinder sigma box");
                require(((r.b - r.a).array() > 0.0).all(), Errc::InvalidArgument, "cylinder needs a < b");
            } else if constexpr (std::is_same_v<T, CoordinateBox>) {
                require(r.lo.size() == r.hi.size() && r.lo.size() >= 1, Errc::DimensionMismatch, "box bounds");
                require(((r.hi - r.lo).array() > 0.0).all(), Errc::InvalidArgument, "box needs lo < hi");
            } else if constexpr (std::is_same_v<T, EuclideanBall>) {
                require(r.rho > 0.0, Errc::InvalidArgument, "ball radius must be positive");
            } else {
                require(std::abs(r.nu.norm() - 1.0) <= 1e-12, Errc::InvalidArgument, "half-space normal must be unit");
            }
        },
        E);
}

/// Dimension of the ambient space the region lives in, or m for half-spaces.
inline void check_region(const GroupSpec& G, const Region& E) {
    validate(E);
    const int m = G.m(), k = G.k();
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, VerticalCylinder>)
                require(r.center.size() == m && r.a.size() == k, Errc::DimensionMismatch, "cylinder does not fit the group");
            else if constexpr (std::is_same_v<T, CoordinateBox>)
                require(r.lo.size() == m + k, Errc::DimensionMismatch, "box does not fit the group");
            else if constexpr (std::is_same_v<T, EuclideanBall>)
                require(r.center.size() == m + k, Errc::DimensionMismatch, "ball does not fit the group");
            else
                require(r.nu.size() == m, Errc::DimensionMismatch, "half-space normal does not fit the group");
        },
        E);
}

inline bool is_bounded(const Region& E) { return !std::holds_alternative<HorizontalHalfSpace>(E); }

inline bool contains(const Region& E, const Vec& z, const Vec& sigma) {
    return std::visit(
        [&](const auto& r) -> bool {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, VerticalCylinder>) {
                if ((z - r.center).squaredNorm() >= r.R * r.R) return false;
                return ((sigma - r.a).array() > 0.0).all() && ((r.b - sigma).array() > 0.0).all();
            } else if constexpr (std::is_same_v<T, CoordinateBox>) {
                const int m = static_cast<int>(z.size());
                for (int i = 0; i < r.lo.size(); ++i) {
                    const double x = i < m ? z[i] : sigma[i - m];
                    if (!(x > r.lo[i] && x < r.hi[i])) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, EuclideanBall>) {
                const int m = static_cast<int>(z.size());
                const double d2 = (z - r.center.head(m)).squaredNorm() + (sigma - r.center.tail(r.center.size() - m)).squaredNorm();
                return d2 < r.rho * r.rho;
            } else {
                return z.dot(r.nu) < r.c;
            }
        },
        E);
}

inline bool contains(const Region& E, const GroupPoint& g) { return contains(E, g.z, g.sigma); }

inline double volume(const Region& E) {
    validate(E);
    return std::visit(
        [](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, VerticalCylinder>)
                return special::unit_ball_volume(static_cast<int>(r.center.size())) *
                       std::pow(r.R, static_cast<double>(r.center.size())) * (r.b - r.a).prod();
            else if constexpr (std::is_same_v<T, CoordinateBox>)
                return (r.hi - r.lo).prod();
            else if constexpr (std::is_same_v<T, EuclideanBall>)
                return special::unit_ball_volume(static_cast<int>(r.center.size())) *
                       std::pow(r.rho, static_cast<double>(r.center.size()));
            else
                throw Error(Errc::Unbounded, "half-space has infinite volume");
        },
        E);
}

/// delta_r(E); balls are not invariant in shape, so only cylinders and boxes.
inline Region dilate(const GroupSpec& G, double r, const Region& E) {
    require(r > 0.0, Errc::InvalidArgument, "dilation factor must be positive");
    check_region(G, E);
    const int m = G.m();
    if (const auto* c = std::get_if<VerticalCylinder>(&E)) return VerticalCylinder{r * c->center, r * c->R, r * r * c->a, r * r * c->b};
    if (const auto* b = std::get_if<CoordinateBox>(&E)) {
        CoordinateBox out = *b;
        out.lo.head(m) *= r;
        out.hi.head(m) *= r;
        out.lo.tail(G.k()) *= r * r;
        out.hi.tail(G.k()) *= r * r;
        return out;
    }
    if (const auto* h = std::get_if<HorizontalHalfSpace>(&E)) return HorizontalHalfSpace{h->nu, r * h->c};
    throw Error(Errc::Unsupported, "dilation of a Euclidean ball is not a ball");
}

inline std::string describe(const Region& E) {
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            std::string s;
            auto vec = [](const Vec& v) {
                std::string o = "[";
                for (int i = 0; i < v.size(); ++i) o += (i ? "," : "") + std::to_string(v[i]);
                return o + "]";
            };
            if constexpr (std::is_same_v<T, VerticalCylinder>)
                s = "cylinder(center=" + vec(r.center) + ",R=" + std::to_string(r.R) + ",a=" + vec(r.a) + ",b=" + vec(r.b) + ")";
            else if constexpr (std::is_same_v<T, CoordinateBox>)
                s = "box(lo=" + vec(r.lo) + ",hi=" + vec(r.hi) + ")";
            else if constexpr (std::is_same_v<T, EuclideanBall>)
                s = "ball(center=" + vec(r.center) + ",rho=" + std::to_string(r.rho) + ")";
            else
                s = "halfspace(nu=" + vec(r.nu) + ",c=" + std::to_string(r.c) + ")";
            return s;
        },
        E);
}

/// Builtins: "cylinder:R,h" (centred, sigma in (0,h)^k), "box:a1,b1,...,an,bn",
/// "ball:rho" (centred), "halfspace:c" (nu = e_1).
inline Region region_from_name(const std::string& name, const GroupSpec& G) {
    const auto colon = name.find(':');
    require(colon != std::string::npos, Errc::ConfigError, "bad region '" + name + "'");
    const std::string kind = name.substr(0, colon);
    std::vector<double> args;
    std::string rest = name.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            args.push_back(std::stod(tok, &used));
            require(used == tok.size(), Errc::ConfigError, "bad number in region '" + name + "'");
        } catch (const std::logic_error&) {
            throw Error(Errc::ConfigError, "bad number in region '" + name + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    const int m = G.m(), k = G.k();
    Region E;
    if (kind == "cylinder") {
        require(args.size() == 2, Errc::ConfigError, "cylinder:R,h takes two numbers");
        E = VerticalCylinder{Vec::Zero(m), args[0], Vec::Zero(k), Vec::Constant(k, args[1])};
    } else if (kind == "box") {
        require(static_cast<int>(args.size()) == 2 * (m + k), Errc::ConfigError, "box needs 2(m+k) numbers");
        CoordinateBox b{Vec(m + k), Vec(m + k)};
        for (int i = 0; i < m + k; ++i) {
            b.lo[i] = args[2 * i];
            b.hi[i] = args[2 * i + 1];
        }
        E = b;
    } else if (kind == "ball") {
        require(args.size() == 1, Errc::ConfigError, "ball:rho takes one number");
        E = EuclideanBall{Vec::Zero(m + k), args[0]};
    } else if (kind == "halfspace") {
        require(args.size() == 1, Errc::ConfigError, "halfspace:c takes one number");
        E = HorizontalHalfSpace{Vec::Unit(m, 0), args[0]};
    } else {
        throw Error(Errc::ConfigError, "unknown region kind '" + kind + "'");
    }
    try {
        check_region(G, E);
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    return E;
}

// ---------------------------------------------------------------------------
// Boundary patches

/// A chart of part of the boundary over a parameter box, with outward unit
/// normal and surface element.
struct BoundaryPatch {
    std::vector<std::pair<double, double>> domain;
    std::function<Vec(const Vec&)> point;
    std::function<Vec(const Vec&)> normal;
    std::function<double(const Vec&)> jacobian;

    /// Tensor Gauss rule with 2^level panels per parameter.
    std::vector<quad::Rule1D> rule(int level, int order) const {
        std::vector<quad::Rule1D> rules;
        for (const auto& [lo, hi] : domain) rules.push_back(quad::composite(lo, hi, (hi - lo) / std::ldexp(1.0, level), order));
        return rules;
    }

    template <class F>
    double integrate(int level, int order, F&& f) const {
        const auto rules = rule(level, order);
        double acc = 0.0;
        Vec u(static_cast<int>(domain.size()));
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            for (int i = 0; i < u.size(); ++i) u[i] = p[i];
            acc += w * jacobian(u) * f(point(u), normal(u));
        });
        return acc;
    }
};

namespace detail {

/// Hyperspherical chart of S^(n-1): angles phi_1..phi_{n-2} in [0, pi],
/// phi_{n-1} in [0, 2 pi).
inline Vec sphere_point(const double* phi, int n) {
    Vec x(n);
    double s = 1.0;
    for (int i = 0; i < n - 1; ++i) {
        x[i] = s * std::cos(phi[i]);
        s *= std::sin(phi[i]);
    }
    x[n - 1] = s;
    return x;
}

inline double sphere_jacobian(const double* phi, int n) {
    double J = 1.0;
    for (int i = 0; i < n - 2; ++i) J *= std::pow(std::sin(phi[i]), n - 2 - i);
    return J;
}

inline std::vector<std::pair<double, double>> sphere_domain(int n) {
    std::vector<std::pair<double, double>> d;
    for (int i = 0; i < n - 2; ++i) d.emplace_back(0.0, std::numbers::pi);
    d.emplace_back(0.0, 2.0 * std::numbers::pi);
    return d;
}

} // namespace detail

inline std::vector<BoundaryPatch> boundary_patches(const Region& E) {
    validate(E);
    std::vector<BoundaryPatch> out;
    if (const auto* c = std::get_if<VerticalCylinder>(&E)) {
        const int m = static_cast<int>(c->center.size()), k = static_cast<int>(c->a.size());
        const VerticalCylinder cyl = *c;
        // lateral: S^(m-1) x sigma box
        BoundaryPatch lat;
        lat.domain = detail::sphere_domain(m);
        for (int l = 0; l < k; ++l) lat.domain.emplace_back(cyl.a[l], cyl.b[l]);
        lat.point = [cyl, m, k](const Vec& u) {
            Vec p(m + k);
            p.head(m) = cyl.center + cyl.R * detail::sphere_point(u.data(), m);
            p.tail(k) = u.tail(k);
            return p;
        };
        lat.normal = [m, k](const Vec& u) {
            Vec n = Vec::Zero(m + k);
            n.head(m) = detail::sphere_point(u.data(), m);
            return n;
        };
        lat.jacobian = [cyl, m](const Vec& u) { return std::pow(cyl.R, m - 1) * detail::sphere_jacobian(u.data(), m); };
        out.push_back(lat);
        // sigma faces: (r, angles) x remaining sigma coordinates
        for (int l = 0; l < k; ++l) {
            for (int side = 0; side < 2; ++side) {
                BoundaryPatch f;
                f.domain.emplace_back(0.0, cyl.R);
                for (const auto& d : detail::sphere_domain(m)) f.domain.push_back(d);
                for (int o = 0; o < k; ++o)
                    if (o != l) f.domain.emplace_back(cyl.a[o], cyl.b[o]);
                const double level = side ? cyl.b[l] : cyl.a[l];
                f.point = [cyl, m, k, l, level](const Vec& u) {
                    Vec p(m + k);
                    p.head(m) = cyl.center + u[0] * detail::sphere_point(u.data() + 1, m);
                    int idx = m;
                    for (int o = 0; o < k; ++o) p[m + o] = o == l ? level : u[idx++];
                    return p;
                };
                const double sign = side ? 1.0 : -1.0;
                f.normal = [m, k, l, sign](const Vec&) {
                    Vec n = Vec::Zero(m + k);
                    n[m + l] = sign;
                    return n;
                };
                f.jacobian = [m](const Vec& u) { return std::pow(u[0], m - 1) * detail::sphere_jacobian(u.data() + 1, m); };
                out.push_back(f);
            }
        }
    } else if (const auto* b = std::get_if<CoordinateBox>(&E)) {
        const int n = static_cast<int>(b->lo.size());
        const CoordinateBox box = *b;
        for (int i = 0; i < n; ++i) {
            for (int side = 0; side < 2; ++side) {
                BoundaryPatch f;
                for (int o = 0; o < n; ++o)
                    if (o != i) f.domain.emplace_back(box.lo[o], box.hi[o]);
                const double level = side ? box.hi[i] : box.lo[i];
                f.point = [n, i, level](const Vec& u) {
                    Vec p(n);
                    int idx = 0;
                    for (int o = 0; o < n; ++o) p[o] = o == i ? level : u[idx++];
                    return p;
                };
                const double sign = side ? 1.0 : -1.0;
                f.normal = [n, i, sign](const Vec&) {
                    Vec v = Vec::Zero(n);
                    v[i] = sign;
                    return v;
                };
                f.jacobian = [](const Vec&) { return 1.0; };
                out.push_back(f);
            }
        }
    } else if (const auto* s = std::get_if<EuclideanBall>(&E)) {
        const int n = static_cast<int>(s->center.size());
        require(n >= 2, Errc::Unsupported, "ball boundary patches need dimension >= 2");
        const EuclideanBall ball = *s;
        // two charts splitting the first angle at pi/2 (the whole circle for n = 2)
        const int charts = n == 2 ? 1 : 2;
        for (int h = 0; h < charts; ++h) {
            BoundaryPatch f;
            f.domain = detail::sphere_domain(n);
            if (n > 2) f.domain[0] = h == 0 ? std::make_pair(0.0, 0.5 * std::numbers::pi) : std::make_pair(0.5 * std::numbers::pi, std::numbers::pi);
            f.point = [ball, n](const Vec& u) { return Vec(ball.center + ball.rho * detail::sphere_point(u.data(), n)); };
            f.normal = [n](const Vec& u) { return detail::sphere_point(u.data(), n); };
            f.jacobian = [ball, n](const Vec& u) { return std::pow(ball.rho, n - 1) * detail::sphere_jacobian(u.data(), n); };
            out.push_back(f);
        }
    } else {
        throw Error(Errc::Unbounded, "half-space boundary is unbounded");
    }
    return out;
}

/// Closed-form Euclidean surface area of the boundary.
inline double perimeter_euclidean(const Region& E) {
    validate(E);
    if (const auto* c = std::get_if<VerticalCylinder>(&E)) {
        const int m = static_cast<int>(c->center.size());
        const Vec L = c->b - c->a;
        double P = special::unit_sphere_area(m) * std::pow(c->R, m - 1) * L.prod();
        const double disc = special::unit_ball_volume(m) * std::pow(c->R, m);
        for (int l = 0; l < L.size(); ++l) P += 2.0 * disc * L.prod() / L[l];
        return P;
    }
    if (const auto* b = std::get_if<CoordinateBox>(&E)) {
        const Vec L = b->hi - b->lo;
        double P = 0.0;
        for (int i = 0; i < L.size(); ++i) P += 2.0 * L.prod() / L[i];
        return P;
    }
    if (const auto* s = std::get_if<EuclideanBall>(&E)) {
        const int n = static_cast<int>(s->center.size());
        return special::unit_sphere_area(n) * std::pow(s->rho, n - 1);
    }
    throw Error(Errc::Unbounded, "half-space has infinite perimeter");
}

/// |N_H| for the Euclidean unit normal N at point p = (z, sigma).
inline double horizontal_normal_length(const GroupSpec& G, const Vec& p, const Vec& N) {
    const int m = G.m();
    const Mat X = horizontal_frame(G, p.head(m));
    return (X.transpose() * N).norm();
}

struct PerimeterResult {
    double value = 0.0;
    double error = 0.0;
    int level = 0;
};

/// Surface-integral form of the horizontal perimeter, refined by doubling the
/// panel count until successive values agree to `rel_tol`.
inline PerimeterResult horizontal_perimeter(const GroupSpec& G, const Region& E, const QuadratureBudget& budget = {},
                                            double rel_tol = 1e-8) {
    check_region(G, E);
    if (!is_bounded(E)) throw Error(Errc::Unbounded, "horizontal perimeter of an unbounded region");
    const auto patches = boundary_patches(E);
    auto total = [&](int level) {
        double acc = 0.0;
        for (const auto& P : patches)
            acc += P.integrate(level, budget.panel_order,
                               [&](const Vec& p, const Vec& N) { return horizontal_normal_length(G, p, N); });
        return acc;
    };
    PerimeterResult res;
    double prev = total(0);
    res.value = prev;
    const int dims = static_cast<int>(patches.front().domain.size());
    for (int level = 1;; ++level) {
        const double nodes = std::pow(std::ldexp(1.0, level) * budget.panel_order, dims);
        if (nodes > static_cast<double>(budget.max_tensor_nodes)) return res;  // best effort; error reported
        const double cur = total(level);
        res.error = std::abs(cur - prev);
        res.value = cur;
        res.level = level;
        if (res.error <= rel_tol * std::abs(cur)) return res;
        prev = cur;
    }
}

// ---------------------------------------------------------------------------
// Volume quadrature and the variational lower bound

/// Calls f(z, sigma, weight) on a tensor rule covering E; 2^level panels per
/// coordinate, extra sigma breakpoints honoured for cylinders and boxes.
template <class F>
void for_each_volume_node(const GroupSpec& G, const Region& E, int level, int order, F&& f,
                          const std::vector<double>& sigma_breaks = {}) {
    check_region(G, E);
    const int m = G.m(), k = G.k();
    const double panels = std::ldexp(1.0, level);
    if (const auto* c = std::get_if<VerticalCylinder>(&E)) {
        std::vector<quad::Rule1D> rules;
        rules.push_back(quad::composite(0.0, c->R, c->R / panels, order));
        for (const auto& [lo, hi] : detail::sphere_domain(m)) rules.push_back(quad::composite(lo, hi, (hi - lo) / panels, order));
        for (int l = 0; l < k; ++l)
            rules.push_back(quad::composite(c->a[l], c->b[l], (c->b[l] - c->a[l]) / panels, order, sigma_breaks));
        Vec z(m), s(k);
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            const double r = p[0];
            z = c->center + r * detail::sphere_point(p.data() + 1, m);
            for (int l = 0; l < k; ++l) s[l] = p[m + l];
            f(z, s, w * std::pow(r, m - 1) * detail::sphere_jacobian(p.data() + 1, m));
        });
    } else if (const auto* b = std::get_if<CoordinateBox>(&E)) {
        std::vector<quad::Rule1D> rules;
        for (int i = 0; i < m + k; ++i)
            rules.push_back(quad::composite(b->lo[i], b->hi[i], (b->hi[i] - b->lo[i]) / panels, order,
                                            i >= m ? std::span<const double>(sigma_breaks) : std::span<const double>()));
        Vec z(m), s(k);
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            for (int i = 0; i < m; ++i) z[i] = p[i];
            for (int l = 0; l < k; ++l) s[l] = p[m + l];
            f(z, s, w);
        });
    } else if (const auto* s = std::get_if<EuclideanBall>(&E)) {
        const int n = m + k;
        std::vector<quad::Rule1D> rules;
        rules.push_back(quad::composite(0.0, s->rho, s->rho / panels, order));
        for (const auto& [lo, hi] : detail::sphere_domain(n)) rules.push_back(quad::composite(lo, hi, (hi - lo) / panels, order));
        Vec z(m), sg(k);
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            const Vec x = s->center + p[0] * detail::sphere_point(p.data() + 1, n);
            z = x.head(m);
            sg = x.tail(k);
            f(z, sg, w * std::pow(p[0], n - 1) * detail::sphere_jacobian(p.data() + 1, n));
        });
    } else {
        throw Error(Errc::Unbounded, "volume quadrature over an unbounded region");
    }
}

/// A horizontal test field: value zeta(g) in R^m and Euclidean Jacobian
/// d zeta / d(z, sigma), an m x (m + k) matrix.
struct TestField {
    std::function<Vec(const Vec& z, const Vec& sigma)> value;
    std::function<Mat(const Vec& z, const Vec& sigma)> jacobian;
    std::vector<double> sigma_breaks;
};

struct LowerBoundResult {
    double value = 0.0;
    double error = 0.0;
    double max_norm = 0.0;  // max |zeta| over the quadrature nodes
};

/// Int_E sum_j X_j zeta_j; a lower bound for the horizontal perimeter.
inline LowerBoundResult variational_lower_bound(const GroupSpec& G, const Region& E, const TestField& zeta,
                                                const QuadratureBudget& budget = {}, double rel_tol = 1e-9,
                                                int max_level = 6) {
    check_region(G, E);
    const int m = G.m();
    LowerBoundResult res;
    auto at_level = [&](int level) {
        double acc = 0.0;
        for_each_volume_node(
            G, E, level, budget.panel_order,
            [&](const Vec& z, const Vec& s, double w) {
                const Vec v = zeta.value(z, s);
                const double n2 = v.squaredNorm();
                res.max_norm = std::max(res.max_norm, std::sqrt(n2));
                if (n2 > 1.0 + 1e-12) throw Error(Errc::FieldNotAdmissible, "test field exceeds unit length");
                const Mat D = zeta.jacobian(z, s);
                const Mat X = horizontal_frame(G, z);
                double div = 0.0;
                for (int j = 0; j < m; ++j) div += D.row(j).dot(X.col(j));
                acc += w * div;
            },
            zeta.sigma_breaks);
        return acc;
    };
    double prev = at_level(1);
    for (int level = 2; level <= max_level; ++level) {
        const double cur = at_level(level);
        res.value = cur;
        res.error = std::abs(cur - prev);
        if (res.error <= rel_tol * std::max(1.0, std::abs(cur))) break;
        prev = cur;
    }
    return res;
}

/// Smooth extension of the horizontal normal of a vertical cylinder (k = 1):
/// radial on the lateral face, rotating to +-J y/|J y| near the sigma faces
/// over a layer of thickness delta; eps regularises J y/|J y| at the axis.
inline TestField cylinder_normal_field(const GroupSpec& G, const VerticalCylinder& cyl, double delta = 0.1,
                                       double eps = 0.05) {
    require(G.k() == 1, Errc::Unsupported, "cylinder test field is defined for k = 1");
    require(delta > 0.0 && 2.0 * delta <= cyl.b[0] - cyl.a[0], Errc::InvalidArgument, "transition layer too thick");
    const Mat J = G.J(0);
    const int m = G.m();
    const double a = cyl.a[0], b = cyl.b[0], R = cyl.R;
    auto S = [](double x) { x = std::clamp(x, 0.0, 1.0); return x * x * (3.0 - 2.0 * x); };
    auto dS = [](double x) { return (x <= 0.0 || x >= 1.0) ? 0.0 : 6.0 * x * (1.0 - x); };
    auto alpha = [=](double s) {
        return 0.5 * std::numbers::pi * (S((s - b) / delta + 1.0) - S((a - s) / delta + 1.0));
    };
    auto dalpha = [=](double s) {
        return 0.5 * std::numbers::pi * (dS((s - b) / delta + 1.0) + dS((a - s) / delta + 1.0)) / delta;
    };
    TestField f;
    const Vec c = cyl.center;
    f.value = [=](const Vec& z, const Vec& s) {
        const Vec y = z - c;
        const Vec Jy = J * y;
        const double al = alpha(s[0]);
        return Vec(std::cos(al) * y / R + std::sin(al) * Jy / std::sqrt(Jy.squaredNorm() + eps * eps));
    };
    f.jacobian = [=](const Vec& z, const Vec& s) {
        const Vec y = z - c;
        const Vec Jy = J * y;
        const double sn = std::sqrt(Jy.squaredNorm() + eps * eps);
        const Vec v = Jy / sn;
        const Mat dv = J / sn - Jy * (J.transpose() * Jy).transpose() / (sn * sn * sn);
        const double al = alpha(s[0]), dal = dalpha(s[0]);
        Mat D(m, m + 1);
        D.leftCols(m) = std::cos(al) * Mat::Identity(m, m) / R + std::sin(al) * dv;
        D.col(m) = dal * (-std::sin(al) * y / R + std::cos(al) * v);
        return D;
    };
    f.sigma_breaks = {a + delta, b - delta};
    return f;
}

} // namespace carnot
