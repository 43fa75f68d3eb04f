#pragma once

// Heat kernel of the horizontal Laplacian on a step-two Carnot group:
//
//   p(g, g', t) = 2^k (4 pi t)^-(m/2+k) Int_{R^k} cos(<theta, lambda>/t)
//                 (det j(sqrt A(lambda)))^{1/2} exp(-<M(lambda) d, d>/4t) dlambda
//
// with d = z - z', theta_l = (sigma' - sigma)_l + 1/2 <J_l z', z>. The
// imaginary part of the complex form vanishes because A is even and the phase
// is odd in lambda. Evaluation always reduces to t = 1 through
//   p(g, g', t) = t^-Q/2 K(d / sqrt t, theta / t).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

#include "carnot/budget.hpp"
#include "carnot/error.hpp"
#include "carnot/group.hpp"
#include "carnot/quadrature.hpp"
#include "carnot/special.hpp"

namespace carnot {

struct KernelValue {
    double value = 0.0;
    double error = 0.0;
    double clamped = 0.0;  // magnitude of a negative quadrature artifact set to 0
};

/// Truncation of the lambda integral. Lambda is large enough that the
/// envelope exp(1/2 log det j) and the integrated tail beyond it are below
/// target_tol along every sampled direction.
struct LambdaQuadrature {
    double Lambda = 0.0;
    int nodes_per_unit = 8;
    double target_tol = 1e-11;
    double tail_bound = 0.0;  // bound on |integral| outside [-Lambda, Lambda]^k, t = 1 units
};

inline double kernel_prefactor(int m, int k) {
    return std::pow(2.0, k) * std::pow(4.0 * std::numbers::pi, -(0.5 * m + k));
}

namespace detail {

inline std::vector<Vec> sample_directions(int k) {
    std::vector<Vec> dirs;
    for (int l = 0; l < k; ++l) {
        Vec e = Vec::Zero(k);
        e[l] = 1.0;
        dirs.push_back(e);
    }
    if (k == 1) return dirs;
    const int extra = 48 * k;
    for (int i = 1; i <= extra; ++i) {
        Vec v(k);
        for (int l = 0; l < k; ++l) {
            // Gaussian coordinates from Halton points give uniform directions.
            const double u1 = std::max(1e-12, quad::radical_inverse(i, quad::kPrimes[2 * l]));
            const double u2 = quad::radical_inverse(i, quad::kPrimes[2 * l + 1]);
            v[l] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }
        if (v.norm() > 1e-9) dirs.push_back(v.normalized());
    }
    return dirs;
}

inline double half_log_det_j(const GroupSpec& G, const Vec& lambda) {
    const SpectralData sd = spectral(G, lambda);
    double s = 0.0;
    for (int i = 0; i < sd.mu.size(); ++i) s += special::log_x_over_sinh(sd.mu[i]);
    return 0.5 * s;
}

} // namespace detail

inline LambdaQuadrature make_lambda_quadrature(const GroupSpec& G, const QuadratureBudget& budget) {
    require(budget.nodes_per_unit >= 4, Errc::InvalidArgument, "nodes_per_unit must be >= 4");
    require(budget.lambda_tol > 0.0, Errc::InvalidArgument, "lambda_tol must be positive");
    const int k = G.k();
    const auto dirs = detail::sample_directions(k);
    const double sphere = k == 1 ? 2.0 : special::unit_sphere_area(k);
    const double pref = kernel_prefactor(G.m(), k);
    LambdaQuadrature q;
    q.nodes_per_unit = budget.nodes_per_unit;
    q.target_tol = budget.lambda_tol;
    for (int L = 4; L <= 400; ++L) {
        double worst_env = 0.0, worst_tail = 0.0;
        for (const auto& w : dirs) {
            const double e0 = detail::half_log_det_j(G, static_cast<double>(L) * w);
            const double e1 = detail::half_log_det_j(G, (L + 1.0) * w);
            const double rate = e0 - e1;  // decay per unit length
            const double env = std::exp(e0);
            worst_env = std::max(worst_env, env);
            const double tail = rate > 1e-3 ? env * std::pow(L, k - 1) * (1.0 + (k - 1) / (rate * L)) / rate
                                            : std::numeric_limits<double>::infinity();
            worst_tail = std::max(worst_tail, tail);
        }
        const double tail = pref * sphere * worst_tail;
        if (worst_env < q.target_tol && tail < 0.1 * q.target_tol) {
            q.Lambda = L;
            q.tail_bound = tail;
            return q;
        }
    }
    throw Error(Errc::NumericFailure, "could not bound the lambda integrand; envelope decays too slowly");
}

/// True when A(lambda) = |lambda|^2 I on a fixed set of sample lambdas.
inline bool is_htype(const GroupSpec& G, double tol = 1e-10) {
    for (const auto& dir : detail::sample_directions(G.k())) {
        for (double r : {0.3, 1.0, 2.7}) {
            const Vec lam = r * dir;
            const Mat A = G.A_of(lam);
            const Mat target = lam.squaredNorm() * Mat::Identity(G.m(), G.m());
            if ((A - target).cwiseAbs().maxCoeff() > tol) return false;
        }
    }
    return true;
}

/// Nodes of a lambda grid with the spectral weights precomputed.
struct SpectralGrid {
    int k = 0, m = 0;
    std::vector<double> lambda;  // N x k
    std::vector<double> weight;  // quadrature weight (evenness factor included)
    std::vector<double> half_ld; // 1/2 log det j
    std::vector<double> M;       // N x m x m
    std::size_t size() const { return weight.size(); }
};

class HeatKernel {
public:
    HeatKernel(GroupSpec G, QuadratureBudget budget = {})
        : G_(std::move(G)), budget_(budget), lq_(make_lambda_quadrature(G_, budget_)),
          pref_(kernel_prefactor(G_.m(), G_.k())), radial_(G_.k() >= 2 && is_htype(G_)) {}

    const GroupSpec& group() const { return G_; }
    const QuadratureBudget& budget() const { return budget_; }
    const LambdaQuadrature& lambda_quadrature() const { return lq_; }
    double prefactor() const { return pref_; }

    /// p(g, g', t).
    KernelValue operator()(const GroupPoint& g, const GroupPoint& gp, double t) const {
        require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
        G_.check_point(g);
        G_.check_point(gp);
        Vec d = g.z - gp.z;
        Vec theta = gp.sigma - g.sigma;
        for (int l = 0; l < G_.k(); ++l) theta[l] += 0.5 * (G_.J(l) * gp.z).dot(g.z);
        const double st = std::sqrt(t);
        KernelValue kv = unit_time(d / st, theta / t);
        const double scale = std::pow(t, -0.5 * G_.Q());
        kv.value *= scale;
        kv.error *= scale;
        kv.clamped *= scale;
        return kv;
    }

    /// K(d, theta) = p at t = 1 for displacement d and phase vector theta.
    KernelValue unit_time(const Vec& d, const Vec& theta) const {
        const int k = G_.k();
        if (radial_) return unit_time_radial(d, theta);
        if (k == 4) return unit_time_qmc(d, theta);
        std::vector<int> levels(k);
        const double d2 = d.squaredNorm();
        for (int l = 0; l < k; ++l) {
            double h = 1.0;
            if (std::abs(theta[l]) > 0.0) h = std::min(h, 0.5 * std::numbers::pi / std::abs(theta[l]));
            if (d2 > 8.0) h = std::min(h, 8.0 / d2);
            levels[l] = std::max(0, static_cast<int>(std::ceil(-std::log2(h) - 1e-12)));
        }
        const int order = std::max(8, lq_.nodes_per_unit);
        const double fine = integrate(levels, order, d, theta);
        const double coarse = integrate(levels, order - 2, d, theta);
        KernelValue kv;
        const double raw = pref_ * fine;
        kv.error = pref_ * std::abs(fine - coarse) + lq_.tail_bound;
        if (raw < 0.0) {
            kv.clamped = -raw;
            kv.value = 0.0;
        } else {
            kv.value = raw;
        }
        if (kv.error > 10.0 * lq_.target_tol)
            throw Error(Errc::AccuracyError, "kernel quadrature error estimate exceeds tolerance", kv.error);
        return kv;
    }

    /// Cached grid on [0, Lambda] x [-Lambda, Lambda]^(k-1) with panels of
    /// width 2^-level[l] and `order` Gauss nodes each.
    std::shared_ptr<const SpectralGrid> grid(const std::vector<int>& levels, int order) const {
        const auto key = std::make_pair(levels, order);
        {
            std::lock_guard lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        auto g = build_grid(levels, order);
        std::lock_guard lock(mutex_);
        if (g->size() <= kCacheNodeLimit) cache_.emplace(key, g);
        return g;
    }

    /// Integrand evaluated on a grid: sum_j w_j cos(<theta, lambda_j>) F_j(d).
    static double sum_grid(const SpectralGrid& grid, const Vec& d, const Vec& theta) {
        const int k = grid.k, m = grid.m;
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double* lam = &grid.lambda[j * k];
            double phase = 0.0;
            for (int l = 0; l < k; ++l) phase += theta[l] * lam[l];
            const double* Mj = &grid.M[j * m * m];
            double quad = 0.0;
            for (int a = 0; a < m; ++a) {
                double row = 0.0;
                for (int b = 0; b < m; ++b) row += Mj[a * m + b] * d[b];
                quad += d[a] * row;
            }
            acc += grid.weight[j] * std::cos(phase) * std::exp(grid.half_ld[j] - 0.25 * quad);
        }
        return acc;
    }

private:
    static constexpr std::size_t kCacheNodeLimit = 2'000'000;

    double integrate(const std::vector<int>& levels, int order, const Vec& d, const Vec& theta) const {
        std::size_t nodes = 1;
        for (int l = 0; l < G_.k(); ++l)
            nodes *= static_cast<std::size_t>(std::ldexp(lq_.Lambda * (l == 0 ? 1.0 : 2.0), levels[l])) * order;
        if (nodes > budget_.max_lambda_nodes)
            throw Error(Errc::AccuracyError, "lambda quadrature needs more nodes than the budget allows");
        return sum_grid(*grid(levels, order), d, theta);
    }

    std::shared_ptr<SpectralGrid> build_grid(const std::vector<int>& levels, int order) const {
        const int k = G_.k(), m = G_.m();
        std::vector<quad::Rule1D> rules;
        for (int l = 0; l < k; ++l) {
            const double lo = l == 0 ? 0.0 : -lq_.Lambda;
            rules.push_back(quad::composite(lo, lq_.Lambda, std::ldexp(1.0, -levels[l]), order));
        }
        auto g = std::make_shared<SpectralGrid>();
        g->k = k;
        g->m = m;
        Vec lam(k);
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            for (int l = 0; l < k; ++l) lam[l] = p[l];
            const KernelWeights kw = kernel_weights(G_, lam);
            g->lambda.insert(g->lambda.end(), p.begin(), p.end());
            g->weight.push_back(2.0 * w);  // lambda -> -lambda symmetry
            g->half_ld.push_back(0.5 * kw.log_det_j);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) g->M.push_back(kw.M(a, b));
        });
        return g;
    }

    // H-type with k >= 2: the integrand depends on |lambda| only, and the
    // angular integral of cos(<theta, lambda>) is a Bessel function.
    KernelValue unit_time_radial(const Vec& d, const Vec& theta) const {
        const int k = G_.k(), m = G_.m();
        const double d2 = d.squaredNorm(), th = theta.norm();
        double h = 1.0;
        if (th > 0.0) h = std::min(h, 0.5 * std::numbers::pi / th);
        if (d2 > 8.0) h = std::min(h, 8.0 / d2);
        const double nu = 0.5 * k - 1.0;
        const double sphere = special::unit_sphere_area(k);
        auto angular = [&](double x) {
            if (x < 1e-8) return sphere;
            return std::pow(2.0 * std::numbers::pi, 0.5 * k) * std::pow(x, -nu) * std::cyl_bessel_j(nu, x);
        };
        auto run = [&](int order) {
            const auto rule = quad::composite(0.0, lq_.Lambda, h, order);
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double r = rule.x[i];
                acc += rule.w[i] * std::pow(r, k - 1) * angular(th * r) *
                       std::exp(0.5 * m * special::log_x_over_sinh(r) - 0.25 * d2 * special::x_over_tanh(r));
            }
            return acc;
        };
        const int order = std::max(8, lq_.nodes_per_unit) + 2;
        const double fine = run(order), coarse = run(order - 2);
        KernelValue kv;
        const double raw = pref_ * fine;
        kv.value = std::max(0.0, raw);
        kv.clamped = std::max(0.0, -raw);
        kv.error = pref_ * std::abs(fine - coarse) + lq_.tail_bound;
        return kv;
    }

    KernelValue unit_time_qmc(const Vec& d, const Vec& theta) const {
        // k = 4: randomly shifted Halton points on [0, Lambda] x [-Lambda, Lambda]^3.
        const int k = G_.k();
        const std::size_t n = std::max<std::size_t>(4096, budget_.mc_samples);
        constexpr int replicas = 8;
        const double vol = lq_.Lambda * std::pow(2.0 * lq_.Lambda, k - 1);
        std::vector<double> est(replicas, 0.0);
        for (int r = 0; r < replicas; ++r) {
            std::mt19937_64 rng(quad::seed_for(budget_.seed, 0x4b45524eULL, r));
            Vec shift(k), lam(k);
            for (int l = 0; l < k; ++l) shift[l] = (rng() >> 11) * 0x1.0p-53;
            double acc = 0.0;
            for (std::size_t i = 1; i <= n; ++i) {
                for (int l = 0; l < k; ++l) {
                    double u = quad::radical_inverse(i, quad::kPrimes[l]) + shift[l];
                    u -= std::floor(u);
                    lam[l] = l == 0 ? lq_.Lambda * u : lq_.Lambda * (2.0 * u - 1.0);
                }
                const KernelWeights kw = kernel_weights(G_, lam);
                acc += std::cos(theta.dot(lam)) * std::exp(0.5 * kw.log_det_j - 0.25 * d.dot(kw.M * d));
            }
            est[r] = 2.0 * vol * acc / static_cast<double>(n);
        }
        double mean = 0.0;
        for (double e : est) mean += e / replicas;
        double var = 0.0;
        for (double e : est) var += (e - mean) * (e - mean) / (replicas - 1);
        KernelValue kv;
        const double raw = pref_ * mean;
        kv.value = std::max(0.0, raw);
        kv.clamped = std::max(0.0, -raw);
        kv.error = pref_ * std::sqrt(var / replicas) + lq_.tail_bound;
        return kv;
    }

    GroupSpec G_;
    QuadratureBudget budget_;
    LambdaQuadrature lq_;
    double pref_;
    bool radial_ = false;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<std::vector<int>, int>, std::shared_ptr<const SpectralGrid>> cache_;
};

/// p(g, g', t) for the given group; convenience wrapper that builds the
/// lambda grid on first use.
inline KernelValue kernel(const HeatKernel& K, const GroupPoint& g, const GroupPoint& gp, double t) {
    return K(g, gp, t);
}

/// Kernel of an H-type group through the scalar form
///   2^k (4 pi t)^-(m/2+k) Int cos(phase/t) (|l|/sinh|l|)^{m/2} exp(-|z-z'|^2/4t |l|/tanh|l|) dl.
/// Uses its own lambda rule so it is an independent check of the matrix route.
inline KernelValue kernel_htype(const GroupSpec& G, const GroupPoint& g, const GroupPoint& gp, double t,
                                const QuadratureBudget& budget = {}) {
    require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
    G.check_point(g);
    G.check_point(gp);
    if (!is_htype(G)) throw Error(Errc::NotHType, "A(lambda) is not |lambda|^2 I");
    const int m = G.m(), k = G.k();
    Vec theta = gp.sigma - g.sigma;
    for (int l = 0; l < k; ++l) theta[l] += 0.5 * (G.J(l) * gp.z).dot(g.z);
    theta /= t;
    const double r2 = (g.z - gp.z).squaredNorm() / t;
    // envelope (x/sinh x)^{m/2} < tol
    double Lambda = 4.0;
    while (0.5 * m * special::log_x_over_sinh(Lambda) + (k - 1) * std::log(Lambda) > std::log(budget.lambda_tol * 1e-2))
        Lambda += 1.0;
    auto integrate = [&](int order) {
        std::vector<quad::Rule1D> rules;
        for (int l = 0; l < k; ++l) {
            double h = 0.5;
            if (theta[l] != 0.0) h = std::min(h, 0.25 * std::numbers::pi / std::abs(theta[l]));
            if (r2 > 4.0) h = std::min(h, 4.0 / r2);
            rules.push_back(quad::composite(l == 0 ? 0.0 : -Lambda, Lambda, h, order));
        }
        double acc = 0.0;
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            double norm2 = 0.0, phase = 0.0;
            for (int l = 0; l < k; ++l) {
                norm2 += p[l] * p[l];
                phase += theta[l] * p[l];
            }
            const double x = std::sqrt(norm2);
            acc += 2.0 * w * std::cos(phase) *
                   std::exp(0.5 * m * special::log_x_over_sinh(x) - 0.25 * r2 * special::x_over_tanh(x));
        });
        return acc;
    };
    const double pref = kernel_prefactor(m, k) * std::pow(t, -0.5 * G.Q());
    const double fine = integrate(10), coarse = integrate(8);
    KernelValue kv;
    const double raw = pref * fine;
    kv.value = std::max(0.0, raw);
    kv.clamped = std::max(0.0, -raw);
    kv.error = pref * std::abs(fine - coarse);
    return kv;
}

/// Euclidean heat kernel (4 pi t)^-n/2 exp(-|x - x'|^2 / 4t).
inline double kernel_euclidean(int n, const Vec& x, const Vec& xp, double t) {
    require(t > 0.0 && std::isfinite(t), Errc::InvalidArgument, "t must be positive");
    require(n >= 1 && x.size() == n && xp.size() == n, Errc::DimensionMismatch, "points must lie in R^n");
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-(x - xp).squaredNorm() / (4.0 * t));
}

} // namespace carnot
