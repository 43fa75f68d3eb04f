#pragma once

// The hyperplane integral phi(nu) = Int_{nu-perp x R^k} p(g, e, 1) dg, computed
// directly from the kernel and through Fourier inversion of f_nu.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

#include "carnot/heat_kernel.hpp"
#include "carnot/overlap.hpp"
#include "carnot/parallel.hpp"

namespace carnot {

struct HyperplaneFrame {
    Vec nu;
    Mat basis;      // m x (m-1), orthonormal columns spanning nu-perp
    Mat projector;  // I - nu nu^T
};

inline HyperplaneFrame make_frame(const Vec& nu) {
    const int m = static_cast<int>(nu.size());
    require(m >= 2, Errc::InvalidArgument, "hyperplane frame needs m >= 2");
    require(std::abs(nu.norm() - 1.0) <= 1e-9, Errc::InvalidArgument, "nu must be a unit vector");
    HyperplaneFrame f;
    f.nu = nu.normalized();
    f.basis = detail::complement_basis(f.nu);
    f.projector = Mat::Identity(m, m) - f.nu * f.nu.transpose();
    return f;
}

inline HyperplaneFrame make_frame(const GroupSpec& G, const Vec& nu) {
    require(nu.size() == G.m(), Errc::DimensionMismatch, "nu must lie in R^m");
    return make_frame(nu);
}

/// f_nu(lambda) = (det j / det B^T M B)^(1/2), B the nu-perp basis.
inline double f_nu(const GroupSpec& G, const HyperplaneFrame& F, const Vec& lambda) {
    require(F.nu.size() == G.m(), Errc::DimensionMismatch, "frame does not match the group");
    const KernelWeights kw = kernel_weights(G, lambda);
    const Mat Q = F.basis.transpose() * kw.M * F.basis;
    Eigen::LLT<Mat> llt(Q);
    if (llt.info() != Eigen::Success) throw Error(Errc::NumericFailure, "projected M is not positive definite");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return std::exp(0.5 * (kw.log_det_j - logdet));
}

struct PhiResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

/// Int_{[-S, S]^k} cos(<sigma, lambda>) d sigma.
inline double box_sinc(const double* lam, int k, double S) {
    double p = 1.0;
    for (int l = 0; l < k; ++l) p *= std::abs(lam[l]) < 1e-12 ? 2.0 * S : 2.0 * std::sin(S * lam[l]) / lam[l];
    return p;
}

/// Int_{|sigma| < S} cos(<sigma, lambda>) d sigma as a function of r = |lambda|.
inline double ball_sinc(double r, int k, double S) {
    if (r * S < 1e-8) return special::unit_ball_volume(k) * std::pow(S, k);
    return std::pow(2.0 * std::numbers::pi * S / r, 0.5 * k) * std::cyl_bessel_j(0.5 * k, S * r);
}

} // namespace detail

/// Direct hyperplane integral. Sigma is integrated exactly over [-S, S]^k,
/// which turns the kernel's lambda-integral into a sinc-weighted one; the
/// nu-perp directions use a tensor Gauss rule on the ball of radius Y.
/// Error: truncation (S vs 0.8 S) plus the change under coarser rules.
inline PhiResult phi_direct(const HeatKernel& K, const Vec& nu, double S = 10.0, double Y = 8.0) {
    const auto& G = K.group();
    const auto F = make_frame(G, nu);
    const int m = G.m(), k = G.k(), d = m - 1;
    const double pref = K.prefactor();
    const auto& budget = K.budget();

    if (k >= 2 && is_htype(G)) {
        // radial in both y and lambda
        const double Lambda = K.lambda_quadrature().Lambda;
        auto run = [&](double s_half, int order) {
            const auto rho = quad::composite(0.0, Y, 0.5, order);
            const auto rr = quad::composite(0.0, Lambda, std::min(0.5, 0.25 * std::numbers::pi / s_half), order);
            std::vector<double> wr(rr.size());
            for (std::size_t j = 0; j < rr.size(); ++j)
                wr[j] = rr.w[j] * std::pow(rr.x[j], k - 1) * detail::ball_sinc(rr.x[j], k, s_half) *
                        std::exp(0.5 * m * special::log_x_over_sinh(rr.x[j]));
            double acc = 0.0;
            for (std::size_t i = 0; i < rho.size(); ++i) {
                double inner = 0.0;
                for (std::size_t j = 0; j < rr.size(); ++j)
                    inner += wr[j] * std::exp(-0.25 * rho.x[i] * rho.x[i] * special::x_over_tanh(rr.x[j]));
                acc += rho.w[i] * std::pow(rho.x[i], d - 1) * inner;
            }
            return pref * special::unit_sphere_area(d) * special::unit_sphere_area(k) * acc;
        };
        const int order = std::max(8, budget.nodes_per_unit);
        PhiResult r;
        r.value = run(S, order);
        r.error = std::abs(r.value - run(0.8 * S, order)) + std::abs(r.value - run(S, order - 2));
        return r;
    }

    const int level = std::max(0, static_cast<int>(std::ceil(std::log2(S / (0.5 * std::numbers::pi)))));
    auto run = [&](double s_half, int y_order, int l_order) {
        const auto grid = K.grid(std::vector<int>(k, level), l_order);
        const std::size_t nl = grid->size();
        // per lambda: sinc weight and the projected quadratic form
        std::vector<double> wl(nl), Q(nl * d * d);
        for (std::size_t j = 0; j < nl; ++j) {
            wl[j] = grid->weight[j] * detail::box_sinc(&grid->lambda[j * k], k, s_half) * std::exp(grid->half_ld[j]);
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(&grid->M[j * m * m], m, m);
            const Mat P = F.basis.transpose() * M * F.basis;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) Q[j * d * d + a * d + b] = P(a, b);
        }
        std::vector<quad::Rule1D> rules(d, quad::composite(-Y, Y, 1.0, y_order));
        std::vector<std::vector<double>> ys;
        std::vector<double> wy;
        quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
            double r2 = 0.0;
            for (double x : p) r2 += x * x;
            if (r2 > Y * Y) return;
            ys.emplace_back(p.begin(), p.end());
            wy.push_back(w);
        });
        const double work = static_cast<double>(ys.size()) * nl * d * d;
        if (work > 2000.0 * static_cast<double>(budget.max_tensor_nodes))
            throw Error(Errc::BudgetExhausted, "hyperplane quadrature exceeds the budget");
        return pref * par::sum(ys.size(), budget.workers, [&](std::size_t i) {
            const auto& y = ys[i];
            double acc = 0.0;
            for (std::size_t j = 0; j < nl; ++j) {
                const double* q = &Q[j * d * d];
                double form = 0.0;
                for (int a = 0; a < d; ++a) {
                    double row = 0.0;
                    for (int b = 0; b < d; ++b) row += q[a * d + b] * y[b];
                    form += y[a] * row;
                }
                acc += wl[j] * std::exp(-0.25 * form);
            }
            return wy[i] * acc;
        });
    };
    const int yo = budget.panel_order + 2, lo = std::max(8, budget.nodes_per_unit);
    PhiResult r;
    r.value = run(S, yo, lo);
    r.error = std::abs(r.value - run(0.8 * S, yo, lo)) + std::abs(r.value - run(S, yo - 2, lo - 2));
    return r;
}

inline PhiResult phi_direct(const GroupSpec& G, const Vec& nu, const QuadratureBudget& budget = {}) {
    return phi_direct(HeatKernel(G, budget), nu);
}

/// (1/sqrt(4 pi)) Int_{|tau| < T} fhat(tau) d tau with
/// fhat(tau) = Int f_nu(lambda) exp(-2 pi i <tau, lambda>) d lambda (real, f even).
/// The tail beyond T is estimated from an exponential fit of the decay of fhat.
inline PhiResult phi_via_inversion(const GroupSpec& G, const Vec& nu, const QuadratureBudget& budget = {}, double T = 8.0) {
    const int k = G.k();
    require(k <= 2, Errc::Unsupported, "Fourier inversion route supports k <= 2");
    const auto F = make_frame(G, nu);
    // f_nu decays at least like the kernel envelope; find a cut-off
    double Lambda = 4.0;
    const auto dirs = detail::sample_directions(k);
    while (true) {
        double worst = 0.0;
        for (const auto& w : dirs) worst = std::max(worst, f_nu(G, F, Lambda * w));
        if (worst * std::pow(Lambda, k) < 1e-16 || Lambda > 200.0) break;
        Lambda += 2.0;
    }
    const int order = std::max(8, budget.nodes_per_unit) + 2;
    PhiResult r;
    if (k == 1) {
        // f_nu on rules with panel width 2^-level, built once per (level, order)
        std::map<std::pair<int, int>, std::pair<quad::Rule1D, std::vector<double>>> tables;
        auto table = [&](int level, int ord) -> const auto& {
            auto it = tables.find({level, ord});
            if (it != tables.end()) return it->second;
            auto rule = quad::composite(0.0, Lambda, std::ldexp(1.0, -level), ord);
            std::vector<double> f(rule.size());
            for (std::size_t j = 0; j < rule.size(); ++j) f[j] = f_nu(G, F, Vec::Constant(1, rule.x[j]));
            return tables.emplace(std::make_pair(level, ord), std::make_pair(std::move(rule), std::move(f))).first->second;
        };
        auto fhat = [&](double tau, int ord) {
            // at most a quarter period of cos(2 pi tau lambda) per panel
            const int level = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(4.0 * tau, 1.0)))));
            const auto& [rule, f] = table(level, ord);
            double acc = 0.0;
            for (std::size_t j = 0; j < rule.size(); ++j) acc += 2.0 * rule.w[j] * std::cos(2.0 * std::numbers::pi * tau * rule.x[j]) * f[j];
            return acc;
        };
        // fhat is analytic only in a strip of half-width 1/(2 pi) around the real axis
        auto integrate = [&](int ord, std::vector<double>* outer_t, std::vector<double>* outer_v, double* peak) {
            const auto tr = quad::composite(0.0, T, 0.05, ord);
            double acc = 0.0;
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const double v = fhat(tr.x[i], ord);
                acc += 2.0 * tr.w[i] * v;
                if (peak) *peak = std::max(*peak, std::abs(v));
                if (outer_t && tr.x[i] > 0.5 * T) outer_t->push_back(tr.x[i]), outer_v->push_back(std::abs(v));
            }
            return acc;
        };
        std::vector<double> outer_t, outer_v;
        double peak = 0.0;
        const double fine = integrate(order, &outer_t, &outer_v, &peak);
        const double coarse = integrate(order - 2, nullptr, nullptr, nullptr);
        // exponential tail |fhat| ~ exp(a + b tau) fitted above the rounding
        // floor; once fhat has reached the floor the tail is bounded by it
        const double floor = outer_v.empty() ? 0.0 : *std::max_element(outer_v.begin(), outer_v.end());
        std::vector<double> ft, fv;
        for (std::size_t i = 0; i < outer_t.size(); ++i)
            if (outer_v[i] > 1e-12 * peak) ft.push_back(outer_t[i]), fv.push_back(std::log(outer_v[i]));
        double tail = 2.0 * floor;
        if (ft.size() >= 2) {
            const int n = static_cast<int>(ft.size());
            Mat X(n, 2);
            for (int i = 0; i < n; ++i) X(i, 0) = 1.0, X(i, 1) = ft[i];
            const Vec c = X.colPivHouseholderQr().solve(Eigen::Map<const Vec>(fv.data(), n));
            tail = c[1] < 0.0 ? std::max(tail, 2.0 * std::exp(c[0] + c[1] * T) / (-c[1])) : std::numeric_limits<double>::infinity();
        }
        r.value = special::inv_sqrt_4pi * fine;
        r.error = special::inv_sqrt_4pi * (std::abs(fine - coarse) + tail);
        return r;
    }
    // k = 2: tau over the disc |tau| < T' in closed form,
    //   Int_{|tau|<T'} fhat = Int f(lambda) (T'/|lambda|) J_1(2 pi T' |lambda|) d lambda,
    // so f enters only through its angular averages. Discs T' = 1, 1.5, ..., T give
    // the shell masses whose exponential fit estimates the remainder.
    auto disc = [&](int ord, int nang) {
        const auto rr = quad::composite(0.0, Lambda, 0.25 / T, ord);
        std::vector<double> g(rr.size());
        Vec lam(2);
        for (std::size_t i = 0; i < rr.size(); ++i) {
            double acc = 0.0;
            for (int a = 0; a < nang; ++a) {  // f even: half circle
                const double th = std::numbers::pi * (a + 0.5) / nang;
                lam << rr.x[i] * std::cos(th), rr.x[i] * std::sin(th);
                acc += f_nu(G, F, lam);
            }
            g[i] = 2.0 * std::numbers::pi * acc / nang * rr.w[i];
        }
        std::vector<double> out;
        for (double Tp = 1.0; Tp <= T + 1e-12; Tp += 0.5) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rr.size(); ++i) acc += g[i] * Tp * std::cyl_bessel_j(1.0, 2.0 * std::numbers::pi * Tp * rr.x[i]);
            out.push_back(acc);
        }
        return out;
    };
    const auto fine = disc(order, 32);
    const auto coarse = disc(order - 2, 16);
    std::vector<double> ft, fv;
    double floor = 0.0;
    for (std::size_t i = 1; i < fine.size(); ++i) {
        const double shell = std::abs(fine[i] - fine[i - 1]);
        const double Tp = 1.0 + 0.5 * i;
        if (Tp > 0.5 * T) floor = std::max(floor, shell);
        if (shell > 1e-12 * std::abs(fine[0])) ft.push_back(Tp), fv.push_back(std::log(shell));
    }
    double tail = floor;
    if (ft.size() >= 2) {
        // shell mass per 0.5 in T' ~ exp(a + b T'), summed geometrically beyond T
        const int n = static_cast<int>(ft.size());
        Mat X(n, 2);
        for (int i = 0; i < n; ++i) X(i, 0) = 1.0, X(i, 1) = ft[i];
        const Vec c = X.colPivHouseholderQr().solve(Eigen::Map<const Vec>(fv.data(), n));
        const double q = std::exp(0.5 * c[1]);
        tail = c[1] < 0.0 ? std::max(tail, std::exp(c[0] + c[1] * T) * q / (1.0 - q)) : std::numeric_limits<double>::infinity();
    }
    r.value = special::inv_sqrt_4pi * fine.back();
    r.error = special::inv_sqrt_4pi * (std::abs(fine.back() - coarse.back()) + tail);
    return r;
}

struct DecayFit {
    double rate = 0.0;           // fitted c in log f ~ a - c |lambda| beyond |lambda| = 5
    double max_violation = 0.0;  // largest increase of log f between consecutive radii beyond 5
};

/// Exponential decay of f_nu along sampled directions.
inline DecayFit schwartz_decay_check(const GroupSpec& G, const Vec& nu, const std::vector<double>& radii) {
    const auto F = make_frame(G, nu);
    DecayFit out;
    out.rate = std::numeric_limits<double>::infinity();
    for (const auto& dir : detail::sample_directions(G.k())) {
        std::vector<double> x, y;
        for (double r : radii) {
            if (r < 5.0) continue;
            x.push_back(r);
            y.push_back(std::log(f_nu(G, F, r * dir)));
        }
        require(x.size() >= 2, Errc::InvalidArgument, "need at least two radii beyond 5");
        for (std::size_t i = 0; i + 1 < y.size(); ++i) out.max_violation = std::max(out.max_violation, y[i + 1] - y[i]);
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        out.rate = std::min(out.rate, -sxy / sxx);
    }
    return out;
}

} // namespace carnot
