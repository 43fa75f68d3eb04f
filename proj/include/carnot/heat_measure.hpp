#pragma once

// Discretisations of the heat measure q(u) du = p(u, e, 1) du on the group.
// Integrals against the kernel at time t follow from the dilation identity
//   Int q_t(h) F(h) dh = Int q_1(u) F(delta_sqrt(t) u) du.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "carnot/budget.hpp"
#include "carnot/heat_kernel.hpp"
#include "carnot/parallel.hpp"
#include "carnot/quadrature.hpp"

namespace carnot {

/// Weighted nodes u_i = (w_i, tau_i) with weights W_i ~ q(u_i) du.
struct HeatMeasure {
    int m = 0, k = 0;
    std::vector<double> u;       // N x (m + k)
    std::vector<double> weight;  // N
    std::vector<int> block;      // sampling block of each node; empty for tensor rules
    int blocks = 0;
    double clamped = 0.0;        // total negative weight removed
    double pruned = 0.0;         // total weight dropped as negligible
    std::string method;

    std::size_t size() const { return weight.size(); }
    bool sampled() const { return blocks > 0; }
    const double* node(std::size_t i) const { return &u[i * (m + k)]; }

    double mass() const {
        double s = 0.0;
        for (double w : weight) s += w;
        return s;
    }
};

struct MeasureIntegral {
    double value = 0.0;
    double error = 0.0;  // sampling standard error; 0 for tensor rules
};

/// Sum_i W_i f(i). For sampled measures the error is the standard error of
/// the per-block estimates. Reduction order is fixed.
template <class F>
MeasureIntegral integrate(const HeatMeasure& mu, int workers, F&& f) {
    MeasureIntegral out;
    if (!mu.sampled()) {
        out.value = par::sum(mu.size(), workers, [&](std::size_t i) { return mu.weight[i] * f(i); });
        return out;
    }
    std::vector<double> per(mu.blocks, 0.0);
    std::vector<std::vector<double>> partial(par::kBlocks, std::vector<double>(mu.blocks, 0.0));
    par::for_blocks(mu.size(), workers, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) partial[b][mu.block[i]] += mu.weight[i] * f(i);
    });
    for (const auto& p : partial)
        for (int j = 0; j < mu.blocks; ++j) per[j] += p[j];
    double mean = 0.0;
    for (double v : per) mean += v;  // blocks partition the sample: total = sum of blocks
    const double B = mu.blocks;
    double var = 0.0;
    for (double v : per) var += (B * v - mean) * (B * v - mean);
    var /= (B - 1.0);
    out.value = mean;
    out.error = std::sqrt(var / B);
    return out;
}

/// Tensor table for k = 1: w on [-Z, Z]^m, tau on [-T, T], unit panels with
/// `order` Gauss nodes. q(w, tau) is computed for all tau at once as a cosine
/// transform of F_w(lambda) = exp(1/2 log det j - <M w, w>/4).
inline HeatMeasure tensor_heat_measure(const HeatKernel& K, int order) {
    const auto& G = K.group();
    const auto& budget = K.budget();
    require(G.k() == 1, Errc::Unsupported, "tensor heat table needs k = 1");
    const int m = G.m();
    const double Z = std::ceil(budget.table_z_half), T = std::ceil(budget.table_sigma_half);
    std::size_t wnodes = 1;
    for (int i = 0; i < m; ++i) wnodes *= static_cast<std::size_t>(2 * Z * order);
    const quad::Rule1D wr = quad::composite(-Z, Z, 1.0, order);
    // q is least smooth in tau near tau = 0, |w| small
    quad::Rule1D tr = quad::composite(0.0, std::min(4.0, T), 0.5, order);
    if (T > 4.0) tr.append(quad::composite(4.0, T, 1.0, order));
    const int level = std::max(0, static_cast<int>(std::ceil(std::log2(T / (0.5 * std::numbers::pi)))));
    const auto grid = K.grid({level}, std::max(8, budget.nodes_per_unit));
    const std::size_t nl = grid->size();
    const std::size_t tnodes = tr.size();
    if (wnodes * tnodes * 2 > budget.max_tensor_nodes)
        throw Error(Errc::BudgetExhausted, "tensor heat table exceeds max_tensor_nodes");
    std::vector<double> cosines(tnodes * nl);
    for (std::size_t i = 0; i < tnodes; ++i)
        for (std::size_t j = 0; j < nl; ++j) cosines[i * nl + j] = std::cos(tr.x[i] * grid->lambda[j]) * grid->weight[j];

    // enumerate w nodes; q(w) = q(-w) so only half are computed
    std::vector<std::size_t> idx(m, 0);
    std::vector<std::vector<double>> wpts;
    std::vector<double> wwts;
    while (true) {
        std::vector<double> p(m);
        double w = 1.0;
        for (int d = 0; d < m; ++d) {
            p[d] = wr.x[idx[d]];
            w *= wr.w[idx[d]];
        }
        wpts.push_back(p);
        wwts.push_back(w);
        int d = 0;
        while (d < m && ++idx[d] == wr.size()) idx[d++] = 0;
        if (d == m) break;
    }
    const std::size_t nw = wpts.size();
    std::vector<double> q(nw * tnodes, 0.0);
    const double pref = K.prefactor();
    par::for_blocks(nw, budget.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<double> F(nl);
        for (std::size_t a = lo; a < hi; ++a) {
            const std::size_t mirror = nw - 1 - a;  // node of -w
            if (mirror < a) continue;
            const auto& w = wpts[a];
            double w2 = 0.0;
            for (double x : w) w2 += x * x;
            if (w2 > 4.0 * 50.0) continue;  // exp(-|w|^2/4) below 1e-21
            for (std::size_t j = 0; j < nl; ++j) {
                const double* M = &grid->M[j * m * m];
                double qf = 0.0;
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c < m; ++c) qf += w[r] * M[r * m + c] * w[c];
                F[j] = std::exp(grid->half_ld[j] - 0.25 * qf);
            }
            for (std::size_t i = 0; i < tnodes; ++i) {
                const double* cr = &cosines[i * nl];
                double acc = 0.0;
                for (std::size_t j = 0; j < nl; ++j) acc += cr[j] * F[j];
                q[a * tnodes + i] = q[mirror * tnodes + i] = pref * acc;
            }
        }
    });

    HeatMeasure mu;
    mu.m = m;
    mu.k = 1;
    mu.method = "tensor(order=" + std::to_string(order) + ")";
    double maxw = 0.0;
    for (std::size_t a = 0; a < nw; ++a)
        for (std::size_t i = 0; i < tnodes; ++i) maxw = std::max(maxw, wwts[a] * tr.w[i] * q[a * tnodes + i]);
    const double cut = budget.table_prune * maxw;
    for (std::size_t a = 0; a < nw; ++a) {
        for (std::size_t i = 0; i < tnodes; ++i) {
            double W = wwts[a] * tr.w[i] * q[a * tnodes + i];
            if (W < 0.0) {
                mu.clamped += -2.0 * W;
                continue;
            }
            if (W < cut) {
                mu.pruned += 2.0 * W;
                continue;
            }
            for (int sgn : {1, -1}) {
                mu.u.insert(mu.u.end(), wpts[a].begin(), wpts[a].end());
                mu.u.push_back(sgn * tr.x[i]);
                mu.weight.push_back(W);
            }
        }
    }
    return mu;
}

/// Importance-sampled measure: w ~ N(0, 2 I) (the exact z-marginal of q),
/// tau_l ~ Laplace(0.4 + 0.1 |w|^2), stratified in the first uniform. Weights
/// are q / (n * proposal); blocks use independent seeded substreams.
inline HeatMeasure sampled_heat_measure(const HeatKernel& K, std::size_t n, std::uint64_t stream = 0) {
    const auto& G = K.group();
    const auto& budget = K.budget();
    const int m = G.m(), k = G.k(), B = budget.mc_blocks;
    require(n >= static_cast<std::size_t>(2 * B), Errc::InvalidArgument, "too few samples for the block count");
    const std::size_t per = n / B;
    HeatMeasure mu;
    mu.m = m;
    mu.k = k;
    mu.blocks = B;
    mu.method = "sampled(n=" + std::to_string(per * B) + ")";
    const std::size_t total = per * B;
    mu.u.assign(total * (m + k), 0.0);
    mu.weight.assign(total, 0.0);
    mu.block.assign(total, 0);
    std::vector<double> clamped(B, 0.0);
    par::for_blocks(static_cast<std::size_t>(B), budget.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
            std::mt19937_64 rng(quad::seed_for(budget.seed, 0x484d4541ULL + stream, G.Q(), b));
            auto unif = [&] { return ((rng() >> 11) + 0.5) * 0x1.0p-53; };
            Vec w(m), tau(k);
            for (std::size_t i = 0; i < per; ++i) {
                double logprop = 0.0;
                for (int d = 0; d < m; d += 2) {
                    const double u1 = d == 0 ? (static_cast<double>(i) + unif()) / static_cast<double>(per) : unif();
                    const double u2 = unif();
                    const double r = std::sqrt(-2.0 * std::log(u1)) * std::numbers::sqrt2;
                    w[d] = r * std::cos(2.0 * std::numbers::pi * u2);
                    if (d + 1 < m) w[d + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
                }
                logprop += -0.25 * w.squaredNorm() - 0.5 * m * std::log(4.0 * std::numbers::pi);
                const double scale = 0.4 + 0.1 * w.squaredNorm();
                for (int l = 0; l < k; ++l) {
                    const double v = unif() - 0.5;
                    tau[l] = -scale * std::copysign(std::log(1.0 - 2.0 * std::abs(v)), v);
                    logprop += -std::abs(tau[l]) / scale - std::log(2.0 * scale);
                }
                const KernelValue kv = K.unit_time(w, -tau);
                const std::size_t idx = b * per + i;
                double* dst = &mu.u[idx * (m + k)];
                for (int d = 0; d < m; ++d) dst[d] = w[d];
                for (int l = 0; l < k; ++l) dst[m + l] = tau[l];
                mu.weight[idx] = kv.value * std::exp(-logprop) / static_cast<double>(total);
                mu.block[idx] = static_cast<int>(b);
                clamped[b] += kv.clamped * std::exp(-logprop) / static_cast<double>(total);
            }
        }
    });
    for (double c : clamped) mu.clamped += c;
    return mu;
}

/// Default discretisation for the group: the tensor table when k = 1 and
/// m = 2, otherwise the sampled measure.
inline HeatMeasure heat_measure(const HeatKernel& K, int order_offset = 0) {
    const auto& G = K.group();
    if (G.k() == 1 && G.m() == 2) return tensor_heat_measure(K, K.budget().table_order + order_offset);
    return sampled_heat_measure(K, K.budget().mc_samples, static_cast<std::uint64_t>(order_offset + 8));
}

// ---------------------------------------------------------------------------

/// Radial profile of an H-type group with k = 1, where q(w, tau) depends on
/// |w| and |tau| only. Stores the tau-CDF Psi(rho, tau) = Int_0^tau q(rho, s) ds
/// as a piecewise Chebyshev interpolant on [0, rho_max] x [0, T].
class RadialProfile {
public:
    explicit RadialProfile(const HeatKernel& K) {
        const auto& G = K.group();
        require(G.k() == 1 && is_htype_scaled(G), Errc::NotHType, "radial profile needs an H-type group with k = 1");
        const auto& budget = K.budget();
        rho_max_ = std::ceil(budget.table_z_half);
        T_ = std::ceil(budget.table_sigma_half);
        m_ = G.m();
        const int level = std::max(0, static_cast<int>(std::ceil(std::log2(T_ / (0.5 * std::numbers::pi)))));
        const auto grid = K.grid({level}, std::max(8, budget.nodes_per_unit));
        const std::size_t nl = grid->size();
        nr_ = static_cast<int>(rho_max_ / kPanel) * (kNodes - 1) + 1;
        nt_ = static_cast<int>(T_ / kPanel) * (kNodes - 1) + 1;
        std::vector<double> rho(nr_), tau(nt_);
        for (int i = 0; i < nr_; ++i) rho[i] = node(i);
        for (int i = 0; i < nt_; ++i) tau[i] = node(i);
        table_.assign(static_cast<std::size_t>(nr_) * nt_, 0.0);
        const double pref = K.prefactor();
        std::vector<double> sines(static_cast<std::size_t>(nt_) * nl);
        for (int i = 0; i < nt_; ++i)
            for (std::size_t j = 0; j < nl; ++j)
                sines[i * nl + j] = grid->weight[j] * std::sin(tau[i] * grid->lambda[j]) / grid->lambda[j];
        par::for_blocks(nr_, budget.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
            std::vector<double> F(nl);
            for (std::size_t a = lo; a < hi; ++a) {
                const double r2 = rho[a] * rho[a];
                for (std::size_t j = 0; j < nl; ++j)
                    F[j] = std::exp(grid->half_ld[j] - 0.25 * r2 * grid->M[j * m_ * m_]);
                for (int i = 0; i < nt_; ++i) {
                    const double* s = &sines[i * nl];
                    double acc = 0.0;
                    for (std::size_t j = 0; j < nl; ++j) acc += s[j] * F[j];
                    table_[a * nt_ + i] = pref * acc;
                }
            }
        });
    }

    /// Int_0^tau q(rho, s) ds (odd in tau, constant beyond |tau| = T).
    double cdf(double rho, double tau) const {
        rho = std::abs(rho);
        if (rho >= rho_max_) return 0.0;
        const double sgn = tau < 0.0 ? -1.0 : 1.0;
        tau = std::min(std::abs(tau), T_);
        return sgn * interp(rho, tau);
    }

    /// Int_{t1}^{t2} q(rho, s) ds.
    double mass(double rho, double t1, double t2) const {
        rho = std::abs(rho);
        if (t2 <= t1 || rho >= rho_max_) return 0.0;
        int r0;
        double cr[kNodes];
        bary(rho, r0, cr, nr_);
        return signed_cdf(cr, r0, t2) - signed_cdf(cr, r0, t1);
    }

    double rho_max() const { return rho_max_; }
    double tau_max() const { return T_; }

    static bool is_htype_scaled(const GroupSpec& G) {
        // A(lambda) = c^2 lambda^2 I for k = 1
        Vec one = Vec::Ones(1);
        const Mat A = G.A_of(one);
        const double c2 = A.trace() / G.m();
        return (A - c2 * Mat::Identity(G.m(), G.m())).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, c2);
    }

private:
    static constexpr double kPanel = 0.5;
    static constexpr int kNodes = 13;  // Chebyshev-Lobatto points per panel

    static double node(int i) {
        const int panel = i / (kNodes - 1), j = i % (kNodes - 1);
        const double x = -std::cos(std::numbers::pi * j / (kNodes - 1));
        return kPanel * (panel + 0.5 * (x + 1.0));
    }

    static const std::array<double, kNodes>& cheb() {
        static const std::array<double, kNodes> x = [] {
            std::array<double, kNodes> v{};
            for (int j = 0; j < kNodes; ++j) v[j] = -std::cos(std::numbers::pi * j / (kNodes - 1));
            return v;
        }();
        return x;
    }

    // barycentric weights of Chebyshev-Lobatto points
    static void bary(double x, int& first, double* coef, int n_total) {
        int panel = std::min(static_cast<int>(x / kPanel), (n_total - 1) / (kNodes - 1) - 1);
        panel = std::max(panel, 0);
        first = panel * (kNodes - 1);
        const double s = 2.0 * (x / kPanel - panel) - 1.0;
        const auto& xs = cheb();
        double denom = 0.0;
        for (int j = 0; j < kNodes; ++j) {
            const double wj = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == kNodes - 1) ? 0.5 : 1.0);
            const double diff = s - xs[j];
            if (std::abs(diff) < 1e-15) {
                for (int i = 0; i < kNodes; ++i) coef[i] = i == j ? 1.0 : 0.0;
                return;
            }
            coef[j] = wj / diff;
            denom += coef[j];
        }
        for (int j = 0; j < kNodes; ++j) coef[j] /= denom;
    }

    double interp_row(const double* cr, int r0, double tau) const {
        int t0;
        double ct[kNodes];
        bary(tau, t0, ct, nt_);
        double acc = 0.0;
        for (int a = 0; a < kNodes; ++a) {
            if (cr[a] == 0.0) continue;
            const double* row = &table_[static_cast<std::size_t>(r0 + a) * nt_ + t0];
            double s = 0.0;
            for (int b = 0; b < kNodes; ++b) s += ct[b] * row[b];
            acc += cr[a] * s;
        }
        return acc;
    }

    double signed_cdf(const double* cr, int r0, double tau) const {
        const double sgn = tau < 0.0 ? -1.0 : 1.0;
        return sgn * interp_row(cr, r0, std::min(std::abs(tau), T_));
    }

    double interp(double rho, double tau) const {
        int r0;
        double cr[kNodes];
        bary(rho, r0, cr, nr_);
        return interp_row(cr, r0, tau);
    }

    int m_ = 0, nr_ = 0, nt_ = 0;
    double rho_max_ = 10.0, T_ = 12.0;
    std::vector<double> table_;
};

} // namespace carnot
