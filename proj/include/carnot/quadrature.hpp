#pragma once

// Gauss-Legendre rules, composite panel rules, tensor products and the small
// amount of sampling machinery shared by every integrator in the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "carnot/error.hpp"

namespace carnot::quad {

/// A one-dimensional rule: nodes and weights.
struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;

    std::size_t size() const { return x.size(); }

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
        return acc;
    }

    void append(const Rule1D& other) {
        x.insert(x.end(), other.x.begin(), other.x.end());
        w.insert(w.end(), other.w.begin(), other.w.end());
    }
};

namespace detail {

inline Rule1D compute_gauss_legendre(int n) {
    Rule1D rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    return rule;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are computed once per order.
inline const Rule1D& gauss_legendre(int n) {
    require(n >= 1 && n <= 512, Errc::InvalidArgument, "Gauss-Legendre order out of range");
    static std::mutex mutex;
    static std::map<int, Rule1D> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

/// Gauss-Legendre rule mapped to [a, b].
inline Rule1D gauss_legendre(double a, double b, int n) {
    const Rule1D& ref = gauss_legendre(n);
    Rule1D out;
    out.x.resize(n);
    out.w.resize(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        out.x[i] = c + h * ref.x[i];
        out.w[i] = h * ref.w[i];
    }
    return out;
}

/// Composite rule on [a, b]: panels no wider than `max_width`, split at every
/// breakpoint inside (a, b), `order` nodes per panel.
inline Rule1D composite(double a, double b, double max_width, int order, std::span<const double> breakpoints = {}) {
    require(b >= a && max_width > 0.0, Errc::InvalidArgument, "composite rule: bad interval");
    std::vector<double> cuts{a};
    std::vector<double> inner(breakpoints.begin(), breakpoints.end());
    std::sort(inner.begin(), inner.end());
    for (double c : inner)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    Rule1D out;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        if (hi <= lo) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width - 1e-12)));
        const double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) out.append(gauss_legendre(lo + p * h, lo + (p + 1) * h, order));
    }
    return out;
}

/// Composite rule whose panels shrink geometrically toward `a`; used for
/// integrands with a weak endpoint singularity.
inline Rule1D graded(double a, double b, int levels, int order, double ratio = 0.25) {
    Rule1D out;
    double hi = b;
    for (int l = 0; l < levels; ++l) {
        const double lo = a + (hi - a) * ratio;
        out.append(gauss_legendre(lo, hi, order));
        hi = lo;
    }
    out.append(gauss_legendre(a, hi, order));
    return out;
}

/// Iterate over the tensor product of 1-D rules; `f(point, weight)`.
template <class F>
void for_each_tensor(std::span<const Rule1D> rules, F&& f) {
    const std::size_t d = rules.size();
    if (d == 0) return;
    for (const auto& r : rules)
        if (r.size() == 0) return;
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> point(d);
    while (true) {
        double w = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            point[j] = rules[j].x[idx[j]];
            w *= rules[j].w[idx[j]];
        }
        f(std::span<const double>(point), w);
        std::size_t j = 0;
        while (j < d && ++idx[j] == rules[j].size()) idx[j++] = 0;
        if (j == d) break;
    }
}

/// Composite Simpson on uniformly spaced samples; falls back to a trapezoid
/// on the final interval when the interval count is odd.
inline double simpson(std::span<const double> y, double h) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (y[0] + y[1]);
    const std::size_t intervals = n - 1;
    const std::size_t even = intervals - intervals % 2;
    double acc = 0.0;
    for (std::size_t i = 0; i + 2 <= even; i += 2) acc += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    if (even != intervals) acc += 0.5 * h * (y[n - 2] + y[n - 1]);
    return acc;
}

inline double trapezoid(std::span<const double> y, double h) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) acc += 0.5 * h * (y[i] + y[i + 1]);
    return acc;
}

/// SplitMix64 finaliser; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t seed_for(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return mix64(mix64(mix64(master ^ mix64(a)) ^ mix64(b + 0x1234567ULL)) ^ mix64(c + 0x89abcdefULL));
}

/// Radical inverse in base `base` (Halton coordinate).
inline double radical_inverse(std::uint64_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

inline constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

} // namespace carnot::quad
