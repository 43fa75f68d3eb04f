// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "carnot/carnot.hpp"

using namespace carnot;

namespace {

// tolerances and runtime limits
constexpr double kDiagonalTol = 1e-8, kDiagonalSeconds = 1.0;
constexpr double kMassTol = 1e-3, kMassSeconds = 120.0;
constexpr double kScalingTol = 1e-8;
constexpr double kMarginalTol = 1e-6;
constexpr double kPhiDirectTol = 1e-3, kPhiInversionTol = 1e-6, kPhiSeconds = 600.0;
constexpr double kHalfspaceTol = 1e-10, kBallTol = 5e-3, kDav2Tol = 1e-2, kEquivalenceTol = 1e-2, kEuclidSeconds = 300.0;
constexpr double kPerimeterTol = 1e-6, kLowerBoundMin = 6.0;
constexpr double kLedouxTol = 0.05, kLedouxSeconds = 1200.0;
constexpr double kBbmTol = 0.05, kBbmSeconds = 1800.0;
constexpr double kAgreementTol = 1e-3;

const double kPerimeter = 8.0 * std::numbers::pi / 3.0;
const double kLedouxTarget = special::four_over_sqrt_pi * kPerimeter;

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void expect(bool ok, const std::string& what) {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { lines.push_back("     " + what); }
};

std::string f(double x, int digits = 10) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

GroupPoint pt(std::initializer_list<double> z, std::initializer_list<double> s) {
    Vec a(static_cast<int>(z.size())), b(static_cast<int>(s.size()));
    int i = 0;
    for (double v : z) a[i++] = v;
    i = 0;
    for (double v : s) b[i++] = v;
    return {a, b};
}

Vec unit(std::initializer_list<double> v) {
    Vec x(static_cast<int>(v.size()));
    int i = 0;
    for (double c : v) x[i++] = c;
    return x.normalized();
}

} // namespace

int main() {
    const auto H1 = make_heisenberg(1);
    const auto cyl = region_from_name("cylinder:1,1", H1);
    std::unique_ptr<HeatSemigroup> S;  // shared by criteria 2-4 and 8-10
    std::optional<DeficitCurve> curve;

    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

    criteria.emplace_back("H1 diagonal kernel", [&] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        const HeatKernel K(H1);
        const auto e = GroupPoint::identity(2, 1);
        const auto v = K(e, e, 1.0);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // Int_0^inf x / sinh x dx = pi^2 / 4 gives p(e, e, 1) = 1/16
        o.expect(std::abs(v.value - 0.0625) <= kDiagonalTol, "p(e,e,1) = " + f(v.value, 16) + " +- " + f(v.error, 2) + " vs 1/16");
        o.expect(sec < kDiagonalSeconds, "runtime " + f(sec, 3) + " s < " + f(kDiagonalSeconds) + " s");
        return o;
    });

    criteria.emplace_back("kernel normalization", [&] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        S = std::make_unique<HeatSemigroup>(H1);
        const auto r = selftest_normalization(*S);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.expect(r.deviation <= kMassTol, "|Int p - 1| = " + f(r.deviation, 3) + " (error " + f(r.error, 2) + ")");
        o.expect(sec < kMassSeconds, "runtime " + f(sec, 3) + " s < " + f(kMassSeconds) + " s");
        return o;
    });

    criteria.emplace_back("dilation scaling", [&] {
        Outcome o;
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        std::vector<GroupPoint> samples;
        for (int i = 0; i < 20; ++i) samples.push_back(pt({u(rng), u(rng)}, {u(rng)}));
        for (double r : {0.5, 2.0}) {
            const double dev = selftest_scaling(*S, samples, r);
            o.expect(dev <= kScalingTol, "r = " + f(r) + ": max relative deviation " + f(dev, 3) + " over 20 points");
        }
        return o;
    });

    criteria.emplace_back("vertical marginal", [&] {
        Outcome o;
        const std::vector<std::tuple<GroupPoint, std::vector<double>, double>> cases{
            {pt({0, 0}, {0}), {0, 0}, 1.0},
            {pt({0.3, -0.2}, {0.1}), {-0.4, 0.5}, 0.5},
            {pt({1, 0}, {2}), {0, 1}, 1.0},
            {pt({-0.7, 1.1}, {-0.5}), {0.2, -0.3}, 2.0},
            {pt({2, 1}, {0.4}), {1.5, 0.5}, 0.25},
        };
        for (const auto& [g, z, t] : cases) {
            const Vec zp = Eigen::Map<const Vec>(z.data(), 2);
            const auto r = vertical_marginal(*S, g, zp, t);
            o.expect(r.deviation <= kMarginalTol, to_string(g) + " z'=(" + f(z[0]) + "," + f(z[1]) + ") t=" + f(t) +
                                                      ": deviation " + f(r.deviation, 3));
        }
        return o;
    });

    criteria.emplace_back("phi universality", [&] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        const double target = special::inv_sqrt_4pi;
        const std::vector<std::pair<std::string, Vec>> cases{
            {"heisenberg:1", unit({1, 0})}, {"heisenberg:1", unit({1, 1})}, {"h1xr", unit({1, 0, 0})},
            {"h1xr", unit({0, 0, 1})},      {"htype:2", unit({1, 0, 0, 0})},
        };
        for (const auto& [name, nu] : cases) {
            const auto r = phi_direct(group_from_name(name), nu);
            std::string dir;
            for (int i = 0; i < nu.size(); ++i) dir += (i ? "," : "") + f(nu[i], 4);
            o.expect(std::abs(r.value - target) <= kPhiDirectTol,
                     "direct " + name + " nu=(" + dir + "): " + f(r.value, 12) + " +- " + f(r.error, 2));
        }
        const auto inv = phi_via_inversion(H1, unit({1, 0}));
        o.expect(std::abs(inv.value - target) <= kPhiInversionTol, "inversion heisenberg:1: " + f(inv.value, 15) + " +- " + f(inv.error, 2));
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.expect(sec <= kPhiSeconds, "runtime " + f(sec, 3) + " s <= " + f(kPhiSeconds) + " s");
        return o;
    });

    criteria.emplace_back("Euclidean oracles", [&] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        for (double t : {1e-4, 1.0, 100.0}) {
            const double v = halfspace_ledoux(1, t);
            o.expect(std::abs(v - special::four_over_sqrt_pi) <= kHalfspaceTol, "half-space Ledoux t=" + f(t) + ": " + f(v, 16));
        }
        const auto g = gagliardo_bruteforce({1, EuclideanBall{Vec::Zero(1), 1.0}}, 0.25);
        const double exact = 16.0 * std::sqrt(2.0);
        o.expect(std::abs(g.value / exact - 1.0) <= kBallTol, "double integral " + f(g.value, 12) + " vs 16 sqrt 2 = " + f(exact, 12));
        const auto d = dav2_check();
        o.expect(d.deviation <= kDav2Tol, "dav2 limit " + f(d.limit, 8) + " +- " + f(d.limit_error, 3) + " vs 8/sqrt(pi) = " +
                                              f(d.target, 8) + ", deviation " + f(d.deviation, 3));
        std::string vals;
        for (std::size_t i = 0; i < d.values.size(); ++i) vals += (i ? ", " : "") + f(d.grid[i], 3) + ":" + f(d.values[i], 7);
        o.info("dav2 sequence " + vals);
        const auto q = dav2_closed_form({0.40, 0.42, 0.44, 0.46, 0.47, 0.48, 0.49});
        o.info("closed-form sequence, 7 points, quadratic fit: limit " + f(q.limit, 8) + ", deviation " + f(q.deviation, 3));
        const CoordinateBox support{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
        for (double p : {1.0, 2.0}) {
            const auto r = equivalence_check(1, cosine_bump, support, 0.3, p);
            o.expect(r.deviation <= kEquivalenceTol, "seminorm equivalence p=" + f(p) + ": " + f(r.lhs, 12) + " vs " + f(r.rhs, 12));
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.expect(sec <= kEuclidSeconds, "runtime " + f(sec, 3) + " s <= " + f(kEuclidSeconds) + " s");
        return o;
    });

    criteria.emplace_back("horizontal perimeter", [&] {
        Outcome o;
        const auto p = horizontal_perimeter(H1, cyl);
        o.expect(std::abs(p.value - kPerimeter) <= kPerimeterTol,
                 "P_H = " + f(p.value, 14) + " (refinement level " + std::to_string(p.level) + ", change " + f(p.error, 2) + ") vs 8 pi/3");
        const auto lb = variational_lower_bound(H1, cyl, cylinder_normal_field(H1, std::get<VerticalCylinder>(cyl)));
        o.expect(lb.value >= kLowerBoundMin && lb.value <= kPerimeter + kPerimeterTol,
                 "variational lower bound " + f(lb.value, 12) + " in [" + f(kLowerBoundMin) + ", 8 pi/3]");
        return o;
    });

    criteria.emplace_back("Ledoux plateau", [&] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = ledoux_plateau(*S, cyl, {3e-4, 1e-3, 3e-3});
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool monotone = true;
        for (std::size_t i = 1; i < r.values.size(); ++i)
            monotone = monotone && std::abs(r.values[i - 1] - kLedouxTarget) <= std::abs(r.values[i] - kLedouxTarget);
        const bool within = std::abs(r.limit / kLedouxTarget - 1.0) <= kLedouxTol;
        const bool bracketed = monotone && std::abs(r.limit - kLedouxTarget) <= r.limit_error;
        o.expect(within || bracketed, "limit " + f(r.limit, 8) + " +- " + f(r.limit_error, 2) + " vs " + f(kLedouxTarget, 10) +
                                          ", deviation " + f(std::abs(r.limit / kLedouxTarget - 1.0), 3));
        std::string vals;
        for (std::size_t i = 0; i < r.values.size(); ++i) vals += (i ? ", " : "") + f(r.grid[i], 2) + ":" + f(r.values[i], 8);
        o.info("ledoux(t) " + vals + (monotone ? " (monotone toward target)" : " (not monotone)"));
        o.expect(sec <= kLedouxSeconds, "runtime " + f(sec, 3) + " s <= " + f(kLedouxSeconds) + " s");
        return o;
    });

    criteria.emplace_back("BBM limit", [&] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        curve = deficit_curve(*S, cyl);
        const auto r = bbm_limit(*curve, {0.40, 0.44, 0.47, 0.49}, kLedouxTarget);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.expect(r.deviation <= kBbmTol, "limit " + f(r.limit, 8) + " +- " + f(r.limit_error, 3) + " vs " + f(kLedouxTarget, 10) +
                                             ", deviation " + f(r.deviation, 3));
        o.expect(r.residual <= r.propagated_error,
                 "fit residual " + f(r.residual, 3) + " <= propagated error " + f(r.propagated_error, 3));
        std::string vals;
        for (std::size_t i = 0; i < r.values.size(); ++i) vals += (i ? ", " : "") + f(r.grid[i], 3) + ":" + f(r.values[i], 7);
        o.info("(1-2s) P_s " + vals);
        const auto q = bbm_limit(*curve, {0.40, 0.42, 0.44, 0.46, 0.48, 0.49, 0.495}, kLedouxTarget);
        o.info("7-point grid, quadratic fit: limit " + f(q.limit, 8) + ", deviation " + f(q.deviation, 3) + ", residual " +
               f(q.residual, 3) + ", propagated " + f(q.propagated_error, 3));
        o.expect(sec <= kBbmSeconds, "runtime " + f(sec, 3) + " s <= " + f(kBbmSeconds) + " s");
        return o;
    });

    criteria.emplace_back("inequality suite", [&] {
        Outcome o;
        for (double s : {0.30, 0.40, 0.45})
            for (double eps : {0.1, 0.01}) {
                const auto b = check_upper_bound_ve(*curve, s, eps);
                o.expect(b.margin >= -b.error, "upper bound s=" + f(s) + " eps=" + f(eps) + ": margin " + f(b.margin, 6) + " (error " +
                                                   f(b.error, 2) + ")");
            }
        double worst = -1e300;
        for (std::size_t i = 0; i < curve->size(); ++i) worst = std::max(worst, curve->deficit[i] - 2.0 * curve->volume);
        o.expect(worst <= 0.0, "max over the curve of deficit - 2|E| = " + f(worst, 6));

        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        double lo = 1.0, hi = 0.0, clamped = 0.0;
        int n = 0;
        for (int i = 0; i < 24; ++i) {
            const auto g = pt({u(rng), u(rng)}, {u(rng)});
            for (double t : {1e-3, 0.1, 1.0, 10.0})
                for (bool complement : {false, true}) {
                    const auto v = apply_to_indicator(*S, cyl, g, t, complement);
                    lo = std::min(lo, v.value);
                    hi = std::max(hi, v.value);
                    clamped = std::max(clamped, v.clamped);
                    ++n;
                }
        }
        o.expect(lo >= 0.0 && hi <= 1.0, std::to_string(n) + " indicator values in [" + f(lo, 6) + ", " + f(hi, 6) +
                                             "], largest clamp " + f(clamped, 2));

        const auto direct = heat_deficit_collar(*S, std::get<VerticalCylinder>(cyl), 0.1);
        const auto decomposed = heat_deficit(*S, cyl, 0.1);
        const double rel = std::abs(direct.value / decomposed.value - 1.0);
        o.expect(rel <= kAgreementTol, "deficit at t=0.1: collar " + f(direct.value, 10) + ", overlap " + f(decomposed.value, 10) +
                                           ", relative difference " + f(rel, 3));
        return o;
    });

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.expect(false, std::string("raised ") + e.what());
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("criterion %zu: %s  %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), sec);
        for (const auto& l : o.lines) std::printf("    %s\n", l.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
