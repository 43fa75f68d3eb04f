#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "carnot/heat_kernel.hpp"
#include "carnot/heat_measure.hpp"
#include "carnot/overlap.hpp"
#include "carnot/semigroup.hpp"

using namespace carnot;

namespace {

GroupPoint pt(std::initializer_list<double> z, std::initializer_list<double> s) {
    GroupPoint g{Vec(static_cast<int>(z.size())), Vec(static_cast<int>(s.size()))};
    int i = 0;
    for (double v : z) g.z[i++] = v;
    i = 0;
    for (double v : s) g.sigma[i++] = v;
    return g;
}

// Int_E p(g, g', t) dg' over a cylinder by polar Gauss rules in z'.
double cylinder_integral(const HeatKernel& K, const VerticalCylinder& c, const GroupPoint& g, double t, int n) {
    const auto r = quad::composite(0.0, c.R, c.R / 4, n);
    const auto phi = quad::composite(0.0, 2 * std::numbers::pi, std::numbers::pi / 4, n);
    const auto s = quad::composite(c.a[0], c.b[0], (c.b[0] - c.a[0]) / 4, n);
    double acc = 0.0;
    GroupPoint gp{Vec(2), Vec(1)};
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < phi.size(); ++j)
            for (std::size_t l = 0; l < s.size(); ++l) {
                gp.z << c.center[0] + r.x[i] * std::cos(phi.x[j]), c.center[1] + r.x[i] * std::sin(phi.x[j]);
                gp.sigma << s.x[l];
                acc += r.w[i] * phi.w[j] * s.w[l] * r.x[i] * K(g, gp, t).value;
            }
    return acc;
}

const HeatSemigroup& h1() {
    static const HeatSemigroup S(make_heisenberg(1));
    return S;
}

} // namespace

TEST(Kernel, HeisenbergReferenceValues) {
    const auto& K = h1().kernel();
    const auto e = GroupPoint::identity(2, 1);
    const auto v = K(e, e, 1.0);
    EXPECT_NEAR(v.value, 0.0625, 1e-11);
    EXPECT_LT(v.error, 1e-10);
    EXPECT_NEAR(K(e, pt({1, 0}, {0.5}), 1.0).value, 0.0270405882365690, 1e-11);
}

TEST(Kernel, ScalarRouteAgrees) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const char* name : {"heisenberg:1", "heisenberg:2", "htype:2"}) {
        const auto G = group_from_name(name);
        const HeatKernel K(G);
        for (int rep = 0; rep < 4; ++rep) {
            GroupPoint g = GroupPoint::identity(G.m(), G.k()), h = g;
            for (int i = 0; i < G.m(); ++i) g.z[i] = u(rng), h.z[i] = u(rng);
            for (int i = 0; i < G.k(); ++i) g.sigma[i] = u(rng), h.sigma[i] = u(rng);
            const double t = 0.5 + 0.25 * rep;
            const double a = K(g, h, t).value;
            const double b = kernel_htype(G, g, h, t).value;
            EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(b))) << name;
        }
    }
}

TEST(Kernel, ProductStructureOfH1xR) {
    const HeatKernel K(make_h1xr());
    const HeatKernel K1(make_heisenberg(1));
    const auto g = pt({0.3, -0.7, 1.1}, {0.4});
    const auto e = GroupPoint::identity(3, 1);
    const double t = 0.8;
    const double expect = K1(pt({0.3, -0.7}, {0.4}), GroupPoint::identity(2, 1), t).value *
                          std::exp(-1.1 * 1.1 / (4 * t)) / std::sqrt(4 * std::numbers::pi * t);
    EXPECT_NEAR(K(g, e, t).value, expect, 1e-11);
}

TEST(Kernel, SymmetryAndLeftInvariance) {
    const auto G = make_heisenberg(2);
    const HeatKernel K(G);
    const auto g = pt({0.2, -0.4, 0.9, 0.1}, {0.3});
    const auto h = pt({-0.5, 0.6, 0.0, 0.7}, {-0.8});
    const auto x = pt({1.0, 0.5, -0.3, 0.2}, {1.4});
    const double t = 0.7;
    const double p = K(g, h, t).value;
    EXPECT_NEAR(K(h, g, t).value, p, 1e-12);
    EXPECT_NEAR(K(multiply(G, x, g), multiply(G, x, h), t).value, p, 1e-12);
}

TEST(Kernel, EuclideanGaussian) {
    Vec x(2), y(2);
    x << 0.0, 0.0;
    y << 1.0, 1.0;
    EXPECT_NEAR(kernel_euclidean(2, x, y, 0.5), std::exp(-1.0) / (2 * std::numbers::pi), 1e-15);
}

TEST(Measure, TensorTableMass) {
    const auto& mu = h1().measure();
    EXPECT_FALSE(mu.sampled());
    EXPECT_NEAR(mu.mass(), 1.0, 1e-9);
    const auto r = selftest_normalization(h1());
    EXPECT_LT(r.deviation, 1e-9);
}

TEST(Measure, SampledMassWithinError) {
    const HeatKernel K(group_from_name("htype:2"));
    const auto mu = sampled_heat_measure(K, 4096);
    const auto one = integrate(mu, 1, [](std::size_t) { return 1.0; });
    EXPECT_NEAR(one.value, 1.0, 5.0 * one.error + 1e-3);
}

TEST(Measure, RadialProfileMarginal) {
    const auto& P = h1().profile();
    for (double rho : {0.0, 0.7, 2.3, 4.1}) {
        const double half = 0.5 * std::exp(-rho * rho / 4) / (4 * std::numbers::pi);
        EXPECT_NEAR(P.cdf(rho, 1e9), half, 1e-12) << rho;
        EXPECT_NEAR(P.cdf(rho, -1e9), -half, 1e-12);
    }
    // derivative in tau is the kernel
    const double rho = 1.3, tau = 0.8, h = 1e-4;
    const double dq = (P.cdf(rho, tau + h) - P.cdf(rho, tau - h)) / (2 * h);
    EXPECT_NEAR(dq, h1().kernel().unit_time(Vec::Constant(2, rho / std::sqrt(2.0)), Vec::Constant(1, tau)).value, 1e-8);
}

TEST(Overlap, ZeroShift) {
    const auto G = make_heisenberg(1);
    VerticalCylinder c{Vec::Zero(2), 1.0, Vec::Zero(1), Vec::Ones(1)};
    const double w[2] = {0.0, 0.0};
    const double tau = 0.3;
    EXPECT_NEAR(overlap(G, c, w, &tau), std::numbers::pi * 0.7, 1e-14);
}

TEST(Overlap, ClosedFormAgainstGenericQuadrature) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (const char* name : {"heisenberg:1", "h1xr", "heisenberg:2"}) {
        const auto G = group_from_name(name);
        const int m = G.m();
        Vec center = Vec::Zero(m);
        center[0] = 0.3;
        VerticalCylinder c{center, 1.0, Vec::Zero(1), Vec::Ones(1)};
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<double> w(m);
            for (double& x : w) x = u(rng);
            const double tau = 0.4 * u(rng);
            const double exact = overlap_cylinder_k1(G, c, w.data(), tau);
            const double generic = overlap_cylinder_generic(G, c, w.data(), &tau, 16);
            EXPECT_NEAR(exact, generic, 2e-4 * std::max(1e-2, exact)) << name;
        }
    }
}

TEST(Overlap, CylinderAgainstBruteForce) {
    const auto G = make_heisenberg(1);
    VerticalCylinder c{Vec::Zero(2), 1.0, Vec::Zero(1), Vec::Ones(1)};
    const double w[2] = {0.6, -0.3};
    const double tau = 0.15;
    GroupPoint h{Vec(2), Vec(1)};
    h.z << w[0], w[1];
    h.sigma << tau;
    // fine midpoint grid over the cylinder
    const int n = 600;
    double hits = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int s = 0; s < 40; ++s) {
                GroupPoint g{Vec(2), Vec(1)};
                g.z << -1.0 + (i + 0.5) * 2.0 / n, -1.0 + (j + 0.5) * 2.0 / n;
                g.sigma << (s + 0.5) / 40.0;
                if (g.z.norm() >= 1.0) continue;
                if (contains(Region(c), multiply(G, g, h))) hits += 1.0;
            }
    const double brute = hits * (4.0 / (n * n)) / 40.0;
    EXPECT_NEAR(overlap_cylinder_k1(G, c, w, tau), brute, 5e-3);
}

TEST(Overlap, LensVolumes) {
    for (int d = 1; d <= 6; ++d) {
        EXPECT_NEAR(detail::lens_volume(d, 1.0, 0.0), special::unit_ball_volume(d), 1e-13) << d;
        EXPECT_EQ(detail::lens_volume(d, 1.0, 2.0), 0.0);
    }
    // general formula agrees with the closed forms
    const double a = 0.7;
    const double v2 = special::unit_ball_volume(2) * boost::math::ibeta(1.5, 0.5, 1.0 - a * a / 4);
    EXPECT_NEAR(detail::lens_volume(2, 1.0, a), v2, 1e-13);
    const double v3 = special::unit_ball_volume(3) * boost::math::ibeta(2.0, 0.5, 1.0 - a * a / 4);
    EXPECT_NEAR(detail::lens_volume(3, 1.0, a), v3, 1e-13);
}

TEST(Semigroup, PlanarAgreesWithKernelIntegral) {
    const auto& S = h1();
    const VerticalCylinder cyl{Vec::Zero(2), 1.0, Vec::Zero(1), Vec::Ones(1)};
    const Region E = cyl;
    for (const auto& g : {pt({0.2, 0.1}, {0.5}), pt({0.9, -0.2}, {0.95}), pt({1.2, 0.3}, {0.4})}) {
        for (double t : {0.25, 0.5}) {
            const auto a = apply_to_indicator(S, E, g, t);
            const double ref = cylinder_integral(S.kernel(), cyl, g, t, 8);
            EXPECT_NEAR(a.value, ref, 1e-6) << to_string(g) << " t=" << t;
            EXPECT_LT(a.error, 1e-6);
            // the tensor table handles the indicator only to first order
            const auto b = indicator_measure(S, E, g, t, false, S.measure());
            EXPECT_NEAR(a.value, b.value, 1e-2);
            const auto c = apply_to_indicator(S, E, g, t, true);
            EXPECT_NEAR(a.value + c.value, 1.0, 1e-8);
        }
    }
}

TEST(Semigroup, BoxRegion) {
    const auto& S = h1();
    Vec lo(3), hi(3);
    lo << -1, -0.5, 0;
    hi << 1, 0.5, 1;
    const Region E = CoordinateBox{lo, hi};
    const auto g = pt({0.4, 0.2}, {0.6});
    const auto a = apply_to_indicator(S, E, g, 0.2);
    const auto b = indicator_measure(S, E, g, 0.2, false, S.measure());
    EXPECT_NEAR(a.value, b.value, 1e-2);
}

TEST(Semigroup, ValueInUnitInterval) {
    const auto& S = h1();
    const Region E = VerticalCylinder{Vec::Zero(2), 1.0, Vec::Zero(1), Vec::Ones(1)};
    const auto v = apply_to_indicator(S, E, pt({0, 0}, {0.5}), 1e-3);
    EXPECT_GE(v.value, 0.0);
    EXPECT_LE(v.value, 1.0);
    EXPECT_NEAR(v.value, 1.0, 1e-6);
}

TEST(SelfTest, Scaling) {
    std::vector<GroupPoint> samples{pt({0.3, 0.1}, {0.2}), pt({-1.0, 0.5}, {-0.7}), pt({0, 0}, {1.5})};
    EXPECT_LT(selftest_scaling(h1(), samples, 1.7), 1e-9);
    EXPECT_LT(selftest_scaling(h1(), samples, 0.4, 0.6), 1e-9);
}

TEST(SelfTest, VerticalMarginal) {
    const auto g = pt({0.3, -0.2}, {0.1});
    Vec zp(2);
    zp << -0.4, 0.5;
    for (double t : {0.5, 1.0, 2.0}) {
        const auto r = vertical_marginal(h1(), g, zp, t);
        EXPECT_LT(r.deviation, 1e-8) << t;
    }
}

TEST(SelfTest, ChapmanKolmogorov) {
    const auto r = selftest_chapman_kolmogorov(h1(), pt({0.1, 0.2}, {0.0}), pt({0.5, -0.3}, {0.4}), 0.5, 0.7, 4096);
    EXPECT_LT(r.deviation, 5.0 * r.error + 1e-4);
}
