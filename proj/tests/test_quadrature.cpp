#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "carnot/parallel.hpp"
#include "carnot/quadrature.hpp"
#include "carnot/special.hpp"

using namespace carnot;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    for (int n : {1, 2, 5, 8, 20}) {
        const auto& r = quad::gauss_legendre(n);
        for (int p = 0; p < 2 * n; ++p) {
            const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
            EXPECT_NEAR(r.integrate([&](double x) { return std::pow(x, p); }), exact, 1e-13) << n << " " << p;
        }
    }
}

TEST(GaussLegendre, WeightsArePositiveAndSumToTwo) {
    const auto& r = quad::gauss_legendre(64);
    double s = 0.0;
    for (double w : r.w) {
        EXPECT_GT(w, 0.0);
        s += w;
    }
    EXPECT_NEAR(s, 2.0, 1e-13);
}

TEST(Composite, SplitsAtBreakpoints) {
    const double bp[] = {0.3};
    const auto r = quad::composite(0.0, 1.0, 0.25, 6, bp);
    EXPECT_NEAR(r.integrate([](double x) { return std::abs(x - 0.3); }), 0.5 * (0.09 + 0.49), 1e-14);
}

TEST(Tensor, ProductOfGaussiansMatchesClosedForm) {
    std::vector<quad::Rule1D> rules(3, quad::composite(-8.0, 8.0, 1.0, 8));
    double acc = 0.0;
    quad::for_each_tensor(std::span<const quad::Rule1D>(rules), [&](std::span<const double> p, double w) {
        acc += w * std::exp(-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
    });
    EXPECT_NEAR(acc, std::pow(std::numbers::pi, 1.5), 1e-10);
}

TEST(Simpson, ExactForCubics) {
    std::vector<double> y;
    for (int i = 0; i <= 10; ++i) y.push_back(std::pow(0.1 * i, 3));
    EXPECT_NEAR(quad::simpson(y, 0.1), 0.25, 1e-14);
}

TEST(Special, ScalarFunctionsAcrossRanges) {
    EXPECT_DOUBLE_EQ(special::x_over_sinh(0.0), 1.0);
    EXPECT_DOUBLE_EQ(special::x_over_tanh(0.0), 1.0);
    EXPECT_NEAR(special::x_over_sinh(2.0) * special::x_over_sinh(2.0), 0.304087319352284, 1e-14);
    EXPECT_NEAR(special::x_over_tanh(2.0), 2.074629441455096, 1e-14);
    for (double x : {5e-5, 9.9e-5, 1.01e-4, 29.9, 30.1}) {
        EXPECT_NEAR(special::x_over_sinh(x), x / std::sinh(x), 1e-15);
        EXPECT_NEAR(special::x_over_tanh(x), x / std::tanh(x), 1e-13 * x);
    }
    EXPECT_NEAR(special::log_x_over_sinh(500.0), std::log(1000.0) - 500.0, 1e-12);
    EXPECT_TRUE(std::isfinite(special::log_x_over_sinh(1e6)));
}

TEST(Seeding, DistinctStreams) {
    EXPECT_NE(quad::seed_for(1, 2, 3), quad::seed_for(1, 2, 4));
    EXPECT_NE(quad::seed_for(1, 2, 3), quad::seed_for(2, 2, 3));
    EXPECT_EQ(quad::seed_for(7, 8, 9), quad::seed_for(7, 8, 9));
}

TEST(Parallel, SumIndependentOfWorkerCount) {
    auto f = [](std::size_t i) { return 1.0 / (1.0 + static_cast<double>(i)); };
    const double a = par::sum(100000, 1, f), b = par::sum(100000, 3, f);
    EXPECT_EQ(a, b);
}
