#include <gtest/gtest.h>

#include <random>

#include "carnot/group.hpp"

using namespace carnot;

namespace {

GroupPoint random_point(std::mt19937_64& rng, int m, int k) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    GroupPoint g = GroupPoint::identity(m, k);
    for (int i = 0; i < m; ++i) g.z[i] = u(rng);
    for (int i = 0; i < k; ++i) g.sigma[i] = u(rng);
    return g;
}

Errc error_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return static_cast<Errc>(-1);
}

} // namespace

TEST(Heisenberg, Structure) {
    const auto H1 = make_heisenberg(1);
    EXPECT_EQ(H1.m(), 2);
    EXPECT_EQ(H1.k(), 1);
    EXPECT_EQ(H1.J(0)(0, 1), 1.0);
    EXPECT_EQ(H1.J(0)(1, 0), -1.0);
    Vec lam(1);
    lam << 3.0;
    EXPECT_LT((H1.A_of(lam) - 9.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(make_heisenberg(2).Q(), 6);
}

TEST(Custom, ValidationErrors) {
    Mat J(2, 2);
    J << 0, 1, -1, 0;
    EXPECT_NO_THROW(make_custom(2, 1, {J}));
    Mat S(2, 2);
    S << 0, 1, 1, 0;
    EXPECT_EQ(error_of([&] { make_custom(2, 1, {S}); }), Errc::NotSkew);
    EXPECT_EQ(error_of([&] { make_custom(2, 2, {J, 2.0 * J}); }), Errc::JNotInjective);
    EXPECT_EQ(error_of([&] { make_custom(2, 1, {Mat::Zero(2, 2)}); }), Errc::JNotInjective);
    EXPECT_EQ(error_of([&] { make_custom(17, 1, {Mat::Zero(17, 17)}); }), Errc::DimensionLimit);
    EXPECT_EQ(error_of([&] { make_custom(2, 1, {Mat::Zero(3, 3)}); }), Errc::DimensionMismatch);
    EXPECT_EQ(error_of([&] { group_from_name("lie:3"); }), Errc::ConfigError);
}

TEST(Custom, H1xRIsLegal) {
    const auto G = make_h1xr();
    Vec lam(1);
    lam << 1.0;
    const auto sd = spectral(G, lam);
    EXPECT_NEAR(sd.mu[0], 0.0, 1e-12);
    EXPECT_NEAR(sd.mu[1], 1.0, 1e-12);
    EXPECT_NEAR(sd.mu[2], 1.0, 1e-12);
}

TEST(GroupLaw, HandExpansion) {
    const auto H1 = make_heisenberg(1);
    GroupPoint a{Vec::Unit(2, 0), Vec::Zero(1)}, b{Vec::Unit(2, 1), Vec::Zero(1)};
    const auto c = multiply(H1, a, b);
    EXPECT_DOUBLE_EQ(c.z[0], 1.0);
    EXPECT_DOUBLE_EQ(c.z[1], 1.0);
    EXPECT_DOUBLE_EQ(c.sigma[0], -0.5);
}

TEST(GroupLaw, AxiomsOnRandomPoints) {
    std::mt19937_64 rng(5);
    for (const auto& G : {make_heisenberg(1), make_h1xr(), make_quaternionic(2), make_quaternionic(3)}) {
        const auto e = GroupPoint::identity(G.m(), G.k());
        for (int i = 0; i < 20; ++i) {
            const auto a = random_point(rng, G.m(), G.k()), b = random_point(rng, G.m(), G.k()),
                       c = random_point(rng, G.m(), G.k());
            const auto ab_c = multiply(G, multiply(G, a, b), c);
            const auto a_bc = multiply(G, a, multiply(G, b, c));
            EXPECT_LT((ab_c.z - a_bc.z).norm() + (ab_c.sigma - a_bc.sigma).norm(), 1e-12);
            const auto ea = multiply(G, e, a);
            EXPECT_EQ(ea.z, a.z);
            EXPECT_EQ(ea.sigma, a.sigma);
            const auto ai = multiply(G, a, inverse(a));
            EXPECT_EQ(ai.z.norm(), 0.0);
            EXPECT_EQ(ai.sigma.norm(), 0.0);
            const auto ii = inverse(inverse(a));
            EXPECT_EQ(ii.z, a.z);
        }
    }
}

TEST(Dilation, Definition) {
    const auto H1 = make_heisenberg(1);
    GroupPoint g{Vec::Unit(2, 0), Vec::Ones(1)};
    const auto d = dilate(H1, 2.0, g);
    EXPECT_DOUBLE_EQ(d.z[0], 2.0);
    EXPECT_DOUBLE_EQ(d.sigma[0], 4.0);
    const auto back = dilate(H1, 0.5, d);
    EXPECT_DOUBLE_EQ(back.sigma[0], 1.0);
    EXPECT_THROW(dilate(H1, 0.0, g), Error);
}

TEST(Dilation, IsAGroupAutomorphism) {
    std::mt19937_64 rng(8);
    const auto G = make_quaternionic(2);
    for (int i = 0; i < 10; ++i) {
        const auto a = random_point(rng, 4, 2), b = random_point(rng, 4, 2);
        const auto lhs = dilate(G, 1.7, multiply(G, a, b));
        const auto rhs = multiply(G, dilate(G, 1.7, a), dilate(G, 1.7, b));
        EXPECT_LT((lhs.sigma - rhs.sigma).norm(), 1e-12);
    }
}

TEST(Spectral, Examples) {
    const auto H1 = make_heisenberg(1);
    Vec lam(1);
    lam << 2.0;
    auto sd = spectral(H1, lam);
    EXPECT_NEAR(sd.mu[0], 2.0, 1e-13);
    EXPECT_NEAR(sd.mu[1], 2.0, 1e-13);
    auto w = kernel_weights(sd);
    EXPECT_NEAR(std::exp(w.log_det_j), 0.304087319352284, 1e-14);
    EXPECT_LT((w.M - 2.074629441455096 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-13);

    lam << 0.0;
    w = kernel_weights(H1, lam);
    EXPECT_EQ(w.log_det_j, 0.0);
    EXPECT_LT((w.M - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);

    const auto H2 = make_heisenberg(1);
    lam << 500.0;
    w = kernel_weights(H2, lam);
    EXPECT_TRUE(std::isfinite(w.log_det_j));
    EXPECT_NEAR(w.log_det_j, 2.0 * (std::log(1000.0) - 500.0), 1e-9);
}

TEST(Spectral, PropertiesOnRandomLambda) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    for (const auto& G : {make_heisenberg(2), make_h1xr(), make_quaternionic(2), make_quaternionic(3)}) {
        const bool htype = G.name().rfind("h1xr", 0) != 0;
        for (int i = 0; i < 25; ++i) {
            Vec lam(G.k());
            for (int l = 0; l < G.k(); ++l) lam[l] = 2.0 * n01(rng);
            const auto sd = spectral(G, lam);
            const Mat recon = sd.V * sd.mu.cwiseAbs2().asDiagonal() * sd.V.transpose();
            EXPECT_LT((recon - G.A_of(lam)).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_GE(sd.mu.minCoeff(), 0.0);
            EXPECT_GT(sd.mu[G.m() - 2], 0.0);  // rank A >= 2
            const auto w = kernel_weights(sd), wm = kernel_weights(G, -lam);
            EXPECT_LT((w.M - wm.M).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_NEAR(w.log_det_j, wm.log_det_j, 1e-12);
            Eigen::SelfAdjointEigenSolver<Mat> es(w.M - Mat::Identity(G.m(), G.m()));
            EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
            if (htype) {
                const double r = lam.norm();
                EXPECT_LT((w.M - special::x_over_tanh(r) * Mat::Identity(G.m(), G.m())).cwiseAbs().maxCoeff(), 1e-12);
                EXPECT_NEAR(w.log_det_j, G.m() * special::log_x_over_sinh(r), 1e-12);
            }
        }
    }
}

TEST(Frame, VectorFieldsAreLeftInvariant) {
    // X_j(g) equals the derivative of s -> g o (s e_j, 0) at s = 0.
    const auto G = make_quaternionic(3);
    std::mt19937_64 rng(2);
    const auto g = random_point(rng, 4, 3);
    const Mat X = horizontal_frame(G, g.z);
    for (int j = 0; j < 4; ++j) {
        const double h = 1e-6;
        GroupPoint step{h * Vec::Unit(4, j), Vec::Zero(3)};
        const auto gs = multiply(G, g, step);
        Vec diff(7);
        diff << (gs.z - g.z) / h, (gs.sigma - g.sigma) / h;
        EXPECT_LT((diff - X.col(j)).norm(), 1e-8);
    }
}
