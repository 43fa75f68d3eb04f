#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "carnot/regions.hpp"

using namespace carnot;

namespace {

Errc error_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return static_cast<Errc>(-1);
}

} // namespace

TEST(Regions, ParseBuiltins) {
    const auto G = make_heisenberg(1);
    const auto E = region_from_name("cylinder:1,1", G);
    ASSERT_TRUE(std::holds_alternative<VerticalCylinder>(E));
    EXPECT_NEAR(volume(E), std::numbers::pi, 1e-15);
    const auto B = region_from_name("box:-1,1,-0.5,0.5,0,1", G);
    EXPECT_NEAR(volume(B), 2.0, 1e-15);
    EXPECT_EQ(error_of([&] { region_from_name("cylinder:1", G); }), Errc::ConfigError);
    EXPECT_EQ(error_of([&] { region_from_name("box:1,0,0,1,0,1", G); }), Errc::ConfigError);
    EXPECT_EQ(error_of([&] { region_from_name("cylinder:1,x", G); }), Errc::ConfigError);
    EXPECT_EQ(error_of([&] { region_from_name("torus:1", G); }), Errc::ConfigError);
}

TEST(Regions, Containment) {
    const auto G = make_heisenberg(1);
    const auto E = region_from_name("cylinder:1,1", G);
    GroupPoint g{Vec(2), Vec(1)};
    g.z << 0.5, 0.5;
    g.sigma << 0.5;
    EXPECT_TRUE(contains(E, g));
    g.sigma << 1.0;
    EXPECT_FALSE(contains(E, g));  // open set
    g.sigma << 0.5;
    g.z << 1.0, 0.0;
    EXPECT_FALSE(contains(E, g));
}

TEST(Regions, HalfSpaceIsUnbounded) {
    const auto G = make_heisenberg(1);
    const auto H = region_from_name("halfspace:0", G);
    EXPECT_FALSE(is_bounded(H));
    EXPECT_EQ(error_of([&] { volume(H); }), Errc::Unbounded);
    EXPECT_EQ(error_of([&] { horizontal_perimeter(G, H); }), Errc::Unbounded);
}

TEST(Regions, DimensionMismatch) {
    const auto G = make_heisenberg(2);
    const Region E = VerticalCylinder{Vec::Zero(2), 1.0, Vec::Zero(1), Vec::Ones(1)};
    EXPECT_EQ(error_of([&] { check_region(G, E); }), Errc::DimensionMismatch);
}

TEST(Perimeter, UnitCylinderClosedForm) {
    const auto G = make_heisenberg(1);
    const auto r = horizontal_perimeter(G, region_from_name("cylinder:1,1", G));
    EXPECT_NEAR(r.value, 8.0 * std::numbers::pi / 3.0, 1e-9);
    EXPECT_LT(r.error, 1e-6);
}

TEST(Perimeter, CylinderFamily) {
    // lateral 2 pi R h plus two faces of Int_B |z|/2 = pi R^3 / 3
    const auto G = make_heisenberg(1);
    for (auto [R, h] : {std::pair{2.0, 0.5}, std::pair{0.5, 3.0}}) {
        const Region E = VerticalCylinder{Vec::Zero(2), R, Vec::Zero(1), Vec::Constant(1, h)};
        const double expect = 2 * std::numbers::pi * R * h + 2 * std::numbers::pi * R * R * R / 3;
        EXPECT_NEAR(horizontal_perimeter(G, E).value, expect, 1e-8 * expect);
    }
}

TEST(Perimeter, H1xRCylinder) {
    // lateral 4 pi, faces Int_{B^3} |(z1, z2)|/2 = pi^2/8 each
    const auto G = make_h1xr();
    const auto r = horizontal_perimeter(G, region_from_name("cylinder:1,1", G));
    EXPECT_NEAR(r.value, 4 * std::numbers::pi + std::numbers::pi * std::numbers::pi / 4, 1e-7);
}

TEST(Perimeter, Box) {
    const auto G = make_heisenberg(1);
    const auto r = horizontal_perimeter(G, region_from_name("box:-1,1,-0.5,0.5,0,1", G));
    // vertical faces have |N_H| = 1
    const double faces = 2 * 1.0 + 2 * 2.0;
    const double caps = 2 * 0.59323341606894986284;  // Int |z|/2 over the rectangle, by mpmath
    EXPECT_NEAR(r.value, faces + caps, 1e-6);
}

TEST(Perimeter, DilationScaling) {
    const auto G = make_heisenberg(1);
    const auto E = region_from_name("cylinder:1,1", G);
    const double r = 1.7;
    const double base = horizontal_perimeter(G, E).value;
    EXPECT_NEAR(horizontal_perimeter(G, dilate(G, r, E)).value, std::pow(r, G.Q() - 1) * base, 1e-8 * base);
}

TEST(Perimeter, BallIsFinite) {
    const auto G = make_heisenberg(1);
    const auto r = horizontal_perimeter(G, region_from_name("ball:1", G));
    // |N_H| <= |N| (1 + |z|/2), so the value sits between 0 and 4 pi * 1.5
    EXPECT_GT(r.value, 0.0);
    EXPECT_LT(r.value, 6 * std::numbers::pi);
    EXPECT_LT(r.error, 1e-5 * r.value);
}

TEST(Variational, CylinderFieldIsNearOptimal) {
    const auto G = make_heisenberg(1);
    const auto E = region_from_name("cylinder:1,1", G);
    const auto zeta = cylinder_normal_field(G, std::get<VerticalCylinder>(E));
    const auto lb = variational_lower_bound(G, E, zeta);
    EXPECT_GE(lb.value, 6.0);
    EXPECT_LE(lb.value, 8.0 * std::numbers::pi / 3.0 + 1e-6);
    EXPECT_LE(lb.max_norm, 1.0 + 1e-12);
    EXPECT_LT(lb.error, 1e-6);
}

TEST(Variational, DivergenceTheoremForRadialField) {
    // zeta = z (|zeta| <= 1 inside the unit cylinder): Int div_H = m |E|
    const auto G = make_heisenberg(1);
    const auto E = region_from_name("cylinder:1,1", G);
    TestField f;
    f.value = [](const Vec& z, const Vec&) { return z; };
    f.jacobian = [](const Vec&, const Vec&) {
        Mat D = Mat::Zero(2, 3);
        D(0, 0) = D(1, 1) = 1.0;
        return D;
    };
    EXPECT_NEAR(variational_lower_bound(G, E, f).value, 2.0 * std::numbers::pi, 1e-10);
}

TEST(Variational, RejectsLongFields) {
    const auto G = make_heisenberg(1);
    const auto E = region_from_name("cylinder:1,1", G);
    TestField f;
    f.value = [](const Vec&, const Vec&) { return Vec::Constant(2, 1.0); };
    f.jacobian = [](const Vec&, const Vec&) { return Mat::Zero(2, 3); };
    EXPECT_EQ(error_of([&] { variational_lower_bound(G, E, f); }), Errc::FieldNotAdmissible);
}
