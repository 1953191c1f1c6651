#include <doctest.h>

#include <cmath>
#include <random>

#include "intspec/field_core.hpp"
#include "intspec/rng.hpp"
#include "intspec/steady_gallery.hpp"

using namespace intspec;

namespace {

Vec4 random_sphere_point(std::mt19937_64& rng) {
    Vec4 p{standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    return (1.0 / norm(p)) * p;
}

HopfField sample_hopf() {
    return HopfField([](double F) { return std::sin(F) + 0.3; }, [](double F) { return std::cos(F); },
                     [](double F) { return F * F - 0.2; }, [](double F) { return 2.0 * F; });
}

// A smooth profile that is not band-limited.
TubeProfile smooth_profile() {
    TubeProfile p;
    p.name = "exp-cos";
    p.f = [](double z) { return std::exp(std::cos(z)); };
    p.df = [](double z) { return -std::sin(z) * std::exp(std::cos(z)); };
    p.g = [](double z) { return std::sin(z) / (2.0 + std::cos(z)); };
    p.dg = [](double z) {
        double d = 2.0 + std::cos(z);
        return (std::cos(z) * d + std::sin(z) * std::sin(z)) / (d * d);
    };
    return p;
}

}  // namespace

TEST_SUITE("steady_gallery") {

TEST_CASE("shear field invariants for cos-sin profile") {
    auto u = make_shear_field(cos_sin_profile(), Axis::z, 32);
    auto inv = integral_invariants(u);
    CHECK(std::abs(inv.energy - 1.0) < 1e-14);
    CHECK(std::abs(inv.helicity + 1.0) < 1e-14);
    CHECK(u.divergence_free());
    CHECK(exactness_check(u, 1e-13).exact);
}

TEST_CASE("constant profile gives a constant field with zero curl") {
    auto u = make_shear_field(constant_profile(1.0, 0.0), Axis::z, 16);
    CHECK(std::abs(mean(u)[0] - 1.0) < 1e-15);
    CHECK(l2_norm(curl(u)) < 1e-15);
    CHECK(std::abs(integral_invariants(u).energy - 1.0) < 1e-15);
}

TEST_CASE("axis choice changes the homology of the invariant tori") {
    CHECK(shear_homology(Axis::x) != shear_homology(Axis::z));
    CHECK(shear_homology(Axis::x) == std::array<int, 3>{1, 0, 0});
    CHECK(shear_homology(Axis::y) == std::array<int, 3>{0, 1, 0});
    CHECK(shear_homology(Axis::z) == std::array<int, 3>{0, 0, 1});
    auto ux = make_shear_field(cos_sin_profile(), Axis::x, 16);
    Vec3 v = evaluate(ux, {0.7, 1.0, 2.0});
    CHECK(std::abs(v[0]) < 1e-14);
    CHECK(std::abs(v[1] - std::cos(0.7)) < 1e-14);
    CHECK(std::abs(v[2] - std::sin(0.7)) < 1e-14);
}

TEST_CASE("profile derivatives match central differences") {
    std::vector<TubeProfile> profiles = {cos_sin_profile(), sin_offset_profile(), windowed_profile(10, 3.0),
                                         bump_twist_profile(0.5, 0.8),
                                         fourier_profile({0.1, 0.5}, {0.0, 0.2, -0.3}, {0.0, 1.0}, {0.0, 0.0, 0.4}),
                                         smooth_profile()};
    const double h = 1e-5;
    for (const auto& p : profiles) {
        for (int i = 0; i < 100; ++i) {
            double z = p.periodic ? 0.0628 * i + 0.01 : -0.95 + 0.019 * i;
            double df = (p.f(z + h) - p.f(z - h)) / (2 * h);
            double dg = (p.g(z + h) - p.g(z - h)) / (2 * h);
            CHECK(std::abs(df - p.df(z)) < 1e-8);
            CHECK(std::abs(dg - p.dg(z)) < 1e-8);
        }
    }
}

TEST_CASE("twist profile examples") {
    auto cs = twist_profile(cos_sin_profile(), 0.3, 2.0);
    CHECK(std::abs(cs.tau - 1.0) < 1e-14);
    for (double w : cs.wronskian) CHECK(std::abs(w + 1.0) < 1e-14);

    auto c = twist_profile(constant_profile(1.0, 1.0), -1.0, 1.0);
    CHECK(c.tau == 0.0);

    auto so = sin_offset_profile();
    auto full = twist_profile(so, 0.0, kTwoPi, 3001);
    CHECK(full.tau < 1e-2);
    for (std::size_t i = 0; i < full.z.size(); ++i)
        CHECK(std::abs(full.wronskian[i] - (2.0 * std::cos(full.z[i]) + 1.0)) < 1e-14);
    const double edge = kTwoPi / 3.0 - 0.1;
    auto inner_band = twist_profile(so, -edge, edge);
    CHECK(inner_band.tau > 0.1);
    CHECK(inner_band.tau == doctest::Approx(2.0 * std::cos(edge) + 1.0).epsilon(1e-12));
}

TEST_CASE("bernoulli and commutator residuals of the shear field") {
    auto p = cos_sin_profile();
    auto u = make_shear_field(p, Axis::z, 64);
    auto alpha = shear_bernoulli(p, Axis::z, 64);
    auto r = steady_residuals(u, &alpha);
    CHECK(r.bernoulli <= 1e-10);
    CHECK(r.commutator <= 1e-10);
    auto r2 = steady_residuals(u);
    CHECK(r2.bernoulli <= 1e-10);
}

TEST_CASE("all gallery shear fields are steady") {
    for (const auto& p : {cos_sin_profile(), sin_offset_profile(), windowed_profile(10, std::numbers::pi)}) {
        for (Axis a : {Axis::x, Axis::y, Axis::z}) {
            auto u = make_shear_field(p, a, 64);
            auto alpha = shear_bernoulli(p, a, 64);
            auto r = steady_residuals(u, &alpha);
            CHECK(r.bernoulli <= 1e-9);
            CHECK(r.commutator <= 1e-9);
        }
    }
}

TEST_CASE("steady residual decreases with resolution for a smooth profile") {
    auto p = smooth_profile();
    double prev = INFINITY;
    for (int n : {8, 16, 32, 64}) {
        auto u = make_shear_field(p, Axis::z, n);
        auto alpha = shear_bernoulli(p, Axis::z, n);
        double b = steady_residuals(u, &alpha).bernoulli;
        CHECK(b < prev);
        prev = b;
    }
    CHECK(prev < 1e-9);
}

TEST_CASE("zero field has zero residuals") {
    auto r = steady_residuals(SpectralField3(16));
    CHECK(r.bernoulli == 0.0);
    CHECK(r.commutator == 0.0);
}

TEST_CASE("random field is far from steady") {
    auto u = random_field(16, 4, 12345, true, true);
    auto r = steady_residuals(u);
    // Regression value for this seed.
    CHECK(r.commutator > 0.1);
    CHECK(r.commutator == doctest::Approx(1301.8011928714684).epsilon(1e-9));
}

TEST_CASE("hopf basis dot and cross identities") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        Vec4 p = random_sphere_point(rng);
        Vec4 a = HopfField::u1(p), b = HopfField::u2(p);
        double F = HopfField::F(p);
        CHECK(std::abs(dot(a, a) - 1.0) < 1e-12);
        CHECK(std::abs(dot(b, b) - 1.0) < 1e-12);
        CHECK(std::abs(dot(a, b) - (2.0 * F - 1.0)) < 1e-12);
        CHECK(norm(sphere_cross(p, a, b) + HopfField::grad_F(p)) < 1e-12);
        CHECK(std::abs(dot(a, p)) < 1e-15);
        CHECK(std::abs(dot(b, p)) < 1e-15);
    }
}

TEST_CASE("u1 is a curl eigenfield with eigenvalue 2") {
    HopfField h([](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                [](double) { return 0.0; });
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        Vec4 p = random_sphere_point(rng);
        CHECK(norm(h.value(p) - HopfField::u1(p)) == 0.0);
        CHECK(norm(h.rot(p) - 2.0 * HopfField::u1(p)) < 1e-15);
        Vec4 r = sphere_curl([](const Vec4& q) { return HopfField::u1(q); }, p);
        CHECK(norm(r - 2.0 * HopfField::u1(p)) < 1e-10);
    }
}

TEST_CASE("hopf combination rot and bernoulli identity") {
    auto h = sample_hopf();
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        Vec4 p = random_sphere_point(rng);
        Vec4 r = sphere_curl([&](const Vec4& q) { return h.value(q); }, p);
        CHECK(norm(r - h.rot(p)) < 1e-9);
        Vec4 lamb = sphere_cross(p, h.value(p), h.rot(p));
        CHECK(norm(lamb - h.bernoulli_H(HopfField::F(p)) * HopfField::grad_F(p)) < 1e-12);
        CHECK(std::abs(dot(h.value(p), p)) < 1e-12);
    }
}

}  // TEST_SUITE
