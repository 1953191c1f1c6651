#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "intspec/field_core.hpp"
#include "intspec/flowline.hpp"
#include "intspec/steady_gallery.hpp"

using namespace intspec;

namespace {

std::unique_ptr<AnalyticField> uz_field(const TubeProfile& p) {
    return std::make_unique<AnalyticField>([p](const Vec3& x) { return shear_value(p, Axis::z, x); });
}

std::unique_ptr<AnalyticField> perturbed_uz(double eps) {
    auto p = cos_sin_profile();
    return std::make_unique<AnalyticField>([p, eps](const Vec3& x) {
        return shear_value(p, Axis::z, x) + eps * perturbation_value(Axis::z, x);
    });
}

// Regression values from a fixed run (tol 1e-10 / 1e-12, seeds as below).
constexpr double kPerturbedZVariation = 0.0014472018934177378;
constexpr double kChaoticLyapunov = 0.091108519208026928;

AnalyticField zero_field() {
    return AnalyticField([](const Vec3&) { return Vec3{}; }, [](const Vec3&) { return Mat3{}; });
}

}  // namespace

TEST_SUITE("flowline") {

TEST_CASE("shear trace is linear on the torus z = z0") {
    auto p = cos_sin_profile();
    auto u = uz_field(p);
    const double z0 = 0.7;
    auto tr = trace(*u, {0.0, 0.0, z0}, 50.0, 1e-10);
    REQUIRE_FALSE(tr.stats.failed);
    for (const auto& s : tr.samples) {
        CHECK(std::abs(s.lifted[2] - z0) <= 1e-9);
        CHECK(std::abs(s.lifted[0] - std::cos(z0) * s.t) <= 1e-8);
        CHECK(std::abs(s.lifted[1] - std::sin(z0) * s.t) <= 1e-8);
    }
}

TEST_CASE("wrapped samples agree with lifted samples and times increase") {
    auto u = abc_field(1, 1, 1);
    auto tr = trace(*u, {0.1, 0.2, 0.3}, 100.0, 1e-10);
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        const auto& s = tr.samples[i];
        for (int a = 0; a < 3; ++a) {
            CHECK(s.wrapped[a] >= 0.0);
            CHECK(s.wrapped[a] < kTwoPi);
            double d = std::remainder(s.lifted[a] - s.wrapped[a], kTwoPi);
            CHECK(std::abs(d) <= 1e-12);
        }
        if (i > 0) CHECK(s.t > tr.samples[i - 1].t);
    }
    CHECK(tr.t_end() == doctest::Approx(100.0));
}

TEST_CASE("zero field gives a constant trajectory") {
    auto z = zero_field();
    Vec3 x0{1.0, 2.0, 3.0};
    auto tr = trace(z, x0, 10.0, 1e-10);
    for (const auto& s : tr.samples) CHECK(norm(s.lifted - x0) == 0.0);
    CHECK(lyapunov_max(z, x0, 100.0).exponent == 0.0);
    auto r = rotation_vector(tr);
    CHECK(norm(r.rho) == 0.0);
}

TEST_CASE("F is a first integral along a Hopf trajectory") {
    HopfField h([](double F) { return 1.0 + F; }, [](double) { return 1.0; },
                [](double F) { return std::sin(3 * F); }, [](double F) { return 3 * std::cos(3 * F); });
    Vec4 p0{0.3, 0.5, -0.6, 0.0};
    p0 = (1.0 / norm(p0)) * p0;
    auto tr = trace_sphere([&](const Vec4& p) { return h.value(p); }, p0, 100.0, 1e-12);
    REQUIRE_FALSE(tr.stats.failed);
    const double F0 = HopfField::F(p0);
    double worst = 0.0;
    for (const auto& s : tr.samples) worst = std::max(worst, std::abs(HopfField::F(s.p) - F0));
    CHECK(worst <= 1e-8);
    CHECK(tr.max_drift <= 1e-9);
}

TEST_CASE("Poincare hits of the shear field reproduce the twist map") {
    auto p = cos_sin_profile();
    auto u = uz_field(p);
    for (double z0 : {0.4, 1.0, 2.5}) {
        Section sec{1, 0.0};
        auto hits = poincare_hits(*u, sec, {0.3, -0.5, z0}, 20);
        REQUIRE(hits.hits.size() == 20);
        CHECK_FALSE(hits.partial);
        const double shift = kTwoPi * std::cos(z0) / std::sin(z0);
        for (std::size_t i = 1; i < hits.hits.size(); ++i) {
            const auto& a = hits.hits[i - 1];
            const auto& b = hits.hits[i];
            CHECK(b.time > a.time);
            CHECK(std::abs(std::remainder(b.lifted[0] - a.lifted[0] - shift, kTwoPi)) <= 1e-8);
            CHECK(std::abs(b.lifted[2] - z0) <= 1e-9);
            CHECK(b.direction == a.direction);
            CHECK_FALSE(b.degenerate);
        }
        for (const auto& h : hits.hits) CHECK(std::abs(std::remainder(h.lifted[1], kTwoPi)) <= 1e-10);
    }
}

TEST_CASE("tangential crossings are flagged degenerate") {
    // Crossings of y = 0 happen with v_y ~ 1e-9 |v|.
    AnalyticField f([](const Vec3& x) { return Vec3{1.0, 1e-9 * std::sin(x[0]), 0.0}; });
    auto hits = poincare_hits(f, {1, 0.0}, {0.5, -0.5e-9, 0.0}, 3);
    REQUIRE_FALSE(hits.hits.empty());
    for (const auto& h : hits.hits) CHECK(h.degenerate);
}

TEST_CASE("Poincare hits time out as a partial result") {
    auto p = cos_sin_profile();
    auto u = uz_field(p);
    PoincareOptions opt;
    opt.t_max = 5.0;
    // g(z0) = sin(0.01): y advances 0.05 in t = 5, no crossing.
    auto hits = poincare_hits(*u, {1, 1.0}, {0.0, 0.0, 0.01}, 5, opt);
    CHECK(hits.partial);
    CHECK(hits.hits.empty());
}

TEST_CASE("perturbed shear field keeps section hits near the unperturbed torus") {
    auto u = perturbed_uz(1e-3);
    auto hits = poincare_hits(*u, {1, 0.0}, {0.0, 0.0, 1.0}, 100);
    REQUIRE(hits.hits.size() == 100);
    double lo = 1e9, hi = -1e9;
    for (const auto& h : hits.hits) {
        lo = std::min(lo, h.lifted[2]);
        hi = std::max(hi, h.lifted[2]);
    }
    CHECK(hi - lo <= 5e-3);
    CHECK(hi - lo == doctest::Approx(kPerturbedZVariation).epsilon(1e-6));
}

TEST_CASE("rotation vector of the linear flow") {
    auto p = cos_sin_profile();
    auto u = uz_field(p);
    const double z0 = 0.9;
    auto tr = trace(*u, {0.0, 0.0, z0}, 500.0, 1e-10);
    auto r = rotation_vector(tr);
    CHECK_FALSE(r.undetermined);
    CHECK(std::abs(r.rho[0] - std::cos(z0) / kTwoPi) <= 1e-10);
    CHECK(std::abs(r.rho[1] - std::sin(z0) / kTwoPi) <= 1e-10);
    CHECK(std::abs(r.rho[2]) <= 1e-10);
    CHECK(r.convergence_index <= -8.0);
}

TEST_CASE("rotation vector is stable under doubling T on a quasiperiodic seed") {
    auto w = make_shear_field(cos_sin_profile(), Axis::z, 32);
    ModalEvaluator ev(curl(w));
    Vec3 x0{0.1, 0.2, 1.0};
    auto r1 = rotation_vector(trace(ev, x0, 1000.0, 1e-10));
    auto r2 = rotation_vector(trace(ev, x0, 2000.0, 1e-10));
    CHECK(norm(r1.rho - r2.rho) <= 1e-6);
    CHECK(r2.convergence_index <= -8.0);
}

TEST_CASE("short trajectories are undetermined") {
    auto u = abc_field(1, 1, 1);
    auto tr = trace(*u, {0.1, 0.2, 0.3}, 0.3, 1e-10);
    CHECK(rotation_vector(tr).undetermined);
}

TEST_CASE("fixed point has zero rotation") {
    AnalyticField f([](const Vec3& x) { return Vec3{std::sin(x[0]), std::sin(x[0]), 0.0}; });
    auto tr = trace(f, {0.0, 1.0, 2.0}, 100.0, 1e-10);
    auto r = rotation_vector(tr);
    CHECK(norm(r.rho) == 0.0);
}

TEST_CASE("Lyapunov exponent of the linear flow decays") {
    auto p = cos_sin_profile();
    auto u = uz_field(p);
    auto l = lyapunov_max(*u, {0.0, 0.0, 0.7}, 1000.0);
    CHECK(l.exponent <= 0.01);
    CHECK(l.exponent >= 0.0);
}

TEST_CASE("chaotic seed of a strongly perturbed shear field") {
    // ABC(A,A,A): the A terms form a shear field (sin z, cos z, 0), the B and C
    // terms a perturbation of the same size.
    auto u = abc_field(3, 3, 3);
    Vec3 x0{0.1, 0.2, 0.3};
    auto l1 = lyapunov_max(*u, x0, 1000.0);
    auto l2 = lyapunov_max(*u, x0, 2000.0);
    CHECK(l1.exponent > 0.05);
    CHECK(l2.exponent > 0.05);
    CHECK(std::abs(l1.exponent - l2.exponent) <= 0.3 * l2.exponent);
    CHECK(l1.exponent == doctest::Approx(kChaoticLyapunov).epsilon(1e-6));

    auto r = rotation_vector(trace(*u, x0, 1000.0, 1e-10));
    CHECK(r.convergence_index >= -2.0);
}

TEST_CASE("flow map preserves volume over short times") {
    auto u = abc_field(1, 1, 1);
    for (double T : {1.0, 5.0, 10.0}) {
        double d = flow_jacobian_determinant(*u, {0.1, 0.2, 0.3}, T);
        CHECK(std::abs(d - 1.0) <= 1e-4);
    }
    auto w = make_shear_field(cos_sin_profile(), Axis::z, 16);
    ModalEvaluator ev(w + 0.1 * perturbation_mode(Axis::z, 16));
    CHECK(max_divergence(w + 0.1 * perturbation_mode(Axis::z, 16)) <= 1e-10);
    CHECK(std::abs(flow_jacobian_determinant(ev, {1.0, 2.0, 3.0}, 10.0) - 1.0) <= 1e-4);
}

TEST_CASE("trajectory CSV has one row per sample") {
    auto p = cos_sin_profile();
    auto u = uz_field(p);
    auto tr = trace(*u, {0.0, 0.0, 0.5}, 1.0, 1e-10);
    auto csv = trajectory_csv(tr);
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == tr.samples.size() + 1);
    CHECK(csv.rfind("t,x,y,z,x_wrapped,y_wrapped,z_wrapped\n", 0) == 0);
}

}
