#include <doctest.h>

#include <cmath>
#include <numbers>

#include "intspec/adjust.hpp"
#include "intspec/errors.hpp"
#include "intspec/field_core.hpp"
#include "intspec/knotted.hpp"
#include "intspec/spectrum.hpp"
#include "intspec/steady_gallery.hpp"

using namespace intspec;

namespace {

ModalEvaluator rot_shear(Axis axis) {
    return ModalEvaluator(curl(make_shear_field(cos_sin_profile(), axis, 32)), 1e-14);
}

// rot u^z = -u^z for the cos-sin profile; plus eps times the perturbation mode.
AnalyticField perturbed_rot_uz(double eps) {
    auto p = cos_sin_profile();
    return AnalyticField([p, eps](const Vec3& x) {
        return -1.0 * shear_value(p, Axis::z, x) + eps * perturbation_value(Axis::z, x);
    });
}

bool overlaps(const TagEstimate& a, const TagEstimate& b) { return a.ci_lo <= b.ci_hi && b.ci_lo <= a.ci_hi; }

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("wilson interval") {
    auto a = wilson_interval(0, 10);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == doctest::Approx(0.2775327998628892).epsilon(1e-12));
    auto b = wilson_interval(5, 10);
    CHECK(b[0] == doctest::Approx(0.236593090512564).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(0.7634069094874361).epsilon(1e-12));
    auto c = wilson_interval(95, 100);
    CHECK(c[0] == doctest::Approx(0.8882495307680808).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(0.9784563208456319).epsilon(1e-12));
    auto d = wilson_interval(10, 10);
    CHECK(d[1] == 1.0);
}

TEST_CASE("diophantine gate") {
    CHECK_FALSE(diophantine_gate(0.5, 50, 1e-3));
    CHECK_FALSE(diophantine_gate(1.0, 50, 1e-3));
    CHECK_FALSE(diophantine_gate(3.0 / 7.0 + 1e-7, 50, 1e-3));
    CHECK(diophantine_gate((std::sqrt(5.0) - 1.0) / 2.0, 50, 1e-3));
    CHECK(diophantine_gate(std::numbers::sqrt2 - 1.0, 50, 1e-3));
}

TEST_CASE("homology of an orbit") {
    SpectrumParams p;
    CHECK(homology_of_orbit({0.0, 0.0, 0.0}, 1.0, p).str() == "null_homologous(unknown)");
    CHECK(homology_of_orbit({0.0, 0.0, 0.0}, 1.0, p, "unknot").str() == "null_homologous(unknot)");
    // Rotation in the plane z = const.
    CHECK(homology_of_orbit({0.3, -0.7, 0.0}, 1.0, p).str() == "homology(0,0,1)");
    CHECK(homology_of_orbit({0.0, 0.5, std::numbers::sqrt2}, 1.0, p).str() == "homology(1,0,0)");
    // rho orthogonal to (1, -1, 0) is (1, 1, c).
    CHECK(homology_of_orbit({1.0, 1.0, std::numbers::pi}, 1.0, p).str() == "homology(1,-1,0)");
    // Periodic orbit: many integer relations, the shortest wins.
    CHECK(homology_of_orbit({1.0, 0.0, 0.0}, 1.0, p).str() == "homology(0,0,1)");
    // Totally irrational direction.
    CHECK(homology_of_orbit({1.0, std::numbers::sqrt2, std::numbers::pi}, 1.0, p).str() == "unknown");
}

TEST_CASE("homology tags are canonical") {
    auto t = IsotopyTag::homology_class({0, -2, 4});
    CHECK(t.str() == "homology(0,1,-2)");
    CHECK(IsotopyTag::homology_class({-1, 0, 0}) == IsotopyTag::homology_class({1, 0, 0}));
}

TEST_CASE("orthogonal lattice basis spans the complement") {
    for (std::array<int, 3> n : {std::array<int, 3>{0, 0, 1}, {1, -1, 0}, {2, 3, 5}, {1, 2, -3}}) {
        auto b = orthogonal_lattice_basis(n);
        for (const auto& v : b) CHECK(v[0] * n[0] + v[1] * n[1] + v[2] * n[2] == 0);
        std::array<int, 3> c{b[0][1] * b[1][2] - b[0][2] * b[1][1], b[0][2] * b[1][0] - b[0][0] * b[1][2],
                             b[0][0] * b[1][1] - b[0][1] * b[1][0]};
        bool same = c == n;
        bool opposite = c[0] == -n[0] && c[1] == -n[1] && c[2] == -n[2];
        CHECK((same || opposite));
    }
}

TEST_CASE("seed on a diophantine torus of rot u^z is ergodic") {
    auto f = rot_shear(Axis::z);
    // rotation ratio min(|cot z0|, |tan z0|) = golden mean
    const double z0 = std::atan((std::sqrt(5.0) - 1.0) / 2.0);
    auto v = classify_seed(f, {0.4, 1.1, z0}, SpectrumParams{});
    CHECK(v.verdict == Verdict::ergodic_torus);
    CHECK(v.tag.str() == "homology(0,0,1)");
    CHECK(v.ratio == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-8));
    CHECK(v.diophantine);
}

TEST_CASE("seed on a resonant torus of rot u^z is periodic") {
    auto f = rot_shear(Axis::z);
    auto v = classify_seed(f, {0.4, 1.1, std::numbers::pi / 4}, SpectrumParams{});
    CHECK(v.verdict == Verdict::periodic);
    CHECK(v.tag.str() == "homology(0,0,1)");
    CHECK(v.ratio == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("zero field seed is undetermined") {
    AnalyticField zero([](const Vec3&) { return Vec3{}; }, [](const Vec3&) { return Mat3{}; });
    auto v = classify_seed(zero, {1.0, 2.0, 3.0}, SpectrumParams{});
    CHECK(v.verdict == Verdict::undetermined);
}

TEST_CASE("chaotic seed fails the gates") {
    auto f = abc_field(3.0, 3.0, 3.0);
    SpectrumParams p;
    p.T = 1000;
    auto v = classify_seed(*f, {0.1, 0.2, 0.3}, p);
    CHECK(v.verdict == Verdict::chaotic);
}

TEST_CASE("rot u^z concentrates on the (0,0,1) class") {
    auto f = rot_shear(Axis::z);
    auto e = estimate_spectrum(f, 500, SpectrumParams{});
    CHECK(e.n_seeds == 500);
    CHECK(e.dominant() == "homology(0,0,1)");
    CHECK(e.tag("homology(0,0,1)").kappa >= 0.95);
    for (const auto& [k, t] : e.tags)
        if (k != "homology(0,0,1)") CHECK(t.kappa <= 0.02);
}

TEST_CASE("two-integral field has no ergodic tori") {
    auto f = two_integral_field();
    auto e = estimate_spectrum(*f, 100, SpectrumParams{});
    CHECK(e.total.kappa <= 0.05);
}

TEST_CASE("no seeds gives an undefined estimate") {
    auto f = rot_shear(Axis::z);
    auto e = estimate_spectrum(f, 0, SpectrumParams{});
    CHECK(e.undefined);
    CHECK(e.n_seeds == 0);
    CHECK(e.tags.empty());
}

TEST_CASE("dominant tags of u^x, u^y, u^z are distinct primitive classes") {
    const char* want[3] = {"homology(1,0,0)", "homology(0,1,0)", "homology(0,0,1)"};
    for (int a = 0; a < 3; ++a) {
        auto f = rot_shear(static_cast<Axis>(a));
        auto e = estimate_spectrum(f, 100, SpectrumParams{});
        CHECK(e.dominant() == want[a]);
    }
}

TEST_CASE("superadditivity and range of the estimate") {
    auto f = perturbed_rot_uz(1e-2);
    auto e = estimate_spectrum(f, 100, SpectrumParams{});
    double sum = 0.0;
    for (const auto& [k, t] : e.tags) {
        sum += t.kappa;
        CHECK(t.kappa >= 0.0);
        CHECK(t.ci_lo <= t.kappa);
        CHECK(t.kappa <= t.ci_hi);
    }
    CHECK(sum <= e.total.kappa + 1e-15);
    CHECK(e.total.kappa <= 1.0);
}

TEST_CASE("volume-preserving shear leaves the estimate unchanged") {
    auto f = rot_shear(Axis::z);
    auto g = shear_pushforward(f, 0.5);
    auto a = estimate_spectrum(f, 200, SpectrumParams{});
    auto b = estimate_spectrum(*g, 200, SpectrumParams{});
    CHECK(b.dominant() == "homology(0,0,1)");
    CHECK(overlaps(a.tag("homology(0,0,1)"), b.tag("homology(0,0,1)")));
}

TEST_CASE("estimate is continuous in the perturbation size") {
    SpectrumParams p;
    auto base = estimate_spectrum(perturbed_rot_uz(0.0), 100, p).tag("homology(0,0,1)");
    TagEstimate prev = base;
    for (double eps : {1e-4, 1e-3, 1e-2}) {
        auto e = estimate_spectrum(perturbed_rot_uz(eps), 100, p).tag("homology(0,0,1)");
        // nonincreasing within confidence intervals
        CHECK(e.ci_lo <= prev.ci_hi);
        if (eps == 1e-4) CHECK(overlaps(e, base));
        prev = e;
    }
}

TEST_CASE("seeds on a chaotic region are excluded from the ergodic mass") {
    // Each seed gets one verdict, so the chaotic fraction bounds kappa from above.
    auto f = abc_field(1.0, std::sqrt(2.0 / 3.0), std::sqrt(1.0 / 3.0));
    SpectrumParams p;
    p.T = 500;
    auto e = estimate_spectrum(*f, 40, p);
    double chaotic = e.verdict_counts.count("chaotic") ? double(e.verdict_counts.at("chaotic")) / e.n_seeds : 0.0;
    CHECK(chaotic > 0.0);
    CHECK(e.total.kappa <= 1.0 - chaotic + 1e-15);
}

TEST_CASE("estimates are bit-identical across runs and thread counts") {
    auto f = perturbed_rot_uz(1e-3);
    SpectrumParams p;
    p.T = 500;
    auto a = estimate_spectrum(f, 24, p);
    auto b = estimate_spectrum(f, 24, p);
    p.threads = 3;
    auto c = estimate_spectrum(f, 24, p);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_csv() == c.to_csv());
    CHECK(a.to_json() == c.to_json());
    p.rng_seed = 7;
    auto d = estimate_spectrum(f, 24, p);
    CHECK(d.to_csv() != a.to_csv());
}

TEST_CASE("knotted unknot field is exact") {
    auto kf = build_knotted_field(KnotSpec::parse("unknot"), 0.5, bump_twist_profile(1.0, 0.5), {.n = 32});
    auto r = exactness_check(kf.field, 1e-8);
    CHECK(r.exact);
    CHECK(norm(r.mean) <= 1e-8);
    CHECK(norm(r.flux) <= 1e-8);
    CHECK(kf.meta.label == "unknot");
    CHECK(kf.meta.tube_radius == doctest::Approx(kf.meta.max_tube_radius * std::sqrt(0.5)));
    CHECK(kf.meta.projection_error < 0.1);
}

TEST_CASE("knotted field arguments are validated") {
    auto prof = bump_twist_profile(1.0, 0.5);
    CHECK_THROWS_AS(build_knotted_field({2, 4}, 0.5, prof, {.n = 16}), DomainError);
    CHECK_THROWS_AS(build_knotted_field({1, 0}, 0.0, prof, {.n = 16}), DomainError);
    CHECK_THROWS_AS(build_knotted_field({1, 0}, 1.0, prof, {.n = 16}), DomainError);
    KnotOptions o;
    o.n = 16;
    o.tube_radius = 5.0;
    try {
        build_knotted_field(KnotSpec::parse("trefoil"), 0.5, prof, o);
        FAIL("expected a geometry error");
    } catch (const GeometryError& e) {
        CHECK(e.max_feasible == doctest::Approx(0.35).epsilon(0.02));
    }
}

TEST_CASE("tube chart inverts the tube parametrization") {
    for (const char* name : {"unknot", "trefoil"}) {
        auto kf = build_knotted_field(KnotSpec::parse(name), 0.2, bump_twist_profile(1.0, 0.5), {.n = 16});
        const auto& ch = *kf.chart;
        const double a = ch.tube_radius();
        for (double s : {0.1, 1.7, 4.0})
            for (double th : {0.3, 2.5, 5.9})
                for (double r : {0.2 * a, 0.7 * a}) {
                    auto c = ch.coordinates(ch.point(s, th, r));
                    CHECK(c.inside);
                    CHECK(c.rho == doctest::Approx(r).epsilon(1e-9));
                    CHECK(std::abs(periodic_delta(c.s - s)) < 1e-9);
                    CHECK(std::abs(periodic_delta(c.theta - th)) < 1e-9);
                }
    }
}

TEST_CASE("knotted tubes carry their null-homologous tags") {
    SpectrumParams p;
    p.speed_floor = 1e-3;
    auto unknot = build_knotted_field(KnotSpec::parse("unknot"), 0.1, bump_twist_profile(1.0, 0.5), {.n = 16});
    auto trefoil = build_knotted_field(KnotSpec::parse("trefoil"), 0.1, bump_twist_profile(1.0, 0.5), {.n = 16});
    CHECK(unknot.meta.label != trefoil.meta.label);
    auto eu = estimate_spectrum(*unknot.exact, 100, p);
    auto et = estimate_spectrum(*trefoil.exact, 100, p);
    CHECK(eu.dominant() == "null_homologous(unknot)");
    CHECK(et.dominant() == "null_homologous(torus_knot(2,3))");
    CHECK(eu.tag("null_homologous(torus_knot(2,3))").count == 0);
    CHECK(et.tag("null_homologous(unknot)").count == 0);
    // kappa is bounded by the invariant region
    CHECK(eu.total.ci_lo <= unknot.meta.tube_measure);
    CHECK(et.total.ci_lo <= trefoil.meta.tube_measure);
}

TEST_CASE("thin tube mass stays below the tube volume") {
    SpectrumParams p;
    p.speed_floor = 1e-3;
    auto kf = build_knotted_field(KnotSpec::parse("unknot"), 0.9, bump_twist_profile(1.0, 0.5), {.n = 16});
    auto e = estimate_spectrum(*kf.exact, 100, p);
    CHECK(e.total.ci_lo <= kf.meta.tube_measure);
}

TEST_CASE("json and csv reports") {
    auto f = rot_shear(Axis::z);
    auto e = estimate_spectrum(f, 5, SpectrumParams{});
    auto j = e.to_json();
    CHECK(j.find("\"homology(0,0,1)\"") != std::string::npos);
    CHECK(j.find("\"rng_seed\": 42") != std::string::npos);
    auto csv = e.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("adjust with the current invariants returns the field unchanged") {
    auto u = make_shear_field(windowed_profile(10, std::numbers::pi), Axis::z, 32);
    auto inv = integral_invariants(u);
    auto r = adjust_energy_helicity(u, inv.energy, inv.helicity);
    CHECK(r.unchanged);
    CHECK(r.t == 0.0);
    CHECK(r.lambda == 0.0);
    CHECK(l2_norm(r.field - u) == 0.0);
}

TEST_CASE("adjust reaches the target energy and helicity") {
    auto u = make_shear_field(windowed_profile(10, std::numbers::pi), Axis::x, 64);
    auto inv = integral_invariants(u);
    for (double dh : {0.2, -0.2, 0.0}) {
        const double e = inv.energy + 0.5, h = inv.helicity + dh;
        auto r = adjust_energy_helicity(u, e, h);
        CHECK(std::abs(r.energy - e) <= 1e-8);
        CHECK(std::abs(r.helicity - h) <= 1e-8);
        auto got = integral_invariants(r.field);
        CHECK(std::abs(got.energy - e) <= 1e-8);
        CHECK(std::abs(got.helicity - h) <= 1e-8);
        CHECK(r.threshold <= e);
        // Disjoint supports: cross terms with u vanish.
        CHECK(std::abs(r.cross.energy_u_v) <= 1e-10);
        CHECK(std::abs(r.cross.energy_u_w) <= 1e-10);
        CHECK(std::abs(r.cross.helicity_u_v) <= 1e-10);
        CHECK(std::abs(r.cross.helicity_u_w) <= 1e-10);
        CHECK(std::abs(r.cross.helicity_w) <= 1e-10);
        CHECK(r.curl_in_supports <= 1e-6);
        CHECK(r.curl_change_on_support <= 1e-3);
        CHECK(periodic_delta(r.helical_center[0]) == 0.0);
        CHECK(max_divergence(r.field) <= 1e-12);
    }
}

TEST_CASE("narrower blobs leave less vorticity on the support") {
    const auto w = windowed_profile(20, std::numbers::pi);
    auto u = 0.995 * make_shear_field(w, Axis::x, 64);
    auto target = integral_invariants(make_shear_field(w, Axis::z, 64));
    AdjustOptions o;
    o.ball_radius = 1.5;
    auto wide = adjust_energy_helicity(u, target.energy, target.helicity, o);
    o.blob_width = 0.2;
    auto narrow = adjust_energy_helicity(u, target.energy, target.helicity, o);
    CHECK(std::abs(narrow.energy - target.energy) <= 1e-8);
    CHECK(std::abs(narrow.helicity - target.helicity) <= 1e-8);
    CHECK(narrow.curl_change_on_support < wide.curl_change_on_support);
    CHECK(narrow.curl_change_on_support <= 1e-6);
    o.blob_width = 0.0;
    CHECK_THROWS_AS(adjust_energy_helicity(u, target.energy, target.helicity, o), DomainError);
}

TEST_CASE("adjust below the energy threshold is infeasible") {
    auto u = make_shear_field(windowed_profile(10, std::numbers::pi), Axis::z, 32);
    auto inv = integral_invariants(u);
    try {
        adjust_energy_helicity(u, inv.energy, inv.helicity + 0.5);
        FAIL("expected an infeasible-energy error");
    } catch (const InfeasibleEnergyError& e) {
        CHECK(e.threshold > inv.energy);
        auto r = adjust_energy_helicity(u, e.threshold + 0.1, inv.helicity + 0.5);
        CHECK(std::abs(r.helicity - inv.helicity - 0.5) <= 1e-8);
    }
}

TEST_CASE("adjust refuses fields whose vorticity fills the torus") {
    auto u = make_shear_field(cos_sin_profile(), Axis::z, 32);
    CHECK_THROWS_AS(adjust_energy_helicity(u, 2.0, 0.0), DomainError);
}

TEST_CASE("adjusting a knotted field keeps its spectrum") {
    auto kf = build_knotted_field(KnotSpec::parse("unknot"), 0.1, bump_twist_profile(1.0, 0.5), {.n = 64});
    auto r = adjust_energy_helicity(kf.field, 2.0, 0.0);
    CHECK(std::abs(r.energy - 2.0) <= 1e-8);
    CHECK(std::abs(r.helicity) <= 1e-8);
    SpectrumParams p;
    p.speed_floor = 1e-3;
    auto before = estimate_spectrum(*kf.exact, 100, p);
    // closed-form tube plus the spectral correction
    std::shared_ptr<const FlowField> delta = make_evaluator(r.field - kf.field);
    SumField adjusted(kf.exact, delta);
    auto after = estimate_spectrum(adjusted, 100, p);
    auto tb = before.tag("null_homologous(unknot)");
    auto ta = after.tag("null_homologous(unknot)");
    CHECK(tb.count > 0);
    CHECK(overlaps(tb, ta));
}

}  // TEST_SUITE
