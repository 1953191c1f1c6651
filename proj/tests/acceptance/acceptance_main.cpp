// Acceptance run: one pass/fail line per criterion.  Pass criterion numbers
// as arguments to run a subset.  Exit status 1 when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "intspec/adjust.hpp"
#include "intspec/euler.hpp"
#include "intspec/field_core.hpp"
#include "intspec/field_eval.hpp"
#include "intspec/kam.hpp"
#include "intspec/rng.hpp"
#include "intspec/spectrum.hpp"
#include "intspec/steady_gallery.hpp"

using namespace intspec;

namespace {

// Tolerances.
constexpr double kIdentityTol = 1e-10;       // 1
constexpr double kInvariantTol = 1e-12;      // 2
constexpr double kSteadyTol = 1e-10;         // 2
constexpr double kSphereTol = 1e-9;          // 3
constexpr double kErgodicMin = 0.95;         // 5
constexpr double kTwoIntegralMax = 0.05;     // 5
constexpr double kSpectrumMinutes = 10.0;    // 5
constexpr double kDriftTol = 1e-6;           // 6
constexpr double kFixedPointTol = 1e-8;      // 6
constexpr double kKelvinTol = 1e-3;          // 6
constexpr double kCiWidening = 0.1;          // 7
constexpr double kCrossMax = 0.1;            // 8
constexpr double kMatchTol = 1e-10;          // 8, relative E and H mismatch of the equal pair
constexpr double kKamFloor = 0.05;           // 9
constexpr double kSlopeLo = 0.4, kSlopeHi = 0.7;
constexpr double kKamMinutes = 15.0;         // 9

struct Outcome {
    bool pass = false;
    std::string detail;
};

double minutes_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
}

Vec4 random_sphere_point(std::mt19937_64& rng) {
    Vec4 p{standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    return (1.0 / norm(p)) * p;
}

Outcome operator_identities() {
    double div_curl = 0.0, curl_grad = 0.0, ortho = 0.0, inv = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        auto v = random_field(32, 10, 1000 + s, false, false);
        div_curl = std::max(div_curl, sup_norm(divergence(curl(v))));
        curl_grad = std::max(curl_grad, sup_norm(curl(gradient(random_scalar(32, 10, 2000 + s)))));
        auto h = helmholtz(v);
        SpectralField3 harm(32);
        for (int a = 0; a < 3; ++a) harm.at(a, 0, 0, 0) = h.harmonic_part[a];
        const double scale = inner(v, v);
        ortho = std::max({ortho, std::abs(inner(h.gradient_part, h.exact_part)) / scale,
                          std::abs(inner(harm, h.exact_part)) / scale, std::abs(inner(harm, h.gradient_part)) / scale});
        auto w = curl(random_field(32, 10, 3000 + s, true, true));
        inv = std::max(inv, sup_norm(curl(inverse_curl(w)) - w));
    }
    const bool pass = std::max({div_curl, curl_grad, ortho, inv}) <= kIdentityTol;
    return {pass, fmt::format("div curl {:.2e}, curl grad {:.2e}, Helmholtz orthogonality {:.2e}, "
                              "curl inverse_curl {:.2e} (tol {:.0e})",
                              div_curl, curl_grad, ortho, inv, kIdentityTol)};
}

Outcome shear_oracle() {
    const auto p = cos_sin_profile();
    auto u = make_shear_field(p, Axis::z, 64);
    const auto inv = integral_invariants(u);
    const double de = std::abs(inv.energy - 1.0), dh = std::abs(inv.helicity + 1.0);
    auto closed = sample_field(64, [&](const Vec3& x) { return shear_curl(p, Axis::z, x); });
    const double dcurl = sup_norm(curl(u) - closed);
    auto alpha = shear_bernoulli(p, Axis::z, 64);
    const auto r = steady_residuals(u, &alpha);
    const bool pass = de <= kInvariantTol && dh <= kInvariantTol && dcurl <= kSteadyTol && r.bernoulli <= kSteadyTol &&
                      r.commutator <= kSteadyTol;
    return {pass, fmt::format("|E-1| {:.2e}, |H+1| {:.2e}, curl {:.2e}, Bernoulli {:.2e}, commutator {:.2e}", de, dh,
                              dcurl, r.bernoulli, r.commutator)};
}

Outcome hopf_oracle() {
    HopfField h([](double F) { return std::sin(F) + 0.3; }, [](double F) { return std::cos(F); },
                [](double F) { return F * F - 0.2; }, [](double F) { return 2.0 * F; });
    std::mt19937_64 rng(7);
    double worst[6] = {};
    for (int i = 0; i < 1000; ++i) {
        const Vec4 p = random_sphere_point(rng);
        const Vec4 a = HopfField::u1(p), b = HopfField::u2(p);
        const double F = HopfField::F(p);
        const double e[6] = {
            std::abs(dot(a, a) - 1.0),
            std::abs(dot(b, b) - 1.0),
            std::abs(dot(a, b) - (2.0 * F - 1.0)),
            norm(sphere_cross(p, a, b) + HopfField::grad_F(p)),
            norm(sphere_curl([&](const Vec4& q) { return h.value(q); }, p) - h.rot(p)),
            norm(sphere_cross(p, h.value(p), h.rot(p)) - h.bernoulli_H(F) * HopfField::grad_F(p)),
        };
        for (int k = 0; k < 6; ++k) worst[k] = std::max(worst[k], e[k]);
    }
    const bool pass = *std::max_element(worst, worst + 6) <= kSphereTol;
    return {pass, fmt::format("(u1,u1) {:.2e}, (u2,u2) {:.2e}, (u1,u2) {:.2e}, u1 x u2 {:.2e}, rot {:.2e}, "
                              "u x rot u {:.2e} over 1000 points",
                              worst[0], worst[1], worst[2], worst[3], worst[4], worst[5])};
}

Outcome schwartz() {
    int violations = 0;
    double worst = -1e300;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        auto u = random_field(32, 10, 4000 + s, true, true);
        const double h = std::abs(integral_invariants(u).helicity);
        const double e = integral_invariants(curl(u)).energy;
        violations += h > e;
        worst = std::max(worst, h / e);
    }
    return {violations == 0, fmt::format("{} violations in 100 fields, max |H| / E(curl u) = {:.3f}", violations, worst)};
}

Outcome spectrum_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const SpectrumParams sp;
    ModalEvaluator rot_uz(curl(make_shear_field(cos_sin_profile(), Axis::z, 32)), 1e-14);
    const auto e = estimate_spectrum(rot_uz, 500, sp);
    const double kz = e.tag("homology(0,0,1)").kappa;
    const auto two = estimate_spectrum(*two_integral_field(), 200, sp);
    std::set<std::string> tags;
    std::string listed;
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        ModalEvaluator f(curl(make_shear_field(cos_sin_profile(), a, 32)), 1e-14);
        const auto d = estimate_spectrum(f, 100, sp).dominant();
        tags.insert(d);
        listed += (listed.empty() ? "" : " ") + d;
    }
    const std::set<std::string> primitive{"homology(1,0,0)", "homology(0,1,0)", "homology(0,0,1)"};
    const double minutes = minutes_since(t0);
    const bool pass = kz >= kErgodicMin && two.total.kappa <= kTwoIntegralMax && tags == primitive &&
                      minutes <= kSpectrumMinutes;
    return {pass, fmt::format("kappa rot u^z {:.3f} (500 seeds), two-integral {:.3f}, dominant tags {}, {:.1f} min", kz,
                              two.total.kappa, listed, minutes)};
}

Outcome conservation() {
    double fixed = 0.0;
    struct Case {
        TubeProfile p;
        Axis axis;
    };
    for (const auto& c : {Case{cos_sin_profile(), Axis::z}, Case{sin_offset_profile(), Axis::x},
                          Case{windowed_profile(10, std::numbers::pi), Axis::y}}) {
        auto u0 = make_shear_field(c.p, c.axis, 64);
        auto run = evolve(u0, 1.0);
        fixed = std::max(fixed, l2_norm(run.snapshots.back().field - u0) / l2_norm(u0));
    }
    auto u0 = make_shear_field(cos_sin_profile(), Axis::z, 64) + 1e-2 * perturbation_mode(Axis::z, 64);
    auto run = evolve(u0, 1.0);
    const auto rep = conservation_report(run);
    const auto k = kelvin_residual(u0, 0.5, 1000, 42);
    const bool pass = !run.blowup && rep.energy_drift <= kDriftTol && rep.helicity_drift <= kDriftTol &&
                      fixed <= kFixedPointTol && k.failed == 0 && k.residual <= kKelvinTol;
    return {pass, fmt::format("energy drift {:.2e}, helicity drift {:.2e}, fixed point {:.2e}, Kelvin {:.2e} "
                              "({} markers, {} failed)",
                              rep.energy_drift, rep.helicity_drift, fixed, k.residual, k.markers, k.failed)};
}

// Perturbed u^z against perturbed u^x at N = 32; also supplies criterion 7.
const NonmixingReport& shear_pair() {
    static const NonmixingReport rep = [] {
        NonmixingOptions o;
        o.euler.snapshot_interval = 0.5;
        o.seeds = 100;
        const int n = 32;
        const auto p = cos_sin_profile();
        return nonmixing_experiment(make_shear_field(p, Axis::z, n), perturbation_mode(Axis::z, n),
                                    make_shear_field(p, Axis::x, n), perturbation_mode(Axis::x, n), 1e-2, 2.0, o);
    }();
    return rep;
}

Outcome kappa_conservation() {
    const auto& s = shear_pair().run_a;
    const auto& t0 = s.tag_a.front();
    const double lo = t0.ci_lo - kCiWidening, hi = t0.ci_hi + kCiWidening;
    double worst = 0.0;
    bool inside = !s.blowup;
    for (const auto& e : s.tag_a) {
        inside = inside && e.kappa >= lo && e.kappa <= hi;
        worst = std::max(worst, std::abs(e.kappa - t0.kappa));
    }
    return {inside, fmt::format("kappa (0,0,1) at t = 0 {:.3f}, band [{:.3f}, {:.3f}], {} snapshots, max change {:.3f}",
                                t0.kappa, lo, hi, s.tag_a.size(), worst)};
}

bool disjoint_throughout(const NonmixingReport& r) {
    if (!r.nonmixing) return false;
    for (const auto* s : {&r.run_a, &r.run_b})
        for (std::size_t i = 0; i < s->time.size(); ++i) {
            const auto& own = s == &r.run_a ? s->tag_a[i] : s->tag_b[i];
            if (own.count == 0 || s->dominant[i] != (s == &r.run_a ? r.tag_a : r.tag_b)) return false;
        }
    return r.max_cross <= kCrossMax;
}

Outcome nonmixing_proxy() {
    const auto& a = shear_pair();
    const bool pass_a = disjoint_throughout(a);

    // Equal-(e, h) pair: a windowed u^z and a slightly scaled windowed u^x
    // raised to the same energy and helicity by narrow blobs placed in its
    // vorticity-free slab.
    const int n = 64;
    const auto w = windowed_profile(20, std::numbers::pi);
    auto base_a = make_shear_field(w, Axis::z, n);
    const auto target = integral_invariants(base_a);
    AdjustOptions ao;
    ao.ball_radius = 1.5;
    ao.blob_width = 0.2;
    auto adj = adjust_energy_helicity(0.995 * make_shear_field(w, Axis::x, n), target.energy, target.helicity, ao);
    NonmixingOptions o;
    o.euler.snapshot_interval = 0.5;
    o.seeds = 60;
    o.spectrum.speed_floor = 1e-3;
    const auto b = nonmixing_experiment(base_a, perturbation_mode(Axis::z, n), adj.field, perturbation_mode(Axis::x, n),
                                        1e-2, 2.0, o);
    const double de = std::abs(b.run_a.energy - b.run_b.energy) / b.run_a.energy;
    const double dh = std::abs(b.run_a.helicity - b.run_b.helicity) / b.run_a.energy;
    const bool pass_b = disjoint_throughout(b) && de <= kMatchTol && dh <= kMatchTol;
    return {pass_a && pass_b,
            fmt::format("u^z/u^x: {} (own >= {:.2f}/{:.2f}, cross {:.3f}); equal-(e,h) pair {}: {} "
                        "(own >= {:.2f}/{:.2f}, cross {:.3f}, dE {:.1e}, dH {:.1e})",
                        pass_a ? "pass" : "fail", a.min_own_a, a.min_own_b, a.max_cross, pass_b ? "pass" : "fail",
                        b.verdict(), b.min_own_a, b.min_own_b, b.max_cross, de, dh)};
}

Outcome kam_sweep() {
    const auto t0 = std::chrono::steady_clock::now();
    const SurvivalParams p;
    const auto sw = epsilon_sweep(standard_twist_map(1.0), {0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, p);
    bool monotone = true;
    for (std::size_t i = 1; i < sw.rows.size(); ++i) monotone = monotone && sw.rows[i].destroyed >= sw.rows[i - 1].destroyed;
    bool tau_ok = true;
    std::string tau;
    for (const auto& r : tau_halving_check(1.0, {1e-3, 1e-2}, p)) {
        tau_ok = tau_ok && r.destroyed_half_tau >= r.destroyed_tau;
        tau += fmt::format(" eps {:.0e}: {:.4f} -> {:.4f};", r.eps, r.destroyed_tau, r.destroyed_half_tau);
    }
    const double minutes = minutes_since(t0);
    const bool pass = monotone && sw.floor <= kKamFloor && !sw.degenerate && sw.slope >= kSlopeLo &&
                      sw.slope <= kSlopeHi && tau_ok && minutes <= kKamMinutes;
    return {pass, fmt::format("monotone {}, floor {:.4f}, slope {:.3f}, tau halving{} {:.1f} min", monotone ? "yes" : "no",
                              sw.floor, sw.slope, tau, minutes)};
}

Outcome determinism() {
    auto spectrum_report = [](int threads) {
        SpectrumParams sp;
        sp.threads = threads;
        ModalEvaluator f(curl(make_shear_field(cos_sin_profile(), Axis::z, 32) +
                              3e-2 * perturbation_mode(Axis::z, 32)),
                         1e-14);
        return estimate_spectrum(f, 50, sp).to_json();
    };
    auto kam_report = [] {
        SurvivalParams p;
        p.grid = 101;
        p.n_iter = 20000;
        return epsilon_sweep(standard_twist_map(1.0), {0.0, 1e-3, 1e-2}, p).to_csv();
    };
    auto nonmixing_report = [] {
        NonmixingOptions o;
        o.seeds = 20;
        o.euler.snapshot_interval = 0.25;
        const auto p = cos_sin_profile();
        return nonmixing_experiment(make_shear_field(p, Axis::z, 16), perturbation_mode(Axis::z, 16),
                                    make_shear_field(p, Axis::x, 16), perturbation_mode(Axis::x, 16), 1e-2, 0.5, o)
            .to_csv();
    };
    const bool s = spectrum_report(1) == spectrum_report(1) && spectrum_report(1) == spectrum_report(2);
    const bool k = kam_report() == kam_report();
    const bool m = nonmixing_report() == nonmixing_report();
    return {s && k && m, fmt::format("spectrum {}, KAM sweep {}, non-mixing {}", s ? "identical" : "differs",
                                     k ? "identical" : "differs", m ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"operator identities", operator_identities},
        {"shear field oracle", shear_oracle},
        {"Hopf fields on S3", hopf_oracle},
        {"helicity bound", schwartz},
        {"spectrum oracle", spectrum_oracle},
        {"conservation", conservation},
        {"kappa conservation", kappa_conservation},
        {"non-mixing proxy", nonmixing_proxy},
        {"KAM sweep", kam_sweep},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d %-20s %s  %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
