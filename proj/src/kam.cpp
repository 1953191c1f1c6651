#include "intspec/kam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "intspec/errors.hpp"
#include "intspec/flowline.hpp"
#include "intspec/rng.hpp"

namespace intspec {

std::array<double, 2> TwistMap::apply(double eps, double x, double z) const {
    const double zn = z + eps * std::sin(x - phase);
    return {x + rho(zn), zn};
}

std::array<std::array<double, 2>, 2> TwistMap::jacobian(double eps, double x, double z) const {
    const double c = eps * std::cos(x - phase);
    const double zn = z + eps * std::sin(x - phase);
    const double r = drho(zn);
    return {{{1.0 + r * c, r}, {c, 1.0}}};
}

TwistMap standard_twist_map(double tau, double z_lo, double z_hi) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (!(z_hi > z_lo)) throw DomainError("empty annulus");
    TwistMap m;
    m.name = fmt::format("standard(tau={})", tau);
    m.rho = [tau](double z) { return tau * z; };
    m.drho = [tau](double) { return tau; };
    m.z_lo = z_lo;
    m.z_hi = z_hi;
    m.tau = tau;
    return m;
}

TwistMap twist_map_from_profile(const TubeProfile& p, double lo, double hi) {
    if (!(hi > lo)) throw DomainError("empty interval");
    const int samples = 2001;
    std::vector<double> zeros;
    double prev_z = lo, prev_g = p.g(lo);
    if (prev_g == 0.0) zeros.push_back(lo);
    for (int i = 1; i < samples; ++i) {
        double z = lo + (hi - lo) * i / (samples - 1);
        double g = p.g(z);
        if (g == 0.0) {
            zeros.push_back(z);
        } else if (prev_g != 0.0 && (g > 0.0) != (prev_g > 0.0)) {
            double a = prev_z, b = z, ga = prev_g;
            for (int it = 0; it < 100; ++it) {
                double m = 0.5 * (a + b), gm = p.g(m);
                if ((gm > 0.0) == (ga > 0.0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            zeros.push_back(0.5 * (a + b));
        }
        prev_z = z;
        prev_g = g;
    }
    if (!zeros.empty()) {
        std::string list;
        for (double z : zeros) list += fmt::format("{}{:.12g}", list.empty() ? "" : ", ", z);
        throw DomainError(fmt::format("g vanishes on [{}, {}] at z = {}", lo, hi, list));
    }
    TwistMap m;
    m.name = fmt::format("profile({})", p.name);
    auto f = p.f, g = p.g, df = p.df, dg = p.dg;
    m.rho = [f, g](double z) { return kTwoPi * f(z) / g(z); };
    m.drho = [f, g, df, dg](double z) {
        double gz = g(z);
        return kTwoPi * (df(z) * gz - f(z) * dg(z)) / (gz * gz);
    };
    m.z_lo = lo;
    m.z_hi = hi;
    auto tw = twist_profile(p, lo, hi, samples);
    double tau = INFINITY;
    for (std::size_t i = 0; i < tw.z.size(); ++i) {
        double gz = p.g(tw.z[i]);
        tau = std::min(tau, kTwoPi * std::abs(tw.wronskian[i]) / (gz * gz));
    }
    m.tau = tau;
    return m;
}

double area_defect(const TwistMap& m, double eps, int quads, std::uint64_t seed, double size) {
    // 8-point Gauss-Legendre on [0, 1].
    static const double gx[8] = {0.0198550717512319, 0.1016667612931866, 0.2372337950418355, 0.4082826787521751,
                                 0.5917173212478249, 0.7627662049581645, 0.8983332387068134, 0.9801449282487681};
    static const double gw[8] = {0.0506142681451881, 0.1111905172266872, 0.1568533229389436, 0.1813418916891810,
                                 0.1813418916891810, 0.1568533229389436, 0.1111905172266872, 0.0506142681451881};
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int q = 0; q < quads; ++q) {
        const double cx = kTwoPi * uniform01(rng);
        const double cz = m.z_lo + size + (m.z_hi - m.z_lo - 2.0 * size) * uniform01(rng);
        std::array<std::array<double, 2>, 4> c;
        const double sx[4] = {-0.5, 0.5, 0.5, -0.5}, sz[4] = {-0.5, -0.5, 0.5, 0.5};
        for (int k = 0; k < 4; ++k)
            c[k] = {cx + size * (sx[k] + 0.2 * (uniform01(rng) - 0.5)),
                    cz + size * (sz[k] + 0.2 * (uniform01(rng) - 0.5))};
        double a0 = 0.0;
        for (int k = 0; k < 4; ++k) {
            const auto& p = c[k];
            const auto& r = c[(k + 1) % 4];
            a0 += 0.5 * ((p[0] - cx) * (r[1] - cz) - (r[0] - cx) * (p[1] - cz));
        }
        const auto ic = m.apply(eps, cx, cz);
        double a1 = 0.0;
        for (int k = 0; k < 4; ++k) {
            const auto& p = c[k];
            const auto& r = c[(k + 1) % 4];
            const double dx = r[0] - p[0], dz = r[1] - p[1];
            for (int g = 0; g < 8; ++g) {
                const double x = p[0] + gx[g] * dx, z = p[1] + gx[g] * dz;
                const auto im = m.apply(eps, x, z);
                const auto j = m.jacobian(eps, x, z);
                const double dZ = j[1][0] * dx + j[1][1] * dz;
                a1 += gw[g] * (im[0] - ic[0]) * dZ;
            }
        }
        worst = std::max(worst, std::abs(a1 - a0) / std::abs(a0));
    }
    return worst;
}

double net_flux(const TwistMap& m, double eps, double z0, int samples) {
    double flux = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = kTwoPi * i / samples;
        const auto im = m.apply(eps, x, z0);
        const auto j = m.jacobian(eps, x, z0);
        flux += (im[1] - z0) * j[0][0];
    }
    return flux * kTwoPi / samples;
}

const char* circle_verdict_name(CircleVerdict v) {
    switch (v) {
        case CircleVerdict::survived: return "survived";
        case CircleVerdict::resonant: return "resonant";
        case CircleVerdict::nonconvergent: return "nonconvergent";
        case CircleVerdict::escaped: return "escaped";
    }
    return "?";
}

namespace {

struct CircleResult {
    double rotation = 0.0, index = 0.0;
    CircleVerdict verdict = CircleVerdict::survived;
};

CircleResult classify_circle(const TwistMap& m, double eps, double z0, const SurvivalParams& p,
                             std::vector<double>& steps) {
    const double margin = 0.25 * (m.z_hi - m.z_lo);
    CircleResult r;
    double x = p.seed_x + m.phase, z = z0;
    steps.resize(static_cast<std::size_t>(p.n_iter));
    for (long k = 0; k < p.n_iter; ++k) {
        z += eps * std::sin(x - m.phase);
        if (!(z >= m.z_lo - margin && z <= m.z_hi + margin)) {
            r.verdict = CircleVerdict::escaped;
            r.index = 0.0;
            return r;
        }
        const double dx = m.rho(z);
        steps[k] = dx;
        x = std::fmod(x + dx, kTwoPi);
    }
    const std::size_t n = steps.size(), h = n / 2;
    auto get = [&](std::size_t i) { return steps[i]; };
    const double r1 = weighted_mean(0, h, get) / kTwoPi;
    const double r2 = weighted_mean(h, n, get) / kTwoPi;
    r.rotation = weighted_mean(0, n, get) / kTwoPi;
    const double d = std::abs(r1 - r2);
    r.index = d > 0.0 ? std::max(std::log10(d), -16.0) : -16.0;
    if (r.index > p.theta_qp) {
        r.verdict = CircleVerdict::nonconvergent;
        return r;
    }
    for (int q = 1; q <= p.q_max; ++q) {
        const double pq = std::round(r.rotation * q);
        if (std::abs(r.rotation - pq / q) < p.resonance_window / (q * static_cast<double>(p.n_iter))) {
            r.verdict = CircleVerdict::resonant;
            return r;
        }
    }
    return r;
}

}  // namespace

SurvivalResult survival_measure(const TwistMap& m, double eps, const SurvivalParams& p) {
    if (eps < 0.0) throw DomainError("eps must be nonnegative");
    if (p.grid < 2 || p.n_iter < 4) throw DomainError("grid and n_iter too small");
    SurvivalResult out;
    out.eps = eps;
    const int g = p.grid;
    out.z.resize(g);
    out.rotation.resize(g);
    out.index.resize(g);
    out.verdict.resize(g);
    for (int i = 0; i < g; ++i) out.z[i] = m.z_lo + (m.z_hi - m.z_lo) * i / (g - 1);
    auto work = [&](int begin, int end) {
        std::vector<double> steps;
        for (int i = begin; i < end; ++i) {
            auto c = classify_circle(m, eps, out.z[i], p, steps);
            out.rotation[i] = c.rotation;
            out.index[i] = c.index;
            out.verdict[i] = c.verdict;
        }
    };
    const int nt = std::clamp(p.threads, 1, g);
    if (nt == 1) {
        work(0, g);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work, g * t / nt, g * (t + 1) / nt);
        for (auto& th : pool) th.join();
    }
    int destroyed = 0;
    for (auto v : out.verdict) {
        if (v == CircleVerdict::survived) continue;
        ++destroyed;
        if (v == CircleVerdict::resonant) ++out.resonant;
        if (v == CircleVerdict::nonconvergent) ++out.nonconvergent;
        if (v == CircleVerdict::escaped) ++out.escaped;
    }
    out.destroyed_fraction = static_cast<double>(destroyed) / g;
    return out;
}

std::string SweepResult::to_csv() const {
    std::string s = "eps,destroyed\n";
    for (const auto& r : rows) s += fmt::format("{:.17g},{:.17g}\n", r.eps, r.destroyed);
    s += fmt::format("# slope {:.17g} prefactor {:.17g} floor {:.17g} degenerate {}\n", slope, prefactor, floor,
                     degenerate ? 1 : 0);
    return s;
}

SweepResult epsilon_sweep(const TwistMap& m, const std::vector<double>& eps, const SurvivalParams& p) {
    std::vector<double> pos;
    for (double e : eps)
        if (e > 0.0 && std::find(pos.begin(), pos.end(), e) == pos.end()) pos.push_back(e);
    if (pos.size() < 2) throw FitError("epsilon sweep needs at least two distinct positive eps values");
    SweepResult out;
    bool have_floor = false;
    for (double e : eps) {
        double d = survival_measure(m, e, p).destroyed_fraction;
        out.rows.push_back({e, d});
        if (e == 0.0) {
            out.floor = d;
            have_floor = true;
        }
    }
    if (!have_floor) out.floor = survival_measure(m, 0.0, p).destroyed_fraction;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : out.rows) {
        if (r.eps <= 0.0) continue;
        if (r.destroyed <= out.floor) out.degenerate = true;
        if (r.destroyed <= 0.0) continue;
        const double lx = std::log(r.eps), ly = std::log(r.destroyed);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw FitError("fewer than two rows with a nonzero destroyed fraction");
    const double den = n * sxx - sx * sx;
    out.slope = (n * sxy - sx * sy) / den;
    out.prefactor = std::exp((sy - out.slope * sx) / n);
    return out;
}

std::vector<TauCheckRow> tau_halving_check(double tau, const std::vector<double>& eps, const SurvivalParams& p) {
    const TwistMap a = standard_twist_map(tau), b = standard_twist_map(tau / 2.0);
    std::vector<TauCheckRow> rows;
    for (double e : eps)
        rows.push_back({e, survival_measure(a, e, p).destroyed_fraction, survival_measure(b, e, p).destroyed_fraction});
    return rows;
}

}  // namespace intspec
