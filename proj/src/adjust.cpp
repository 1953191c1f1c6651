#include "intspec/adjust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "intspec/errors.hpp"
#include "intspec/field_core.hpp"

namespace intspec {

namespace {

double periodic_distance(const Vec3& a, const Vec3& b) {
    return std::hypot(periodic_delta(a[0] - b[0]), periodic_delta(a[1] - b[1]), periodic_delta(a[2] - b[2]));
}

// psi z-hat with psi a Gaussian of width sigma around c.  A compactly
// supported bump rings at the grid scale after truncation; the Gaussian is
// below 1e-4 outside the ball and its spectrum is negligible at the cutoff.
SpectralField3 bump_potential(int n, const Vec3& c, double sigma) {
    const double s2 = 2.0 * sigma * sigma;
    return sample_field(n, [&](const Vec3& x) {
        double d = periodic_distance(x, c);
        return Vec3{0.0, 0.0, std::exp(-d * d / s2)};
    });
}

double helicity_form(const SpectralField3& a, const SpectralField3& b) { return inner(a, curl(b)); }

struct Quadratic {
    double u, uv, vv, uw, ww, vw;
    double at(double t, double l) const {
        return u + 2.0 * t * uv + t * t * vv + 2.0 * l * uw + l * l * ww + 2.0 * t * l * vw;
    }
};

Quadratic quadratic(const SpectralField3& u, const SpectralField3& v, const SpectralField3& w,
                    double (*form)(const SpectralField3&, const SpectralField3&)) {
    return {form(u, u), form(u, v), form(v, v), form(u, w), form(w, w), form(v, w)};
}

double energy_form(const SpectralField3& a, const SpectralField3& b) { return inner(a, b); }

// Root of H(t, lambda) = h in t nearest zero.
double solve_t(const Quadratic& H, double l, double h) {
    const double a = H.vv;
    const double b = 2.0 * (H.uv + l * H.vw);
    const double c = H.u + 2.0 * l * H.uw + l * l * H.ww - h;
    if (c == 0.0) return 0.0;
    if (a == 0.0) return b == 0.0 ? 0.0 : -c / b;
    double disc = std::max(0.0, b * b - 4.0 * a * c);
    // Stable form of the smaller root.
    double q = -0.5 * (b + (b >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc));
    double r1 = q / a;
    double r2 = q != 0.0 ? c / q : r1;
    return std::abs(r1) < std::abs(r2) ? r1 : r2;
}

}  // namespace

AdjustResult adjust_energy_helicity(const SpectralField3& u, double e, double h, const AdjustOptions& opt) {
    const int n = u.n();
    const double rb = opt.ball_radius;
    if (!(rb > 0.0 && rb < std::numbers::pi / 2)) throw DomainError("ball radius must lie in (0, pi/2)");
    if (!(opt.blob_width > 0.0)) throw DomainError("blob width must be positive");
    const auto inv = integral_invariants(u);

    AdjustResult out;
    out.ball_radius = rb;
    if (std::abs(e - inv.energy) <= opt.tol * (1.0 + std::abs(e)) &&
        std::abs(h - inv.helicity) <= opt.tol * (1.0 + std::abs(h))) {
        out.field = u;
        out.unchanged = true;
        out.energy = inv.energy;
        out.helicity = inv.helicity;
        out.threshold = inv.energy;
        return out;
    }

    // Vorticity magnitude on the grid.
    GridField wg = to_grid(curl(u));
    std::vector<double> mag(wg.v[0].size());
    double wmax = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(wg.v[0][i], wg.v[1][i], wg.v[2][i]);
        wmax = std::max(wmax, mag[i]);
    }
    const double hgrid = kTwoPi / n;
    auto grid_point = [&](std::size_t i) {
        std::size_t iz = i % n, iy = (i / n) % n, ix = i / (static_cast<std::size_t>(n) * n);
        return Vec3{hgrid * ix, hgrid * iy, hgrid * iz};
    };
    const int reach = static_cast<int>(std::ceil(rb / hgrid));
    auto ball_max = [&](const Vec3& c) {
        int c0[3];
        for (int a = 0; a < 3; ++a) c0[a] = static_cast<int>(std::lround(c[a] / hgrid));
        double m = 0.0;
        for (int dx = -reach; dx <= reach; ++dx)
            for (int dy = -reach; dy <= reach; ++dy)
                for (int dz = -reach; dz <= reach; ++dz) {
                    int ix = ((c0[0] + dx) % n + n) % n, iy = ((c0[1] + dy) % n + n) % n,
                        iz = ((c0[2] + dz) % n + n) % n;
                    std::size_t i = (static_cast<std::size_t>(ix) * n + iy) * n + iz;
                    if (periodic_distance(grid_point(i), c) <= rb) m = std::max(m, mag[i]);
                }
        return wmax > 0.0 ? m / wmax : 0.0;
    };

    // Ball centers: lowest vorticity first, ties in lattice order.
    const int M = opt.candidates;
    std::vector<Vec3> cand;
    std::vector<double> score;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) {
                Vec3 c{kTwoPi * i / M, kTwoPi * j / M, kTwoPi * k / M};
                cand.push_back(c);
                score.push_back(ball_max(c));
            }
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] < score[b]; });
    const std::size_t first = order[0];
    if (score[first] > opt.support_tol)
        throw DomainError(fmt::format("no ball of radius {} avoids the vorticity (best {:.3g})", rb, score[first]));
    // Second ball: usable and farthest from the first.
    std::size_t second = cand.size();
    double far = 2.0 * rb + hgrid;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (score[i] > opt.support_tol) continue;
        double d = periodic_distance(cand[i], cand[first]);
        if (d >= far) {
            far = d;
            second = i;
        }
    }
    if (second == cand.size())
        throw DomainError(fmt::format("no two disjoint balls of radius {} avoid the vorticity", rb));
    out.helical_center = cand[first];
    out.energy_center = cand[second];
    out.curl_in_supports = std::max(score[first], score[second]);

    // Twisted blob v = r T + (s / r) P with T = curl(psi z), P = curl T, so
    // H(v) = 2 s <P, P> and E(v) is minimal for r^4 = <P, P> / <T, T>.
    SpectralField3 T = curl(bump_potential(n, out.helical_center, opt.blob_width * rb));
    SpectralField3 P = curl(T);
    const double sgn = h >= inv.helicity ? 1.0 : -1.0;
    const double r = std::pow(inner(P, P) / inner(T, T), 0.25);
    SpectralField3 v = r * T + (sgn / r) * P;
    // Untwisted blob: azimuthal around z, so v . curl v vanishes pointwise.
    SpectralField3 w = curl(bump_potential(n, out.energy_center, opt.blob_width * rb));

    const Quadratic E = quadratic(u, v, w, energy_form);
    const Quadratic H = quadratic(u, v, w, helicity_form);
    out.cross = {E.uv, E.uw, E.vw, H.uv, H.uw, H.vw, H.ww};

    auto residual = [&](double l) { return E.at(solve_t(H, l, h), l) - e; };
    out.threshold = E.at(solve_t(H, 0.0, h), 0.0);
    const double etol = opt.tol * (1.0 + std::abs(e));
    if (residual(0.0) > etol)
        throw InfeasibleEnergyError(fmt::format("energy {} is below the threshold {} for helicity {}", e,
                                                out.threshold, h),
                                    out.threshold);
    // Bracket and bisect in lambda >= 0.
    double lo = 0.0, hi = std::sqrt(std::max(e - out.threshold, 0.0) / E.ww) + 1e-12;
    while (residual(hi) < 0.0) hi *= 2.0;
    double l = hi;
    int it = 0;
    for (; it < 200; ++it) {
        l = 0.5 * (lo + hi);
        double g = residual(l);
        if (std::abs(g) <= etol || hi - lo <= 1e-17 * hi) break;
        (g < 0.0 ? lo : hi) = l;
    }
    out.iterations = it;
    out.lambda = l;
    out.t = solve_t(H, l, h);
    out.field = u + out.t * v + out.lambda * w;
    out.field.set_divergence_free(u.divergence_free());
    const auto got = integral_invariants(out.field);
    out.energy = got.energy;
    out.helicity = got.helicity;

    GridField dg = to_grid(curl(out.t * v + out.lambda * w));
    double change = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        if (mag[i] <= opt.support_tol * wmax) continue;
        change = std::max(change, std::hypot(dg.v[0][i], dg.v[1][i], dg.v[2][i]));
    }
    out.curl_change_on_support = wmax > 0.0 ? change / wmax : 0.0;
    return out;
}

}  // namespace intspec
