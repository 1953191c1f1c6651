#include "intspec/field_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "intspec/errors.hpp"
#include "intspec/fft.hpp"
#include "intspec/rng.hpp"

namespace intspec {

namespace {

constexpr Complex kI{0.0, 1.0};

using CVec = std::array<Complex, 3>;

CVec coeff(const SpectralField3& v, std::size_t i) {
    return {v.component(0)[i], v.component(1)[i], v.component(2)[i]};
}

void store(SpectralField3& v, std::size_t i, const CVec& c) {
    for (int a = 0; a < 3; ++a) v.component(a)[i] = c[a];
}

CVec ik_cross(const std::array<int, 3>& k, const CVec& c) {
    return {kI * (double(k[1]) * c[2] - double(k[2]) * c[1]),
            kI * (double(k[2]) * c[0] - double(k[0]) * c[2]),
            kI * (double(k[0]) * c[1] - double(k[1]) * c[0])};
}

Complex k_dot(const std::array<int, 3>& k, const CVec& c) {
    return double(k[0]) * c[0] + double(k[1]) * c[1] + double(k[2]) * c[2];
}

double k2(const std::array<int, 3>& k) {
    return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}

double cnorm2(const CVec& c) { return std::norm(c[0]) + std::norm(c[1]) + std::norm(c[2]); }

}  // namespace

SpectralField3 curl(const SpectralField3& v) {
    SpectralField3 w(v.n());
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        store(w, i, ik_cross(k, coeff(v, i)));
    }
    w.set_divergence_free(true);
    return w;
}

SpectralScalar3 divergence(const SpectralField3& v) {
    SpectralScalar3 d(v.n());
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        d.data()[i] = kI * k_dot(k, coeff(v, i));
    }
    return d;
}

SpectralField3 gradient(const SpectralScalar3& f) {
    SpectralField3 v(f.n());
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        for (int a = 0; a < 3; ++a) v.component(a)[i] = kI * double(k[a]) * f.data()[i];
    }
    return v;
}

HelmholtzParts helmholtz(const SpectralField3& v) {
    HelmholtzParts p{SpectralField3(v.n()), SpectralField3(v.n()), {}};
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        auto k = g.mode(i);
        CVec c = coeff(v, i);
        if (k[0] == 0 && k[1] == 0 && k[2] == 0) {
            p.harmonic_part = {c[0].real(), c[1].real(), c[2].real()};
            continue;
        }
        Complex s = k_dot(k, c) / k2(k);
        CVec grad{s * double(k[0]), s * double(k[1]), s * double(k[2])};
        store(p.gradient_part, i, grad);
        store(p.exact_part, i, {c[0] - grad[0], c[1] - grad[1], c[2] - grad[2]});
    }
    p.exact_part.set_divergence_free(true);
    return p;
}

SpectralField3 inverse_curl(const SpectralField3& w, double tol) {
    const double scale = std::max(l2_norm(w), 1.0);
    Vec3 m = mean(w);
    const double mn = norm(m);
    const double dv = max_divergence(w);
    if (mn > tol * scale || dv > tol * scale)
        throw NotExactError("inverse_curl: field is not exact (mean " + std::to_string(mn) +
                                ", divergence " + std::to_string(dv) + ")",
                            mn, dv);
    SpectralField3 v(w.n());
    const auto& g = w.grid();
    for (std::size_t i = 0; i < w.modes(); ++i) {
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        double kk = k2(k);
        if (kk == 0.0) continue;
        CVec c = ik_cross(k, coeff(w, i));
        store(v, i, {c[0] / kk, c[1] / kk, c[2] / kk});
    }
    v.set_divergence_free(true);
    return v;
}

Invariants integral_invariants(const SpectralField3& v) {
    Invariants r;
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        CVec c = coeff(v, i);
        r.energy += cnorm2(c);
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        CVec w = ik_cross(k, c);
        r.helicity += (std::conj(c[0]) * w[0] + std::conj(c[1]) * w[1] + std::conj(c[2]) * w[2]).real();
    }
    return r;
}

ExactnessReport exactness_check(const SpectralField3& v, double tol) {
    ExactnessReport r;
    r.max_divergence = max_divergence(v);
    r.mean = mean(v);
    const int h = v.n() / 2;
    for (int k = -h + 1; k < h; ++k) {
        r.flux[0] += v.at(0, k, 0, 0).real();
        r.flux[1] += v.at(1, 0, k, 0).real();
        r.flux[2] += v.at(2, 0, 0, k).real();
    }
    r.exact = r.max_divergence <= tol;
    for (int a = 0; a < 3; ++a) r.exact = r.exact && std::abs(r.mean[a]) <= tol;
    return r;
}

namespace {

template <class Coef>
Complex fourier_sum(const ModeGrid& g, const Vec3& x, Coef coef) {
    const int n = g.n();
    std::vector<Complex> ex(n), ey(n), ez(n);
    for (int i = 0; i < n; ++i) {
        int k = g.wavenumber(i);
        ex[i] = std::polar(1.0, k * x[0]);
        ey[i] = std::polar(1.0, k * x[1]);
        ez[i] = std::polar(1.0, k * x[2]);
    }
    Complex s{};
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            Complex exy = ex[ix] * ey[iy];
            for (int iz = 0; iz < n; ++iz, ++idx) {
                Complex c = coef(idx);
                if (c != Complex{}) s += c * exy * ez[iz];
            }
        }
    return s;
}

}  // namespace

Vec3 evaluate(const SpectralField3& v, const Vec3& x) {
    Vec3 r;
    for (int a = 0; a < 3; ++a) {
        const auto& c = v.component(a);
        r[a] = fourier_sum(v.grid(), x, [&](std::size_t i) { return c[i]; }).real();
    }
    return r;
}

double evaluate(const SpectralScalar3& f, const Vec3& x) {
    return fourier_sum(f.grid(), x, [&](std::size_t i) { return f.data()[i]; }).real();
}

double inner(const SpectralField3& a, const SpectralField3& b) {
    if (a.n() != b.n()) throw InvalidFieldError("resolution mismatch");
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& x = a.component(c);
        const auto& y = b.component(c);
        for (std::size_t i = 0; i < x.size(); ++i) s += (std::conj(x[i]) * y[i]).real();
    }
    return s;
}

double l2_norm(const SpectralField3& v) { return std::sqrt(inner(v, v)); }

double l2_norm(const SpectralScalar3& f) {
    double s = 0.0;
    for (const auto& c : f.data()) s += std::norm(c);
    return std::sqrt(s);
}

Vec3 mean(const SpectralField3& v) {
    return {v.component(0)[0].real(), v.component(1)[0].real(), v.component(2)[0].real()};
}

double max_divergence(const SpectralField3& v) {
    double m = 0.0;
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) m = std::max(m, std::abs(k_dot(g.mode(i), coeff(v, i))));
    return m;
}

double sobolev_norm(const SpectralField3& v, double order) {
    double s = 0.0;
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        double w = std::pow(1.0 + k2(g.mode(i)), order);
        s += w * cnorm2(coeff(v, i));
    }
    return std::sqrt(s);
}

SpectralField3 leray_project(const SpectralField3& v) {
    SpectralField3 r(v.n());
    const auto& g = v.grid();
    double removed = 0.0;
    for (std::size_t i = 0; i < v.modes(); ++i) {
        auto k = g.mode(i);
        CVec c = coeff(v, i);
        double kk = k2(k);
        if (kk > 0.0) {
            Complex s = k_dot(k, c) / kk;
            for (int a = 0; a < 3; ++a) {
                Complex gpart = s * double(k[a]);
                removed += std::norm(gpart);
                c[a] -= gpart;
            }
        }
        store(r, i, c);
    }
    r.set_divergence_free(true);
    r.set_discarded_norm(std::sqrt(removed));
    return r;
}

SpectralField3 resample(const SpectralField3& v, int m) {
    SpectralField3 r(m);
    const int lim = std::min(v.n(), m) / 2;
    for (int kx = -lim + 1; kx < lim; ++kx)
        for (int ky = -lim + 1; ky < lim; ++ky)
            for (int kz = -lim + 1; kz < lim; ++kz)
                for (int a = 0; a < 3; ++a) r.at(a, kx, ky, kz) = v.at(a, kx, ky, kz);
    r.set_divergence_free(v.divergence_free());
    return r;
}

SpectralScalar3 resample(const SpectralScalar3& f, int m) {
    SpectralScalar3 r(m);
    const int lim = std::min(f.n(), m) / 2;
    for (int kx = -lim + 1; kx < lim; ++kx)
        for (int ky = -lim + 1; ky < lim; ++ky)
            for (int kz = -lim + 1; kz < lim; ++kz) r.at(kx, ky, kz) = f.at(kx, ky, kz);
    return r;
}

SpectralField3 translate(const SpectralField3& v, const Vec3& c) {
    SpectralField3 r(v.n());
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        auto k = g.mode(i);
        Complex ph = std::polar(1.0, k[0] * c[0] + k[1] * c[1] + k[2] * c[2]);
        for (int a = 0; a < 3; ++a) r.component(a)[i] = v.component(a)[i] * ph;
    }
    r.set_divergence_free(v.divergence_free());
    return r;
}

SpectralField3 reflect_z(const SpectralField3& v) {
    SpectralField3 r(v.n());
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        auto k = g.mode(i);
        std::size_t j = g.index(k[0], k[1], -k[2]);
        r.component(0)[i] = v.component(0)[j];
        r.component(1)[i] = v.component(1)[j];
        r.component(2)[i] = -v.component(2)[j];
    }
    r.set_divergence_free(v.divergence_free());
    return r;
}

void zero_nyquist(SpectralField3& v) {
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i)
        if (g.is_nyquist(g.mode(i)))
            for (int a = 0; a < 3; ++a) v.component(a)[i] = {};
}

void zero_nyquist(SpectralScalar3& f) {
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.is_nyquist(g.mode(i))) f.data()[i] = {};
}

double conjugate_symmetry_error(const SpectralField3& v) {
    double m = 0.0;
    const auto& g = v.grid();
    for (std::size_t i = 0; i < v.modes(); ++i) {
        std::size_t j = g.conjugate_index(i);
        for (int a = 0; a < 3; ++a)
            m = std::max(m, std::abs(v.component(a)[i] - std::conj(v.component(a)[j])));
    }
    return m;
}

GridField to_grid(const SpectralField3& v) {
    GridField g;
    g.n = v.n();
    auto& fft = fft_for(v.n());
    for (int a = 0; a < 3; ++a) {
        g.v[a].resize(v.modes());
        fft.backward_full(v.component(a).data(), g.v[a].data());
    }
    return g;
}

SpectralField3 from_grid(const GridField& g) {
    SpectralField3 v(g.n);
    auto& fft = fft_for(g.n);
    for (int a = 0; a < 3; ++a) fft.forward_full(g.v[a].data(), v.component(a).data());
    zero_nyquist(v);
    return v;
}

GridScalar to_grid(const SpectralScalar3& f) {
    GridScalar g;
    g.n = f.n();
    g.v.resize(f.grid().size());
    fft_for(f.n()).backward_full(f.data().data(), g.v.data());
    return g;
}

SpectralScalar3 from_grid(const GridScalar& g) {
    SpectralScalar3 f(g.n);
    fft_for(g.n).forward_full(g.v.data(), f.data().data());
    zero_nyquist(f);
    return f;
}

SpectralField3 sample_field(int n, const std::function<Vec3(const Vec3&)>& fn) {
    GridField g;
    g.n = n;
    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    for (auto& c : g.v) c.resize(total);
    const double h = kTwoPi / n;
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz, ++idx) {
                Vec3 val = fn({ix * h, iy * h, iz * h});
                for (int a = 0; a < 3; ++a) g.v[a][idx] = val[a];
            }
    return from_grid(g);
}

SpectralScalar3 sample_scalar(int n, const std::function<double(const Vec3&)>& fn) {
    GridScalar g;
    g.n = n;
    g.v.resize(static_cast<std::size_t>(n) * n * n);
    const double h = kTwoPi / n;
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz, ++idx) g.v[idx] = fn({ix * h, iy * h, iz * h});
    return from_grid(g);
}

namespace {

// Visits one representative of each {k, -k} pair with |k|_inf <= kmax.
template <class F>
void for_half_modes(int kmax, F f) {
    for (int kx = 0; kx <= kmax; ++kx)
        for (int ky = -kmax; ky <= kmax; ++ky)
            for (int kz = -kmax; kz <= kmax; ++kz) {
                if (kx == 0 && (ky < 0 || (ky == 0 && kz < 0))) continue;
                f(kx, ky, kz);
            }
}

}  // namespace

SpectralField3 random_field(int n, int kmax, std::uint64_t seed, bool divergence_free,
                            bool zero_mean, double decay) {
    if (kmax >= n / 2) throw InvalidFieldError("kmax must be below N/2");
    SpectralField3 v(n);
    std::mt19937_64 rng(seed);
    for_half_modes(kmax, [&](int kx, int ky, int kz) {
        const bool zero = kx == 0 && ky == 0 && kz == 0;
        double kn = std::sqrt(double(kx * kx + ky * ky + kz * kz));
        double amp = std::pow(1.0 + kn, -decay);
        for (int a = 0; a < 3; ++a) {
            double re = standard_normal(rng) * amp;
            double im = standard_normal(rng) * amp;
            if (zero) {
                v.at(a, 0, 0, 0) = zero_mean ? Complex{} : Complex(re, 0.0);
            } else {
                v.at(a, kx, ky, kz) = Complex(re, im);
                v.at(a, -kx, -ky, -kz) = Complex(re, -im);
            }
        }
    });
    if (divergence_free) {
        v = leray_project(v);
        v.set_discarded_norm(0.0);
    }
    return v;
}

SpectralScalar3 random_scalar(int n, int kmax, std::uint64_t seed, double decay) {
    if (kmax >= n / 2) throw InvalidFieldError("kmax must be below N/2");
    SpectralScalar3 f(n);
    std::mt19937_64 rng(seed);
    for_half_modes(kmax, [&](int kx, int ky, int kz) {
        double kn = std::sqrt(double(kx * kx + ky * ky + kz * kz));
        double amp = std::pow(1.0 + kn, -decay);
        double re = standard_normal(rng) * amp;
        double im = standard_normal(rng) * amp;
        if (kx == 0 && ky == 0 && kz == 0) {
            f.at(0, 0, 0) = Complex(re, 0.0);
        } else {
            f.at(kx, ky, kz) = Complex(re, im);
            f.at(-kx, -ky, -kz) = Complex(re, -im);
        }
    });
    return f;
}

double sup_norm(const SpectralField3& v) {
    GridField g = to_grid(v);
    double m = 0.0;
    for (std::size_t i = 0; i < g.v[0].size(); ++i)
        m = std::max(m, std::sqrt(g.v[0][i] * g.v[0][i] + g.v[1][i] * g.v[1][i] + g.v[2][i] * g.v[2][i]));
    return m;
}

double sup_norm(const SpectralScalar3& f) {
    GridScalar g = to_grid(f);
    double m = 0.0;
    for (double x : g.v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace intspec
