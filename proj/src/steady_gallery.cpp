#include "intspec/steady_gallery.hpp"

#include <algorithm>
#include <cmath>

#include "intspec/errors.hpp"
#include "intspec/fft.hpp"
#include "intspec/field_core.hpp"

namespace intspec {

TubeProfile cos_sin_profile() {
    TubeProfile p;
    p.name = "cos-sin";
    p.f = [](double z) { return std::cos(z); };
    p.df = [](double z) { return -std::sin(z); };
    p.g = [](double z) { return std::sin(z); };
    p.dg = [](double z) { return std::cos(z); };
    return p;
}

TubeProfile sin_offset_profile() {
    TubeProfile p;
    p.name = "sin-offset";
    p.f = [](double z) { return std::sin(z); };
    p.df = [](double z) { return std::cos(z); };
    p.g = [](double z) { return 2.0 + std::cos(z); };
    p.dg = [](double z) { return -std::sin(z); };
    return p;
}

TubeProfile constant_profile(double a, double b) {
    TubeProfile p;
    p.name = "constant";
    p.f = [a](double) { return a; };
    p.df = [](double) { return 0.0; };
    p.g = [b](double) { return b; };
    p.dg = [](double) { return 0.0; };
    return p;
}

namespace {

double trig_series(const std::vector<double>& a, const std::vector<double>& b, double z) {
    double s = a.empty() ? 0.0 : a[0];
    for (std::size_t n = 1; n < a.size(); ++n) s += a[n] * std::cos(n * z);
    for (std::size_t n = 1; n < b.size(); ++n) s += b[n] * std::sin(n * z);
    return s;
}

double trig_series_derivative(const std::vector<double>& a, const std::vector<double>& b, double z) {
    double s = 0.0;
    for (std::size_t n = 1; n < a.size(); ++n) s -= a[n] * n * std::sin(n * z);
    for (std::size_t n = 1; n < b.size(); ++n) s += b[n] * n * std::cos(n * z);
    return s;
}

}  // namespace

TubeProfile fourier_profile(std::vector<double> fa, std::vector<double> fb, std::vector<double> ga,
                            std::vector<double> gb) {
    TubeProfile p;
    p.name = "fourier";
    p.f = [=](double z) { return trig_series(fa, fb, z); };
    p.df = [=](double z) { return trig_series_derivative(fa, fb, z); };
    p.g = [=](double z) { return trig_series(ga, gb, z); };
    p.dg = [=](double z) { return trig_series_derivative(ga, gb, z); };
    return p;
}

TubeProfile windowed_profile(int power, double center) {
    auto w = [=](double z) { return std::pow(0.5 * (1.0 + std::cos(z - center)), power); };
    auto dw = [=](double z) {
        return -0.5 * power * std::pow(0.5 * (1.0 + std::cos(z - center)), power - 1) * std::sin(z - center);
    };
    TubeProfile p;
    p.name = "windowed";
    p.f = [=](double z) { return w(z) * std::cos(z); };
    p.df = [=](double z) { return dw(z) * std::cos(z) - w(z) * std::sin(z); };
    p.g = [=](double z) { return w(z) * std::sin(z); };
    p.dg = [=](double z) { return dw(z) * std::sin(z) + w(z) * std::cos(z); };
    return p;
}

TubeProfile bump_twist_profile(double a0, double a1) {
    auto b = [](double z) { return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0; };
    auto db = [b](double z) {
        if (std::abs(z) >= 1.0) return 0.0;
        double d = 1.0 - z * z;
        return -2.0 * z / (d * d) * b(z);
    };
    TubeProfile p;
    p.name = "bump-twist";
    p.f = b;
    p.df = db;
    p.g = [=](double z) { return b(z) * (a0 + a1 * z); };
    p.dg = [=](double z) { return db(z) * (a0 + a1 * z) + b(z) * a1; };
    p.lo = -1.0;
    p.hi = 1.0;
    p.periodic = false;
    return p;
}

TubeProfile named_profile(const std::string& name) {
    if (name == "cos-sin") return cos_sin_profile();
    if (name == "sin-offset") return sin_offset_profile();
    if (name == "windowed") return windowed_profile(10, std::numbers::pi);
    throw DomainError("unknown profile '" + name + "'");
}

Axis parse_axis(const std::string& s) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw DomainError("unknown axis '" + s + "'");
}

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        default: return "z";
    }
}

namespace {

// Components receiving f and g for each axis (cyclic).
std::array<int, 3> axis_slots(Axis a) {
    int c = static_cast<int>(a);
    return {c, (c + 1) % 3, (c + 2) % 3};
}

}  // namespace

Vec3 shear_value(const TubeProfile& p, Axis axis, const Vec3& x) {
    auto s = axis_slots(axis);
    double t = x[s[0]];
    Vec3 v{};
    v[s[1]] = p.f(t);
    v[s[2]] = p.g(t);
    return v;
}

Vec3 shear_curl(const TubeProfile& p, Axis axis, const Vec3& x) {
    // For u^z: curl = -g' dx + f' dy; other axes by cyclic relabeling.
    auto s = axis_slots(axis);
    double t = x[s[0]];
    Vec3 w{};
    w[s[1]] = -p.dg(t);
    w[s[2]] = p.df(t);
    return w;
}

Vec3 perturbation_value(Axis axis, const Vec3& x) {
    auto s = axis_slots(axis);
    // Relabel so that s[0] plays the role of z, s[1] of x, s[2] of y.
    double phase = x[s[1]] + x[s[2]];
    Vec3 v{};
    v[s[0]] = std::cos(phase);
    v[s[1]] = std::sin(phase) / std::numbers::sqrt2;
    v[s[2]] = -std::sin(phase) / std::numbers::sqrt2;
    return v;
}

SpectralField3 perturbation_mode(Axis axis, int n) {
    auto m = sample_field(n, [&](const Vec3& x) { return perturbation_value(axis, x); });
    return leray_project(m);
}

std::array<int, 3> shear_homology(Axis axis) {
    std::array<int, 3> n{0, 0, 0};
    n[static_cast<int>(axis)] = 1;
    return n;
}

SpectralField3 make_shear_field(const TubeProfile& p, Axis axis, int n) {
    SpectralField3 u = sample_field(n, [&](const Vec3& x) { return shear_value(p, axis, x); });
    u = leray_project(u);
    return u;
}

SpectralScalar3 shear_bernoulli(const TubeProfile& p, Axis axis, int n) {
    const int c = static_cast<int>(axis);
    return sample_scalar(n, [&](const Vec3& x) {
        double f = p.f(x[c]);
        double g = p.g(x[c]);
        return 0.5 * (f * f + g * g);
    });
}

namespace {

SpectralScalar3 derivative(const SpectralScalar3& f, int dir) {
    SpectralScalar3 d(f.n());
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        d.data()[i] = Complex(0.0, double(k[dir])) * f.data()[i];
    }
    return d;
}

SpectralScalar3 component(const SpectralField3& v, int c) {
    SpectralScalar3 s(v.n());
    s.data() = v.component(c);
    return s;
}

}  // namespace

SteadyResiduals steady_residuals(const SpectralField3& u, const SpectralScalar3* alpha) {
    const int m = 2 * u.n();
    SpectralField3 U = resample(u, m);
    SpectralField3 W = resample(curl(u), m);
    GridField ug = to_grid(U);
    GridField wg = to_grid(W);
    const std::size_t total = ug.v[0].size();

    SteadyResiduals r;

    GridField lamb;
    lamb.n = m;
    for (int a = 0; a < 3; ++a) lamb.v[a].resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        Vec3 a{ug.v[0][i], ug.v[1][i], ug.v[2][i]};
        Vec3 b{wg.v[0][i], wg.v[1][i], wg.v[2][i]};
        Vec3 c = cross(a, b);
        for (int k = 0; k < 3; ++k) lamb.v[k][i] = c[k];
    }
    SpectralField3 L = from_grid(lamb);
    if (alpha) {
        L -= gradient(resample(*alpha, m));
        r.bernoulli = l2_norm(L);
    } else {
        HelmholtzParts h = helmholtz(L);
        r.bernoulli = std::sqrt(inner(h.exact_part, h.exact_part) + dot(h.harmonic_part, h.harmonic_part));
    }

    GridField br;
    br.n = m;
    for (int a = 0; a < 3; ++a) br.v[a].assign(total, 0.0);
    for (int a = 0; a < 3; ++a) {
        SpectralScalar3 ua = component(U, a);
        SpectralScalar3 wa = component(W, a);
        for (int j = 0; j < 3; ++j) {
            GridScalar dw = to_grid(derivative(wa, j));
            GridScalar du = to_grid(derivative(ua, j));
            for (std::size_t i = 0; i < total; ++i)
                br.v[a][i] += ug.v[j][i] * dw.v[i] - wg.v[j][i] * du.v[i];
        }
    }
    r.commutator = l2_norm(from_grid(br));
    return r;
}

TwistReport twist_profile(const TubeProfile& p, double lo, double hi, int samples) {
    TwistReport r;
    r.z.resize(samples);
    r.wronskian.resize(samples);
    r.tau = samples > 0 ? INFINITY : 0.0;
    for (int i = 0; i < samples; ++i) {
        double z = samples == 1 ? lo : lo + (hi - lo) * i / (samples - 1);
        double w = p.df(z) * p.g(z) - p.f(z) * p.dg(z);
        r.z[i] = z;
        r.wronskian[i] = w;
        r.tau = std::min(r.tau, std::abs(w));
    }
    return r;
}

HopfField::HopfField(RealFn f, RealFn df, RealFn g, RealFn dg)
    : f_(std::move(f)), df_(std::move(df)), g_(std::move(g)), dg_(std::move(dg)) {}

Vec4 HopfField::u1(const Vec4& p) { return {-p[1], p[0], p[3], -p[2]}; }
Vec4 HopfField::u2(const Vec4& p) { return {-p[1], p[0], -p[3], p[2]}; }

Vec4 HopfField::grad_F(const Vec4& p) {
    double F = HopfField::F(p);
    return Vec4{2.0 * p[0], 2.0 * p[1], 0.0, 0.0} - (2.0 * F) * p;
}

Vec4 HopfField::value(const Vec4& p) const {
    double F = HopfField::F(p);
    return f_(F) * u1(p) + g_(F) * u2(p);
}

Vec4 HopfField::rot(const Vec4& p) const {
    double F = HopfField::F(p);
    double a = df_(F) * (2.0 * F - 1.0) + 2.0 * f_(F) + dg_(F);
    double b = dg_(F) * (2.0 * F - 1.0) + 2.0 * g_(F) + df_(F);
    return a * u1(p) - b * u2(p);
}

double HopfField::bernoulli_H(double F) const {
    double f = f_(F), g = g_(F), df = df_(F), dg = dg_(F);
    return f * df + g * dg + 4.0 * f * g + (2.0 * F - 1.0) * (f * dg + g * df);
}

namespace {

double det4(const std::array<Vec4, 4>& r) {
    // Laplace expansion along the first row.
    auto det3 = [&](int skip) {
        int c[3], k = 0;
        for (int j = 0; j < 4; ++j)
            if (j != skip) c[k++] = j;
        return r[1][c[0]] * (r[2][c[1]] * r[3][c[2]] - r[2][c[2]] * r[3][c[1]]) -
               r[1][c[1]] * (r[2][c[0]] * r[3][c[2]] - r[2][c[2]] * r[3][c[0]]) +
               r[1][c[2]] * (r[2][c[0]] * r[3][c[1]] - r[2][c[1]] * r[3][c[0]]);
    };
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += (j % 2 == 0 ? 1.0 : -1.0) * r[0][j] * det3(j);
    return s;
}

constexpr double kOrientation = -1.0;

}  // namespace

std::array<Vec4, 3> sphere_tangent_basis(const Vec4& p) {
    std::array<Vec4, 4> vs;
    vs[0] = p;
    int count = 1;
    // Gram-Schmidt on the coordinate axes, skipping the most parallel one.
    int skip = 0;
    for (int j = 1; j < 4; ++j)
        if (std::abs(p[j]) > std::abs(p[skip])) skip = j;
    for (int j = 0; j < 4 && count < 4; ++j) {
        if (j == skip) continue;
        Vec4 v{};
        v[j] = 1.0;
        for (int b = 0; b < count; ++b) v = v - dot(v, vs[b]) * vs[b];
        vs[count++] = (1.0 / norm(v)) * v;
    }
    std::array<Vec4, 3> t{vs[1], vs[2], vs[3]};
    if (det4({p, t[0], t[1], t[2]}) < 0.0) t[0] = -1.0 * t[0];
    return t;
}

Vec4 sphere_cross(const Vec4& p, const Vec4& a, const Vec4& b) {
    auto t = sphere_tangent_basis(p);
    Vec4 r{};
    for (const auto& ti : t) r = r + (kOrientation * det4({p, a, b, ti})) * ti;
    return r;
}

Vec4 sphere_curl(const std::function<Vec4(const Vec4&)>& fn, const Vec4& p, double h) {
    static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    auto deriv = [&](const Vec4& a) {
        Vec4 d{};
        for (int i = 0; i < 4; ++i) d = d + c[i] * (fn(p + ((i + 1) * h) * a) - fn(p - ((i + 1) * h) * a));
        return (1.0 / h) * d;
    };
    auto t = sphere_tangent_basis(p);
    std::array<Vec4, 3> dt{deriv(t[0]), deriv(t[1]), deriv(t[2])};
    auto omega = [&](int a, int b) { return dot(dt[a], t[b]) - dot(dt[b], t[a]); };
    double c1 = kOrientation * omega(1, 2);
    double c2 = kOrientation * omega(2, 0);
    double c3 = kOrientation * omega(0, 1);
    return c1 * t[0] + c2 * t[1] + c3 * t[2];
}

}  // namespace intspec
