#include "intspec/field_eval.hpp"

#include <algorithm>
#include <cmath>

#include "intspec/fft.hpp"
#include "intspec/field_core.hpp"

namespace intspec {

void FlowField::value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const {
    v = value(x);
    const double h = 1e-4;
    for (int j = 0; j < 3; ++j) {
        Vec3 e{};
        e[j] = h;
        Vec3 d = (8.0 / 12.0) * (value(x + e) - value(x - e)) -
                 (1.0 / 12.0) * (value(x + 2.0 * e) - value(x - 2.0 * e));
        for (int i = 0; i < 3; ++i) jac[i][j] = d[i] / h;
    }
}

ModalEvaluator::ModalEvaluator(const SpectralField3& v, double prune_relative) {
    const auto& g = v.grid();
    double cmax = 0.0;
    for (std::size_t i = 0; i < v.modes(); ++i)
        for (int a = 0; a < 3; ++a) cmax = std::max(cmax, std::abs(v.component(a)[i]));
    const double cut = prune_relative * cmax;
    for (int a = 0; a < 3; ++a) mean_[a] = v.component(a)[0].real();
    for (std::size_t i = 1; i < v.modes(); ++i) {
        auto k = g.mode(i);
        if (g.is_nyquist(k)) continue;
        // One representative per conjugate pair.
        bool upper = k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)));
        if (!upper) continue;
        Mode m{{k[0], k[1], k[2]}, {}};
        double mag = 0.0;
        for (int a = 0; a < 3; ++a) {
            m.c[a] = 2.0 * v.component(a)[i];
            mag = std::max(mag, std::abs(v.component(a)[i]));
        }
        if (mag == 0.0 || mag <= cut) continue;
        for (int a = 0; a < 3; ++a) kmax_[a] = std::max(kmax_[a], std::abs(k[a]));
        modes_.push_back(m);
    }
}

void ModalEvaluator::phases(const Vec3& x, std::vector<Complex>* tab) const {
    for (int a = 0; a < 3; ++a) {
        const int km = kmax_[a];
        auto& t = tab[a];
        t.resize(2 * km + 1);
        t[km] = 1.0;
        if (km == 0) continue;
        Complex e = std::polar(1.0, x[a]);
        Complex p = 1.0;
        for (int k = 1; k <= km; ++k) {
            // Refresh periodically to limit accumulated rounding.
            p = (k % 8 == 0) ? std::polar(1.0, k * x[a]) : p * e;
            t[km + k] = p;
            t[km - k] = std::conj(p);
        }
    }
}

Vec3 ModalEvaluator::value(const Vec3& x) const {
    thread_local std::vector<Complex> tab[3];
    phases(x, tab);
    double r[3] = {mean_[0], mean_[1], mean_[2]};
    for (const auto& m : modes_) {
        Complex e = tab[0][kmax_[0] + m.k[0]] * tab[1][kmax_[1] + m.k[1]] * tab[2][kmax_[2] + m.k[2]];
        for (int a = 0; a < 3; ++a) r[a] += m.c[a].real() * e.real() - m.c[a].imag() * e.imag();
    }
    return {r[0], r[1], r[2]};
}

void ModalEvaluator::value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const {
    thread_local std::vector<Complex> tab[3];
    phases(x, tab);
    double r[3] = {mean_[0], mean_[1], mean_[2]};
    double j[3][3] = {};
    for (const auto& m : modes_) {
        Complex e = tab[0][kmax_[0] + m.k[0]] * tab[1][kmax_[1] + m.k[1]] * tab[2][kmax_[2] + m.k[2]];
        for (int a = 0; a < 3; ++a) {
            double re = m.c[a].real() * e.real() - m.c[a].imag() * e.imag();
            double im = m.c[a].real() * e.imag() + m.c[a].imag() * e.real();
            r[a] += re;
            // d/dx_b Re(c e^{ik.x}) = -k_b Im(c e^{ik.x})
            for (int b = 0; b < 3; ++b) j[a][b] -= m.k[b] * im;
        }
    }
    v = {r[0], r[1], r[2]};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) jac[a][b] = j[a][b];
}

namespace {

// Centered quintic B-spline with its first and second derivatives.
inline void bspline5(double x, double& w, double& dw, double& ddw) {
    double ax = std::abs(x);
    double sg = x < 0.0 ? -1.0 : 1.0;
    if (ax < 1.0) {
        double x2 = ax * ax;
        w = 11.0 / 20.0 - x2 / 2.0 + x2 * x2 / 4.0 - x2 * x2 * ax / 12.0;
        dw = sg * (-ax + ax * x2 - 5.0 / 12.0 * x2 * x2);
        ddw = -1.0 + 3.0 * x2 - 5.0 / 3.0 * x2 * ax;
    } else if (ax < 2.0) {
        double x2 = ax * ax;
        w = 17.0 / 40.0 + 5.0 / 8.0 * ax - 7.0 / 4.0 * x2 + 5.0 / 4.0 * x2 * ax - 3.0 / 8.0 * x2 * x2 +
            x2 * x2 * ax / 24.0;
        dw = sg * (5.0 / 8.0 - 7.0 / 2.0 * ax + 15.0 / 4.0 * x2 - 3.0 / 2.0 * x2 * ax + 5.0 / 24.0 * x2 * x2);
        ddw = -7.0 / 2.0 + 15.0 / 2.0 * ax - 9.0 / 2.0 * x2 + 5.0 / 6.0 * x2 * ax;
    } else if (ax < 3.0) {
        double d = 3.0 - ax;
        double d2 = d * d;
        w = d2 * d2 * d / 120.0;
        dw = -sg * d2 * d2 / 24.0;
        ddw = d2 * d / 6.0;
    } else {
        w = 0.0;
        dw = 0.0;
        ddw = 0.0;
    }
}

inline double spline_symbol(int k, int m) {
    double th = kTwoPi * k / m;
    return 11.0 / 20.0 + 13.0 / 30.0 * std::cos(th) + 1.0 / 60.0 * std::cos(2.0 * th);
}

}  // namespace

SplineEvaluator::SplineEvaluator(const SpectralField3& v, int upsample) {
    m_ = v.n() * upsample;
    h_ = kTwoPi / m_;
    mean_ = mean(v);
    SpectralField3 w = leray_project(v);
    for (int a = 0; a < 3; ++a) w.at(a, 0, 0, 0) = 0.0;
    SpectralField3 up = resample(inverse_curl(w, INFINITY), m_);
    const auto& g = up.grid();
    for (std::size_t i = 0; i < up.modes(); ++i) {
        auto k = g.mode(i);
        double s = spline_symbol(k[0], m_) * spline_symbol(k[1], m_) * spline_symbol(k[2], m_);
        for (int a = 0; a < 3; ++a) up.component(a)[i] /= s;
    }
    GridField cg = to_grid(up);
    for (int a = 0; a < 3; ++a) coef_[a] = std::move(cg.v[a]);
}

Vec3 SplineEvaluator::value(const Vec3& x) const {
    Vec3 v;
    Mat3 j;
    value_jacobian(x, v, j);
    return v;
}

void SplineEvaluator::value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const {
    int base[3];
    double w[3][6], dw[3][6], ddw[3][6];
    const double ih = 1.0 / h_;
    for (int a = 0; a < 3; ++a) {
        double u = wrap_angle(x[a]) * ih;
        int i0 = static_cast<int>(std::floor(u));
        double t = u - i0;
        base[a] = i0 - 2;
        for (int m = 0; m < 6; ++m) {
            bspline5(t - (m - 2), w[a][m], dw[a][m], ddw[a][m]);
            dw[a][m] *= ih;
            ddw[a][m] *= ih * ih;
        }
    }
    // d[c][b] = d A_c / d x_b, dd[c][b][e] = d^2 A_c / d x_b d x_e.
    double d[3][3] = {};
    double dd[3][3][3] = {};
    const int M = m_;
    for (int mx = 0; mx < 6; ++mx) {
        int ix = ((base[0] + mx) % M + M) % M;
        for (int my = 0; my < 6; ++my) {
            int iy = ((base[1] + my) % M + M) % M;
            std::size_t row = (static_cast<std::size_t>(ix) * M + iy) * M;
            const double w0 = w[0][mx], d0 = dw[0][mx], e0 = ddw[0][mx];
            const double w1 = w[1][my], d1 = dw[1][my], e1 = ddw[1][my];
            for (int mz = 0; mz < 6; ++mz) {
                int iz = ((base[2] + mz) % M + M) % M;
                const double w2 = w[2][mz], d2 = dw[2][mz], e2 = ddw[2][mz];
                const double g[3] = {d0 * w1 * w2, w0 * d1 * w2, w0 * w1 * d2};
                const double hxx = e0 * w1 * w2, hyy = w0 * e1 * w2, hzz = w0 * w1 * e2;
                const double hxy = d0 * d1 * w2, hxz = d0 * w1 * d2, hyz = w0 * d1 * d2;
                for (int c = 0; c < 3; ++c) {
                    double cf = coef_[c][row + iz];
                    for (int b = 0; b < 3; ++b) d[c][b] += cf * g[b];
                    dd[c][0][0] += cf * hxx;
                    dd[c][1][1] += cf * hyy;
                    dd[c][2][2] += cf * hzz;
                    dd[c][0][1] += cf * hxy;
                    dd[c][0][2] += cf * hxz;
                    dd[c][1][2] += cf * hyz;
                }
            }
        }
    }
    for (int c = 0; c < 3; ++c) {
        dd[c][1][0] = dd[c][0][1];
        dd[c][2][0] = dd[c][0][2];
        dd[c][2][1] = dd[c][1][2];
    }
    // V = mean + curl A.
    v = {mean_[0] + d[2][1] - d[1][2], mean_[1] + d[0][2] - d[2][0], mean_[2] + d[1][0] - d[0][1]};
    for (int e = 0; e < 3; ++e) {
        jac[0][e] = dd[2][1][e] - dd[1][2][e];
        jac[1][e] = dd[0][2][e] - dd[2][0][e];
        jac[2][e] = dd[1][0][e] - dd[0][1][e];
    }
}

AnalyticField::AnalyticField(ValueFn value, JacobianFn jacobian)
    : value_(std::move(value)), jacobian_(std::move(jacobian)) {}

void AnalyticField::value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const {
    if (!jacobian_) {
        FlowField::value_jacobian(x, v, jac);
        return;
    }
    v = value_(x);
    jac = jacobian_(x);
}

std::unique_ptr<FlowField> make_evaluator(const SpectralField3& v, const EvaluatorOptions& opt) {
    auto modal = std::make_unique<ModalEvaluator>(v, opt.prune_relative);
    if (modal->active_modes() <= opt.max_modal_modes) return modal;
    return std::make_unique<SplineEvaluator>(v, opt.spline_upsample);
}

std::unique_ptr<AnalyticField> abc_field(double a, double b, double c) {
    auto value = [=](const Vec3& x) {
        return Vec3{a * std::sin(x[2]) + c * std::cos(x[1]), b * std::sin(x[0]) + a * std::cos(x[2]),
                    c * std::sin(x[1]) + b * std::cos(x[0])};
    };
    auto jac = [=](const Vec3& x) {
        Mat3 j{};
        j[0][1] = -c * std::sin(x[1]);
        j[0][2] = a * std::cos(x[2]);
        j[1][0] = b * std::cos(x[0]);
        j[1][2] = -a * std::sin(x[2]);
        j[2][0] = -b * std::sin(x[0]);
        j[2][1] = c * std::cos(x[1]);
        return j;
    };
    return std::make_unique<AnalyticField>(value, jac);
}

void SumField::value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const {
    Vec3 vb;
    Mat3 jb;
    a_->value_jacobian(x, v, jac);
    b_->value_jacobian(x, vb, jb);
    for (int i = 0; i < 3; ++i) {
        v[i] += vb[i];
        for (int j = 0; j < 3; ++j) jac[i][j] += jb[i][j];
    }
}

std::unique_ptr<AnalyticField> two_integral_field() {
    // grad f1 = -(sin x, sin y, sin z), grad f2 = (-sin x, sin y, 0).
    auto value = [](const Vec3& x) {
        double sx = std::sin(x[0]), sy = std::sin(x[1]), sz = std::sin(x[2]);
        return cross(Vec3{-sx, -sy, -sz}, Vec3{-sx, sy, 0.0});
    };
    auto jac = [](const Vec3& x) {
        // W = (sz sy, sz sx, -2 sx sy)
        double sx = std::sin(x[0]), sy = std::sin(x[1]), sz = std::sin(x[2]);
        double cx = std::cos(x[0]), cy = std::cos(x[1]), cz = std::cos(x[2]);
        Mat3 j{};
        j[0] = {0.0, sz * cy, cz * sy};
        j[1] = {sz * cx, 0.0, cz * sx};
        j[2] = {-2.0 * cx * sy, -2.0 * sx * cy, 0.0};
        return j;
    };
    return std::make_unique<AnalyticField>(value, jac);
}

}  // namespace intspec
