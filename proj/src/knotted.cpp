#include "intspec/knotted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "intspec/errors.hpp"
#include "intspec/field_core.hpp"

namespace intspec {

KnotSpec KnotSpec::parse(const std::string& s) {
    if (s == "unknot") return {1, 0};
    if (s == "trefoil") return {2, 3};
    KnotSpec k;
    if (std::sscanf(s.c_str(), "%d,%d", &k.p, &k.q) != 2) throw DomainError("unknown knot '" + s + "'");
    return k;
}

std::string KnotSpec::label() const {
    if (std::min(std::abs(p), std::abs(q)) <= 1) return "unknot";
    return fmt::format("torus_knot({},{})", p, q);
}

namespace {
constexpr int kCurveSamples = 1024;
}

KnotChart::KnotChart(KnotSpec knot, const KnotOptions& opt, double tube_radius)
    : knot_(knot),
      R_(opt.major_radius > 0.0 ? opt.major_radius : (knot.q == 0 ? 1.5 : 1.6)),
      r_(opt.minor_radius > 0.0 ? opt.minor_radius : (knot.q == 0 ? 0.6 : 0.7)),
      a_(tube_radius),
      c_(opt.center) {
    ts_.resize(kCurveSamples);
    pts_.resize(kCurveSamples);
    std::vector<double> arc(kCurveSamples + 1, 0.0);
    double kappa_max = 0.0;
    for (int i = 0; i < kCurveSamples; ++i) {
        double t = kTwoPi * i / kCurveSamples;
        ts_[i] = t;
        pts_[i] = curve(t);
        extent_ = std::max(extent_, norm(pts_[i] - c_));
        Vec3 d1 = tangent(t);
        // Second derivative by central differences of the analytic tangent.
        const double h = 1e-5;
        Vec3 d2 = (1.0 / (2 * h)) * (tangent(t + h) - tangent(t - h));
        double sp = norm(d1);
        kappa_max = std::max(kappa_max, norm(cross(d1, d2)) / (sp * sp * sp));
        arc[i + 1] = arc[i] + sp * kTwoPi / kCurveSamples;
    }
    length_ = arc[kCurveSamples];
    const double rk = 1.0 / kappa_max;
    double global = INFINITY;
    for (int i = 0; i < kCurveSamples; ++i)
        for (int j = i + 1; j < kCurveSamples; ++j) {
            double s = arc[j] - arc[i];
            s = std::min(s, length_ - s);
            if (s < std::numbers::pi * rk) continue;
            global = std::min(global, 0.5 * norm(pts_[i] - pts_[j]));
        }
    reach_ = std::min(rk, global);
}

Vec3 KnotChart::curve(double t) const {
    const int p = knot_.p, q = knot_.q;
    double A = R_ + r_ * std::cos(q * t);
    return {c_[0] + A * std::cos(p * t), c_[1] + A * std::sin(p * t), c_[2] + r_ * std::sin(q * t)};
}

Vec3 KnotChart::tangent(double t) const {
    const int p = knot_.p, q = knot_.q;
    double A = R_ + r_ * std::cos(q * t);
    double dA = -r_ * q * std::sin(q * t);
    return {dA * std::cos(p * t) - p * A * std::sin(p * t), dA * std::sin(p * t) + p * A * std::cos(p * t),
            r_ * q * std::cos(q * t)};
}

void KnotChart::frame(double t, Vec3& e1, Vec3& e2, Vec3& de1, Vec3& de2) const {
    const int p = knot_.p, q = knot_.q;
    const double cp = std::cos(p * t), sp = std::sin(p * t), cq = std::cos(q * t), sq = std::sin(q * t);
    // Normal of the carrying torus, orthogonal to the curve.
    e1 = {cq * cp, cq * sp, sq};
    de1 = {-q * sq * cp - p * cq * sp, -q * sq * sp + p * cq * cp, q * cq};
    double A = R_ + r_ * cq;
    double dA = -r_ * q * sq;
    double ddA = -r_ * q * q * cq;
    Vec3 g1 = tangent(t);
    Vec3 g2{ddA * cp - 2 * p * dA * sp - p * p * A * cp, ddA * sp + 2 * p * dA * cp - p * p * A * sp,
            -r_ * q * q * sq};
    double speed = norm(g1);
    Vec3 T = (1.0 / speed) * g1;
    Vec3 dT = (1.0 / speed) * (g2 - dot(g2, T) * T);
    e2 = cross(T, e1);
    de2 = cross(dT, e1) + cross(T, de1);
}

Vec3 KnotChart::point(double s, double theta, double rho) const {
    Vec3 e1, e2, de1, de2;
    frame(s, e1, e2, de1, de2);
    return curve(s) + rho * (std::cos(theta) * e1 + std::sin(theta) * e2);
}

void KnotChart::frame_derivatives(double s, double theta, double rho, Vec3& xs, Vec3& xth, Vec3& xr) const {
    Vec3 e1, e2, de1, de2;
    frame(s, e1, e2, de1, de2);
    const double ct = std::cos(theta), st = std::sin(theta);
    xs = tangent(s) + rho * (ct * de1 + st * de2);
    xth = rho * (-st * e1 + ct * e2);
    xr = ct * e1 + st * e2;
}

TubeCoordinates KnotChart::coordinates(const Vec3& x) const {
    TubeCoordinates out;
    Vec3 P{c_[0] + periodic_delta(x[0] - c_[0]), c_[1] + periodic_delta(x[1] - c_[1]),
           c_[2] + periodic_delta(x[2] - c_[2])};
    // Distance to the carrying torus bounds the distance to the curve.
    Vec3 d = P - c_;
    double core = std::hypot(std::hypot(d[0], d[1]) - R_, d[2]);
    if (std::abs(core - r_) > a_ * 1.001) return out;

    // Candidates: parameters whose azimuth p t matches that of P.
    double t0 = 0.0, bd = INFINITY;
    auto consider = [&](double t) {
        Vec3 e = curve(t) - P;
        double dd = dot(e, e);
        if (dd < bd) {
            bd = dd;
            t0 = t;
        }
    };
    if (knot_.p != 0) {
        const int ap = std::abs(knot_.p);
        const double phi = std::atan2(d[1], d[0]) / knot_.p;
        for (int k = 0; k < ap; ++k) consider(phi + kTwoPi * k / ap);
    } else {
        for (int i = 0; i < kCurveSamples; ++i) consider(ts_[i]);
    }
    // Newton on (gamma(t) - P) . gamma'(t) = 0.
    double t = t0;
    const double dt_max = 0.25;
    for (int it = 0; it < 30; ++it) {
        Vec3 g = curve(t) - P;
        Vec3 g1 = tangent(t);
        const double h = 1e-6;
        Vec3 g2 = (1.0 / (2 * h)) * (tangent(t + h) - tangent(t - h));
        double phi = dot(g, g1);
        double dphi = dot(g1, g1) + dot(g, g2);
        double step = dphi > 0 ? -phi / dphi : 0.0;
        step = std::clamp(step, -dt_max, dt_max);
        t += step;
        if (std::abs(step) < 1e-15) break;
    }
    Vec3 e1, e2, de1, de2;
    frame(t, e1, e2, de1, de2);
    Vec3 g = P - curve(t);
    out.rho = norm(g);
    out.s = wrap_angle(t);
    out.theta = wrap_angle(std::atan2(dot(g, e2), dot(g, e1)));
    out.inside = out.rho < a_;
    if (out.rho > 1e-12) {
        Vec3 xs, xth, xr;
        frame_derivatives(t, out.theta, out.rho, xs, xth, xr);
        double det = dot(xs, cross(xth, xr));
        out.grad_s = (1.0 / det) * cross(xth, xr);
        out.grad_theta = (1.0 / det) * cross(xr, xs);
    }
    return out;
}

KnotTubeField::KnotTubeField(std::shared_ptr<const KnotChart> chart, TubeProfile profile, double scale)
    : chart_(std::move(chart)), profile_(std::move(profile)), scale_(scale) {}

Vec3 KnotTubeField::value(const Vec3& x) const {
    auto c = chart_->coordinates(x);
    if (!c.inside || c.rho <= 0.0) return {0.0, 0.0, 0.0};
    const double a = chart_->tube_radius();
    double z = 2.0 * c.rho / a - 1.0;
    double f = profile_.f(z), g = profile_.g(z);
    if (f == 0.0 && g == 0.0) return {0.0, 0.0, 0.0};
    Vec3 xs, xth, xr;
    chart_->frame_derivatives(c.s, c.theta, c.rho, xs, xth, xr);
    double det = dot(xs, cross(xth, xr));
    return (scale_ / det) * ((c.rho / a) * f * xs + g * xth);
}

KnottedField build_knotted_field(const KnotSpec& knot, double delta, const TubeProfile& profile,
                                 const KnotOptions& opt) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    if (std::gcd(std::abs(knot.p), std::abs(knot.q)) != 1) throw DomainError("p and q must be coprime");
    KnotChart probe(knot, opt, 0.0);
    const double a_max = std::min(0.5 * probe.reach(), opt.ball_radius - probe.extent());
    if (a_max <= 0.0) throw GeometryError("knot does not fit in the ball", 0.0);
    double a = a_max * std::sqrt(1.0 - delta);
    if (opt.tube_radius > 0.0) {
        if (opt.tube_radius > a_max)
            throw GeometryError(fmt::format("tube radius {} self-intersects or leaves the ball", opt.tube_radius),
                                a_max);
        a = opt.tube_radius;
    }
    auto chart = std::make_shared<KnotChart>(knot, opt, a);

    KnottedField out;
    out.chart = chart;
    auto& m = out.meta;
    m.label = knot.label();
    m.p = knot.p;
    m.q = knot.q;
    m.delta = delta;
    m.tube_radius = a;
    m.max_tube_radius = a_max;
    m.reach = chart->reach();
    m.length = chart->length();
    const double vol = std::pow(kTwoPi, 3);
    m.tube_measure = std::numbers::pi * a * a * m.length / vol;
    m.target_measure = (1.0 - delta) * std::numbers::pi * a_max * a_max * m.length / vol;

    auto closed = std::make_shared<KnotTubeField>(chart, profile, 1.0);
    auto fn = [&](const Vec3& x) { return closed->value(x); };
    SpectralField3 v = sample_field(opt.n, fn);
    m.removed_mean = mean(v);
    for (int k = 0; k < 3; ++k) v.at(k, 0, 0, 0) = 0.0;
    const double before = l2_norm(v);
    v = leray_project(v);
    m.projection_error = before > 0.0 ? v.discarded_norm() / before : 0.0;
    const double s = sup_norm(v);
    if (s > 0.0) {
        v *= 1.0 / s;
        m.removed_mean = (1.0 / s) * m.removed_mean;
    }
    v.set_divergence_free(true);
    out.field = std::move(v);
    out.exact = std::make_shared<KnotTubeField>(chart, profile, s > 0.0 ? 1.0 / s : 1.0);
    return out;
}

}  // namespace intspec
