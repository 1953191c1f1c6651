#include "intspec/flowline.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "intspec/dop853.hpp"

namespace intspec {

namespace {

std::vector<double> sample_times(double T, double dt) {
    std::vector<double> ts;
    if (T <= 0.0) return {0.0};
    const long n = static_cast<long>(std::floor(T / dt + 1e-9));
    ts.reserve(n + 2);
    for (long j = 0; j <= n; ++j) ts.push_back(j * dt);
    if (T - ts.back() > 1e-12 * std::max(1.0, T)) ts.push_back(T);
    return ts;
}

template <std::size_t D>
void copy_stats(const Dop853<D>& s, IntegratorStats& st) {
    st.steps = s.steps();
    st.rejected = s.rejected();
    st.evaluations = s.evaluations();
    st.max_error_estimate = s.max_error();
}

}  // namespace

double birkhoff_weight(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (s * (1.0 - s)));
}

Trajectory trace(const FlowField& field, const Vec3& x0, double T, double tol, const TraceOptions& opt) {
    Trajectory tr;
    auto rhs = [&field](double, const Vec3& y, Vec3& dy) { dy = field.value(y); };
    typename Dop853<3>::Options o;
    o.atol = tol;
    o.rtol = 0.0;
    o.max_step = opt.max_step;
    Dop853<3> solver(rhs, 0.0, x0, T, o);
    const auto times = sample_times(T, opt.sample_dt);
    tr.samples.reserve(times.size());
    auto push = [&](double t, const Vec3& x) {
        tr.samples.push_back({t, x, wrap_point(x), field.value(x)});
    };
    push(0.0, x0);
    std::size_t next = 1;
    while (next < times.size()) {
        auto st = solver.step();
        if (st == Dop853<3>::Status::failed || solver.steps() > opt.max_steps) {
            tr.stats.failed = true;
            tr.stats.failure = st == Dop853<3>::Status::failed ? "step size underflow" : "step limit reached";
            break;
        }
        while (next < times.size() && times[next] <= solver.t()) {
            double t = times[next];
            push(t, t == solver.t() ? solver.y() : solver.dense(t));
            ++next;
        }
        if (st == Dop853<3>::Status::finished) break;
    }
    copy_stats(solver, tr.stats);
    return tr;
}

TangentTrace trace_with_tangent(const FlowField& field, const Vec3& x0, double T, const TraceOptions& opt,
                                const Vec3& delta0) {
    using State = std::array<double, 6>;
    TangentTrace out;
    auto rhs = [&field](double, const State& y, State& dy) {
        Vec3 v;
        Mat3 j;
        field.value_jacobian({y[0], y[1], y[2]}, v, j);
        Vec3 d{y[3], y[4], y[5]};
        Vec3 jd = matvec(j, d);
        dy = {v[0], v[1], v[2], jd[0], jd[1], jd[2]};
    };
    const double n0 = norm(delta0);
    State y0{x0[0], x0[1], x0[2], delta0[0] / n0, delta0[1] / n0, delta0[2] / n0};
    typename Dop853<6>::Options o;
    o.atol = opt.tol;
    o.rtol = 0.0;
    o.max_step = opt.max_step;
    Dop853<6> solver(rhs, 0.0, y0, T, o);
    const auto times = sample_times(T, opt.sample_dt);
    auto& tr = out.trajectory;
    auto& ly = out.lyapunov;
    tr.samples.reserve(times.size());
    ly.finite_time.reserve(times.size());
    double log_acc = 0.0;
    auto push = [&](double t, const State& s) {
        Vec3 x{s[0], s[1], s[2]};
        tr.samples.push_back({t, x, wrap_point(x), field.value(x)});
        if (t > 0.0) {
            double g = log_acc + std::log(std::sqrt(s[3] * s[3] + s[4] * s[4] + s[5] * s[5]));
            ly.finite_time.emplace_back(t, g / t);
        }
    };
    push(0.0, y0);
    std::size_t next = 1;
    while (next < times.size()) {
        auto st = solver.step();
        if (st == Dop853<6>::Status::failed || solver.steps() > opt.max_steps) {
            tr.stats.failed = true;
            tr.stats.failure = st == Dop853<6>::Status::failed ? "step size underflow" : "step limit reached";
            break;
        }
        while (next < times.size() && times[next] <= solver.t()) {
            double t = times[next];
            push(t, t == solver.t() ? solver.y() : solver.dense(t));
            ++next;
        }
        if (st == Dop853<6>::Status::finished) break;
        State y = solver.y();
        double dn = std::sqrt(y[3] * y[3] + y[4] * y[4] + y[5] * y[5]);
        if (dn > opt.tangent_renorm || dn < 1.0 / opt.tangent_renorm) {
            log_acc += std::log(dn);
            for (int k = 3; k < 6; ++k) y[k] /= dn;
            solver.set_state(y);
        }
    }
    copy_stats(solver, tr.stats);
    ly.stats = tr.stats;
    ly.exponent = ly.finite_time.empty() ? 0.0 : ly.finite_time.back().second;
    return out;
}

LyapunovEstimate lyapunov_max(const FlowField& field, const Vec3& x0, double T, const TraceOptions& opt) {
    return trace_with_tangent(field, x0, T, opt).lyapunov;
}

RotationEstimate rotation_vector(const Trajectory& traj, const RotationOptions& opt) {
    RotationEstimate r;
    const auto& s = traj.samples;
    if (s.size() < 8 || traj.t_end() < opt.min_time) {
        r.undetermined = true;
        return r;
    }
    const std::size_t m = s.size();
    const std::size_t half = m / 2;
    Vec3 rho1{}, rho2{};
    for (int a = 0; a < 3; ++a) {
        r.rho[a] = weighted_mean(0, m, [&](std::size_t i) { return s[i].velocity[a]; }) / kTwoPi;
        rho1[a] = weighted_mean(0, half + 1, [&](std::size_t i) { return s[i].velocity[a]; }) / kTwoPi;
        rho2[a] = weighted_mean(half, m, [&](std::size_t i) { return s[i].velocity[a]; }) / kTwoPi;
    }
    r.mean_speed = weighted_mean(0, m, [&](std::size_t i) { return norm(s[i].velocity); });
    const double ref = std::max(norm(r.rho), r.mean_speed / kTwoPi);
    const double diff = norm(rho1 - rho2);
    if (ref == 0.0) {
        r.convergence_index = opt.index_floor;
    } else {
        r.convergence_index = std::max(opt.index_floor, std::log10(std::max(diff / ref, 1e-300)));
    }
    return r;
}

std::string Section::describe() const {
    static const char* names[3] = {"x", "y", "z"};
    return fmt::format("{}={:.17g}", names[axis], level);
}

namespace {

// Root of g on [a, b] given g(a), g(b) of opposite sign (Illinois variant of
// regula falsi with bisection fallback).
template <class G>
double bracketed_root(G g, double a, double b, double ga, double gb, double tol) {
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        double c = (a * gb - b * ga) / (gb - ga);
        if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
        double gc = g(c);
        if (std::abs(gc) <= tol || std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(c))) return c;
        if ((gc > 0) == (gb > 0)) {
            b = c;
            gb = gc;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            a = c;
            ga = gc;
            if (side == 1) gb *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

SectionHits poincare_hits(const FlowField& field, const Section& section, const Vec3& x0, int n_hits,
                          const PoincareOptions& opt) {
    SectionHits out;
    out.section = section;
    const int c = section.axis;
    const int i1 = (c + 1) % 3, i2 = (c + 2) % 3;
    auto rhs = [&field](double, const Vec3& y, Vec3& dy) { dy = field.value(y); };
    typename Dop853<3>::Options o;
    o.atol = opt.tol;
    o.rtol = 0.0;
    o.max_step = opt.max_step;
    Dop853<3> solver(rhs, 0.0, x0, opt.t_max, o);
    int direction = opt.direction;
    auto cell = [&](double v) { return std::floor((v - section.level) / kTwoPi); };
    while (static_cast<int>(out.hits.size()) < n_hits) {
        Vec3 y_old = solver.y();
        auto st = solver.step();
        if (st == Dop853<3>::Status::failed) {
            out.stats.failed = true;
            out.stats.failure = "step size underflow";
            break;
        }
        double a = cell(y_old[c]);
        double b = cell(solver.y()[c]);
        if (a != b) {
            const double lo = std::min(a, b), hi = std::max(a, b);
            const int dir = b > a ? 1 : -1;
            for (double m = lo + 1.0; m <= hi && static_cast<int>(out.hits.size()) < n_hits; m += 1.0) {
                const double target = section.level + kTwoPi * m;
                auto g = [&](double t) { return solver.dense(t)[c] - target; };
                double t0 = solver.t_old(), t1 = solver.t();
                double th = bracketed_root(g, t0, t1, y_old[c] - target, solver.y()[c] - target, 1e-13);
                Vec3 x = solver.dense(th);
                if (direction == 0) direction = dir;
                if (dir != direction) continue;
                Vec3 v = field.value(x);
                SectionHit h;
                h.index = static_cast<int>(out.hits.size());
                h.lifted = x;
                h.coords[0] = wrap_angle(x[i1]);
                h.coords[1] = wrap_angle(x[i2]);
                h.time = th;
                h.direction = direction;
                double vn = norm(v);
                h.degenerate = vn == 0.0 || std::abs(v[c]) < opt.transversality * vn;
                out.hits.push_back(h);
            }
        }
        if (st == Dop853<3>::Status::finished) break;
    }
    out.partial = static_cast<int>(out.hits.size()) < n_hits;
    copy_stats(solver, out.stats);
    return out;
}

SphereTrajectory trace_sphere(const std::function<Vec4(const Vec4&)>& field, const Vec4& p0, double T,
                              double tol, double sample_dt) {
    SphereTrajectory out;
    auto rhs = [&field](double, const Vec4& y, Vec4& dy) { dy = field(y); };
    typename Dop853<4>::Options o;
    o.atol = tol;
    o.rtol = 0.0;
    Dop853<4> solver(rhs, 0.0, p0, T, o);
    const auto times = sample_times(T, sample_dt);
    out.samples.push_back({0.0, p0});
    std::size_t next = 1;
    while (next < times.size()) {
        auto st = solver.step();
        if (st == Dop853<4>::Status::failed) {
            out.stats.failed = true;
            out.stats.failure = "step size underflow";
            break;
        }
        while (next < times.size() && times[next] <= solver.t()) {
            double t = times[next];
            Vec4 p = t == solver.t() ? solver.y() : solver.dense(t);
            out.samples.push_back({t, (1.0 / norm(p)) * p});
            ++next;
        }
        if (st == Dop853<4>::Status::finished) break;
        Vec4 y = solver.y();
        double r = norm(y);
        out.max_drift = std::max(out.max_drift, std::abs(r - 1.0));
        solver.set_state((1.0 / r) * y);
    }
    copy_stats(solver, out.stats);
    return out;
}

double flow_jacobian_determinant(const FlowField& field, const Vec3& x0, double T, double h, double tol) {
    TraceOptions opt;
    opt.sample_dt = T > 0.0 ? T : 1.0;
    Mat3 J{};
    for (int j = 0; j < 3; ++j) {
        Vec3 e{};
        e[j] = h;
        Vec3 xp = trace(field, x0 + e, T, tol, opt).samples.back().lifted;
        Vec3 xm = trace(field, x0 - e, T, tol, opt).samples.back().lifted;
        for (int i = 0; i < 3; ++i) J[i][j] = (xp[i] - xm[i]) / (2.0 * h);
    }
    return dot(J[0], cross(J[1], J[2]));
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string s = "t,x,y,z,x_wrapped,y_wrapped,z_wrapped\n";
    for (const auto& p : traj.samples)
        s += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.t, p.lifted[0],
                         p.lifted[1], p.lifted[2], p.wrapped[0], p.wrapped[1], p.wrapped[2]);
    return s;
}

}  // namespace intspec
