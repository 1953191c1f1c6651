#include "intspec/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "intspec/rng.hpp"

namespace intspec {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::ergodic_torus: return "ergodic_torus";
        case Verdict::periodic: return "periodic";
        case Verdict::chaotic: return "chaotic";
        default: return "undetermined";
    }
}

IsotopyTag IsotopyTag::homology_class(std::array<int, 3> n) {
    const int g = std::gcd(std::gcd(std::abs(n[0]), std::abs(n[1])), std::abs(n[2]));
    if (g > 1)
        for (int& c : n) c /= g;
    for (int a = 0; a < 3; ++a) {
        if (n[a] == 0) continue;
        if (n[a] < 0)
            for (int& c : n) c = -c;
        break;
    }
    IsotopyTag t;
    t.kind = Kind::homology;
    t.n = n;
    return t;
}

IsotopyTag IsotopyTag::null_homologous(std::string knot) {
    IsotopyTag t;
    t.kind = Kind::null_homologous;
    t.knot = std::move(knot);
    return t;
}

std::string IsotopyTag::str() const {
    switch (kind) {
        case Kind::homology: return fmt::format("homology({},{},{})", n[0], n[1], n[2]);
        case Kind::null_homologous: return fmt::format("null_homologous({})", knot);
        default: return "unknown";
    }
}

namespace {

int gcd3(const std::array<int, 3>& n) { return std::gcd(std::gcd(std::abs(n[0]), std::abs(n[1])), std::abs(n[2])); }

bool canonical(const std::array<int, 3>& n) {
    for (int c : n)
        if (c != 0) return c > 0;
    return false;
}

double length2(const std::array<int, 3>& n) { return double(n[0]) * n[0] + double(n[1]) * n[1] + double(n[2]) * n[2]; }

}  // namespace

IsotopyTag homology_of_orbit(const Vec3& rho, double speed_scale, const SpectrumParams& p, const std::string& knot) {
    const double r = norm(rho);
    if (r <= p.theta_hom * speed_scale) return IsotopyTag::null_homologous(knot);
    const Vec3 u = (1.0 / r) * rho;
    std::array<int, 3> best{0, 0, 0};
    double best_res = INFINITY;
    const int m = p.n_max;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c) {
                std::array<int, 3> n{a, b, c};
                if (!canonical(n) || gcd3(n) != 1) continue;
                double res = std::abs(a * u[0] + b * u[1] + c * u[2]);
                bool better = res < best_res - 1e-12 ||
                              (std::abs(res - best_res) <= 1e-12 && length2(n) < length2(best));
                if (better) {
                    best_res = res;
                    best = n;
                }
            }
    if (best_res <= p.theta_hom) return IsotopyTag::homology_class(best);
    return {};
}

std::array<std::array<int, 3>, 2> orthogonal_lattice_basis(const std::array<int, 3>& n) {
    // Shortest pair (b1, b2) in n^perp with b1 x b2 = +-n spans the lattice.
    const int m = 2 * std::max({std::abs(n[0]), std::abs(n[1]), std::abs(n[2]), 1});
    std::vector<std::array<int, 3>> cands;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c) {
                if (a * n[0] + b * n[1] + c * n[2] != 0) continue;
                std::array<int, 3> v{a, b, c};
                if (!canonical(v)) continue;
                cands.push_back(v);
            }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& x, const auto& y) { return length2(x) < length2(y); });
    for (std::size_t i = 0; i < cands.size(); ++i)
        for (std::size_t j = i + 1; j < cands.size(); ++j) {
            const auto& x = cands[i];
            const auto& y = cands[j];
            std::array<int, 3> c{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
            if ((c[0] == n[0] && c[1] == n[1] && c[2] == n[2]) || (c[0] == -n[0] && c[1] == -n[1] && c[2] == -n[2]))
                return {x, y};
        }
    return {std::array<int, 3>{0, 0, 0}, std::array<int, 3>{0, 0, 0}};
}

bool diophantine_gate(double r, int q_max, double theta) {
    for (int q = 1; q <= q_max; ++q) {
        double pq = std::round(r * q) / q;
        if (std::abs(r - pq) <= theta / (double(q) * q)) return false;
    }
    return true;
}

namespace {

// Ratio min/max of |a|, |b| (0 when both vanish).
double rotation_ratio(double a, double b) {
    double hi = std::max(std::abs(a), std::abs(b));
    return hi == 0.0 ? 0.0 : std::min(std::abs(a), std::abs(b)) / hi;
}

struct TubeRates {
    bool inside = true;
    double omega_s = 0.0, omega_theta = 0.0;
    double convergence_index = 0.0;
};

TubeRates tube_rates(const TubeChart& chart, const Trajectory& tr, double floor) {
    TubeRates out;
    const auto& s = tr.samples;
    std::vector<double> ds(s.size()), dt(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto c = chart.coordinates(s[i].wrapped);
        if (!c.inside) {
            out.inside = false;
            return out;
        }
        ds[i] = dot(c.grad_s, s[i].velocity);
        dt[i] = dot(c.grad_theta, s[i].velocity);
    }
    const std::size_t m = s.size(), half = m / 2;
    auto mean = [&](const std::vector<double>& g, std::size_t a, std::size_t b) {
        return weighted_mean(a, b, [&](std::size_t i) { return g[i]; });
    };
    out.omega_s = mean(ds, 0, m);
    out.omega_theta = mean(dt, 0, m);
    double d1 = mean(ds, 0, half + 1) - mean(ds, half, m);
    double d2 = mean(dt, 0, half + 1) - mean(dt, half, m);
    double ref = std::hypot(out.omega_s, out.omega_theta);
    double diff = std::hypot(d1, d2);
    out.convergence_index = ref == 0.0 ? floor : std::max(floor, std::log10(std::max(diff / ref, 1e-300)));
    return out;
}

}  // namespace

TorusVerdict classify_seed(const FlowField& field, const Vec3& x0, const SpectrumParams& p) {
    TorusVerdict v;
    TraceOptions to;
    to.tol = p.tol;
    to.sample_dt = p.sample_dt;
    to.max_step = p.max_step;
    auto tt = trace_with_tangent(field, x0, p.T, to);
    if (tt.trajectory.stats.failed) {
        v.reason = "trajectory failure: " + tt.trajectory.stats.failure;
        return v;
    }
    v.rotation = rotation_vector(tt.trajectory);
    v.lyapunov = tt.lyapunov.exponent;
    if (v.rotation.undetermined) {
        v.reason = "trajectory too short";
        return v;
    }
    if (v.rotation.mean_speed <= p.speed_floor) {
        v.reason = "fixed point or below speed floor";
        return v;
    }
    if (v.rotation.convergence_index > p.theta_qp || v.lyapunov > p.theta_ly) {
        v.verdict = Verdict::chaotic;
        v.reason = v.lyapunov > p.theta_ly ? "lyapunov gate" : "birkhoff convergence gate";
        return v;
    }
    const double speed_scale = v.rotation.mean_speed / kTwoPi;
    const TubeChart* chart = field.chart();
    v.tag = homology_of_orbit(v.rotation.rho, speed_scale, p, chart ? chart->knot_label() : "unknown");

    if (v.tag.kind == IsotopyTag::Kind::null_homologous) {
        if (!chart) {
            v.reason = "orbit closes in the cover, no tube chart";
            return v;
        }
        auto rates = tube_rates(*chart, tt.trajectory, RotationOptions{}.index_floor);
        if (!rates.inside) {
            v.tag = IsotopyTag::null_homologous("unknown");
            v.reason = "orbit leaves the tube chart";
            return v;
        }
        if (rates.convergence_index > p.theta_qp) {
            v.verdict = Verdict::chaotic;
            v.reason = "tube rates do not converge";
            return v;
        }
        v.ratio = rotation_ratio(rates.omega_s, rates.omega_theta);
    } else if (v.tag.kind == IsotopyTag::Kind::homology) {
        auto basis = orthogonal_lattice_basis(v.tag.n);
        // Least-squares coordinates of rho in the basis.
        Vec3 b1{double(basis[0][0]), double(basis[0][1]), double(basis[0][2])};
        Vec3 b2{double(basis[1][0]), double(basis[1][1]), double(basis[1][2])};
        double g11 = dot(b1, b1), g12 = dot(b1, b2), g22 = dot(b2, b2);
        double r1 = dot(b1, v.rotation.rho), r2 = dot(b2, v.rotation.rho);
        double det = g11 * g22 - g12 * g12;
        double alpha = (g22 * r1 - g12 * r2) / det;
        double beta = (g11 * r2 - g12 * r1) / det;
        v.ratio = rotation_ratio(alpha, beta);
    } else {
        v.reason = "no integer relation for the rotation vector";
        return v;
    }
    v.diophantine = diophantine_gate(v.ratio, p.q_max, p.theta_dio);
    v.verdict = v.diophantine ? Verdict::ergodic_torus : Verdict::periodic;
    v.reason = v.diophantine ? "" : "resonant rotation ratio";
    return v;
}

std::array<double, 2> wilson_interval(long k, long n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double ph = double(k) / n;
    const double z2n = z * z / n;
    const double center = (ph + z2n / 2.0) / (1.0 + z2n);
    const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2n / (4.0 * n)) / (1.0 + z2n);
    return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

TagEstimate SpectrumEstimate::tag(const std::string& t) const {
    auto it = tags.find(t);
    if (it != tags.end()) return it->second;
    TagEstimate e;
    e.tag = t;
    auto ci = wilson_interval(0, n_seeds);
    e.ci_lo = ci[0];
    e.ci_hi = ci[1];
    return e;
}

std::string SpectrumEstimate::dominant() const {
    std::string best;
    long cnt = 0;
    for (const auto& [k, e] : tags)
        if (e.count > cnt) {
            cnt = e.count;
            best = k;
        }
    return best;
}

namespace {

nlohmann::ordered_json tag_json(const TagEstimate& e) {
    nlohmann::ordered_json j;
    j["kappa"] = e.kappa;
    j["ci_lo"] = e.ci_lo;
    j["ci_hi"] = e.ci_hi;
    j["n"] = e.count;
    return j;
}

}  // namespace

std::string SpectrumEstimate::to_json() const {
    nlohmann::ordered_json j;
    j["n_seeds"] = n_seeds;
    j["undefined"] = undefined;
    j["total"] = tag_json(total);
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [k, e] : tags) t[k] = tag_json(e);
    j["tags"] = t;
    nlohmann::ordered_json vc = nlohmann::ordered_json::object();
    for (const auto& [k, c] : verdict_counts) vc[k] = c;
    j["verdicts"] = vc;
    nlohmann::ordered_json pj;
    pj["T"] = params.T;
    pj["tol"] = params.tol;
    pj["sample_dt"] = params.sample_dt;
    pj["max_step"] = params.max_step;
    pj["theta_qp"] = params.theta_qp;
    pj["theta_ly"] = params.theta_ly;
    pj["theta_hom"] = params.theta_hom;
    pj["n_max"] = params.n_max;
    pj["q_max"] = params.q_max;
    pj["theta_dio"] = params.theta_dio;
    pj["speed_floor"] = params.speed_floor;
    pj["rng_seed"] = params.rng_seed;
    j["params"] = pj;
    return j.dump(2) + "\n";
}

std::string SpectrumEstimate::to_csv() const {
    std::string s = "index,x,y,z,verdict,tag,rho_x,rho_y,rho_z,convergence_index,lyapunov,ratio,reason\n";
    for (const auto& r : seeds) {
        const auto& v = r.verdict;
        s += fmt::format("{},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},\"{}\"\n",
                         r.index, r.x0[0], r.x0[1], r.x0[2], verdict_name(v.verdict), v.tag.str(),
                         v.rotation.rho[0], v.rotation.rho[1], v.rotation.rho[2], v.rotation.convergence_index,
                         v.lyapunov, v.ratio, v.reason);
    }
    return s;
}

SpectrumEstimate estimate_spectrum(const FlowField& field, int n_seeds, const SpectrumParams& p) {
    SpectrumEstimate est;
    est.params = p;
    est.n_seeds = std::max(0, n_seeds);
    est.total.tag = "total";
    if (est.n_seeds == 0) {
        est.undefined = true;
        est.total.ci_lo = 0.0;
        est.total.ci_hi = 1.0;
        return est;
    }
    std::mt19937_64 rng(p.rng_seed);
    est.seeds.resize(est.n_seeds);
    for (int i = 0; i < n_seeds; ++i) {
        est.seeds[i].index = i;
        for (int a = 0; a < 3; ++a) est.seeds[i].x0[a] = kTwoPi * uniform01(rng);
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n_seeds; i = next++) est.seeds[i].verdict = classify_seed(field, est.seeds[i].x0, p);
    };
    const int nt = std::max(1, std::min(p.threads, n_seeds));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const char* v : {"ergodic_torus", "periodic", "chaotic", "undetermined"}) est.verdict_counts[v] = 0;
    for (const auto& r : est.seeds) {
        ++est.verdict_counts[verdict_name(r.verdict.verdict)];
        if (r.verdict.verdict != Verdict::ergodic_torus) continue;
        ++est.total.count;
        auto& e = est.tags[r.verdict.tag.str()];
        e.tag = r.verdict.tag.str();
        ++e.count;
    }
    auto finish = [&](TagEstimate& e) {
        e.kappa = double(e.count) / est.n_seeds;
        auto ci = wilson_interval(e.count, est.n_seeds);
        e.ci_lo = ci[0];
        e.ci_hi = ci[1];
    };
    finish(est.total);
    for (auto& [k, e] : est.tags) finish(e);
    return est;
}

namespace {

class ShearPushforward : public FlowField {
public:
    ShearPushforward(const FlowField& v, double a) : v_(v), a_(a) {}
    Vec3 value(const Vec3& X) const override {
        Vec3 x{X[0] - a_ * std::sin(X[1]), X[1], X[2]};
        Vec3 v = v_.value(x);
        return {v[0] + a_ * std::cos(X[1]) * v[1], v[1], v[2]};
    }
    void value_jacobian(const Vec3& X, Vec3& out, Mat3& jac) const override {
        Vec3 x{X[0] - a_ * std::sin(X[1]), X[1], X[2]};
        Vec3 v;
        Mat3 J;
        v_.value_jacobian(x, v, J);
        const double c = a_ * std::cos(X[1]), s = a_ * std::sin(X[1]);
        out = {v[0] + c * v[1], v[1], v[2]};
        // D(DPhi V)/Dx at x, then multiply by DPhi^{-1} = [[1, -c, 0], [0, 1, 0], [0, 0, 1]].
        Mat3 A = J;
        for (int j = 0; j < 3; ++j) A[0][j] += c * J[1][j];
        A[0][1] += -s * v[1];
        for (int i = 0; i < 3; ++i) {
            jac[i][0] = A[i][0];
            jac[i][1] = A[i][1] - c * A[i][0];
            jac[i][2] = A[i][2];
        }
    }
    const TubeChart* chart() const override { return nullptr; }

private:
    const FlowField& v_;
    double a_;
};

class ChartedField : public FlowField {
public:
    ChartedField(std::unique_ptr<FlowField> base, std::shared_ptr<const TubeChart> chart)
        : base_(std::move(base)), chart_(std::move(chart)) {}
    Vec3 value(const Vec3& x) const override { return base_->value(x); }
    void value_jacobian(const Vec3& x, Vec3& v, Mat3& j) const override { base_->value_jacobian(x, v, j); }
    const TubeChart* chart() const override { return chart_.get(); }

private:
    std::unique_ptr<FlowField> base_;
    std::shared_ptr<const TubeChart> chart_;
};

}  // namespace

std::unique_ptr<FlowField> shear_pushforward(const FlowField& v, double a) {
    return std::make_unique<ShearPushforward>(v, a);
}

std::unique_ptr<FlowField> with_chart(std::unique_ptr<FlowField> base, std::shared_ptr<const TubeChart> chart) {
    return std::make_unique<ChartedField>(std::move(base), std::move(chart));
}

}  // namespace intspec
