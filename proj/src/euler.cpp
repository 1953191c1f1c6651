#include "intspec/euler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <random>

#include <fmt/format.h>

#include "intspec/errors.hpp"
#include "intspec/fft.hpp"
#include "intspec/field_core.hpp"
#include "intspec/field_eval.hpp"
#include "intspec/rng.hpp"

namespace intspec {

namespace {

using Half = std::array<std::vector<Complex>, 3>;

// Pseudo-spectral state on the half spectrum kz >= 0.
class Stepper {
public:
    Stepper(int n, const EulerOptions& opt) : n_(n), h_(n / 2 + 1), opt_(opt), fft_(fft_for(n)) {
        const std::size_t m = fft_.half_size();
        kx_.resize(m);
        ky_.resize(m);
        kz_.resize(m);
        k2_.resize(m);
        weight_.resize(m);
        keep_.resize(m);
        filt_.assign(m, 1.0);
        const int kc = n / 3;
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < h_; ++iz) {
                    std::size_t i = (static_cast<std::size_t>(ix) * n + iy) * h_ + iz;
                    int a = ix <= n / 2 ? ix : ix - n, b = iy <= n / 2 ? iy : iy - n, c = iz;
                    kx_[i] = a;
                    ky_[i] = b;
                    kz_[i] = c;
                    k2_[i] = double(a) * a + double(b) * b + double(c) * c;
                    weight_[i] = (iz == 0 || iz == n / 2) ? 1.0 : 2.0;
                    keep_[i] = std::abs(a) <= kc && std::abs(b) <= kc && c <= kc && !nyquist(i);
                    if (keep_[i]) kept_.push_back(i);
                    if (opt.filter) {
                        double r = std::max({std::abs(a), std::abs(b), c}) / double(kc);
                        filt_[i] = std::exp(-opt.filter_alpha * std::pow(r, opt.filter_order));
                    }
                }
        for (auto& g : grid_u_) g.resize(fft_.real_size());
        for (auto& g : grid_w_) g.resize(fft_.real_size());
        tmp_.resize(fft_.real_size());
    }

    std::size_t size() const { return fft_.half_size(); }

    Half from_field(const SpectralField3& v) const {
        Half u;
        for (int a = 0; a < 3; ++a) {
            u[a].resize(size());
            for (int ix = 0; ix < n_; ++ix)
                for (int iy = 0; iy < n_; ++iy)
                    for (int iz = 0; iz < h_; ++iz)
                        u[a][(static_cast<std::size_t>(ix) * n_ + iy) * h_ + iz] =
                            v.component(a)[(static_cast<std::size_t>(ix) * n_ + iy) * n_ + iz];
        }
        return u;
    }

    SpectralField3 to_field(const Half& u) const {
        SpectralField3 v(n_);
        for (int a = 0; a < 3; ++a)
            for (int ix = 0; ix < n_; ++ix)
                for (int iy = 0; iy < n_; ++iy) {
                    const std::size_t row = (static_cast<std::size_t>(ix) * n_ + iy) * n_;
                    const std::size_t hrow = (static_cast<std::size_t>(ix) * n_ + iy) * h_;
                    for (int iz = 0; iz < h_; ++iz) v.component(a)[row + iz] = u[a][hrow + iz];
                    const int jx = (n_ - ix) % n_, jy = (n_ - iy) % n_;
                    const std::size_t crow = (static_cast<std::size_t>(jx) * n_ + jy) * h_;
                    for (int iz = h_; iz < n_; ++iz) v.component(a)[row + iz] = std::conj(u[a][crow + (n_ - iz)]);
                }
        zero_nyquist(v);
        v.set_divergence_free(true);
        return v;
    }

    // Galerkin truncation and projection; returns the removed L2 norm.
    double project(Half& u) const {
        double removed = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            Complex c[3] = {u[0][i], u[1][i], u[2][i]};
            Complex out[3] = {0.0, 0.0, 0.0};
            if (keep_[i]) {
                if (k2_[i] > 0.0) {
                    Complex kd = (kx_[i] * c[0] + ky_[i] * c[1] + kz_[i] * c[2]) / k2_[i];
                    out[0] = c[0] - kx_[i] * kd;
                    out[1] = c[1] - ky_[i] * kd;
                    out[2] = c[2] - kz_[i] * kd;
                } else {
                    for (int a = 0; a < 3; ++a) out[a] = c[a];
                }
            }
            for (int a = 0; a < 3; ++a) {
                removed += weight_[i] * std::norm(c[a] - out[a]);
                u[a][i] = out[a];
            }
        }
        return std::sqrt(removed);
    }

    // Same as project() for states whose discarded modes need no accounting.
    void project_kept(Half& u) {
        Half& t = w_;
        for (int a = 0; a < 3; ++a) {
            t[a].assign(size(), Complex(0.0, 0.0));
            for (std::size_t i : kept_) t[a][i] = u[a][i];
        }
        for (std::size_t i : kept_) {
            if (k2_[i] == 0.0) continue;
            Complex kd = (kx_[i] * t[0][i] + ky_[i] * t[1][i] + kz_[i] * t[2][i]) / k2_[i];
            t[0][i] -= kx_[i] * kd;
            t[1][i] -= ky_[i] * kd;
            t[2][i] -= kz_[i] * kd;
        }
        std::swap(t, u);
    }

    // du/dt = P(u x curl u), dealiased.  Records max |u| on the grid.  u must
    // vanish outside the retained modes.
    void rhs(const Half& u, Half& du) {
        Half& w = w_;
        for (int a = 0; a < 3; ++a) w[a].assign(size(), Complex(0.0, 0.0));
        const Complex I(0.0, 1.0);
        for (std::size_t i : kept_) {
            w[0][i] = I * (ky_[i] * u[2][i] - kz_[i] * u[1][i]);
            w[1][i] = I * (kz_[i] * u[0][i] - kx_[i] * u[2][i]);
            w[2][i] = I * (kx_[i] * u[1][i] - ky_[i] * u[0][i]);
        }
        for (int a = 0; a < 3; ++a) {
            fft_.backward_half(u[a].data(), grid_u_[a].data());
            fft_.backward_half(w[a].data(), grid_w_[a].data());
        }
        double umax2 = 0.0;
        const std::size_t m = fft_.real_size();
        auto& gu = grid_u_;
        auto& gw = grid_w_;
        for (int a = 0; a < 3; ++a) {
            const int b = (a + 1) % 3, c = (a + 2) % 3;
            for (std::size_t j = 0; j < m; ++j) tmp_[j] = gu[b][j] * gw[c][j] - gu[c][j] * gw[b][j];
            du[a].resize(size());
            fft_.forward_half(tmp_.data(), du[a].data());
        }
        for (std::size_t j = 0; j < m; ++j)
            umax2 = std::max(umax2, gu[0][j] * gu[0][j] + gu[1][j] * gu[1][j] + gu[2][j] * gu[2][j]);
        umax_ = std::sqrt(umax2);
        project_kept(du);
    }

    void filter(Half& u) const {
        if (!opt_.filter) return;
        for (int a = 0; a < 3; ++a)
            for (std::size_t i = 0; i < size(); ++i) u[a][i] *= filt_[i];
    }

    StepDiagnostics diagnostics(const Half& u, double t, double dt) const {
        StepDiagnostics d;
        d.time = t;
        const Complex I(0.0, 1.0);
        for (std::size_t i : kept_) {
            Complex w0 = I * (ky_[i] * u[2][i] - kz_[i] * u[1][i]);
            Complex w1 = I * (kz_[i] * u[0][i] - kx_[i] * u[2][i]);
            Complex w2 = I * (kx_[i] * u[1][i] - ky_[i] * u[0][i]);
            d.energy += weight_[i] * (std::norm(u[0][i]) + std::norm(u[1][i]) + std::norm(u[2][i]));
            d.helicity += weight_[i] * std::real(std::conj(u[0][i]) * w0 + std::conj(u[1][i]) * w1 +
                                                 std::conj(u[2][i]) * w2);
            d.max_divergence =
                std::max(d.max_divergence, std::abs(kx_[i] * u[0][i] + ky_[i] * u[1][i] + kz_[i] * u[2][i]));
        }
        d.cfl = dt * umax_ * n_;
        return d;
    }

    double max_speed(const Half& u) {
        for (int a = 0; a < 3; ++a) fft_.backward_half(u[a].data(), grid_u_[a].data());
        double m = 0.0;
        for (std::size_t j = 0; j < fft_.real_size(); ++j)
            m = std::max(m, grid_u_[0][j] * grid_u_[0][j] + grid_u_[1][j] * grid_u_[1][j] +
                                grid_u_[2][j] * grid_u_[2][j]);
        umax_ = std::sqrt(m);
        return umax_;
    }

    // One RK4 step.  stage(c, state) is called with the stage time offset and
    // the stage state before each right-hand side evaluation.
    template <class StageFn>
    void step(Half& u, double dt, StageFn&& stage) {
        auto& [k1, k2, k3, k4, y] = stages_;
        auto axpy = [&](const Half& k, double s) {
            for (int a = 0; a < 3; ++a) {
                y[a].assign(size(), Complex(0.0, 0.0));
                for (std::size_t i : kept_) y[a][i] = u[a][i] + s * k[a][i];
            }
        };
        stage(0, u);
        rhs(u, k1);
        const double umax0 = umax_;
        axpy(k1, 0.5 * dt);
        stage(1, y);
        rhs(y, k2);
        axpy(k2, 0.5 * dt);
        stage(2, y);
        rhs(y, k3);
        axpy(k3, dt);
        stage(3, y);
        rhs(y, k4);
        for (int a = 0; a < 3; ++a)
            for (std::size_t i : kept_)
                u[a][i] += dt / 6.0 * (k1[a][i] + 2.0 * k2[a][i] + 2.0 * k3[a][i] + k4[a][i]);
        filter(u);
        umax_ = umax0;
    }

private:
    bool nyquist(std::size_t i) const {
        const int h = n_ / 2;
        return std::abs(kx_[i]) == h || std::abs(ky_[i]) == h || kz_[i] == h;
    }

    int n_, h_;
    EulerOptions opt_;
    RealFft3& fft_;
    std::vector<double> kx_, ky_, kz_, k2_, weight_, filt_;
    std::vector<char> keep_;
    std::vector<std::size_t> kept_;
    std::array<std::vector<double>, 3> grid_u_, grid_w_;
    std::vector<double> tmp_;
    Half w_;
    std::array<Half, 5> stages_;
    double umax_ = 0.0;
};

int steps_for(double T, double dt) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (T < 0.0) throw DomainError("T must be nonnegative");
    return static_cast<int>(std::llround(T / dt));
}

struct NoStage {
    void operator()(int, const Half&) const {}
};

}  // namespace

EvolutionRun evolve(const SpectralField3& u0, double T, const EulerOptions& opt) {
    const int n = u0.n();
    const int nsteps = steps_for(T, opt.dt);
    const int every = std::max(1, static_cast<int>(std::llround(opt.snapshot_interval / opt.dt)));
    Stepper st(n, opt);
    Half u = st.from_field(u0);
    EvolutionRun run;
    run.n = n;
    run.options = opt;
    run.truncated_norm = st.project(u);
    const double umax = st.max_speed(u);
    const double cfl = opt.dt * umax * n;
    if (cfl > opt.cfl_max)
        throw CflError(fmt::format("CFL number {:.4g} exceeds {:.4g} (dt {}, max|u| {:.4g}, N {})", cfl, opt.cfl_max,
                                   opt.dt, umax, n),
                       cfl);

    auto d0 = st.diagnostics(u, 0.0, opt.dt);
    run.steps.push_back(d0);
    run.snapshots.push_back({0.0, st.to_field(u), d0});
    const double e0 = d0.energy;
    for (int s = 1; s <= nsteps; ++s) {
        st.step(u, opt.dt, NoStage{});
        const double t = s * opt.dt;
        auto d = st.diagnostics(u, t, opt.dt);
        if (!std::isfinite(d.energy) || !std::isfinite(d.helicity)) {
            run.blowup = true;
            run.blowup_reason = fmt::format("non-finite state at t = {}", t);
            break;
        }
        run.steps.push_back(d);
        run.final_time = t;
        if (e0 > 0.0 && std::abs(d.energy - e0) / e0 > opt.abort_drift) {
            run.blowup = true;
            run.blowup_reason = fmt::format("energy drift {:.3g} at t = {}", std::abs(d.energy - e0) / e0, t);
            run.snapshots.push_back({t, st.to_field(u), d});
            break;
        }
        if (s % every == 0 || s == nsteps) run.snapshots.push_back({t, st.to_field(u), d});
    }
    return run;
}

std::string ConservationReport::table_csv() const {
    std::string s = "time,energy,helicity,max_divergence,cfl\n";
    for (const auto& r : rows)
        s += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.time, r.energy, r.helicity, r.max_divergence,
                         r.cfl);
    return s;
}

ConservationReport conservation_report(const EvolutionRun& run) {
    if (run.steps.empty()) throw DomainError("empty run");
    ConservationReport r;
    r.rows = run.steps;
    r.rows_used = run.steps.size();
    r.excluded_after_blowup = run.blowup;
    const double e0 = run.steps[0].energy, h0 = run.steps[0].helicity;
    const double escale = e0 > 0.0 ? e0 : 1.0;
    const double hscale = std::max(std::abs(h0), escale);
    for (const auto& s : run.steps) {
        r.energy_drift = std::max(r.energy_drift, std::abs(s.energy - e0) / escale);
        r.helicity_drift = std::max(r.helicity_drift, std::abs(s.helicity - h0) / hscale);
    }
    return r;
}

KelvinReport kelvin_residual(const SpectralField3& u0, double T, int markers, std::uint64_t seed,
                             const EulerOptions& opt) {
    KelvinReport rep;
    rep.markers = markers;
    const int n = u0.n();
    const int nsteps = steps_for(T, opt.dt);
    Stepper st(n, opt);
    Half u = st.from_field(u0);
    st.project(u);

    std::mt19937_64 rng(seed);
    std::vector<Vec3> X(markers), D(markers);
    for (auto& x : X) x = {kTwoPi * uniform01(rng), kTwoPi * uniform01(rng), kTwoPi * uniform01(rng)};
    {
        auto w = make_evaluator(curl(st.to_field(u)));
        for (int m = 0; m < markers; ++m) D[m] = w->value(X[m]);
    }
    if (nsteps == 0) return rep;

    // RK4 for (u, X, delta) as one system: marker stages use the stage fields.
    std::vector<Vec3> X0, D0, kx[4], kd[4];
    std::vector<Vec3> Xs, Ds;
    const double c[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 0; s < nsteps; ++s) {
        X0 = X;
        D0 = D;
        st.step(u, opt.dt, [&](int k, const Half& y) {
            auto f = make_evaluator(st.to_field(y));
            Xs.resize(markers);
            Ds.resize(markers);
            for (int m = 0; m < markers; ++m) {
                if (k == 0) {
                    Xs[m] = X0[m];
                    Ds[m] = D0[m];
                } else {
                    Xs[m] = X0[m] + (c[k] * opt.dt) * kx[k - 1][m];
                    Ds[m] = D0[m] + (c[k] * opt.dt) * kd[k - 1][m];
                }
            }
            kx[k].resize(markers);
            kd[k].resize(markers);
            for (int m = 0; m < markers; ++m) {
                Vec3 v;
                Mat3 j;
                f->value_jacobian(Xs[m], v, j);
                kx[k][m] = v;
                kd[k][m] = matvec(j, Ds[m]);
            }
        });
        for (int m = 0; m < markers; ++m) {
            X[m] = X0[m] + (opt.dt / 6.0) * (kx[0][m] + 2.0 * kx[1][m] + 2.0 * kx[2][m] + kx[3][m]);
            D[m] = D0[m] + (opt.dt / 6.0) * (kd[0][m] + 2.0 * kd[1][m] + 2.0 * kd[2][m] + kd[3][m]);
        }
    }
    auto w = make_evaluator(curl(st.to_field(u)));
    double num = 0.0, den = 0.0;
    for (int m = 0; m < markers; ++m) {
        Vec3 wt = w->value(X[m]);
        Vec3 d = D[m] - wt;
        if (!std::isfinite(dot(d, d))) {
            ++rep.failed;
            continue;
        }
        num += dot(d, d);
        den += dot(wt, wt);
    }
    rep.residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return rep;
}

DistanceSeries distance_floor(const SpectralField3& u_ref, const EvolutionRun& run, double order) {
    DistanceSeries d;
    d.min_distance = INFINITY;
    for (const auto& s : run.snapshots) {
        if (s.field.n() != u_ref.n()) throw ResampleRequiredError("resolution mismatch", s.field.n(), u_ref.n());
        d.time.push_back(s.time);
        d.distance.push_back(sobolev_norm(u_ref - s.field, order));
        d.min_distance = std::min(d.min_distance, d.distance.back());
    }
    if (d.time.empty()) d.min_distance = 0.0;
    return d;
}

std::string NonmixingReport::to_csv() const {
    std::string s = "run,time,tag,kappa,ci_lo,ci_hi,count,dominant\n";
    for (const auto* r : {&run_a, &run_b})
        for (std::size_t i = 0; i < r->time.size(); ++i)
            for (const auto* t : {&r->tag_a[i], &r->tag_b[i]})
                s += fmt::format("{},{:.17g},{},{:.17g},{:.17g},{:.17g},{},{}\n", r->label, r->time[i], t->tag,
                                 t->kappa, t->ci_lo, t->ci_hi, t->count, r->dominant[i]);
    return s;
}

NonmixingReport nonmixing_experiment(const SpectralField3& base_a, const SpectralField3& pert_a,
                                     const SpectralField3& base_b, const SpectralField3& pert_b, double eps, double T,
                                     const NonmixingOptions& opt) {
    NonmixingReport rep;
    auto dom = [&](const SpectralField3& u) {
        auto f = make_evaluator(curl(u), opt.evaluator);
        return estimate_spectrum(*f, opt.seeds, opt.spectrum).dominant();
    };
    const SpectralField3 ua = base_a + eps * pert_a;
    const SpectralField3 ub = base_b + eps * pert_b;
    rep.tag_a = dom(base_a);
    rep.tag_b = dom(base_b);
    if (rep.tag_a.empty() || rep.tag_b.empty() || rep.tag_a == rep.tag_b)
        throw DomainError(fmt::format("base fields need distinct dominant tags (got '{}' and '{}')", rep.tag_a,
                                      rep.tag_b));
    auto series = [&](const SpectralField3& u0, const char* label) {
        NonmixingSeries s;
        s.label = label;
        auto run = evolve(u0, T, opt.euler);
        s.blowup = run.blowup;
        auto inv = integral_invariants(u0);
        s.energy = inv.energy;
        s.helicity = inv.helicity;
        for (const auto& snap : run.snapshots) {
            auto f = make_evaluator(curl(snap.field), opt.evaluator);
            auto e = estimate_spectrum(*f, opt.seeds, opt.spectrum);
            s.time.push_back(snap.time);
            s.tag_a.push_back(e.tag(rep.tag_a));
            s.tag_b.push_back(e.tag(rep.tag_b));
            s.dominant.push_back(e.dominant());
        }
        return s;
    };
    rep.run_a = series(ua, "a");
    rep.run_b = series(ub, "b");
    rep.nonmixing = !rep.run_a.blowup && !rep.run_b.blowup;
    rep.min_own_a = rep.min_own_b = 1.0;
    const std::size_t m = std::min(rep.run_a.time.size(), rep.run_b.time.size());
    for (std::size_t i = 0; i < m; ++i) {
        const auto &aa = rep.run_a.tag_a[i], &ab = rep.run_a.tag_b[i];
        const auto &ba = rep.run_b.tag_a[i], &bb = rep.run_b.tag_b[i];
        rep.min_own_a = std::min(rep.min_own_a, aa.kappa);
        rep.min_own_b = std::min(rep.min_own_b, bb.kappa);
        rep.max_cross = std::max({rep.max_cross, ab.kappa, ba.kappa});
        if (!(aa.ci_lo > ba.ci_hi && bb.ci_lo > ab.ci_hi)) rep.nonmixing = false;
    }
    return rep;
}

}  // namespace intspec
