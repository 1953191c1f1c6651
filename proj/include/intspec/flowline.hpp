#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "intspec/field_eval.hpp"
#include "intspec/vec.hpp"

namespace intspec {

struct TraceOptions {
    double tol = 1e-10;
    double sample_dt = 0.1;
    double max_step = 1.0;
    long max_steps = 50'000'000;
    // Renormalize the tangent vector once its norm leaves [1/r, r].
    double tangent_renorm = 1e3;
};

struct IntegratorStats {
    long steps = 0;
    long rejected = 0;
    long evaluations = 0;
    double max_error_estimate = 0.0;
    bool failed = false;
    std::string failure;
};

struct TrajectorySample {
    double t;
    Vec3 lifted;
    Vec3 wrapped;
    Vec3 velocity;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    IntegratorStats stats;
    double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }
};

Trajectory trace(const FlowField& field, const Vec3& x0, double T, double tol, const TraceOptions& opt = {});

struct LyapunovEstimate {
    double exponent = 0.0;
    // (t, log growth / t) at the trajectory sample times.
    std::vector<std::pair<double, double>> finite_time;
    IntegratorStats stats;
};

struct TangentTrace {
    Trajectory trajectory;
    LyapunovEstimate lyapunov;
};

// Integrates the position together with a tangent vector (variational
// equation); the trajectory samples match trace().
TangentTrace trace_with_tangent(const FlowField& field, const Vec3& x0, double T, const TraceOptions& opt,
                                const Vec3& delta0 = {1.0, 1.0, 1.0});

LyapunovEstimate lyapunov_max(const FlowField& field, const Vec3& x0, double T, const TraceOptions& opt = {});

struct RotationOptions {
    double min_time = 1.0;
    // Convergence index floor (log10 of relative round-off level).
    double index_floor = -16.0;
};

struct RotationEstimate {
    Vec3 rho{};
    double convergence_index = 0.0;
    double mean_speed = 0.0;
    bool undetermined = false;
};

// Weighted Birkhoff mean of the velocity in lifted coordinates divided by 2 pi.
// The convergence index is log10(|rho_1 - rho_2| / max(|rho|, mean_speed / 2pi))
// for the estimates on the two halves of the trajectory, floored at
// index_floor.
RotationEstimate rotation_vector(const Trajectory& traj, const RotationOptions& opt = {});

// Weighted Birkhoff mean of samples g_0..g_{m-1} taken at equally spaced times.
double birkhoff_weight(double s);
template <class Get>
double weighted_mean(std::size_t begin, std::size_t end, Get get) {
    if (end <= begin + 1) return end > begin ? get(begin) : 0.0;
    double num = 0.0, den = 0.0;
    const double span = static_cast<double>(end - 1 - begin);
    for (std::size_t i = begin; i < end; ++i) {
        double w = birkhoff_weight((i - begin) / span);
        num += w * get(i);
        den += w;
    }
    return num / den;
}

struct Section {
    int axis = 1;  // coordinate held fixed on the section
    double level = 0.0;
    std::string describe() const;
};

struct SectionHit {
    int index;
    Vec3 lifted;      // full lifted position at the crossing
    double coords[2]; // the two in-section coordinates, wrapped
    double time;
    int direction;    // +1 when the section coordinate increases
    bool degenerate;
};

struct SectionHits {
    Section section;
    std::vector<SectionHit> hits;
    bool partial = false;
    IntegratorStats stats;
};

struct PoincareOptions {
    double tol = 1e-12;
    double t_max = 1e5;
    double max_step = 1.0;
    // |V . n| / |V| below this flags a degenerate (tangential) crossing.
    double transversality = 1e-6;
    // 0 = either direction; otherwise only crossings with this sign count.
    int direction = 0;
};

SectionHits poincare_hits(const FlowField& field, const Section& section, const Vec3& x0, int n_hits,
                          const PoincareOptions& opt = {});

struct SphereSample {
    double t;
    Vec4 p;
};

struct SphereTrajectory {
    std::vector<SphereSample> samples;
    IntegratorStats stats;
    double max_drift = 0.0;  // largest | |p| - 1 | before renormalization
};

SphereTrajectory trace_sphere(const std::function<Vec4(const Vec4&)>& field, const Vec4& p0, double T,
                              double tol, double sample_dt = 0.1);

// Determinant of the flow map Jacobian at x0 after time T, from central
// differences over six seeds at x0 +- h e_i.
double flow_jacobian_determinant(const FlowField& field, const Vec3& x0, double T, double h = 1e-5,
                                 double tol = 1e-12);

std::string trajectory_csv(const Trajectory& traj);

}  // namespace intspec
