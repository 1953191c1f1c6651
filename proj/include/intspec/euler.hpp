#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "intspec/field_eval.hpp"
#include "intspec/spectral_field.hpp"
#include "intspec/spectrum.hpp"
#include "intspec/vec.hpp"

namespace intspec {

struct EulerOptions {
    double dt = 1e-3;
    // Snapshot spacing in time; t = 0 and the final time are always kept.
    double snapshot_interval = 0.25;
    // dt * max|u| * N must not exceed this before the run starts.
    double cfl_max = 1.0;
    // Optional exponential filter exp(-alpha (|k|_inf / k_c)^order) applied
    // after every step.  Off by default (ideal Euler).
    bool filter = false;
    double filter_alpha = 36.0;
    int filter_order = 36;
    // Relative energy drift that aborts the run.
    double abort_drift = 1e-3;
};

struct StepDiagnostics {
    double time = 0.0;
    double energy = 0.0;
    double helicity = 0.0;
    double max_divergence = 0.0;
    double cfl = 0.0;
};

struct Snapshot {
    double time = 0.0;
    SpectralField3 field;
    StepDiagnostics diag;
};

struct EvolutionRun {
    int n = 0;
    EulerOptions options;
    std::string dealiasing = "2/3 rule, |k_i| <= N/3";
    // L2 norm removed from u0 by the Galerkin truncation.
    double truncated_norm = 0.0;
    std::vector<StepDiagnostics> steps;  // one row per step, including t = 0
    std::vector<Snapshot> snapshots;
    bool blowup = false;
    std::string blowup_reason;
    double final_time = 0.0;
};

// Classical RK4 on du/dt = P(u x curl u) (the pressure and the gradient part
// of u . grad u are removed by the projection P), dealiased by the 2/3 rule.
// Throws CflError before stepping when the CFL bound fails.
EvolutionRun evolve(const SpectralField3& u0, double T, const EulerOptions& opt = {});

struct ConservationReport {
    double energy_drift = 0.0;    // max |E - E0| / E0
    double helicity_drift = 0.0;  // max |H - H0| / max(|H0|, E0)
    std::size_t rows_used = 0;
    bool excluded_after_blowup = false;
    std::string table_csv() const;
    std::vector<StepDiagnostics> rows;
};

// Throws DomainError on an empty run.
ConservationReport conservation_report(const EvolutionRun& run);

struct KelvinReport {
    double residual = 0.0;  // relative L2 over markers
    int markers = 0;
    int failed = 0;
};

// Advects markers with the evolving velocity together with tangent vectors
// d delta / dt = (grad u) delta started at curl u0, and compares them with
// curl u(T) at the final marker positions.
KelvinReport kelvin_residual(const SpectralField3& u0, double T, int markers, std::uint64_t seed,
                             const EulerOptions& opt = {});

// ||u_ref - u(t)|| in the Sobolev norm of the given order at each snapshot.
struct DistanceSeries {
    std::vector<double> time, distance;
    double min_distance = 0.0;
};
DistanceSeries distance_floor(const SpectralField3& u_ref, const EvolutionRun& run, double order);

struct NonmixingSeries {
    std::string label;
    std::vector<double> time;
    // kappa estimates of the two tracked tags (dominant tags of A and B at t = 0).
    std::vector<TagEstimate> tag_a, tag_b;
    std::vector<std::string> dominant;
    double energy = 0.0, helicity = 0.0;
    bool blowup = false;
};

struct NonmixingReport {
    std::string tag_a, tag_b;
    NonmixingSeries run_a, run_b;
    // Each run's own tag stays above the other run's estimate for it, with
    // disjoint confidence intervals, at every snapshot.
    bool nonmixing = false;
    // Minimum over time of each run's own-tag estimate and maximum of the
    // cross estimate.
    double min_own_a = 0.0, min_own_b = 0.0, max_cross = 0.0;
    std::string verdict() const { return nonmixing ? "non-mixing evidence" : "no evidence"; }
    std::string to_csv() const;
};

struct NonmixingOptions {
    EulerOptions euler;
    SpectrumParams spectrum;
    // Evolved fields carry roundoff-level modes; pruning them keeps the
    // modal evaluator in use.
    EvaluatorOptions evaluator{1e-10, 1000};
    int seeds = 100;
};

// Evolves base_a + eps * pert_a and base_b + eps * pert_b and estimates the
// spectrum of curl u(t) at every snapshot.
NonmixingReport nonmixing_experiment(const SpectralField3& base_a, const SpectralField3& pert_a,
                                     const SpectralField3& base_b, const SpectralField3& pert_b, double eps, double T,
                                     const NonmixingOptions& opt);

}  // namespace intspec
