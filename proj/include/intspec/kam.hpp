#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "intspec/steady_gallery.hpp"

namespace intspec {

// Annulus map (x, z) in S^1 x [z_lo, z_hi].  The perturbed map is
//   z' = z + eps sin(x - phase),  x' = x + rho(z'),
// a composition of two shears, hence exact symplectic with zero net flux.
struct TwistMap {
    std::string name;
    std::function<double(double)> rho, drho;
    double z_lo = -1.0, z_hi = 1.0;
    // min |drho/dz| on the annulus (sampled).
    double tau = 0.0;
    double phase = 0.0;

    std::array<double, 2> apply(double eps, double x, double z) const;
    // Jacobian d(x', z') / d(x, z), rows (x', z').
    std::array<std::array<double, 2>, 2> jacobian(double eps, double x, double z) const;
};

// rho(z) = tau z on [z_lo, z_hi].
TwistMap standard_twist_map(double tau = 1.0, double z_lo = -1.0, double z_hi = 1.0);

// rho = 2 pi f / g with tau from the sampled Wronskian.  Throws DomainError
// listing the zeros when g vanishes on [lo, hi].
TwistMap twist_map_from_profile(const TubeProfile& p, double lo, double hi);

// Max relative area error of the images of random quadrilaterals with side
// `size`, the image area computed by Green's theorem with Gauss-Legendre
// quadrature along the curved image edges.
double area_defect(const TwistMap& m, double eps, int quads, std::uint64_t seed, double size = 1e-2);

// Signed area between the image of the circle z = z0 and the circle itself.
double net_flux(const TwistMap& m, double eps, double z0, int samples = 4096);

struct SurvivalParams {
    long n_iter = 100000;
    int grid = 1001;
    // Seeds are (seed_x + phase, z_j), z_j uniform on the closed annulus.
    double seed_x = 3.141592653589793;
    // Weighted Birkhoff rotation numbers over the two halves of the orbit must
    // agree to 10^theta_qp.
    double theta_qp = -6.0;
    // Resonance gate: r = rotation / 2pi is resonant when |r - p/q| <
    // resonance_window / (q n_iter) for some q <= q_max.
    int q_max = 50;
    double resonance_window = 1.0;
    int threads = 1;
};

enum class CircleVerdict { survived, resonant, nonconvergent, escaped };
const char* circle_verdict_name(CircleVerdict v);

struct SurvivalResult {
    double eps = 0.0;
    double destroyed_fraction = 0.0;
    std::vector<double> z, rotation, index;
    std::vector<CircleVerdict> verdict;
    int resonant = 0, nonconvergent = 0, escaped = 0;
};

SurvivalResult survival_measure(const TwistMap& m, double eps, const SurvivalParams& p = {});

struct SweepRow {
    double eps = 0.0;
    double destroyed = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    // log(destroyed) = slope log(eps) + log(prefactor), over eps > 0.
    double slope = 0.0, prefactor = 0.0;
    // destroyed fraction at eps = 0 for the same parameters.
    double floor = 0.0;
    // Some fitted row is at or below the floor.
    bool degenerate = false;
    std::string to_csv() const;
};

// Throws FitError with fewer than two positive eps values.
SweepResult epsilon_sweep(const TwistMap& m, const std::vector<double>& eps, const SurvivalParams& p = {});

struct TauCheckRow {
    double eps = 0.0;
    double destroyed_tau = 0.0, destroyed_half_tau = 0.0;
};

// Standard family at tau and tau / 2 for each eps.
std::vector<TauCheckRow> tau_halving_check(double tau, const std::vector<double>& eps, const SurvivalParams& p = {});

}  // namespace intspec
