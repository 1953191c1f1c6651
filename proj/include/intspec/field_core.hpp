#pragma once

#include <cstdint>
#include <functional>

#include "intspec/spectral_field.hpp"
#include "intspec/vec.hpp"

namespace intspec {

struct HelmholtzParts {
    SpectralField3 gradient_part;
    SpectralField3 exact_part;
    Vec3 harmonic_part{};
};

struct Invariants {
    double energy = 0.0;
    double helicity = 0.0;
};

struct ExactnessReport {
    bool exact = false;
    double max_divergence = 0.0;  // max_k |k . V(k)|
    Vec3 mean{};
    // Flux of V through the coordinate 2-tori {x=0}, {y=0}, {z=0}.
    Vec3 flux{};
};

SpectralField3 curl(const SpectralField3& v);
SpectralScalar3 divergence(const SpectralField3& v);
SpectralField3 gradient(const SpectralScalar3& f);
HelmholtzParts helmholtz(const SpectralField3& v);
// Throws NotExactError when the mean or divergence exceeds tol (relative to
// the field's L2 norm, absolute for the zero field).
SpectralField3 inverse_curl(const SpectralField3& w, double tol = 1e-10);
Invariants integral_invariants(const SpectralField3& v);
ExactnessReport exactness_check(const SpectralField3& v, double tol);

// Direct Fourier sum.
Vec3 evaluate(const SpectralField3& v, const Vec3& x);
double evaluate(const SpectralScalar3& f, const Vec3& x);

// Integral of (a, b) against the unit-volume measure.
double inner(const SpectralField3& a, const SpectralField3& b);
double l2_norm(const SpectralField3& v);
double l2_norm(const SpectralScalar3& f);
Vec3 mean(const SpectralField3& v);
double max_divergence(const SpectralField3& v);
// Sobolev norm sqrt(sum (1 + |k|^2)^s |V(k)|^2).
double sobolev_norm(const SpectralField3& v, double order);

// Orthogonal projection onto divergence-free fields (mean kept); the removed
// norm is stored on the result.
SpectralField3 leray_project(const SpectralField3& v);
// Zero-pads or truncates to resolution m.
SpectralField3 resample(const SpectralField3& v, int m);
SpectralScalar3 resample(const SpectralScalar3& f, int m);
SpectralField3 translate(const SpectralField3& v, const Vec3& c);
// (x, y, z) -> (x, y, -z) with the z component negated.
SpectralField3 reflect_z(const SpectralField3& v);
void zero_nyquist(SpectralField3& v);
void zero_nyquist(SpectralScalar3& f);
double conjugate_symmetry_error(const SpectralField3& v);

GridField to_grid(const SpectralField3& v);
SpectralField3 from_grid(const GridField& g);
GridScalar to_grid(const SpectralScalar3& f);
SpectralScalar3 from_grid(const GridScalar& g);

// Samples a closed-form field on the N grid and transforms it.
SpectralField3 sample_field(int n, const std::function<Vec3(const Vec3&)>& fn);
SpectralScalar3 sample_scalar(int n, const std::function<double(const Vec3&)>& fn);

// Random band-limited field with |k|_inf <= kmax and spectral decay |k|^-decay.
// Deterministic in seed.
SpectralField3 random_field(int n, int kmax, std::uint64_t seed, bool divergence_free,
                            bool zero_mean, double decay = 1.0);
SpectralScalar3 random_scalar(int n, int kmax, std::uint64_t seed, double decay = 1.0);

// Pointwise max over the grid of |v|.
double sup_norm(const SpectralField3& v);
double sup_norm(const SpectralScalar3& f);

}  // namespace intspec
