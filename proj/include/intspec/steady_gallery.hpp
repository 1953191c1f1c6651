#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "intspec/spectral_field.hpp"
#include "intspec/vec.hpp"

namespace intspec {

using RealFn = std::function<double(double)>;

// Pair (f, g) with derivatives.  Periodic profiles live on [0, 2pi); others on
// (lo, hi).
struct TubeProfile {
    std::string name;
    RealFn f, df, g, dg;
    double lo = 0.0;
    double hi = kTwoPi;
    bool periodic = true;
};

TubeProfile cos_sin_profile();
// (sin z, 2 + cos z)
TubeProfile sin_offset_profile();
TubeProfile constant_profile(double a, double b);
// f = fa[0] + sum_{n>=1} fa[n] cos nz + fb[n] sin nz, same for g.
TubeProfile fourier_profile(std::vector<double> fa, std::vector<double> fb, std::vector<double> ga,
                            std::vector<double> gb);
// f = W(z) cos z, g = W(z) sin z with W = ((1 + cos(z - center)) / 2)^power.
// Band-limited to |k| <= power + 1 and vanishing to order 2*power at
// z = center + pi.
TubeProfile windowed_profile(int power, double center);
// On (-1, 1): f = b(z), g = b(z) (a0 + a1 z) with b(z) = exp(1 - 1/(1 - z^2)).
TubeProfile bump_twist_profile(double a0, double a1);
// Looks up "cos-sin", "sin-offset", "windowed" (power 10, center pi).
TubeProfile named_profile(const std::string& name);

enum class Axis { x = 0, y = 1, z = 2 };
Axis parse_axis(const std::string& s);
const char* axis_name(Axis a);

// u^z = f(z) dx + g(z) dy, u^x = f(x) dy + g(x) dz, u^y = f(y) dz + g(y) dx.
SpectralField3 make_shear_field(const TubeProfile& p, Axis axis, int n);
// Unit-amplitude divergence-free mode used to perturb u^axis.  For axis z:
// (0,0,1) cos(x+y) + (1,-1,0)/sqrt2 sin(x+y), a curl eigenfield with
// eigenvalue -sqrt2, so u^z + eps * mode is not steady.  Other axes are cyclic
// relabelings.
Vec3 perturbation_value(Axis axis, const Vec3& x);
SpectralField3 perturbation_mode(Axis axis, int n);
// Closed forms of u^axis and curl u^axis at a point.
Vec3 shear_value(const TubeProfile& p, Axis axis, const Vec3& x);
Vec3 shear_curl(const TubeProfile& p, Axis axis, const Vec3& x);
// Homology class of the invariant tori {axis = c}.
std::array<int, 3> shear_homology(Axis axis);
// alpha = (f^2 + g^2) / 2 as a function of the axis coordinate.
SpectralScalar3 shear_bernoulli(const TubeProfile& p, Axis axis, int n);

struct SteadyResiduals {
    double bernoulli = 0.0;
    double commutator = 0.0;
};

// bernoulli = || u x curl u - grad alpha ||_2, commutator = || [u, curl u] ||_2.
// Products are formed on a 2N grid so both norms are free of aliasing.  With
// alpha == nullptr the least-squares alpha (gradient part of u x curl u) is
// used.
SteadyResiduals steady_residuals(const SpectralField3& u, const SpectralScalar3* alpha = nullptr);

struct TwistReport {
    std::vector<double> z;
    std::vector<double> wronskian;  // f' g - f g'
    double tau = 0.0;               // min |W| over the samples
};

TwistReport twist_profile(const TubeProfile& p, double lo, double hi, int samples = 2001);

// Hopf combinations u = f(F) u1 + g(F) u2 on the unit sphere in R^4.
class HopfField {
public:
    HopfField(RealFn f, RealFn df, RealFn g, RealFn dg);

    static Vec4 u1(const Vec4& p);
    static Vec4 u2(const Vec4& p);
    static double F(const Vec4& p) { return p[0] * p[0] + p[1] * p[1]; }
    // Gradient of F tangent to the sphere.
    static Vec4 grad_F(const Vec4& p);

    Vec4 value(const Vec4& p) const;
    Vec4 rot(const Vec4& p) const;
    double bernoulli_H(double F) const;

private:
    RealFn f_, df_, g_, dg_;
};

// Cross product and curl on the round unit sphere, in ambient coordinates.
// Orientation: (a x b) . c = -det[p, a, b, c].
Vec4 sphere_cross(const Vec4& p, const Vec4& a, const Vec4& b);
// Curl from eighth-order differences of the ambient extension of fn.
Vec4 sphere_curl(const std::function<Vec4(const Vec4&)>& fn, const Vec4& p, double h = 1e-3);
// Positively oriented orthonormal basis of the tangent space at p.
std::array<Vec4, 3> sphere_tangent_basis(const Vec4& p);

}  // namespace intspec
