#pragma once

#include "intspec/spectral_field.hpp"
#include "intspec/vec.hpp"

namespace intspec {

struct AdjustOptions {
    // Radius of the two balls that carry the correction fields.
    double ball_radius = 0.8;
    // Gaussian width of the blobs as a fraction of ball_radius.
    double blob_width = 1.0 / 3.0;
    // Ball centers are searched on a candidates^3 lattice.
    int candidates = 8;
    // A ball is usable when max |curl u| inside it is at most this fraction of
    // max |curl u| overall.
    double support_tol = 1e-3;
    // Newton stops when both residuals are below tol * (1 + |target|).
    double tol = 1e-13;
    int max_iter = 50;
};

// Bilinear forms on the (possibly truncated) fields.
struct AdjustCrossTerms {
    double energy_u_v = 0.0;      // <u, v>
    double energy_u_w = 0.0;      // <u, w>
    double energy_v_w = 0.0;      // <v, w>
    double helicity_u_v = 0.0;    // <u, curl v>
    double helicity_u_w = 0.0;    // <u, curl w>
    double helicity_v_w = 0.0;    // <v, curl w>
    double helicity_w = 0.0;      // H(w)
};

struct AdjustResult {
    SpectralField3 field;
    bool unchanged = false;
    // u_a = u + t v + lambda w.  v is a twisted blob with H(v) != 0, w an
    // untwisted blob carrying energy only.
    double t = 0.0, lambda = 0.0;
    Vec3 helical_center{}, energy_center{};
    double ball_radius = 0.0;
    // Smallest reachable energy for the requested helicity.
    double threshold = 0.0;
    double energy = 0.0, helicity = 0.0;
    AdjustCrossTerms cross;
    // max |curl u| inside the two balls relative to max |curl u|.
    double curl_in_supports = 0.0;
    // max |curl u_a - curl u| over grid points where |curl u| exceeds
    // support_tol * max |curl u|, relative to max |curl u|.
    double curl_change_on_support = 0.0;
    int iterations = 0;
};

// Returns u_a with E(u_a) = e and H(u_a) = h, where E(u) = <u, u> and
// H(u) = <u, curl u> under the unit-volume measure.  Throws
// InfeasibleEnergyError (with the threshold) when e is too small for h, and
// DomainError when no pair of disjoint balls avoids the vorticity of u.
AdjustResult adjust_energy_helicity(const SpectralField3& u, double e, double h, const AdjustOptions& opt = {});

}  // namespace intspec
