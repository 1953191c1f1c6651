#pragma once

#include <memory>
#include <string>
#include <vector>

#include "intspec/field_eval.hpp"
#include "intspec/spectral_field.hpp"
#include "intspec/steady_gallery.hpp"

namespace intspec {

// (p, q) torus knot on the torus of radii (R, r) centered at c:
// gamma(t) = c + ((R + r cos qt) cos pt, (R + r cos qt) sin pt, r sin qt).
// (1, 0) is the round unknot of radius R + r.
struct KnotSpec {
    int p = 1;
    int q = 0;
    static KnotSpec parse(const std::string& s);  // "unknot", "trefoil", "p,q"
    std::string label() const;                     // "unknot" or "torus_knot(p,q)"
};

struct KnotOptions {
    int n = 64;
    // Carrying torus radii; 0 picks (1.5, 0.6) for q = 0 and (1.6, 0.7)
    // otherwise, which maximize the feasible tube radius.
    double major_radius = 0.0;
    double minor_radius = 0.0;
    // The tube must fit in the ball of this radius around the center.
    double ball_radius = 0.9 * 3.141592653589793;
    Vec3 center{3.141592653589793, 3.141592653589793, 3.141592653589793};
    // Explicit tube radius; 0 derives it from delta.
    double tube_radius = 0.0;
};

// Tube coordinates (s, theta, rho) around the core curve, from the closest
// point on the curve.  s and theta are 2 pi periodic.
class KnotChart : public TubeChart {
public:
    KnotChart(KnotSpec knot, const KnotOptions& opt, double tube_radius);
    TubeCoordinates coordinates(const Vec3& x) const override;
    std::string knot_label() const override { return knot_.label(); }

    Vec3 curve(double t) const;
    Vec3 tangent(double t) const;  // d gamma / dt
    // Position from tube coordinates.
    Vec3 point(double s, double theta, double rho) const;
    // Columns d/ds, d/dtheta, d/drho of point().
    void frame_derivatives(double s, double theta, double rho, Vec3& xs, Vec3& xth, Vec3& xr) const;
    double tube_radius() const { return a_; }
    double length() const { return length_; }
    // min(radius of curvature, half the distance between far-apart points).
    double reach() const { return reach_; }
    // max |gamma - center|
    double extent() const { return extent_; }

private:
    void frame(double t, Vec3& e1, Vec3& e2, Vec3& de1, Vec3& de2) const;
    KnotSpec knot_;
    double R_, r_, a_;
    Vec3 c_;
    std::vector<double> ts_;
    std::vector<Vec3> pts_;
    double length_ = 0.0, reach_ = 0.0, extent_ = 0.0;
};

struct KnotMetadata {
    std::string label;
    int p = 1, q = 0;
    double delta = 0.0;
    double tube_radius = 0.0;
    double max_tube_radius = 0.0;
    double reach = 0.0;
    double length = 0.0;
    // Volume of the tube (unit-volume normalization) and the target (1 - delta)
    // times the largest feasible tube volume.
    double tube_measure = 0.0;
    double target_measure = 0.0;
    // Relative L2 norm removed by the divergence-free projection, and the mean
    // removed before it.
    double projection_error = 0.0;
    Vec3 removed_mean{};
};

// The closed-form tube field, scaled by `scale`, carrying its chart.
class KnotTubeField : public FlowField {
public:
    KnotTubeField(std::shared_ptr<const KnotChart> chart, TubeProfile profile, double scale);
    Vec3 value(const Vec3& x) const override;
    const TubeChart* chart() const override { return chart_.get(); }

private:
    std::shared_ptr<const KnotChart> chart_;
    TubeProfile profile_;
    double scale_;
};

struct KnottedField {
    SpectralField3 field;
    std::shared_ptr<const KnotChart> chart;
    // Closed-form field with the same normalization as `field`, before
    // truncation and projection.
    std::shared_ptr<const KnotTubeField> exact;
    KnotMetadata meta;
};

// V = ((rho / a) f(z) X_s + g(z) X_theta) / det(X_s, X_theta, X_rho) inside the
// tube, with z = 2 rho / a - 1, and zero outside.  The factor rho / a keeps
// the s component bounded near the core; the field is still divergence-free
// and linear on each torus rho = const.  The profile must vanish to all
// orders at z = +-1 (e.g. bump_twist_profile).  Normalized to unit maximum
// speed on the grid.  The tube radius is sqrt(1 - delta) times the largest
// feasible radius unless opt.tube_radius is set.
KnottedField build_knotted_field(const KnotSpec& knot, double delta, const TubeProfile& profile,
                                 const KnotOptions& opt = {});

}  // namespace intspec
