#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "intspec/spectral_field.hpp"
#include "intspec/vec.hpp"

namespace intspec {

// Coordinates on a tube around a knot core: s along the core, rho the
// distance to it, theta the angle around it.  Used to classify orbits that do
// not wind around the torus.
struct TubeCoordinates {
    bool inside = false;
    double s = 0.0, rho = 0.0, theta = 0.0;
    Vec3 grad_s{}, grad_theta{};
};

class TubeChart {
public:
    virtual ~TubeChart() = default;
    virtual TubeCoordinates coordinates(const Vec3& x) const = 0;
    virtual std::string knot_label() const = 0;
};

// A vector field that can be evaluated at arbitrary points of R^3, periodic
// with period 2 pi in each coordinate.
class FlowField {
public:
    virtual ~FlowField() = default;
    virtual Vec3 value(const Vec3& x) const = 0;
    // Default: fourth-order central differences.
    virtual void value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const;
    virtual const TubeChart* chart() const { return nullptr; }
};

// Exact evaluation from the retained Fourier modes; modes below
// prune_relative * max |coeff| are dropped.
class ModalEvaluator : public FlowField {
public:
    explicit ModalEvaluator(const SpectralField3& v, double prune_relative = 0.0);
    Vec3 value(const Vec3& x) const override;
    void value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const override;
    std::size_t active_modes() const { return modes_.size(); }

private:
    struct Mode {
        int k[3];
        Complex c[3];
    };
    void phases(const Vec3& x, std::vector<Complex>* tab) const;
    Vec3 mean_{};
    std::vector<Mode> modes_;
    int kmax_[3] = {0, 0, 0};
};

// Curl of the quintic B-spline interpolant of the vector potential, sampled on
// an upsampled grid, plus the mean.  The result is exactly divergence-free, so
// invariant tori of the field are not destroyed by interpolation error.  The
// input is Leray-projected first.  Spectral prefiltering makes the potential
// exact at the grid nodes.
class SplineEvaluator : public FlowField {
public:
    explicit SplineEvaluator(const SpectralField3& v, int upsample = 2);
    Vec3 value(const Vec3& x) const override;
    void value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const override;
    int grid_size() const { return m_; }

private:
    int m_;
    double h_;
    Vec3 mean_{};
    std::array<std::vector<double>, 3> coef_;
};

class AnalyticField : public FlowField {
public:
    using ValueFn = std::function<Vec3(const Vec3&)>;
    using JacobianFn = std::function<Mat3(const Vec3&)>;
    explicit AnalyticField(ValueFn value, JacobianFn jacobian = nullptr);
    Vec3 value(const Vec3& x) const override { return value_(x); }
    void value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const override;

private:
    ValueFn value_;
    JacobianFn jacobian_;
};

// a + b; the chart is taken from a.
class SumField : public FlowField {
public:
    SumField(std::shared_ptr<const FlowField> a, std::shared_ptr<const FlowField> b)
        : a_(std::move(a)), b_(std::move(b)) {}
    Vec3 value(const Vec3& x) const override { return a_->value(x) + b_->value(x); }
    void value_jacobian(const Vec3& x, Vec3& v, Mat3& jac) const override;
    const TubeChart* chart() const override { return a_->chart(); }

private:
    std::shared_ptr<const FlowField> a_, b_;
};

struct EvaluatorOptions {
    double prune_relative = 1e-14;
    // Above this many active modes the spline sampler is used.
    std::size_t max_modal_modes = 6000;
    int spline_upsample = 2;
};

std::unique_ptr<FlowField> make_evaluator(const SpectralField3& v, const EvaluatorOptions& opt = {});

// Built-in closed-form test fields.
// A sin z + C cos y, B sin x + A cos z, C sin y + B cos x.
std::unique_ptr<AnalyticField> abc_field(double a, double b, double c);
// W = grad f1 x grad f2 with f1 = cos x + cos y + cos z, f2 = cos x - cos y:
// divergence-free with two independent first integrals.
std::unique_ptr<AnalyticField> two_integral_field();

}  // namespace intspec
