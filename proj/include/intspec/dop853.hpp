#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "intspec/dop853_tableau.hpp"

namespace intspec {

// Adaptive Dormand-Prince 8(5,3) with 7th-order dense output.  Step control
// follows the scipy implementation: mixed error norm of the 5th and 3rd order
// estimates, safety 0.9, factor bounds [0.2, 10].
template <std::size_t D>
class Dop853 {
public:
    using State = std::array<double, D>;
    using Rhs = std::function<void(double, const State&, State&)>;

    struct Options {
        double rtol = 0.0;
        double atol = 1e-10;
        double max_step = std::numeric_limits<double>::infinity();
        double first_step = 0.0;
    };

    enum class Status { running, finished, failed };

    Dop853(Rhs rhs, double t0, const State& y0, double t_bound, const Options& opt)
        : rhs_(std::move(rhs)), t_(t0), y_(y0), t_bound_(t_bound), opt_(opt) {
        dir_ = t_bound >= t0 ? 1.0 : -1.0;
        eval(t_, y_, f_);
        h_abs_ = opt_.first_step > 0.0 ? opt_.first_step : initial_step();
        if (t_ == t_bound_) status_ = Status::finished;
    }

    Status status() const { return status_; }
    double t() const { return t_; }
    double t_old() const { return t_old_; }
    const State& y() const { return y_; }
    const State& f() const { return f_; }
    long steps() const { return steps_; }
    long rejected() const { return rejected_; }
    long evaluations() const { return nfev_; }
    double max_error() const { return max_err_; }

    // One accepted step (possibly after rejections).
    Status step() {
        if (status_ != Status::running) return status_;
        const double min_step = 10.0 * std::abs(std::nextafter(t_, dir_ * INFINITY) - t_);
        double h_abs = std::min(h_abs_, opt_.max_step);
        bool rejected = false;
        State y_new, f_new;
        double h = 0.0;
        for (;;) {
            if (h_abs < min_step) {
                status_ = Status::failed;
                return status_;
            }
            h = h_abs * dir_;
            double t_new = t_ + h;
            if (dir_ * (t_new - t_bound_) > 0.0) t_new = t_bound_;
            h = t_new - t_;
            h_abs = std::abs(h);

            rk_step(h, y_new, f_new);
            double err = error_norm(h, y_new);
            if (err < 1.0) {
                double factor = err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, kExponent));
                if (rejected) factor = std::min(1.0, factor);
                h_abs *= factor;
                max_err_ = std::max(max_err_, err);
                break;
            }
            h_abs *= std::max(kMinFactor, kSafety * std::pow(err, kExponent));
            rejected = true;
            ++rejected_;
        }
        h_prev_ = h;
        t_old_ = t_;
        y_old_ = y_;
        t_ += h;
        y_ = y_new;
        f_ = f_new;
        h_abs_ = h_abs;
        dense_ready_ = false;
        ++steps_;
        if (dir_ * (t_ - t_bound_) >= 0.0) status_ = Status::finished;
        return status_;
    }

    // Replaces the current state (e.g. after a projection); the derivative is
    // recomputed.  Dense output for the last step remains valid.
    void set_state(const State& y) {
        if (!dense_ready_ && steps_ > 0) prepare_dense();
        y_ = y;
        eval(t_, y_, f_);
    }

    // Interpolated state on [t_old, t].
    State dense(double t) {
        if (!dense_ready_) prepare_dense();
        double x = (t - t_old_) / h_prev_;
        State y{};
        for (int i = kPower - 1, j = 0; i >= 0; --i, ++j) {
            for (std::size_t k = 0; k < D; ++k) {
                y[k] += F_[i][k];
                y[k] *= (j % 2 == 0) ? x : (1.0 - x);
            }
        }
        for (std::size_t k = 0; k < D; ++k) y[k] += dense_y_old_[k];
        return y;
    }

private:
    static constexpr double kSafety = 0.9;
    static constexpr double kMinFactor = 0.2;
    static constexpr double kMaxFactor = 10.0;
    static constexpr double kExponent = -1.0 / 8.0;
    static constexpr int kPower = 7;

    void eval(double t, const State& y, State& out) {
        rhs_(t, y, out);
        ++nfev_;
    }

    double rms_scaled(const State& v, const State& scale) const {
        double s = 0.0;
        for (std::size_t k = 0; k < D; ++k) s += (v[k] / scale[k]) * (v[k] / scale[k]);
        return std::sqrt(s / D);
    }

    double initial_step() {
        const double span = std::abs(t_bound_ - t_);
        if (span == 0.0) return 0.0;
        State scale;
        for (std::size_t k = 0; k < D; ++k) scale[k] = opt_.atol + std::abs(y_[k]) * opt_.rtol;
        double d0 = rms_scaled(y_, scale);
        double d1 = rms_scaled(f_, scale);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        State y1, f1;
        for (std::size_t k = 0; k < D; ++k) y1[k] = y_[k] + h0 * dir_ * f_[k];
        eval(t_ + h0 * dir_, y1, f1);
        State df;
        for (std::size_t k = 0; k < D; ++k) df[k] = f1[k] - f_[k];
        double d2 = rms_scaled(df, scale) / h0;
        double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
        return std::min({100.0 * h0, h1, span, opt_.max_step});
    }

    void rk_step(double h, State& y_new, State& f_new) {
        K_[0] = f_;
        for (int s = 1; s < dop853::kStages; ++s) {
            State ys = y_;
            for (int j = 0; j < s; ++j) {
                const double a = dop853::A[s][j] * h;
                if (a == 0.0) continue;
                for (std::size_t k = 0; k < D; ++k) ys[k] += a * K_[j][k];
            }
            eval(t_ + dop853::C[s] * h, ys, K_[s]);
        }
        y_new = y_;
        for (int j = 0; j < dop853::kStages; ++j) {
            const double b = dop853::A[dop853::kStages][j] * h;
            if (b == 0.0) continue;
            for (std::size_t k = 0; k < D; ++k) y_new[k] += b * K_[j][k];
        }
        eval(t_ + h, y_new, f_new);
        K_[dop853::kStages] = f_new;
    }

    double error_norm(double h, const State& y_new) const {
        double e5 = 0.0, e3 = 0.0;
        for (std::size_t k = 0; k < D; ++k) {
            const double scale = opt_.atol + std::max(std::abs(y_[k]), std::abs(y_new[k])) * opt_.rtol;
            double s5 = 0.0, s3 = 0.0;
            for (int j = 0; j <= dop853::kStages; ++j) {
                s5 += K_[j][k] * dop853::E5[j];
                s3 += K_[j][k] * dop853::E3[j];
            }
            s5 /= scale;
            s3 /= scale;
            e5 += s5 * s5;
            e3 += s3 * s3;
        }
        if (e5 == 0.0 && e3 == 0.0) return 0.0;
        const double denom = e5 + 0.01 * e3;
        return std::abs(h) * e5 / std::sqrt(denom * D);
    }

    void prepare_dense() {
        const double h = h_prev_;
        for (int s = dop853::kStages + 1; s < dop853::kStagesExtended; ++s) {
            State ys = y_old_;
            for (int j = 0; j < s; ++j) {
                const double a = dop853::A[s][j] * h;
                if (a == 0.0) continue;
                for (std::size_t k = 0; k < D; ++k) ys[k] += a * K_[j][k];
            }
            eval(t_old_ + dop853::C[s] * h, ys, K_[s]);
        }
        for (std::size_t k = 0; k < D; ++k) {
            const double dy = y_[k] - y_old_[k];
            F_[0][k] = dy;
            F_[1][k] = h * K_[0][k] - dy;
            F_[2][k] = 2.0 * dy - h * (f_[k] + K_[0][k]);
        }
        for (int i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < D; ++k) {
                double s = 0.0;
                for (int j = 0; j < dop853::kStagesExtended; ++j) s += dop853::D[i][j] * K_[j][k];
                F_[3 + i][k] = h * s;
            }
        dense_y_old_ = y_old_;
        dense_ready_ = true;
    }

    Rhs rhs_;
    double t_, t_old_ = 0.0;
    State y_, y_old_{}, f_{};
    double t_bound_;
    Options opt_;
    double dir_ = 1.0;
    double h_abs_ = 0.0;
    double h_prev_ = 0.0;
    Status status_ = Status::running;
    std::array<State, dop853::kStagesExtended> K_{};
    std::array<State, kPower> F_{};
    State dense_y_old_{};
    bool dense_ready_ = false;
    long steps_ = 0, rejected_ = 0, nfev_ = 0;
    double max_err_ = 0.0;
};

}  // namespace intspec
