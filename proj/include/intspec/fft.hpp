#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "intspec/spectral_field.hpp"

namespace intspec {

// Real 3D transform of size N^3 backed by FFTW.  Instances own their plans and
// aligned buffers and are not shared between threads; plan creation is
// serialized internally.  Plans use FFTW_ESTIMATE so results do not depend on
// run-time measurement.
class RealFft3 {
public:
    explicit RealFft3(int n);
    ~RealFft3();
    RealFft3(const RealFft3&) = delete;
    RealFft3& operator=(const RealFft3&) = delete;

    int n() const { return n_; }
    std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
    std::size_t half_size() const { return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1); }

    // Half-spectrum layout (ix, iy, iz <= N/2), flat (ix * N + iy) * (N/2+1) + iz.
    // forward returns normalized coefficients: v(x) = sum_k c_k e^{i k x}.
    void forward_half(const double* in, Complex* out);
    // Input is not modified.
    void backward_half(const Complex* in, double* out);

    void forward_full(const double* in, Complex* out);
    void backward_full(const Complex* in, double* out);

private:
    int n_;
    double* rbuf_;
    void* cbuf_;
    void* plan_f_;
    void* plan_b_;
};

// Per-thread cached transform for size n.
RealFft3& fft_for(int n);

}  // namespace intspec
