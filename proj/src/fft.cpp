#include "intspec/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace intspec {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft3::RealFft3(int n) : n_(n) {
    rbuf_ = fftw_alloc_real(real_size());
    auto* c = fftw_alloc_complex(half_size());
    cbuf_ = c;
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_f_ = fftw_plan_dft_r2c_3d(n, n, n, rbuf_, c, FFTW_ESTIMATE);
    plan_b_ = fftw_plan_dft_c2r_3d(n, n, n, c, rbuf_, FFTW_ESTIMATE);
}

RealFft3::~RealFft3() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

void RealFft3::forward_half(const double* in, Complex* out) {
    std::memcpy(rbuf_, in, real_size() * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_f_));
    const double scale = 1.0 / static_cast<double>(real_size());
    auto* c = static_cast<fftw_complex*>(cbuf_);
    for (std::size_t i = 0; i < half_size(); ++i) out[i] = Complex(c[i][0] * scale, c[i][1] * scale);
}

void RealFft3::backward_half(const Complex* in, double* out) {
    std::memcpy(cbuf_, in, half_size() * sizeof(Complex));
    fftw_execute(static_cast<fftw_plan>(plan_b_));
    std::memcpy(out, rbuf_, real_size() * sizeof(double));
}

void RealFft3::forward_full(const double* in, Complex* out) {
    const int n = n_;
    const int h = n / 2 + 1;
    std::vector<Complex> half(half_size());
    forward_half(in, half.data());
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            const std::size_t row = (static_cast<std::size_t>(ix) * n + iy) * n;
            const std::size_t hrow = (static_cast<std::size_t>(ix) * n + iy) * h;
            for (int iz = 0; iz < h; ++iz) out[row + iz] = half[hrow + iz];
            const int jx = (n - ix) % n;
            const int jy = (n - iy) % n;
            const std::size_t crow = (static_cast<std::size_t>(jx) * n + jy) * h;
            for (int iz = h; iz < n; ++iz) out[row + iz] = std::conj(half[crow + (n - iz)]);
        }
}

void RealFft3::backward_full(const Complex* in, double* out) {
    const int n = n_;
    const int h = n / 2 + 1;
    auto* c = reinterpret_cast<Complex*>(cbuf_);
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            const std::size_t row = (static_cast<std::size_t>(ix) * n + iy) * n;
            const std::size_t hrow = (static_cast<std::size_t>(ix) * n + iy) * h;
            for (int iz = 0; iz < h; ++iz) c[hrow + iz] = in[row + iz];
        }
    fftw_execute(static_cast<fftw_plan>(plan_b_));
    std::memcpy(out, rbuf_, real_size() * sizeof(double));
}

RealFft3& fft_for(int n) {
    thread_local std::map<int, std::unique_ptr<RealFft3>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<RealFft3>(n)).first;
    return *it->second;
}

}  // namespace intspec
