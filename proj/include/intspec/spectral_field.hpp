#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace intspec {

using Complex = std::complex<double>;

// Mode ordering shared by every container in the library: index i along an
// axis stores wavenumber k = i for i <= N/2 and k = i - N otherwise, and the
// flat index is (ix * N + iy) * N + iz.  Nyquist modes (|k_i| = N/2) are kept
// at zero by every operator, so the retained set is symmetric under k -> -k.
class ModeGrid {
public:
    ModeGrid() = default;
    explicit ModeGrid(int n);

    int n() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

    int wavenumber(int i) const { return i <= n_ / 2 ? i : i - n_; }
    int slot(int k) const { return k >= 0 ? k : k + n_; }
    std::size_t index(int kx, int ky, int kz) const {
        return (static_cast<std::size_t>(slot(kx)) * n_ + slot(ky)) * n_ + slot(kz);
    }
    std::array<int, 3> mode(std::size_t idx) const {
        int iz = static_cast<int>(idx % n_);
        int iy = static_cast<int>((idx / n_) % n_);
        int ix = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
        return {wavenumber(ix), wavenumber(iy), wavenumber(iz)};
    }
    // Index of the mode -k.
    std::size_t conjugate_index(std::size_t idx) const;
    bool is_nyquist(const std::array<int, 3>& k) const {
        int h = n_ / 2;
        return k[0] == h || k[1] == h || k[2] == h;
    }

private:
    int n_ = 0;
};

class SpectralScalar3 {
public:
    SpectralScalar3() = default;
    explicit SpectralScalar3(int n);

    int n() const { return grid_.n(); }
    const ModeGrid& grid() const { return grid_; }
    std::vector<Complex>& data() { return c_; }
    const std::vector<Complex>& data() const { return c_; }
    Complex& at(int kx, int ky, int kz) { return c_[grid_.index(kx, ky, kz)]; }
    Complex at(int kx, int ky, int kz) const { return c_[grid_.index(kx, ky, kz)]; }

private:
    ModeGrid grid_;
    std::vector<Complex> c_;
};

class SpectralField3 {
public:
    static constexpr const char* kNormalization = "volume-one";

    SpectralField3() = default;
    explicit SpectralField3(int n);

    int n() const { return grid_.n(); }
    const ModeGrid& grid() const { return grid_; }
    std::size_t modes() const { return grid_.size(); }

    std::vector<Complex>& component(int c) { return c_[c]; }
    const std::vector<Complex>& component(int c) const { return c_[c]; }
    Complex& at(int c, int kx, int ky, int kz) { return c_[c][grid_.index(kx, ky, kz)]; }
    Complex at(int c, int kx, int ky, int kz) const { return c_[c][grid_.index(kx, ky, kz)]; }

    bool divergence_free() const { return divergence_free_; }
    void set_divergence_free(bool v) { divergence_free_ = v; }
    // L2 norm removed by the last divergence cleaning, if any.
    double discarded_norm() const { return discarded_norm_; }
    void set_discarded_norm(double v) { discarded_norm_ = v; }

    SpectralField3& operator+=(const SpectralField3& o);
    SpectralField3& operator-=(const SpectralField3& o);
    SpectralField3& operator*=(double s);

private:
    ModeGrid grid_;
    std::array<std::vector<Complex>, 3> c_;
    bool divergence_free_ = false;
    double discarded_norm_ = 0.0;
};

SpectralField3 operator+(SpectralField3 a, const SpectralField3& b);
SpectralField3 operator-(SpectralField3 a, const SpectralField3& b);
SpectralField3 operator*(double s, SpectralField3 a);

// Physical samples on the uniform grid x_i = 2 pi i / N, same flat ordering.
struct GridField {
    int n = 0;
    std::array<std::vector<double>, 3> v;
};

struct GridScalar {
    int n = 0;
    std::vector<double> v;
};

}  // namespace intspec
