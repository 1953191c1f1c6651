#include "intspec/spectral_field.hpp"

#include "intspec/errors.hpp"

namespace intspec {

ModeGrid::ModeGrid(int n) : n_(n) {
    if (n < 4 || n % 2 != 0) throw InvalidFieldError("resolution must be even and >= 4");
}

std::size_t ModeGrid::conjugate_index(std::size_t idx) const {
    auto k = mode(idx);
    return index(-k[0], -k[1], -k[2]);
}

SpectralScalar3::SpectralScalar3(int n) : grid_(n), c_(grid_.size()) {}

SpectralField3::SpectralField3(int n) : grid_(n) {
    for (auto& c : c_) c.assign(grid_.size(), Complex{});
}

static void check_same(const SpectralField3& a, const SpectralField3& b) {
    if (a.n() != b.n()) throw InvalidFieldError("resolution mismatch");
}

SpectralField3& SpectralField3::operator+=(const SpectralField3& o) {
    check_same(*this, o);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < c_[c].size(); ++i) c_[c][i] += o.c_[c][i];
    divergence_free_ = divergence_free_ && o.divergence_free_;
    return *this;
}

SpectralField3& SpectralField3::operator-=(const SpectralField3& o) {
    check_same(*this, o);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < c_[c].size(); ++i) c_[c][i] -= o.c_[c][i];
    divergence_free_ = divergence_free_ && o.divergence_free_;
    return *this;
}

SpectralField3& SpectralField3::operator*=(double s) {
    for (auto& comp : c_)
        for (auto& x : comp) x *= s;
    return *this;
}

SpectralField3 operator+(SpectralField3 a, const SpectralField3& b) { return a += b; }
SpectralField3 operator-(SpectralField3 a, const SpectralField3& b) { return a -= b; }
SpectralField3 operator*(double s, SpectralField3 a) { return a *= s; }

}  // namespace intspec
