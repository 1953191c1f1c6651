#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace intspec {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
// Row-major: m[i][j] = d v_i / d x_j for Jacobians.
using Mat3 = std::array<Vec3, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <std::size_t D>
inline std::array<double, D> operator+(const std::array<double, D>& a, const std::array<double, D>& b) {
    std::array<double, D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t D>
inline std::array<double, D> operator-(const std::array<double, D>& a, const std::array<double, D>& b) {
    std::array<double, D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t D>
inline std::array<double, D> operator*(double s, const std::array<double, D>& a) {
    std::array<double, D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t D>
inline double dot(const std::array<double, D>& a, const std::array<double, D>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t D>
inline double norm(const std::array<double, D>& a) {
    return std::sqrt(dot(a, a));
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 matvec(const Mat3& m, const Vec3& v) {
    return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

inline double wrap_angle(double x) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w -= kTwoPi;
    return w;
}

inline Vec3 wrap_point(const Vec3& x) {
    return {wrap_angle(x[0]), wrap_angle(x[1]), wrap_angle(x[2])};
}

// Minimum-image displacement on the 2pi-periodic torus.
inline double periodic_delta(double d) {
    return d - kTwoPi * std::nearbyint(d / kTwoPi);
}

}  // namespace intspec
