#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "intspec/vec.hpp"

namespace intspec {

// Explicit conversions so sequences do not depend on the standard library's
// distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace intspec
