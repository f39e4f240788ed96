#pragma once

#include <cmath>
#include <numbers>

namespace cvdiff {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces a coordinate to the representative interval [-pi, pi).
/// Every torus lookup (potentials, grids, samplers) goes through this.
inline double wrap_to_torus(double q) noexcept {
    if (q >= -kPi && q < kPi) return q;
    double r = q - kTwoPi * std::floor((q + kPi) / kTwoPi);
    // floor() can land one ulp short at the seam
    if (r >= kPi) r -= kTwoPi;
    if (r < -kPi) r += kTwoPi;
    return r;
}

}  // namespace cvdiff
