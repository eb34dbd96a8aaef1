#pragma once

#include <cmath>
#include <numbers>

namespace gaussalloc {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;  // 1/sqrt(2*pi)

inline double normal_pdf(double x) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// erfc keeps full relative precision in the lower tail.
inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * (1.0 / std::numbers::sqrt2));
}

/// Integral of the standard normal CDF over (-inf, -c], i.e. phi(c) - c*Phi(-c).
/// Used to bound the mass dropped when truncating tail integrals at c deviations.
inline double normal_lower_partial_expectation(double c) noexcept {
    return normal_pdf(c) - c * normal_cdf(-c);
}

}  // namespace gaussalloc
