#pragma once

#include <cmath>
#include <numbers>

namespace rramcap::normal {

inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // log(sqrt(2*pi))

/// Upper tail Q(x) = 1 - Phi(x), accurate in the far tail.
inline double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Phi(hi) - Phi(lo) for lo <= hi, choosing the tail formulation that avoids
/// cancellation so the result keeps ~1e-15 relative accuracy.
inline double interval_mass(double lo, double hi) {
  if (lo >= 0.0) return upper_tail(lo) - upper_tail(hi);
  if (hi <= 0.0) return upper_tail(-hi) - upper_tail(-lo);
  return 1.0 - upper_tail(-lo) - upper_tail(hi);
}

inline double log_pdf(double z) { return -0.5 * z * z - kLogSqrtTwoPi; }

}  // namespace rramcap::normal
