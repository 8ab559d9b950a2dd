#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace pslab {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Reduce an angle difference to the quarter-plane ambiguity sector (-pi/4, pi/4].
inline double wrap_quarter(double angle) {
  double y = std::fmod(angle + kPi / 4.0, kPi / 2.0);
  if (y <= 0.0) y += kPi / 2.0;
  return y - kPi / 4.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace pslab
