#pragma once

#include <functional>

namespace pslab {

/// Bisection root of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
/// Stops when the bracket is narrower than xtol.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double xtol);

/// Golden-section maximizer of a unimodal f on [lo, hi], to width xtol.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double xtol);

}  // namespace pslab
