#pragma once

#include <span>
#include <string>
#include <vector>

#include "pslab/common.hpp"
#include "pslab/rng.hpp"

namespace pslab {

/// Statistical moments of a constellation under its priors.
struct Moments {
  double power = 0.0;           // E{|s|^2}
  double fourth = 0.0;          // E{|s|^4}
  double inv_power = 0.0;       // E{|1/s|^2}
  Complex square_mean{0, 0};    // E{s^2}
  double kurtosis = 0.0;        // E{|s|^4} - 2 E{|s|^2}^2 - |E{s^2}|^2
};

/// Maxwell-Boltzmann priors over a point set:
/// P_m = exp(-lambda |s_m|^2) / sum_k exp(-lambda |s_k|^2).
std::vector<double> mb_priors(std::span<const Complex> points, double lambda);

/// A QAM alphabet: fixed point geometry plus per-point prior probabilities.
/// Shaping changes the priors only, never the coordinates. Immutable after
/// construction; all member functions are safe to call concurrently.
class Constellation {
 public:
  /// Square M-QAM on the odd-integer grid, uniform priors. M in {16, 64, 256}.
  static Constellation square_qam(int order);

  /// Cross 32-QAM: the 32 lowest-energy points of the 64-QAM grid
  /// (the 6x6 odd grid minus the four (+-5,+-5) corners), uniform priors.
  static Constellation cross_qam_32();

  /// Arbitrary alphabet with explicit priors (must be distinct points and a
  /// normalized prior vector). Uniform priors when `priors` is empty.
  static Constellation custom(std::vector<Complex> points, std::vector<double> priors = {});

  /// Same geometry with Maxwell-Boltzmann priors for the given lambda >= 0.
  Constellation shaped(double lambda) const;

  std::span<const Complex> points() const { return points_; }
  std::span<const double> priors() const { return priors_; }
  int order() const { return static_cast<int>(points_.size()); }
  double lambda() const { return lambda_; }
  const std::string& family() const { return family_; }

  Moments moments() const;

  /// i.i.d. draws from the priors. Deterministic given the generator; the
  /// generator is taken by value so concurrent callers never share state.
  std::vector<Complex> sample(std::size_t count, Rng rng) const;

  /// Index of the nearest point by inverse-CDF over the cumulative priors.
  std::size_t sample_index(Rng& rng) const;

 private:
  Constellation(std::string family, std::vector<Complex> points,
                std::vector<double> priors, double lambda);

  std::string family_;
  std::vector<Complex> points_;
  std::vector<double> priors_;
  std::vector<double> cumulative_;
  double lambda_ = 0.0;
};

}  // namespace pslab
