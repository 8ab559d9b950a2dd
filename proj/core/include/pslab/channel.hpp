#pragma once

#include <span>
#include <vector>

#include "pslab/common.hpp"
#include "pslab/constellation.hpp"
#include "pslab/rng.hpp"

namespace pslab {

/// Per-symbol channel phase, either a fixed rotation or a Wiener random walk
/// with increment variance 2*pi*linewidth/symbol_rate.
struct PhaseTrajectory {
  enum class Kind { constant, wiener };
  Kind kind = Kind::constant;
  std::vector<double> values;      // theta_n, radians, one per symbol
  double linewidth_hz = 0.0;       // combined TX+LO linewidth; 0 for constant
  double symbol_rate_baud = 0.0;   // 0 for constant
};

PhaseTrajectory constant_trajectory(double theta, std::size_t count);

/// theta_0 = 0; increments are i.i.d. N(0, 2*pi*linewidth/symbol_rate).
PhaseTrajectory wiener_trajectory(std::size_t count, double linewidth_hz,
                                  double symbol_rate_baud, Rng rng);

struct ChannelParams {
  double snr_db = 0.0;
  double snr_linear() const { return db_to_linear(snr_db); }
};

/// r_i = s_i * exp(j theta_i) + n_i with circular complex Gaussian noise of
/// total variance P_s / snr. P_s comes from the constellation priors, not the
/// realized sequence, so the target SNR is exact for any amount of shaping.
std::vector<Complex> transmit(std::span<const Complex> symbols,
                              const PhaseTrajectory& trajectory,
                              const Constellation& constellation,
                              ChannelParams params, Rng rng);

/// Same channel with the noise variance given directly (per complex symbol).
std::vector<Complex> transmit_with_noise_power(std::span<const Complex> symbols,
                                               const PhaseTrajectory& trajectory,
                                               double total_noise_variance, Rng rng);

}  // namespace pslab
