#include "pslab/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace pslab {

PhaseTrajectory constant_trajectory(double theta, std::size_t count) {
  if (count < 1) throw std::invalid_argument("constant_trajectory: count must be >= 1");
  PhaseTrajectory t;
  t.kind = PhaseTrajectory::Kind::constant;
  t.values.assign(count, theta);
  return t;
}

PhaseTrajectory wiener_trajectory(std::size_t count, double linewidth_hz,
                                  double symbol_rate_baud, Rng rng) {
  if (count < 1) throw std::invalid_argument("wiener_trajectory: count must be >= 1");
  if (linewidth_hz < 0.0) throw std::invalid_argument("wiener_trajectory: linewidth must be >= 0");
  if (symbol_rate_baud <= 0.0)
    throw std::invalid_argument("wiener_trajectory: symbol rate must be > 0");

  PhaseTrajectory t;
  t.kind = PhaseTrajectory::Kind::wiener;
  t.linewidth_hz = linewidth_hz;
  t.symbol_rate_baud = symbol_rate_baud;
  t.values.resize(count);

  const double sigma = std::sqrt(2.0 * kPi * linewidth_hz / symbol_rate_baud);
  double theta = 0.0;
  t.values[0] = 0.0;
  for (std::size_t i = 1; i < count; ++i) {
    theta += sigma * rng.normal();
    t.values[i] = theta;
  }
  return t;
}

std::vector<Complex> transmit_with_noise_power(std::span<const Complex> symbols,
                                               const PhaseTrajectory& trajectory,
                                               double total_noise_variance, Rng rng) {
  if (symbols.size() != trajectory.values.size())
    throw std::invalid_argument("transmit: symbols and trajectory length mismatch");
  if (total_noise_variance < 0.0)
    throw std::invalid_argument("transmit: noise variance must be >= 0");

  // Cartesian components, variance sigma^2 each, total 2*sigma^2.
  const double sigma = std::sqrt(total_noise_variance / 2.0);

  std::vector<Complex> out(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const Complex rotated = symbols[i] * std::polar(1.0, trajectory.values[i]);
    if (sigma > 0.0) {
      auto [nr, ni] = rng.normal_pair();
      out[i] = rotated + Complex(sigma * nr, sigma * ni);
    } else {
      out[i] = rotated;
    }
  }
  return out;
}

std::vector<Complex> transmit(std::span<const Complex> symbols,
                              const PhaseTrajectory& trajectory,
                              const Constellation& constellation,
                              ChannelParams params, Rng rng) {
  const double snr = params.snr_linear();
  if (!(snr > 0.0)) throw std::invalid_argument("transmit: SNR must be positive");
  const double signal_power = constellation.moments().power;
  const double noise_var = std::isinf(snr) ? 0.0 : signal_power / snr;
  return transmit_with_noise_power(symbols, trajectory, noise_var, rng);
}

}  // namespace pslab
