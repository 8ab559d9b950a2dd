#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "pslab/common.hpp"
#include "pslab/constellation.hpp"

namespace pslab {

enum class Mode { sps, bps };
enum class Windowing { block, sliding_centered };
enum class Unwrap { none, supervised_cycle_slip };

struct RecoveryConfig {
  Mode mode = Mode::bps;
  int window = 1;          // N, symbols jointly used per estimate
  int test_phases = 2;     // B, grid size over one pi/2 sector
  Windowing windowing = Windowing::block;
  Unwrap unwrap = Unwrap::none;
  double sector_offset = 0.0;  // shift of the default (-pi/4, pi/4) grid
  int threads = 1;
};

struct RecoveryResult {
  std::vector<double> estimates;   // one per block (block) or per symbol (sliding)
  std::vector<double> cost_min;    // J at the chosen phase, parallel to estimates
  std::vector<Complex> corrected;  // r_i * exp(-j theta_hat)
  std::vector<Complex> decisions;  // nearest-point decisions (BPS only)
};

/// B equally spaced phases covering one pi/2 ambiguity sector:
/// theta_b = -pi/4 + sector_offset + (b + 1/2) * (pi/2) / B.
/// A sector_offset of pi/4 places the grid on [0, pi/2).
std::vector<double> test_phase_grid(int count, double sector_offset = 0.0);

/// Minimum-Euclidean-distance decision; ties break to the lowest point index.
/// Priors are not used.
Complex decide(Complex symbol, const Constellation& constellation);
std::size_t decide_index(Complex symbol, const Constellation& constellation);

/// O(1) rounding decision for the square and cross32 grids, used inside the
/// per-phase cost loops; equal to decide() away from exact cell boundaries.
/// Falls back to the exhaustive scan for other alphabets.
Complex decide_fast(Complex symbol, const Constellation& constellation);

/// Supervised cost: J(theta_r) = sum_i |w_i exp(-j theta_r) - known_i|^2,
/// minimized over the grid (first minimum on ties). Returns the grid phase.
double window_estimate(std::span<const Complex> window,
                       std::span<const Complex> known,
                       std::span<const double> grid,
                       double* cost_min = nullptr);

/// Blind cost: the reference is the per-symbol nearest-point decision of the
/// derotated symbol, recomputed for every test phase.
double window_estimate(std::span<const Complex> window,
                       const Constellation& constellation,
                       std::span<const double> grid,
                       double* cost_min = nullptr);

/// Run SPS/BPS over a whole sequence. Block windowing yields one estimate per
/// consecutive non-overlapping N-block (trailing partial block dropped);
/// sliding-centered yields one estimate per symbol from the N symbols centered
/// on it, truncated at the sequence edges. `transmitted` may be empty for BPS
/// and is required for SPS.
RecoveryResult run_recovery(std::span<const Complex> received,
                            std::span<const Complex> transmitted,
                            const Constellation& constellation,
                            const RecoveryConfig& config);

/// Rotate every symbol by the pi/2 multiple that brings it closest to the
/// corresponding transmitted symbol. Ties prefer k = 0, then the smallest k.
std::vector<Complex> supervised_cycle_slip_correct(std::span<const Complex> corrected,
                                                   std::span<const Complex> transmitted);

/// Per-window debug table: index, estimate, j_min as CSV.
void dump_recovery_csv(const RecoveryResult& result, std::ostream& os);

}  // namespace pslab
