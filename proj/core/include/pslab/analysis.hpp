#pragma once

#include <optional>
#include <ostream>
#include <span>

#include "pslab/common.hpp"
#include "pslab/constellation.hpp"

namespace pslab {

struct MseEstimate {
  double mse = 0.0;        // rad^2
  double std_error = 0.0;  // Monte Carlo standard error of the mean
  std::size_t count = 0;
};

struct MiEstimate {
  double bits = 0.0;
  double std_error = 0.0;
};

/// Single-symbol supervised phase-search MSE: sigma_n^2 * E{1/|s|^2} with
/// sigma_n^2 = P_s / (2 snr), all expectations under the priors.
double mse_sps_n1(const Constellation& constellation, double snr_linear);

/// Large-window supervised limit: 1 / (2 N snr), independent of the alphabet.
double mse_sps_large_n(double window, double snr_linear);

enum class ResidualForm {
  direct,    // [E|s|^4 - 2 E{|s|^2}^2] * E{|1/s|^2} + E{|s|^2}
  kurtosis,  // K_s + E{|s|^2} / E{|1/s|^2}
};

/// Stationarity condition for the lambda that maximizes the N=1 MSE.
/// Only the point geometry of `family` is used; priors are recomputed from
/// lambda internally. Both algebraic forms share signs and roots whenever
/// E{s^2} = 0.
double lambda_max_residual(const Constellation& family, double lambda,
                           ResidualForm form = ResidualForm::direct);

/// Bisection root of lambda_max_residual over [lambda_lo, lambda_hi].
/// No sign change (constant-modulus alphabets) reports no root.
std::optional<double> solve_lambda_max(const Constellation& family, double lambda_lo = 0.0,
                                       double lambda_hi = 0.2, double xtol = 1e-6);

/// Mutual information of the discrete-input complex AWGN channel, in
/// bits/symbol, by tensor-product Gauss-Hermite quadrature (quad_order nodes
/// per axis). Noise total variance is P_s / snr with P_s under the priors.
double mi_awgn(const Constellation& constellation, double snr_linear, int quad_order = 24);

/// Capacity-maximizing shaping parameter: argmax over lambda of mi_awgn at
/// fixed SNR, golden-section after a unimodality pre-scan (grid argmax
/// fallback when the pre-scan is not unimodal).
double solve_lambda_optimum(const Constellation& family, double snr_linear,
                            double lambda_hi = 0.2, double xtol = 1e-4);

/// Mismatched-decoding (auxiliary-channel) MI lower bound from paired
/// samples. The auxiliary channel is circular Gaussian with total variance
/// fitted as mean |recovered_i - transmitted_i|^2; the result is clipped
/// below at zero.
MiEstimate estimate_mi_from_samples(std::span<const Complex> transmitted,
                                    std::span<const Complex> recovered,
                                    const Constellation& constellation);

/// Mean squared phase-estimate error with differences wrapped to
/// (-pi/4, pi/4] before squaring.
MseEstimate estimate_mse(std::span<const double> estimates, double true_theta);
MseEstimate estimate_mse(std::span<const double> estimates, std::span<const double> true_thetas);

/// Entropy of a prior vector in bits.
double entropy_bits(std::span<const double> priors);

/// CSV table of the closed forms over a lambda grid:
/// lambda,mse_eq8,mse_eq12,residual_eq9 (single-symbol MSE, the
/// window-`large_n` limit, and the lambda-max stationarity residual).
void emit_analytic_mse_table(const Constellation& family, double snr_linear, double large_n,
                             std::span<const double> lambdas, std::ostream& os);

/// CSV capacity table over an SNR grid:
/// snr_db,lambda_opt,mi_uniform,mi_shaped.
void emit_capacity_table(const Constellation& family, std::span<const double> snr_db,
                         std::ostream& os);

}  // namespace pslab
