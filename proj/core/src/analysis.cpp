#include "pslab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pslab/optim.hpp"
#include "pslab/quadrature.hpp"

namespace pslab {
namespace {

constexpr double kLn2 = 0.6931471805599453;

void reject_zero_amplitude(std::span<const Complex> points, const char* who) {
  for (const Complex& p : points)
    if (std::norm(p) == 0.0)
      throw std::invalid_argument(std::string(who) + ": zero-amplitude point makes 1/|s|^2 singular");
}

struct RawMoments {
  double power = 0.0, fourth = 0.0, inv_power = 0.0;
  Complex square_mean{0.0, 0.0};
};

RawMoments weighted_moments(std::span<const Complex> points, std::span<const double> priors) {
  RawMoments m;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = std::norm(points[i]);
    m.power += priors[i] * e;
    m.fourth += priors[i] * e * e;
    m.inv_power += priors[i] / e;
    m.square_mean += priors[i] * points[i] * points[i];
  }
  return m;
}

}  // namespace

double mse_sps_n1(const Constellation& constellation, double snr_linear) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("mse_sps_n1: SNR must be positive");
  reject_zero_amplitude(constellation.points(), "mse_sps_n1");
  const Moments m = constellation.moments();
  const double sigma2 = m.power / (2.0 * snr_linear);
  return sigma2 * m.inv_power;
}

double mse_sps_large_n(double window, double snr_linear) {
  if (window < 1.0) throw std::invalid_argument("mse_sps_large_n: window must be >= 1");
  if (!(snr_linear > 0.0)) throw std::invalid_argument("mse_sps_large_n: SNR must be positive");
  return 1.0 / (2.0 * window * snr_linear);
}

double lambda_max_residual(const Constellation& family, double lambda, ResidualForm form) {
  const auto points = family.points();
  reject_zero_amplitude(points, "lambda_max_residual");
  const auto priors = mb_priors(points, lambda);
  const RawMoments m = weighted_moments(points, priors);
  if (form == ResidualForm::direct)
    return (m.fourth - 2.0 * m.power * m.power) * m.inv_power + m.power;
  const double kurt = m.fourth - 2.0 * m.power * m.power - std::norm(m.square_mean);
  return kurt + m.power / m.inv_power;
}

std::optional<double> solve_lambda_max(const Constellation& family, double lambda_lo,
                                       double lambda_hi, double xtol) {
  const auto residual = [&](double l) { return lambda_max_residual(family, l); };
  const double f_lo = residual(lambda_lo);
  const double f_hi = residual(lambda_hi);
  const bool sign_change = (f_lo < 0.0 && f_hi > 0.0) || (f_lo > 0.0 && f_hi < 0.0);
  if (!sign_change) return std::nullopt;
  return bisect_root(residual, lambda_lo, lambda_hi, xtol);
}

double mi_awgn(const Constellation& constellation, double snr_linear, int quad_order) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("mi_awgn: SNR must be positive");
  if (quad_order < 2) throw std::invalid_argument("mi_awgn: quadrature order too small");

  const auto points = constellation.points();
  const auto priors = constellation.priors();
  const std::size_t order = points.size();
  if (std::isinf(snr_linear)) return entropy_bits(priors);

  const double power = constellation.moments().power;
  const double sigma2 = power / (2.0 * snr_linear);  // per real dimension
  const double scale = std::sqrt(2.0 * sigma2);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma2);

  const GaussHermite rule = gauss_hermite(quad_order);

  std::vector<double> log_priors(order);
  for (std::size_t k = 0; k < order; ++k)
    log_priors[k] = priors[k] > 0.0 ? std::log(priors[k]) : -std::numeric_limits<double>::infinity();

  // The stock alphabets and their energy-based priors are invariant under
  // 90-degree rotation, and so is the conditional integral; evaluating one
  // quadrant with weight 4 is an equally valid quadrature at a quarter of
  // the cost.
  std::vector<std::size_t> conditionals;
  double symmetry_weight = 1.0;
  if (constellation.family() == "square" || constellation.family() == "cross32") {
    for (std::size_t m = 0; m < order; ++m)
      if (points[m].real() > 0.0 && points[m].imag() > 0.0) conditionals.push_back(m);
    if (conditionals.size() * 4 == order) {
      symmetry_weight = 4.0;
    } else {
      conditionals.clear();
    }
  }
  if (conditionals.empty())
    for (std::size_t m = 0; m < order; ++m) conditionals.push_back(m);

  std::vector<double> g(order);
  double mi_nats = 0.0;
  for (const std::size_t m : conditionals) {
    if (priors[m] <= 0.0) continue;
    double acc = 0.0;
    for (int a = 0; a < quad_order; ++a) {
      for (int b = 0; b < quad_order; ++b) {
        const Complex y = points[m] + scale * Complex(rule.nodes[a], rule.nodes[b]);
        const double d_m = std::norm(y - points[m]);
        double g_max = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < order; ++k) {
          g[k] = (d_m - std::norm(y - points[k])) * inv_two_sigma2 + log_priors[k];
          g_max = std::max(g_max, g[k]);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < order; ++k) {
          const double e = g[k] - g_max;
          if (e > -40.0) sum += std::exp(e);  // below that the term is < 5e-18
        }
        acc += rule.weights[a] * rule.weights[b] * (g_max + std::log(sum));
      }
    }
    mi_nats -= symmetry_weight * priors[m] * acc / kPi;
  }
  return std::max(0.0, mi_nats / kLn2);
}

double solve_lambda_optimum(const Constellation& family, double snr_linear, double lambda_hi,
                            double xtol) {
  if (!(snr_linear > 0.0))
    throw std::invalid_argument("solve_lambda_optimum: SNR must be positive");

  const auto objective = [&](double lambda) {
    return mi_awgn(family.shaped(lambda), snr_linear);
  };

  // Coarse pre-scan; golden section only when the samples look unimodal.
  constexpr int kScan = 41;
  std::vector<double> xs(kScan), vs(kScan);
  for (int i = 0; i < kScan; ++i) {
    xs[i] = lambda_hi * i / (kScan - 1);
    vs[i] = objective(xs[i]);
  }
  int peak = 0;
  for (int i = 1; i < kScan; ++i)
    if (vs[i] > vs[peak]) peak = i;

  constexpr double kTol = 1e-10;  // quadrature noise floor
  bool unimodal = true;
  for (int i = 1; i <= peak; ++i)
    if (vs[i] < vs[i - 1] - kTol) unimodal = false;
  for (int i = peak + 1; i < kScan; ++i)
    if (vs[i] > vs[i - 1] + kTol) unimodal = false;

  const double lo = xs[std::max(0, peak - 1)];
  const double hi = xs[std::min(kScan - 1, peak + 1)];
  if (unimodal) return golden_section_max(objective, lo, hi, xtol);

  // Fallback: fine grid argmax around the coarse peak.
  double best_x = xs[peak], best_v = vs[peak];
  for (double x = lo; x <= hi + 0.5 * xtol; x += xtol) {
    const double v = objective(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

MiEstimate estimate_mi_from_samples(std::span<const Complex> transmitted,
                                    std::span<const Complex> recovered,
                                    const Constellation& constellation) {
  if (transmitted.empty()) throw std::invalid_argument("estimate_mi_from_samples: empty input");
  if (transmitted.size() != recovered.size())
    throw std::invalid_argument("estimate_mi_from_samples: length mismatch");

  const std::size_t count = transmitted.size();
  double fitted = 0.0;  // auxiliary-channel total variance 2*sigma_hat^2
  for (std::size_t i = 0; i < count; ++i) fitted += std::norm(recovered[i] - transmitted[i]);
  fitted = std::max(fitted / count, std::numeric_limits<double>::min());

  const auto points = constellation.points();
  const auto priors = constellation.priors();
  const std::size_t order = points.size();
  std::vector<double> log_priors(order);
  for (std::size_t k = 0; k < order; ++k)
    log_priors[k] = priors[k] > 0.0 ? std::log(priors[k]) : -std::numeric_limits<double>::infinity();

  const double inv_fitted = 1.0 / fitted;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> g(order);
  for (std::size_t i = 0; i < count; ++i) {
    const double g_ref = -std::norm(recovered[i] - transmitted[i]) * inv_fitted;
    double g_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < order; ++k) {
      g[k] = -std::norm(recovered[i] - points[k]) * inv_fitted + log_priors[k];
      g_max = std::max(g_max, g[k]);
    }
    double lse = 0.0;
    for (std::size_t k = 0; k < order; ++k) lse += std::exp(g[k] - g_max);
    const double info = (g_ref - (g_max + std::log(lse))) / kLn2;
    sum += info;
    sum_sq += info * info;
  }

  MiEstimate est;
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / std::max<double>(1, count - 1));
  est.bits = std::max(0.0, mean);
  est.std_error = std::sqrt(var / count);
  return est;
}

MseEstimate estimate_mse(std::span<const double> estimates, std::span<const double> true_thetas) {
  if (estimates.size() < 2) throw std::invalid_argument("estimate_mse: need at least 2 estimates");
  if (estimates.size() != true_thetas.size())
    throw std::invalid_argument("estimate_mse: length mismatch");

  const std::size_t count = estimates.size();
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double err = wrap_quarter(true_thetas[i] - estimates[i]);
    const double sq = err * err;
    sum += sq;
    sum_sq += sq * sq;
  }
  MseEstimate est;
  est.count = count;
  est.mse = sum / count;
  const double var = std::max(0.0, (sum_sq - count * est.mse * est.mse) / (count - 1));
  est.std_error = std::sqrt(var / count);
  return est;
}

MseEstimate estimate_mse(std::span<const double> estimates, double true_theta) {
  std::vector<double> truths(estimates.size(), true_theta);
  return estimate_mse(estimates, truths);
}

double entropy_bits(std::span<const double> priors) {
  double h = 0.0;
  for (double p : priors)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

void emit_analytic_mse_table(const Constellation& family, double snr_linear, double large_n,
                             std::span<const double> lambdas, std::ostream& os) {
  os << "lambda,mse_eq8,mse_eq12,residual_eq9\n";
  char line[128];
  for (double lambda : lambdas) {
    const Constellation shaped = family.shaped(lambda);
    std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g,%.12g\n", lambda,
                  mse_sps_n1(shaped, snr_linear), mse_sps_large_n(large_n, snr_linear),
                  lambda_max_residual(family, lambda));
    os << line;
  }
}

void emit_capacity_table(const Constellation& family, std::span<const double> snr_db,
                         std::ostream& os) {
  os << "snr_db,lambda_opt,mi_uniform,mi_shaped\n";
  char line[128];
  for (double db : snr_db) {
    const double snr = db_to_linear(db);
    const double opt = solve_lambda_optimum(family, snr);
    std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g,%.12g\n", db, opt,
                  mi_awgn(family.shaped(0.0), snr), mi_awgn(family.shaped(opt), snr));
    os << line;
  }
}

}  // namespace pslab
