#include "pslab/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace pslab {

std::vector<double> mb_priors(std::span<const Complex> points, double lambda) {
  if (points.empty()) throw std::invalid_argument("mb_priors: empty point set");
  if (lambda < 0.0) throw std::invalid_argument("mb_priors: lambda must be >= 0");

  // Shift exponents by the minimum energy so large lambdas cannot underflow
  // the whole sum; the shift cancels in the normalization.
  double e_min = std::norm(points[0]);
  for (const Complex& p : points) e_min = std::min(e_min, std::norm(p));

  std::vector<double> priors(points.size());
  double total = 0.0;
  for (std::size_t m = 0; m < points.size(); ++m) {
    priors[m] = std::exp(-lambda * (std::norm(points[m]) - e_min));
    total += priors[m];
  }
  for (double& p : priors) p /= total;
  return priors;
}

Constellation::Constellation(std::string family, std::vector<Complex> points,
                             std::vector<double> priors, double lambda)
    : family_(std::move(family)),
      points_(std::move(points)),
      priors_(std::move(priors)),
      lambda_(lambda) {
  cumulative_.resize(priors_.size());
  std::partial_sum(priors_.begin(), priors_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

Constellation Constellation::square_qam(int order) {
  if (order != 16 && order != 64 && order != 256)
    throw std::invalid_argument("square_qam: unsupported order " + std::to_string(order) +
                                " (expected 16, 64 or 256)");
  const int side = static_cast<int>(std::lround(std::sqrt(double(order))));
  std::vector<Complex> points;
  points.reserve(order);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      points.emplace_back(2 * r - side + 1, 2 * c - side + 1);
  std::vector<double> priors(order, 1.0 / order);
  return Constellation("square", std::move(points), std::move(priors), 0.0);
}

Constellation Constellation::cross_qam_32() {
  // 6x6 odd grid {+-1,+-3,+-5}^2 minus the four (+-5,+-5) corners. The energy
  // boundary is unambiguous: the retained maximum is 34, the pruned corner 50.
  std::vector<Complex> points;
  points.reserve(32);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const double re = 2 * r - 5, im = 2 * c - 5;
      if (std::abs(re) == 5.0 && std::abs(im) == 5.0) continue;
      points.emplace_back(re, im);
    }
  std::vector<double> priors(32, 1.0 / 32.0);
  return Constellation("cross32", std::move(points), std::move(priors), 0.0);
}

Constellation Constellation::custom(std::vector<Complex> points, std::vector<double> priors) {
  if (points.empty()) throw std::invalid_argument("custom: empty point set");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t k = i + 1; k < points.size(); ++k)
      if (points[i] == points[k]) throw std::invalid_argument("custom: duplicate points");

  if (priors.empty()) {
    priors.assign(points.size(), 1.0 / points.size());
  } else {
    if (priors.size() != points.size())
      throw std::invalid_argument("custom: priors/points size mismatch");
    double total = 0.0;
    for (double p : priors) {
      if (p < 0.0 || p > 1.0) throw std::invalid_argument("custom: prior outside [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("custom: priors must sum to 1");
  }
  return Constellation("custom", std::move(points), std::move(priors), 0.0);
}

Constellation Constellation::shaped(double lambda) const {
  return Constellation(family_, points_, mb_priors(points_, lambda), lambda);
}

Moments Constellation::moments() const {
  Moments m;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double e = std::norm(points_[i]);
    const double p = priors_[i];
    m.power += p * e;
    m.fourth += p * e * e;
    m.inv_power += p / e;
    m.square_mean += p * points_[i] * points_[i];
  }
  m.kurtosis = m.fourth - 2.0 * m.power * m.power - std::norm(m.square_mean);
  return m;
}

std::size_t Constellation::sample_index(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(it - cumulative_.begin(), points_.size() - 1);
}

std::vector<Complex> Constellation::sample(std::size_t count, Rng rng) const {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  std::vector<Complex> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(points_[sample_index(rng)]);
  return out;
}

}  // namespace pslab
