#include "pslab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace pslab {

// Newton iteration on the recurrence for orthonormal Hermite polynomials,
// walking roots from the outside in and mirroring by symmetry.
GaussHermite gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");

  constexpr double kEps = 1e-14;
  constexpr int kMaxIter = 100;
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)

  GaussHermite rule;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);

  const int half = (order + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * order + 1.0) - 1.85575 * std::pow(2.0 * order + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(order), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[order - 1];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[order - 2];
    } else {
      z = 2.0 * z - rule.nodes[order - i + 1];
    }

    double pp = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * order) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps) break;
    }

    rule.nodes[order - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[order - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace pslab
