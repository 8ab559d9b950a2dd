#pragma once

#include <vector>

namespace pslab {

/// Gauss-Hermite rule for the weight exp(-x^2): integral f(x) e^{-x^2} dx
/// ~= sum w_i f(x_i). Nodes ascend; weights are symmetric.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermite gauss_hermite(int order);

}  // namespace pslab
