#pragma once

#include <vector>

namespace gperot {

/// Tensor-product ready 1D Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `q` points (exact for polynomials of degree 2q-1).
GaussRule gauss_legendre(int q);

}  // namespace gperot
