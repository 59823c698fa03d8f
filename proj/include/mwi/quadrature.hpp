#pragma once

#include <cstddef>
#include <vector>

namespace mwi {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// Gauss-Hermite rule for the standard normal density: nodes x_i and
/// weights summing to 1 such that E[f(X)] ~ sum w_i f(x_i).
QuadratureRule gauss_hermite_normal(std::size_t n);

}  // namespace mwi
