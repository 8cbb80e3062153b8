#pragma once

// Gaussian quadrature rules from the Golub-Welsch eigenvalue method.

#include <vector>

namespace brz {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Gauss-Jacobi for the weight (1-x)^a (1+x)^b on [-1, 1], a, b > -1.
QuadratureRule gauss_jacobi(int n, double a, double b);

/// Gauss-Jacobi for the weight (x - lo)^b on [lo, hi], b > -1. The weight
/// factor is folded into the returned weights.
QuadratureRule gauss_jacobi_left(int n, double b, double lo, double hi);

/// Generalized Gauss-Laguerre for the weight x^a e^{-x} on [0, inf), a > -1.
QuadratureRule gauss_laguerre(int n, double a);

/// Thread-safe memoized versions; the returned reference stays valid for the
/// lifetime of the program.
const QuadratureRule& cached_gauss_legendre(int n);
const QuadratureRule& cached_gauss_laguerre(int n, double a);
const QuadratureRule& cached_gauss_jacobi(int n, double a, double b);

}  // namespace brz
