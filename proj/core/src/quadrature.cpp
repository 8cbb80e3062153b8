#include "brz/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace brz {

namespace {

void check_count(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs n >= 1, got " + std::to_string(n));
}

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix built from the
// monic recurrence (diag, offdiag^2); weights are mu0 * (first eigenvector
// component)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& beta,
                            double mu0) {
  const Eigen::Index n = diag.size();
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = diag[0];
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::VectorXd sub = beta.array().sqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Golub-Welsch eigensolver did not converge");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    rule.nodes[k] = solver.eigenvalues()[k];
    const double v = solver.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v * v;
  }
  return rule;
}

// Newton polish of Legendre nodes; weights from the derivative formula.
void polish_legendre(QuadratureRule& rule) {
  const int n = static_cast<int>(rule.size());
  for (int k = 0; k < n; ++k) {
    double x = rule.nodes[k];
    double dp = 1.0;
    for (int it = 0; it < 6; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  check_count(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd beta(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) beta[k - 1] = k * k / (4.0 * k * k - 1.0);
  QuadratureRule rule = golub_welsch(diag, beta, 2.0);
  if (n > 1) polish_legendre(rule);
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.nodes[k] = mid + half * rule.nodes[k];
    rule.weights[k] *= half;
  }
  return rule;
}

QuadratureRule gauss_jacobi(int n, double a, double b) {
  check_count(n);
  if (!(a > -1.0) || !(b > -1.0)) {
    throw std::domain_error("Gauss-Jacobi exponents must exceed -1");
  }
  Eigen::VectorXd diag(n);
  Eigen::VectorXd beta(std::max(n - 1, 0));
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0) {
      diag[k] = (b - a) / (ab + 2.0);
    } else {
      diag[k] = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 1) {
      beta[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta[k - 1] = 4.0 * k * (k + a) * (k + b) * (k + ab) /
                    (s * s * (s + 1.0) * (s - 1.0));
    }
  }
  const double mu0 = std::exp((ab + 1.0) * std::numbers::ln2 + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  return golub_welsch(diag, beta, mu0);
}

QuadratureRule gauss_jacobi_left(int n, double b, double lo, double hi) {
  QuadratureRule rule = gauss_jacobi(n, 0.0, b);
  const double half = 0.5 * (hi - lo);
  const double scale = std::pow(half, b + 1.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.nodes[k] = lo + half * (1.0 + rule.nodes[k]);
    rule.weights[k] *= scale;
  }
  return rule;
}

QuadratureRule gauss_laguerre(int n, double a) {
  check_count(n);
  if (!(a > -1.0)) throw std::domain_error("Gauss-Laguerre exponent must exceed -1");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd beta(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + a + 1.0;
  for (int k = 1; k < n; ++k) beta[k - 1] = k * (k + a);
  return golub_welsch(diag, beta, std::tgamma(a + 1.0));
}

namespace {

template <class Key, class Make>
const QuadratureRule& memo(std::map<Key, QuadratureRule>& table, std::mutex& m,
                           const Key& key, Make make) {
  std::lock_guard<std::mutex> lock(m);
  auto it = table.find(key);
  if (it == table.end()) it = table.emplace(key, make()).first;
  return it->second;
}

}  // namespace

const QuadratureRule& cached_gauss_legendre(int n) {
  static std::map<int, QuadratureRule> table;
  static std::mutex m;
  return memo(table, m, n, [n] { return gauss_legendre(n); });
}

const QuadratureRule& cached_gauss_laguerre(int n, double a) {
  static std::map<std::pair<int, double>, QuadratureRule> table;
  static std::mutex m;
  return memo(table, m, std::pair{n, a}, [n, a] { return gauss_laguerre(n, a); });
}

const QuadratureRule& cached_gauss_jacobi(int n, double a, double b) {
  static std::map<std::tuple<int, double, double>, QuadratureRule> table;
  static std::mutex m;
  return memo(table, m, std::tuple{n, a, b}, [n, a, b] { return gauss_jacobi(n, a, b); });
}

}  // namespace brz
