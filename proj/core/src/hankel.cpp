#include "brz/hankel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "brz/special_functions.hpp"
#include "brz/tensor.hpp"
#include "parallel.hpp"

namespace brz {

double phi(const MultiIndexAlpha& alpha, const double* x, const double* y) {
  double v = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) {
    v *= scaled_j(BesselOrder(alpha[j] - 0.5), x[j] * y[j]);
  }
  return v;
}

double phi(const MultiIndexAlpha& alpha, const std::vector<double>& x,
           const std::vector<double>& y) {
  if (static_cast<int>(x.size()) != alpha.dim() || static_cast<int>(y.size()) != alpha.dim()) {
    throw std::invalid_argument("phi: point dimension does not match alpha");
  }
  return phi(alpha, x.data(), y.data());
}

namespace {

// K[a, b] = scaled_j(mu, rows[a] * cols[b]) * col_weights[b]
Eigen::MatrixXd kernel_matrix(double mu, const std::vector<double>& rows,
                              const std::vector<double>& cols,
                              const std::vector<double>& col_weights) {
  const BesselOrder order(mu);
  Eigen::MatrixXd K(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          scaled_j(order, rows[a] * cols[b]) * col_weights[b];
    }
  }
  return K;
}

}  // namespace

HankelPlan::HankelPlan(GridPtr source, GridPtr target)
    : source_(std::move(source)), target_(std::move(target)), nyquist_(0.0) {
  if (!source_ || !target_) throw std::invalid_argument("HankelPlan needs two grids");
  if (!(source_->alpha() == target_->alpha())) {
    throw std::invalid_argument("HankelPlan grids carry different alpha");
  }
  const int d = source_->dim();
  for (int j = 0; j < d; ++j) {
    const auto& xs = source_->axis(j);
    const auto& ys = target_->axis(j);
    const double r1 = target_->max_gap(j) * xs.nodes.back() / (2.0 * std::numbers::pi);
    const double r2 = source_->max_gap(j) * ys.nodes.back() / (2.0 * std::numbers::pi);
    nyquist_ = std::max({nyquist_, r1, r2});
    const double mu = alpha()[j] - 0.5;
    forward_.push_back(kernel_matrix(mu, ys.nodes, xs.nodes, xs.weights));
    backward_.push_back(kernel_matrix(mu, xs.nodes, ys.nodes, ys.weights));
  }
  if (nyquist_ > 0.25) {
    throw std::invalid_argument("Hankel plan under-resolved: gap * frequency / (2 pi) = " +
                                std::to_string(nyquist_) + " > 1/4");
  }
}

PlanPtr make_plan(GridPtr source, GridPtr target) {
  return std::make_shared<const HankelPlan>(std::move(source), std::move(target));
}

PlanPtr HankelPlan::shifted(int i) const {
  if (i < 0 || i >= source_->dim()) throw std::out_of_range("shifted: axis out of range");
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = shifted_.find(i);
  if (it != shifted_.end()) return it->second;
  auto src = std::make_shared<const WeightedGrid>(source_->shifted(i));
  auto tgt = std::make_shared<const WeightedGrid>(target_->shifted(i));
  PlanPtr plan = make_plan(std::move(src), std::move(tgt));
  shifted_.emplace(i, plan);
  return plan;
}

std::vector<double> HankelPlan::synthesize(
    const std::vector<double>& coeffs, const std::vector<std::vector<double>>& axis_points) const {
  const int d = source_->dim();
  if (static_cast<int>(axis_points.size()) != d) {
    throw std::invalid_argument("synthesize: one point list per axis required");
  }
  if (coeffs.size() != target_->size()) throw std::invalid_argument("synthesize: size mismatch");
  std::vector<Eigen::MatrixXd> mats;
  for (int j = 0; j < d; ++j) {
    const auto& ys = target_->axis(j);
    mats.push_back(kernel_matrix(alpha()[j] - 0.5, axis_points[static_cast<std::size_t>(j)],
                                 ys.nodes, ys.weights));
  }
  Shape shape = target_->shape();
  return apply_per_axis(coeffs, shape, mats);
}

std::vector<double> HankelPlan::synthesize_points(const std::vector<double>& coeffs,
                                                  const std::vector<double>& points) const {
  const auto d = static_cast<std::size_t>(source_->dim());
  if (points.size() % d != 0) throw std::invalid_argument("synthesize_points: ragged point list");
  if (coeffs.size() != target_->size()) throw std::invalid_argument("synthesize_points: size mismatch");
  const std::size_t m = points.size() / d;
  const Shape& shape = target_->shape();
  std::vector<double> out(m);
  detail::parallel_for(m, [&](std::size_t q) {
    // contract the last axis first: c[..., b] -> sum_b c[..., b] k_{d-1}[b]
    std::vector<double> cur = coeffs;
    std::size_t outer = cur.size();
    for (std::size_t jj = d; jj-- > 0;) {
      const auto& ys = target_->axis(static_cast<int>(jj));
      const BesselOrder order(alpha()[static_cast<int>(jj)] - 0.5);
      const double x = points[q * d + jj];
      const std::size_t n = shape[jj];
      std::vector<double> k(n);
      for (std::size_t b = 0; b < n; ++b) k[b] = scaled_j(order, x * ys.nodes[b]) * ys.weights[b];
      outer /= n;
      std::vector<double> next(outer, 0.0);
      for (std::size_t o = 0; o < outer; ++o) {
        double s = 0.0;
        for (std::size_t b = 0; b < n; ++b) s += cur[o * n + b] * k[b];
        next[o] = s;
      }
      cur.swap(next);
    }
    out[q] = cur[0];
  });
  return out;
}

GridFunction hankel_apply(const HankelPlan& plan, const GridFunction& f) {
  const WeightedGrid& g = f.grid();
  if (g == *plan.source()) {
    Shape shape = g.shape();
    return GridFunction(plan.target(), apply_per_axis(f.values(), shape, plan.forward()));
  }
  if (g == *plan.target()) {
    Shape shape = g.shape();
    return GridFunction(plan.source(), apply_per_axis(f.values(), shape, plan.backward()));
  }
  throw std::invalid_argument("hankel_apply: function lives on neither grid of the plan");
}

double spectral_mass_below(const GridFunction& F, double r_min) {
  const auto r = F.grid().radii();
  const auto& w = F.grid().weights();
  double low = 0.0, total = 0.0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    const double e = F[k] * F[k] * w[k];
    total += e;
    if (r[k] < r_min) low += e;
  }
  return total > 0.0 ? low / total : 0.0;
}

GridFunction multiplier_apply_spectral(const HankelPlan& plan, const GridFunction& F,
                                       const std::function<double(double)>& m,
                                       const MultiplierOptions& options) {
  require_same_grid(F.grid(), *plan.target(), "multiplier_apply");
  if (options.singular_at_zero && !(options.r_min > 0.0)) {
    throw std::domain_error("singular multiplier requires a spectral cutoff r_min > 0");
  }
  const auto r = F.grid().radii();
  const bool cut = options.r_min > 0.0;
  if (cut && options.singular_at_zero) {
    const double low = spectral_mass_below(F, options.r_min);
    if (low >= options.mass_tolerance) {
      throw std::domain_error("input violates the declared spectral cutoff: mass fraction " +
                              std::to_string(low) + " below r_min");
    }
  }
  std::vector<double> v(F.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = (cut && r[k] < options.r_min) ? 0.0 : m(r[k]) * F[k];
  }
  return hankel_apply(plan, GridFunction(plan.target(), std::move(v)));
}

GridFunction multiplier_apply(const HankelPlan& plan, const GridFunction& f,
                              const std::function<double(double)>& m,
                              const MultiplierOptions& options) {
  require_same_grid(f.grid(), *plan.source(), "multiplier_apply");
  return multiplier_apply_spectral(plan, hankel_apply(plan, f), m, options);
}

}  // namespace brz
