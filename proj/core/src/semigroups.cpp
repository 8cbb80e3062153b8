#include "brz/semigroups.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "brz/quadrature.hpp"
#include "brz/special_functions.hpp"
#include "brz/tensor.hpp"
#include "parallel.hpp"

namespace brz {

std::string to_string(Provenance p) {
  return p == Provenance::multiplier ? "multiplier" : "kernel-quadrature";
}

namespace {

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("semigroup time must be positive and finite");
  }
}

void check_axis(const MultiIndexAlpha& a, int i) {
  if (i < 0 || i >= a.dim()) throw std::out_of_range("axis index out of range");
}

// e^{-z} z^{-mu} I_mu(z)
double itilde(double mu, double z) {
  return scaled_i(BesselOrder(mu), z, Scaling::exponential);
}

// one axis of the heat kernel
double heat_factor(double a, double t, double x, double y) {
  const double u = x - y;
  return std::exp(-u * u / (4.0 * t)) * std::pow(2.0 * t, -a - 0.5) * itilde(a - 0.5, x * y / (2.0 * t));
}

}  // namespace

double heat_kernel(const MultiIndexAlpha& alpha, double t, const double* x, const double* y) {
  check_time(t);
  double v = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) v *= heat_factor(alpha[j], t, x[j], y[j]);
  return v;
}

double heat_kernel(const MultiIndexAlpha& alpha, double t, const std::vector<double>& x,
                   const std::vector<double>& y) {
  if (static_cast<int>(x.size()) != alpha.dim() || static_cast<int>(y.size()) != alpha.dim()) {
    throw std::invalid_argument("heat_kernel: point dimension does not match alpha");
  }
  return heat_kernel(alpha, t, x.data(), y.data());
}

double heat_kernel_dx(const MultiIndexAlpha& alpha, double t, const double* x, const double* y,
                      int i) {
  check_time(t);
  check_axis(alpha, i);
  double v = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) {
    if (j != i) {
      v *= heat_factor(alpha[j], t, x[j], y[j]);
      continue;
    }
    const double u = x[j] - y[j];
    const double z = x[j] * y[j] / (2.0 * t);
    const double mu = alpha[j] - 0.5;
    const double g = std::exp(-u * u / (4.0 * t)) * std::pow(2.0 * t, -alpha[j] - 0.5);
    v *= g * (-x[j] * itilde(mu, z) + y[j] * z * itilde(mu + 1.0, z)) / (2.0 * t);
  }
  return v;
}

// ---- Poisson kernel ---------------------------------------------------------

namespace {

struct Node {
  double s;
  double w;
};

constexpr double kTail = 40.0;

// Rule for int_0^inf s^a e^{-s} h(s) ds where h varies on the scale 1/kmax.
std::vector<Node> subordination_rule(double a, double kmax, int n) {
  std::vector<Node> rule;
  if (kmax == 0.0) {
    const auto& r = cached_gauss_laguerre(n, a);
    for (std::size_t m = 0; m < r.size(); ++m) rule.push_back({r.nodes[m], r.weights[m]});
    return rule;
  }
  // [0, b0] with the s^a weight built in
  const double b0 = std::min(0.25 / kmax, 0.5);
  {
    const auto& r = cached_gauss_jacobi(n, 0.0, a);
    const double half = 0.5 * b0;
    const double scale = std::pow(half, a + 1.0);
    for (std::size_t m = 0; m < r.size(); ++m) {
      const double s = half * (1.0 + r.nodes[m]);
      rule.push_back({s, scale * r.weights[m] * std::exp(-s)});
    }
  }
  // doubling panels up to kTail; h is algebraic out there, which plain
  // Laguerre resolves poorly
  const auto& gl = cached_gauss_legendre(n);
  for (double lo = b0; lo < kTail;) {
    const double hi = std::min(2.0 * lo, kTail);
    const double half = 0.5 * (hi - lo);
    for (std::size_t m = 0; m < gl.size(); ++m) {
      const double s = lo + half * (1.0 + gl.nodes[m]);
      rule.push_back({s, half * gl.weights[m] * std::pow(s, a) * std::exp(-s)});
    }
    lo = hi;
  }
  // tail e^{-T} int_0^inf e^{-sigma} (T + sigma)^a h(T + sigma)
  const auto& lag = cached_gauss_laguerre(n, 0.0);
  for (std::size_t m = 0; m < lag.size(); ++m) {
    const double s = kTail + lag.nodes[m];
    rule.push_back({s, lag.weights[m] * std::exp(-kTail) * std::pow(s, a)});
  }
  return rule;
}

template <class H>
double subordinate(double a, double kmax, int n, H h) {
  if (n < 8) throw std::invalid_argument("subordination quadrature needs at least 8 nodes");
  auto run = [&](int m, double& scale) {
    double sum = 0.0;
    scale = 0.0;
    for (const Node& node : subordination_rule(a, kmax, m)) {
      const double v = node.w * h(node.s);
      sum += v;
      scale += std::abs(v);
    }
    return sum;
  };
  double scale = 0.0, coarse_scale = 0.0;
  const double fine = run(n, scale);
  const double coarse = run(n / 2, coarse_scale);
  if (std::abs(fine - coarse) > 1e-9 * scale) {
    throw std::runtime_error("subordination quadrature under-resolved: n = " + std::to_string(n) +
                             " and n/2 differ by a relative " + [&] { char b[32]; std::snprintf(b, sizeof b, "%.3g", std::abs(fine - coarse) / scale); return std::string(b); }());
  }
  return fine;
}

struct PoissonGeometry {
  double L;
  double a;
  double prefactor;
  std::vector<double> kappa;
  double kmax;
};

PoissonGeometry poisson_geometry(const MultiIndexAlpha& alpha, double t, const double* x,
                                 const double* y) {
  const int d = alpha.dim();
  PoissonGeometry g;
  double dist2 = 0.0;
  for (int j = 0; j < d; ++j) dist2 += (x[j] - y[j]) * (x[j] - y[j]);
  g.L = t * t + dist2;
  const double A = alpha.norm1() + 0.5 * d;
  g.a = A - 0.5;
  g.prefactor = t / std::sqrt(std::numbers::pi * g.L) * std::pow(2.0 / g.L, A);
  g.kmax = 0.0;
  for (int j = 0; j < d; ++j) {
    g.kappa.push_back(2.0 * x[j] * y[j] / g.L);
    g.kmax = std::max(g.kmax, g.kappa.back());
  }
  return g;
}

}  // namespace

double poisson_kernel(const MultiIndexAlpha& alpha, double t, const double* x, const double* y,
                      int quadrature_n) {
  check_time(t);
  const auto g = poisson_geometry(alpha, t, x, y);
  const int d = alpha.dim();
  const double integral = subordinate(g.a, g.kmax, quadrature_n, [&](double s) {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= itilde(alpha[j] - 0.5, g.kappa[static_cast<std::size_t>(j)] * s);
    return v;
  });
  return g.prefactor * integral;
}

double poisson_kernel(const MultiIndexAlpha& alpha, double t, const std::vector<double>& x,
                      const std::vector<double>& y, int quadrature_n) {
  if (static_cast<int>(x.size()) != alpha.dim() || static_cast<int>(y.size()) != alpha.dim()) {
    throw std::invalid_argument("poisson_kernel: point dimension does not match alpha");
  }
  return poisson_kernel(alpha, t, x.data(), y.data(), quadrature_n);
}

double poisson_kernel_dx(const MultiIndexAlpha& alpha, double t, const double* x,
                         const double* y, int i, int quadrature_n) {
  check_time(t);
  check_axis(alpha, i);
  const auto g = poisson_geometry(alpha, t, x, y);
  const int d = alpha.dim();
  const double integral = subordinate(g.a, g.kmax, quadrature_n, [&](double s) {
    double v = 1.0;
    for (int j = 0; j < d; ++j) {
      const double k = g.kappa[static_cast<std::size_t>(j)];
      const double mu = alpha[j] - 0.5;
      if (j != i) {
        v *= itilde(mu, k * s);
      } else {
        v *= 2.0 * s / g.L * (-x[j] * itilde(mu, k * s) + y[j] * k * s * itilde(mu + 1.0, k * s));
      }
    }
    return v;
  });
  return g.prefactor * integral;
}

// ---- semigroup actions ------------------------------------------------------

namespace {

std::vector<double> times_axis(std::vector<double> v, const std::vector<double>& c) {
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= c[k];
  return v;
}

GridFunction exp_multiplier(const HankelPlan& plan, const GridFunction& F, double t, bool heat,
                            bool derivative) {
  const auto r = plan.target()->radii();
  std::vector<double> v(F.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double m = heat ? std::exp(-r[k] * r[k] * t) : std::exp(-r[k] * t);
    v[k] = (derivative ? -r[k] * m : m) * F[k];
  }
  return hankel_apply(plan, GridFunction(plan.target(), std::move(v)));
}

// non-owning handle for the free-function wrappers
PlanPtr borrow(const HankelPlan& plan) {
  return std::shared_ptr<const HankelPlan>(&plan, [](const HankelPlan*) {});
}

GridFunction rewrap(const GridPtr& grid, const GridFunction& f) {
  return GridFunction(grid, f.values());
}

}  // namespace

SemigroupOutput heat_apply(const HankelPlan& plan, const GridFunction& f, double t) {
  check_time(t);
  require_same_grid(f.grid(), *plan.source(), "heat_apply");
  return {t, exp_multiplier(plan, hankel_apply(plan, f), t, true, false), Provenance::multiplier};
}

SemigroupOutput heat_apply_kernel(const GridFunction& f, double t) {
  check_time(t);
  const WeightedGrid& g = f.grid();
  std::vector<Eigen::MatrixXd> mats;
  for (int j = 0; j < g.dim(); ++j) {
    const auto& ax = g.axis(j);
    const auto n = static_cast<Eigen::Index>(ax.nodes.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        M(a, b) = heat_factor(g.alpha()[j], t, ax.nodes[static_cast<std::size_t>(a)],
                              ax.nodes[static_cast<std::size_t>(b)]) *
                  ax.weights[static_cast<std::size_t>(b)];
      }
    }
    mats.push_back(std::move(M));
  }
  Shape shape = g.shape();
  return {t, GridFunction(f.grid_ptr(), apply_per_axis(f.values(), shape, mats)),
          Provenance::kernel_quadrature};
}

SemigroupOutput poisson_apply(const HankelPlan& plan, const GridFunction& f, double t) {
  check_time(t);
  require_same_grid(f.grid(), *plan.source(), "poisson_apply");
  return {t, exp_multiplier(plan, hankel_apply(plan, f), t, false, false), Provenance::multiplier};
}

SemigroupOutput poisson_apply_kernel(const GridFunction& f, double t, int quadrature_n) {
  check_time(t);
  const WeightedGrid& g = f.grid();
  const auto& w = g.weights();
  const std::size_t n = g.size();
  std::vector<double> out(n);
  detail::parallel_for(n, [&](std::size_t a) {
    const auto x = g.point(a);
    std::vector<double> y(x.size());
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (f[b] == 0.0) continue;
      g.point(b, y.data());
      s += poisson_kernel(g.alpha(), t, x.data(), y.data(), quadrature_n) * f[b] * w[b];
    }
    out[a] = s;
  });
  return {t, GridFunction(f.grid_ptr(), std::move(out)), Provenance::kernel_quadrature};
}

SemigroupOutput conjugate_poisson_apply(const HankelPlan& plan, const GridFunction& g, int i,
                                        double t) {
  check_time(t);
  return {t, ConjugateExtension(borrow(plan), g, i).value(t), Provenance::multiplier};
}

SemigroupOutput conjugate_heat_apply(const HankelPlan& plan, const GridFunction& g, int i,
                                     double t) {
  check_time(t);
  check_axis(plan.alpha(), i);
  require_same_grid(g.grid(), *plan.source(), "conjugate_heat_apply");
  const PlanPtr sh = plan.shifted(i);
  const auto xi = plan.source()->coordinate(i);
  std::vector<double> q(g.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = g[k] / xi[k];
  const GridFunction G = hankel_apply(*sh, GridFunction(sh->source(), std::move(q)));
  const GridFunction u = exp_multiplier(*sh, G, t, true, false);
  return {t, GridFunction(plan.source(), times_axis(u.values(), xi)), Provenance::multiplier};
}

GridFunction d_t_poisson(const HankelPlan& plan, const GridFunction& f, double t) {
  return PoissonExtension(borrow(plan), f).d_t(t);
}

GridFunction d_xi_poisson(const HankelPlan& plan, const GridFunction& f, double t, int i) {
  return PoissonExtension(borrow(plan), f).d_x(t, i);
}

GridFunction d_t_conjugate(const HankelPlan& plan, const GridFunction& g, int i, double t) {
  return ConjugateExtension(borrow(plan), g, i).d_t(t);
}

GridFunction d_xj_conjugate(const HankelPlan& plan, const GridFunction& g, int i, int j,
                            double t) {
  return ConjugateExtension(borrow(plan), g, i).d_x(t, j);
}

// ---- extensions -------------------------------------------------------------

PoissonExtension::PoissonExtension(PlanPtr plan, const GridFunction& f)
    : plan_(std::move(plan)), spectrum_(GridFunction::zeros(plan_->target())) {
  require_same_grid(f.grid(), *plan_->source(), "PoissonExtension");
  spectrum_ = hankel_apply(*plan_, f);
}

GridFunction PoissonExtension::value(double t) const {
  check_time(t);
  return exp_multiplier(*plan_, spectrum_, t, false, false);
}

GridFunction PoissonExtension::d_t(double t) const {
  check_time(t);
  return exp_multiplier(*plan_, spectrum_, t, false, true);
}

GridFunction PoissonExtension::d_x(double t, int j) const {
  check_time(t);
  check_axis(plan_->alpha(), j);
  const PlanPtr sh = plan_->shifted(j);
  const GridFunction u = exp_multiplier(*sh, rewrap(sh->target(), spectrum_), t, false, false);
  auto v = times_axis(u.values(), plan_->source()->coordinate(j));
  for (double& e : v) e = -e;
  return GridFunction(plan_->source(), std::move(v));
}

GridFunction PoissonExtension::star(double t) const {
  const GridFunction dt = d_t(t);
  std::vector<double> s(dt.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = dt[k] * dt[k];
  for (int j = 0; j < plan_->alpha().dim(); ++j) {
    const GridFunction dx = d_x(t, j);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += dx[k] * dx[k];
  }
  for (double& e : s) e = std::sqrt(e);
  return GridFunction(plan_->source(), std::move(s));
}

std::vector<double> PoissonExtension::value_at(
    double t, const std::vector<std::vector<double>>& axis_points) const {
  check_time(t);
  const auto r = plan_->target()->radii();
  std::vector<double> c(spectrum_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::exp(-r[k] * t) * spectrum_[k];
  return plan_->synthesize(c, axis_points);
}

namespace {

// coordinate j of every point of the tensor product, row-major
std::vector<double> axis_coordinate(const std::vector<std::vector<double>>& axis_points, int j) {
  std::size_t total = 1, inner = 1;
  for (std::size_t k = 0; k < axis_points.size(); ++k) {
    total *= axis_points[k].size();
    if (k > static_cast<std::size_t>(j)) inner *= axis_points[k].size();
  }
  const auto& pj = axis_points[static_cast<std::size_t>(j)];
  std::vector<double> c(total);
  for (std::size_t k = 0; k < total; ++k) c[k] = pj[(k / inner) % pj.size()];
  return c;
}

std::vector<double> damped(const HankelPlan& plan, const GridFunction& spectrum, double t, bool times_r) {
  const auto r = plan.target()->radii();
  std::vector<double> c(spectrum.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = std::exp(-r[k] * t) * spectrum[k] * (times_r ? -r[k] : 1.0);
  }
  return c;
}

}  // namespace

ExtensionJet PoissonExtension::jet_at(double t,
                                      const std::vector<std::vector<double>>& axis_points) const {
  check_time(t);
  const int d = plan_->alpha().dim();
  if (static_cast<int>(axis_points.size()) != d) throw std::invalid_argument("jet_at: wrong dimension");
  ExtensionJet J;
  const auto c = damped(*plan_, spectrum_, t, false);
  J.value = plan_->synthesize(c, axis_points);
  J.d_t = plan_->synthesize(damped(*plan_, spectrum_, t, true), axis_points);
  for (int j = 0; j < d; ++j) {
    // d/dx_j P_t f = -x_j h_{alpha+e_j}(e^{-|y|t} h_alpha f)
    auto v = plan_->shifted(j)->synthesize(c, axis_points);
    const auto xj = axis_coordinate(axis_points, j);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= -xj[k];
    J.d_x.push_back(std::move(v));
  }
  return J;
}

ConjugateExtension::ConjugateExtension(PlanPtr plan, const GridFunction& g, int i)
    : plan_(std::move(plan)), i_(i), spectrum_(GridFunction::zeros(plan_->target())) {
  if (!plan_) throw std::invalid_argument("ConjugateExtension: missing plan");
  check_axis(plan_->alpha(), i);
  require_same_grid(g.grid(), *plan_->source(), "ConjugateExtension");
  shifted_ = plan_->shifted(i);
  const auto xi = plan_->source()->coordinate(i);
  std::vector<double> q(g.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = g[k] / xi[k];
  spectrum_ = hankel_apply(*shifted_, GridFunction(shifted_->source(), std::move(q)));
}

GridFunction ConjugateExtension::value(double t) const {
  check_time(t);
  const GridFunction u = exp_multiplier(*shifted_, spectrum_, t, false, false);
  return GridFunction(plan_->source(), times_axis(u.values(), plan_->source()->coordinate(i_)));
}

GridFunction ConjugateExtension::d_t(double t) const {
  check_time(t);
  const GridFunction u = exp_multiplier(*shifted_, spectrum_, t, false, true);
  return GridFunction(plan_->source(), times_axis(u.values(), plan_->source()->coordinate(i_)));
}

GridFunction ConjugateExtension::d_x(double t, int j) const {
  check_time(t);
  check_axis(plan_->alpha(), j);
  // d/dx_j (x_i u) = delta_ij u + x_i d/dx_j u, d/dx_j u = -x_j h_{alpha+e_i+e_j}(e^{-|y|t} G)
  const PlanPtr sh2 = shifted_->shifted(j);
  const GridFunction w = exp_multiplier(*sh2, rewrap(sh2->target(), spectrum_), t, false, false);
  const auto xi = plan_->source()->coordinate(i_);
  const auto xj = plan_->source()->coordinate(j);
  std::vector<double> v(w.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = -xi[k] * xj[k] * w[k];
  if (j == i_) {
    const GridFunction u = exp_multiplier(*shifted_, spectrum_, t, false, false);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += u[k];
  }
  return GridFunction(plan_->source(), std::move(v));
}

GridFunction ConjugateExtension::star(double t) const {
  const GridFunction dt = d_t(t);
  std::vector<double> s(dt.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = dt[k] * dt[k];
  for (int j = 0; j < plan_->alpha().dim(); ++j) {
    const GridFunction dx = d_x(t, j);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += dx[k] * dx[k];
  }
  for (double& e : s) e = std::sqrt(e);
  return GridFunction(plan_->source(), std::move(s));
}

std::vector<double> ConjugateExtension::value_at(
    double t, const std::vector<std::vector<double>>& axis_points) const {
  check_time(t);
  const auto r = shifted_->target()->radii();
  std::vector<double> c(spectrum_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::exp(-r[k] * t) * spectrum_[k];
  auto v = shifted_->synthesize(c, axis_points);
  // multiply by x_i of each output point (row-major over the axis lists)
  std::size_t inner = 1;
  for (std::size_t k = static_cast<std::size_t>(i_) + 1; k < axis_points.size(); ++k) {
    inner *= axis_points[k].size();
  }
  const auto& pi = axis_points[static_cast<std::size_t>(i_)];
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= pi[(k / inner) % pi.size()];
  return v;
}

ExtensionJet ConjugateExtension::jet_at(double t,
                                        const std::vector<std::vector<double>>& axis_points) const {
  check_time(t);
  const int d = plan_->alpha().dim();
  if (static_cast<int>(axis_points.size()) != d) throw std::invalid_argument("jet_at: wrong dimension");
  const auto xi = axis_coordinate(axis_points, i_);
  ExtensionJet J;
  const auto c = damped(*shifted_, spectrum_, t, false);
  const auto u = shifted_->synthesize(c, axis_points);
  J.value = u;
  J.d_t = shifted_->synthesize(damped(*shifted_, spectrum_, t, true), axis_points);
  for (std::size_t k = 0; k < u.size(); ++k) {
    J.value[k] *= xi[k];
    J.d_t[k] *= xi[k];
  }
  for (int j = 0; j < d; ++j) {
    auto v = shifted_->shifted(j)->synthesize(c, axis_points);
    const auto xj = axis_coordinate(axis_points, j);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= -xi[k] * xj[k];
    if (j == i_) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += u[k];
    }
    J.d_x.push_back(std::move(v));
  }
  return J;
}

GridFunction star_seminorm_field(const HankelPlan& plan, const GridFunction& f, double t) {
  return PoissonExtension(borrow(plan), f).star(t);
}

double star_seminorm(const HankelPlan& plan, const GridFunction& f, double t, std::size_t node) {
  if (node >= plan.source()->size()) throw std::out_of_range("star_seminorm: node out of range");
  return star_seminorm_field(plan, f, t)[node];
}

GridFunction conjugate_star_seminorm_field(const HankelPlan& plan,
                                           const std::vector<GridFunction>& g, double t) {
  if (static_cast<int>(g.size()) != plan.alpha().dim()) {
    throw std::invalid_argument("conjugate star seminorm needs one function per axis");
  }
  std::vector<double> s(plan.source()->size(), 0.0);
  for (int i = 0; i < plan.alpha().dim(); ++i) {
    const GridFunction st = ConjugateExtension(borrow(plan), g[static_cast<std::size_t>(i)], i).star(t);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += st[k] * st[k];
  }
  for (double& e : s) e = std::sqrt(e);
  return GridFunction(plan.source(), std::move(s));
}

// ---- finite differences -----------------------------------------------------

double BesselOperatorSpec::commutator(int j, double xj) const {
  if (!(xj > 0.0)) throw std::domain_error("commutator needs x_j > 0");
  return 2.0 * alpha[j] / (xj * xj);
}

std::size_t SpaceTimeField::size() const {
  std::size_t n = times.size();
  for (const auto& a : axes) n *= a.size();
  return n;
}

double SpaceTimeField::at(const std::vector<std::size_t>& idx, std::size_t it) const {
  std::size_t flat = 0;
  for (std::size_t j = 0; j < axes.size(); ++j) flat = flat * axes[j].size() + idx[j];
  return values[flat * times.size() + it];
}

namespace {

template <class Ext>
SpaceTimeField sample_field(const Ext& ext, std::vector<std::vector<double>> axes,
                            std::vector<double> times) {
  SpaceTimeField F{std::move(axes), std::move(times), {}};
  const std::size_t nt = F.times.size();
  F.values.assign(F.size(), 0.0);
  for (std::size_t it = 0; it < nt; ++it) {
    const auto v = ext.value_at(F.times[it], F.axes);
    for (std::size_t k = 0; k < v.size(); ++k) F.values[k * nt + it] = v[k];
  }
  return F;
}

double uniform_step(const std::vector<double>& v, const char* what) {
  if (v.size() < 3) throw std::invalid_argument(std::string(what) + ": fewer than 3 samples");
  const double h = v[1] - v[0];
  if (!(h > 0.0)) throw std::invalid_argument(std::string(what) + ": samples must increase");
  for (std::size_t k = 2; k < v.size(); ++k) {
    if (std::abs(v[k] - v[k - 1] - h) > 1e-9 * h) {
      throw std::invalid_argument(std::string(what) + ": spacing is not uniform");
    }
  }
  return h;
}

}  // namespace

SpaceTimeField sample_space_time(const PoissonExtension& ext, std::vector<std::vector<double>> axes,
                                 std::vector<double> times) {
  return sample_field(ext, std::move(axes), std::move(times));
}

SpaceTimeField sample_space_time(const ConjugateExtension& ext,
                                 std::vector<std::vector<double>> axes, std::vector<double> times) {
  return sample_field(ext, std::move(axes), std::move(times));
}

SpaceTimeField apply_L_alpha_fd(const BesselOperatorSpec& spec, const SpaceTimeField& F) {
  const int d = spec.alpha.dim();
  if (static_cast<int>(F.axes.size()) != d) {
    throw std::invalid_argument("apply_L_alpha_fd: field dimension does not match alpha");
  }
  if (F.values.size() != F.size()) throw std::invalid_argument("apply_L_alpha_fd: size mismatch");
  const double ht = uniform_step(F.times, "time samples");
  std::vector<double> h(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    h[static_cast<std::size_t>(j)] = uniform_step(F.axes[static_cast<std::size_t>(j)], "axis samples");
    if (!spec.h.empty() &&
        std::abs(spec.h.at(static_cast<std::size_t>(j)) - h[static_cast<std::size_t>(j)]) >
            1e-9 * h[static_cast<std::size_t>(j)]) {
      throw std::invalid_argument("apply_L_alpha_fd: stencil step disagrees with the samples");
    }
  }
  SpaceTimeField out;
  for (const auto& a : F.axes) out.axes.emplace_back(a.begin() + 1, a.end() - 1);
  out.times.assign(F.times.begin() + 1, F.times.end() - 1);
  out.values.assign(out.size(), 0.0);

  // strides of the input, t fastest
  std::vector<std::size_t> stride(static_cast<std::size_t>(d) + 1);
  stride[static_cast<std::size_t>(d)] = 1;
  std::size_t s = F.times.size();
  for (int j = d - 1; j >= 0; --j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= F.axes[static_cast<std::size_t>(j)].size();
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(d) + 1);
  for (std::size_t o = 0; o < out.values.size(); ++o) {
    std::size_t rem = o;
    idx[static_cast<std::size_t>(d)] = rem % out.times.size() + 1;
    rem /= out.times.size();
    for (int j = d - 1; j >= 0; --j) {
      const std::size_t n = out.axes[static_cast<std::size_t>(j)].size();
      idx[static_cast<std::size_t>(j)] = rem % n + 1;
      rem /= n;
    }
    std::size_t c = 0;
    for (std::size_t j = 0; j <= static_cast<std::size_t>(d); ++j) c += idx[j] * stride[j];
    const double f0 = F.values[c];
    const std::size_t st = stride[static_cast<std::size_t>(d)];
    double v = (F.values[c + st] - 2.0 * f0 + F.values[c - st]) / (ht * ht);
    for (int j = 0; j < d; ++j) {
      const std::size_t sj = stride[static_cast<std::size_t>(j)];
      const double hj = h[static_cast<std::size_t>(j)];
      const double xj = F.axes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
      const double d2 = (F.values[c + sj] - 2.0 * f0 + F.values[c - sj]) / (hj * hj);
      const double d1 = (F.values[c + sj] - F.values[c - sj]) / (2.0 * hj);
      v += d2 + 2.0 * spec.alpha[j] / xj * d1;
    }
    out.values[o] = v;
  }
  return out;
}

// ---- empirical constants ----------------------------------------------------

std::string to_string(KernelBound b) {
  switch (b) {
    case KernelBound::poisson_p5: return "poisson-size";
    case KernelBound::poisson_p6: return "poisson-derivative";
    case KernelBound::heat_gaussian: return "heat-gaussian";
    case KernelBound::heat_derivative: return "heat-derivative";
  }
  return "?";
}

EmpiricalConstant empirical_constant(const MultiIndexAlpha& alpha, KernelBound bound,
                                     const ConstantSampling& sampling) {
  const int d = alpha.dim();
  const int i = sampling.axis;
  check_axis(alpha, i);
  if (sampling.samples == 0) throw std::invalid_argument("empirical_constant: no samples");
  const std::size_t n = 2 * sampling.samples;
  std::mt19937_64 rng(sampling.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> xs(n * static_cast<std::size_t>(d)), ys(xs.size()), ts(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (int j = 0; j < d; ++j) xs[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] = sampling.x_hi * (1.0 - unit(rng));
    for (int j = 0; j < d; ++j) ys[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] = sampling.x_hi * (1.0 - unit(rng));
    ts[k] = sampling.t_lo * std::pow(sampling.t_hi / sampling.t_lo, unit(rng));
  }
  const double A = alpha.norm1();
  std::vector<double> ratio(n);
  detail::parallel_for(n, [&](std::size_t k) {
    const double* x = &xs[k * static_cast<std::size_t>(d)];
    const double* y = &ys[k * static_cast<std::size_t>(d)];
    const double t = ts[k];
    double dist2 = 0.0;
    for (int j = 0; j < d; ++j) dist2 += (x[j] - y[j]) * (x[j] - y[j]);
    const double L = t * t + dist2;
    switch (bound) {
      case KernelBound::poisson_p5:
        ratio[k] = poisson_kernel(alpha, t, x, y) * std::pow(L, A + 0.5 * (d + 1)) / t;
        break;
      case KernelBound::poisson_p6:
        ratio[k] = std::abs(poisson_kernel_dx(alpha, t, x, y, i)) * std::pow(L, A + 0.5 * (d + 3)) /
                   (t * (x[i] + y[i]));
        break;
      case KernelBound::heat_gaussian:
        ratio[k] = heat_kernel(alpha, t, x, y) * std::pow(2.0 * t, A + 0.5 * d) *
                   std::exp(dist2 / (4.0 * t));
        break;
      case KernelBound::heat_derivative:
        ratio[k] = std::abs(heat_kernel_dx(alpha, t, x, y, i)) * std::pow(t, A + 0.5 * (d + 1)) *
                   std::sqrt(t) * std::exp(dist2 / (8.0 * t)) / (x[i] + y[i]);
        break;
    }
  });
  EmpiricalConstant c;
  c.bound = bound;
  c.samples = sampling.samples;
  c.value = *std::max_element(ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(sampling.samples));
  c.value_doubled = *std::max_element(ratio.begin(), ratio.end());
  c.stable = std::isfinite(c.value_doubled) && c.value_doubled <= (1.0 + sampling.stability) * c.value;
  return c;
}

}  // namespace brz
