#include "brz/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "brz/quadrature.hpp"
#include "brz/special_functions.hpp"
#include "brz/tensor.hpp"
#include "parallel.hpp"

namespace brz {

namespace {

void check_axis(const MultiIndexAlpha& a, int i) {
  if (i < 0 || i >= a.dim()) throw std::out_of_range("Riesz axis out of range");
}

constexpr double kMassTolerance = 1e-8;

}  // namespace

// ---- multiplier form ----------------------------------------------------------

RieszOperator::RieszOperator(PlanPtr plan, int i, double r_min, SpectralPolicy policy)
    : plan_(std::move(plan)), i_(i), r_min_(r_min), policy_(policy) {
  if (!plan_) throw std::invalid_argument("RieszOperator: missing plan");
  check_axis(plan_->alpha(), i);
  if (policy == SpectralPolicy::strict && !(r_min > 0.0)) {
    throw std::invalid_argument("RieszOperator: the spectral cutoff r_min must be positive");
  }
  shifted_ = plan_->shifted(i);
}

GridFunction RieszOperator::apply_spectral(const GridFunction& F) const {
  require_same_grid(F.grid(), *plan_->target(), "RieszOperator::apply_spectral");
  const bool strict = policy_ == SpectralPolicy::strict;
  if (strict) {
    const double low = spectral_mass_below(F, r_min_);
    if (low >= kMassTolerance) {
      throw std::domain_error("Riesz input outside the spectral class: mass fraction " +
                              std::to_string(low) + " below r_min");
    }
  }
  const auto r = plan_->target()->radii();
  std::vector<double> g(F.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = (strict && r[k] < r_min_) ? 0.0 : F[k] / r[k];
  const GridFunction u = hankel_apply(*shifted_, GridFunction(shifted_->target(), std::move(g)));
  const auto xi = plan_->source()->coordinate(i_);
  std::vector<double> v(u.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = -xi[k] * u[k];
  return GridFunction(plan_->source(), std::move(v));
}

GridFunction riesz_apply(const RieszOperator& op, const GridFunction& f) {
  require_same_grid(f.grid(), *op.plan().source(), "riesz_apply");
  return op.apply_spectral(hankel_apply(op.plan(), f));
}

GridFunction inverse_sqrt_apply(const HankelPlan& plan, const GridFunction& f, double r_min,
                                SpectralPolicy policy) {
  MultiplierOptions o;
  if (policy == SpectralPolicy::strict) {
    o.singular_at_zero = true;
    o.r_min = r_min;
    o.mass_tolerance = kMassTolerance;
  }
  return multiplier_apply(plan, f, [](double r) { return 1.0 / r; }, o);
}

std::vector<GridFunction> riesz_components(const HankelPlan& plan, const GridFunction& f,
                                           double r_min) {
  require_same_grid(f.grid(), *plan.source(), "riesz_components");
  const PlanPtr p(std::shared_ptr<const HankelPlan>(&plan, [](const HankelPlan*) {}));
  const GridFunction F = hankel_apply(plan, f);
  std::vector<GridFunction> out;
  for (int i = 0; i < plan.alpha().dim(); ++i) out.push_back(RieszOperator(p, i, r_min).apply_spectral(F));
  return out;
}

namespace {

GridFunction euclidean(const std::vector<GridFunction>& parts) {
  std::vector<double> s(parts.front().size(), 0.0);
  for (const auto& g : parts) {
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += g[k] * g[k];
  }
  for (double& e : s) e = std::sqrt(e);
  return GridFunction(parts.front().grid_ptr(), std::move(s));
}

}  // namespace

GridFunction riesz_vector(const HankelPlan& plan, const GridFunction& f, double r_min) {
  return euclidean(riesz_components(plan, f, r_min));
}

// ---- kernel ---------------------------------------------------------------------

namespace {

constexpr double kHeatStep = 0.3;

double dist2(int d, const double* x, const double* y) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
  return s;
}

// e^{-(x-y)^2/4u} (2u)^{-a-1/2} Itilde(a - 1/2, xy/2u) and its x-derivative
double axis_factor(double a, double u, double x, double y) {
  const double e = (x - y) * (x - y) / (4.0 * u);
  if (e > 745.0) return 0.0;
  return std::exp(-e) * std::pow(2.0 * u, -a - 0.5) *
         scaled_i(BesselOrder(a - 0.5), x * y / (2.0 * u), Scaling::exponential);
}

double axis_dfactor(double a, double u, double x, double y) {
  const double e = (x - y) * (x - y) / (4.0 * u);
  if (e > 745.0) return 0.0;
  const double z = x * y / (2.0 * u);
  const BesselOrder mu(a - 0.5);
  const double g = std::exp(-e) * std::pow(2.0 * u, -a - 0.5);
  return g *
         (-x * scaled_i(mu, z, Scaling::exponential) +
          y * z * scaled_i(mu.shifted(1.0), z, Scaling::exponential)) /
         (2.0 * u);
}

// Trapezoid nodes v = k h in ln u. The left end sits where e^{-D^2/4u} = e^{-40},
// the right end 30 e-folds into the u^{-(A+1/2)} tail past u = 4 r2.
struct LogRule {
  int k_lo;
  int k_hi;
};

LogRule log_rule(const MultiIndexAlpha& alpha, double d2, double r2) {
  const double A = alpha.norm1() + 0.5 * alpha.dim();
  const double lo = std::log(d2 / 160.0);
  const double hi = std::log(4.0 * std::max(r2, d2)) + 30.0 / (A + 0.5);
  return {static_cast<int>(std::floor(lo / kHeatStep)), static_cast<int>(std::ceil(hi / kHeatStep))};
}

double heat_kernel_sum(const MultiIndexAlpha& alpha, const double* x, const double* y, int i,
                       const LogRule& rule) {
  const int d = alpha.dim();
  double s = 0.0;
  for (int k = rule.k_lo; k <= rule.k_hi; ++k) {
    const double u = std::exp(k * kHeatStep);
    double v = std::sqrt(u);
    for (int j = 0; j < d && v != 0.0; ++j) {
      v *= j == i ? axis_dfactor(alpha[j], u, x[j], y[j]) : axis_factor(alpha[j], u, x[j], y[j]);
    }
    s += v;
  }
  return s * kHeatStep / std::sqrt(std::numbers::pi);
}

double sq_norm(int d, const double* x) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) s += x[j] * x[j];
  return s;
}

}  // namespace

double riesz_kernel(const MultiIndexAlpha& alpha, const double* x, const double* y, int i,
                    double step) {
  check_axis(alpha, i);
  const int d = alpha.dim();
  const double D = std::sqrt(dist2(d, x, y));
  if (!(D > 0.0)) throw std::domain_error("riesz_kernel: the kernel is singular on the diagonal");
  if (!(step > 0.0)) throw std::invalid_argument("riesz_kernel: step must be positive");
  const double S = D + std::sqrt(sq_norm(d, x)) + std::sqrt(sq_norm(d, y));
  const int k_lo = static_cast<int>(std::floor((std::log(D) - 12.0) / step));
  const int k_hi = static_cast<int>(std::ceil((std::log(S) + 12.0) / step));
  double s = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double t = std::exp(k * step);
    s += t * poisson_kernel_dx(alpha, t, x, y, i);
  }
  return s * step;
}

double riesz_kernel_heat(const MultiIndexAlpha& alpha, const double* x, const double* y, int i) {
  check_axis(alpha, i);
  const int d = alpha.dim();
  const double d2 = dist2(d, x, y);
  if (!(d2 > 0.0)) throw std::domain_error("riesz_kernel_heat: the kernel is singular on the diagonal");
  return heat_kernel_sum(alpha, x, y, i, log_rule(alpha, d2, sq_norm(d, x) + sq_norm(d, y)));
}

double riesz_kernel_envelope(const MultiIndexAlpha& alpha, const double* x, const double* y,
                             int i) {
  check_axis(alpha, i);
  const int d = alpha.dim();
  const double q = 2.0 * alpha.norm1() + d + 1.0;
  return (x[i] + y[i]) / (q * std::pow(dist2(d, x, y), 0.5 * q));
}

EmpiricalConstant riesz_kernel_constant(const MultiIndexAlpha& alpha,
                                        const ConstantSampling& sampling) {
  const int d = alpha.dim();
  const int i = sampling.axis;
  check_axis(alpha, i);
  if (sampling.samples == 0) throw std::invalid_argument("riesz_kernel_constant: no samples");
  const std::size_t n = 2 * sampling.samples;
  const auto du = static_cast<std::size_t>(d);
  std::mt19937_64 rng(sampling.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> xs(n * du), ys(n * du);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < du; ++j) xs[k * du + j] = sampling.x_hi * (1.0 - unit(rng));
    for (std::size_t j = 0; j < du; ++j) ys[k * du + j] = sampling.x_hi * (1.0 - unit(rng));
  }
  std::vector<double> ratio(n);
  detail::parallel_for(n, [&](std::size_t k) {
    const double* x = &xs[k * du];
    const double* y = &ys[k * du];
    ratio[k] = std::abs(riesz_kernel_heat(alpha, x, y, i)) / riesz_kernel_envelope(alpha, x, y, i);
  });
  EmpiricalConstant c;
  c.bound = KernelBound::poisson_p6;
  c.samples = sampling.samples;
  c.value = *std::max_element(ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(sampling.samples));
  c.value_doubled = *std::max_element(ratio.begin(), ratio.end());
  c.stable = std::isfinite(c.value_doubled) && c.value_doubled <= (1.0 + sampling.stability) * c.value;
  return c;
}

// ---- principal value --------------------------------------------------------------

namespace {

struct Direction {
  std::vector<double> theta;
  double w;
};

std::vector<Direction> sphere_rule(int d, int m) {
  std::vector<Direction> out;
  if (d == 1) return {{{1.0}, 1.0}, {{-1.0}, 1.0}};
  if (m < 2 || m % 2) throw std::invalid_argument("riesz_pv_apply: angular_nodes must be even and >= 2");
  const double pi = std::numbers::pi;
  if (d == 2) {
    for (int k = 0; k < m; ++k) {
      const double phi = 2.0 * pi * (k + 0.5) / m;
      out.push_back({{std::cos(phi), std::sin(phi)}, 2.0 * pi / m});
    }
    return out;
  }
  if (d == 3) {
    const auto& gl = cached_gauss_legendre(m / 2);
    for (std::size_t l = 0; l < gl.size(); ++l) {
      const double c = gl.nodes[l];
      const double s = std::sqrt(1.0 - c * c);
      for (int k = 0; k < m; ++k) {
        const double phi = 2.0 * pi * (k + 0.5) / m;
        out.push_back({{s * std::cos(phi), s * std::sin(phi), c}, gl.weights[l] * 2.0 * pi / m});
      }
    }
    return out;
  }
  throw std::invalid_argument("riesz_pv_apply: d must be 1, 2 or 3");
}

// smooth partition: 1 on [0, 1/2], 0 on [1, inf)
double chi(double rho) { return 1.0 - smooth_step(2.0 * rho - 1.0); }

double measure(const MultiIndexAlpha& alpha, const double* y) {
  double m = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) m *= std::pow(y[j], 2.0 * alpha[j]);
  return m;
}

}  // namespace

std::vector<double> riesz_pv_apply(const HankelPlan& plan, int i, const GridFunction& f,
                                   const std::vector<double>& points, const PVOptions& options) {
  const MultiIndexAlpha& alpha = plan.alpha();
  check_axis(alpha, i);
  require_same_grid(f.grid(), *plan.source(), "riesz_pv_apply");
  const int d = alpha.dim();
  const auto du = static_cast<std::size_t>(d);
  const WeightedGrid& grid = *plan.source();
  double spacing = 0.0;
  for (int j = 0; j < d; ++j) spacing = std::max(spacing, grid.max_gap(j));
  const double delta = options.delta > 0.0 ? options.delta : 8.0 * spacing;
  const double eps = options.epsilon;
  if (!(delta >= 4.0 * spacing) || !(eps >= 1e-8 * delta) || !(eps < 0.5 * delta)) {
    throw std::domain_error("riesz_pv_apply: epsilon/delta below resolution (need 1e-8 delta <= "
                            "epsilon < delta/2 and delta >= 4 node spacings)");
  }
  if (points.size() % du != 0) throw std::invalid_argument("riesz_pv_apply: ragged point list");
  const std::size_t m = points.size() / du;
  for (std::size_t q = 0; q < m; ++q) {
    for (std::size_t j = 0; j < du; ++j) {
      if (!(points[q * du + j] > delta)) {
        throw std::domain_error("riesz_pv_apply: output points need every x_j > delta");
      }
    }
  }
  const GridFunction F = hankel_apply(plan, f);
  const auto dirs = sphere_rule(d, options.angular_nodes);
  if (options.radial_nodes < 2) throw std::invalid_argument("riesz_pv_apply: radial_nodes < 2");
  QuadratureRule radial = gauss_legendre(options.radial_nodes, eps, 0.5 * delta);
  {
    const QuadratureRule outer = gauss_legendre(options.radial_nodes, 0.5 * delta, delta);
    radial.nodes.insert(radial.nodes.end(), outer.nodes.begin(), outer.nodes.end());
    radial.weights.insert(radial.weights.end(), outer.weights.begin(), outer.weights.end());
  }
  const bool heat = options.route == KernelRoute::heat;
  auto kernel = [&](const double* x, const double* y) {
    return heat ? riesz_kernel_heat(alpha, x, y, i) : riesz_kernel(alpha, x, y, i);
  };
  double box2 = 0.0;
  for (int j = 0; j < d; ++j) box2 += grid.axis(j).nodes.back() * grid.axis(j).nodes.back();

  std::vector<double> out(m);
  for (std::size_t q = 0; q < m; ++q) {
    const double* x = &points[q * du];
    // near field: polar coordinates around x, f synthesized at the nodes
    std::vector<double> pts;
    std::vector<double> pw;
    for (std::size_t r = 0; r < radial.size(); ++r) {
      const double rho = radial.nodes[r];
      const double jac = std::pow(rho, d - 1) * radial.weights[r] * chi(rho / delta);
      for (const Direction& dir : dirs) {
        for (std::size_t j = 0; j < du; ++j) pts.push_back(x[j] + rho * dir.theta[j]);
        pw.push_back(jac * dir.w);
      }
    }
    const auto fy = plan.synthesize_points(F.values(), pts);
    const std::size_t np = pw.size();
    const double near = detail::ordered_sum(np, [&](std::size_t k) {
      const double* y = &pts[k * du];
      return pw[k] * kernel(x, y) * fy[k] * measure(alpha, y);
    });

    // far field on the grid: sum (1 - chi) R f w
    double far = 0.0;
    const std::size_t n = grid.size();
    const auto& w = grid.weights();
    if (heat) {
      // full sum through per-axis factors at each log-u node, minus the chi part
      double dmin2 = eps * eps;
      for (std::size_t b = 0; b < n; ++b) {
        std::vector<double> y = grid.point(b);
        dmin2 = std::min(dmin2, dist2(d, x, y.data()));
      }
      if (!(dmin2 > 0.0)) throw std::domain_error("riesz_pv_apply: output point on a grid node");
      const LogRule rule = log_rule(alpha, dmin2, sq_norm(d, x) + box2);
      const Shape& shape = grid.shape();
      const std::size_t kn = static_cast<std::size_t>(rule.k_hi - rule.k_lo + 1);
      std::vector<double> per(kn);
      detail::parallel_for(kn, [&](std::size_t kk) {
        const double u = std::exp((rule.k_lo + static_cast<int>(kk)) * kHeatStep);
        std::vector<double> cur = f.values();
        std::size_t outer = cur.size();
        for (std::size_t jj = du; jj-- > 0;) {
          const auto& ax = grid.axis(static_cast<int>(jj));
          const std::size_t nj = shape[jj];
          std::vector<double> a(nj);
          bool any = false;
          for (std::size_t b = 0; b < nj; ++b) {
            const double fac = static_cast<int>(jj) == i
                                   ? axis_dfactor(alpha[static_cast<int>(jj)], u, x[jj], ax.nodes[b])
                                   : axis_factor(alpha[static_cast<int>(jj)], u, x[jj], ax.nodes[b]);
            a[b] = fac * ax.weights[b];
            any = any || a[b] != 0.0;
          }
          if (!any) {
            per[kk] = 0.0;
            return;
          }
          outer /= nj;
          std::vector<double> next(outer, 0.0);
          for (std::size_t o = 0; o < outer; ++o) {
            double s = 0.0;
            for (std::size_t b = 0; b < nj; ++b) s += cur[o * nj + b] * a[b];
            next[o] = s;
          }
          cur.swap(next);
        }
        per[kk] = cur[0] * std::sqrt(u);
      });
      double full = 0.0;
      for (double v : per) full += v;
      full *= kHeatStep / std::sqrt(std::numbers::pi);
      double inner = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        std::vector<double> y = grid.point(b);
        const double D = std::sqrt(dist2(d, x, y.data()));
        if (D >= delta || f[b] == 0.0) continue;
        inner += chi(D / delta) * heat_kernel_sum(alpha, x, y.data(), i, rule) * f[b] * w[b];
      }
      far = full - inner;
    } else {
      far = detail::ordered_sum(n, [&](std::size_t b) {
        std::vector<double> y = grid.point(b);
        const double D = std::sqrt(dist2(d, x, y.data()));
        const double c = 1.0 - chi(D / delta);
        if (c == 0.0 || f[b] == 0.0) return 0.0;
        return c * kernel(x, y.data()) * f[b] * w[b];
      });
    }
    out[q] = near + far;
  }
  return out;
}

// ---- compositions ------------------------------------------------------------------

std::string composition_ordering() {
  return "lexicographic tuples (i1,...,ik); (i1,...,ik) = R_i1 ... R_ik f, R_ik applied first";
}

CompositionResult compositions_apply(const HankelPlan& plan, const GridFunction& f, int k,
                                     double r_min) {
  if (k < 1 || k > 3) throw std::length_error("compositions_apply: k must be in 1..3");
  require_same_grid(f.grid(), *plan.source(), "compositions_apply");
  const int d = plan.alpha().dim();
  const PlanPtr p(std::shared_ptr<const HankelPlan>(&plan, [](const HankelPlan*) {}));
  std::vector<RieszOperator> first, later;
  for (int i = 0; i < d; ++i) {
    first.emplace_back(p, i, r_min, SpectralPolicy::strict);
    later.emplace_back(p, i, 0.0, SpectralPolicy::bounded);
  }
  // level m holds R_{j1} ... R_{jm} f at index j1 d^{m-1} + ... + jm
  std::vector<GridFunction> level{f};
  double energy = 0.0;
  for (int m = 1; m <= k; ++m) {
    std::vector<GridFunction> next;
    const std::size_t prev = level.size();
    next.reserve(prev * static_cast<std::size_t>(d));
    std::vector<GridFunction> spectra;
    for (const auto& g : level) spectra.push_back(hankel_apply(plan, g));
    if (m == k) {
      for (const auto& F : spectra) energy += std::pow(lp_norm(F, 2.0), 2);
    }
    for (int i = 0; i < d; ++i) {
      for (std::size_t s = 0; s < prev; ++s) {
        next.push_back((m == 1 ? first : later)[static_cast<std::size_t>(i)].apply_spectral(spectra[s]));
      }
    }
    level = std::move(next);
  }
  CompositionResult res{k, {}, std::move(level), GridFunction::zeros(plan.source()), energy};
  for (std::size_t idx = 0; idx < res.values.size(); ++idx) {
    std::vector<int> t(static_cast<std::size_t>(k));
    std::size_t r = idx;
    for (int m = k; m-- > 0;) {
      t[static_cast<std::size_t>(m)] = static_cast<int>(r % static_cast<std::size_t>(d));
      r /= static_cast<std::size_t>(d);
    }
    res.tuples.push_back(std::move(t));
  }
  res.aggregate = euclidean(res.values);
  return res;
}

// ---- constants and experiments ------------------------------------------------------

double d_p_constant(const LebesgueExponent& p) {
  const LebesgueExponent q(p.star());
  const double a = q.p();
  const double b = q.conj();
  const double g = q.gamma();
  return 0.5 * ((1.0 + g) / g) * (std::pow(a / b, 1.0 / a) + std::pow(b / a, 1.0 / b));
}

std::vector<NormRatioReport> norm_ratio_experiment(const NormRatioSetup& setup) {
  if (setup.p.empty()) throw std::invalid_argument("norm_ratio_experiment: empty p list");
  if (setup.trials < 1) throw std::invalid_argument("norm_ratio_experiment: trials must be >= 1");
  if (setup.k < 1 || setup.k > 3) throw std::length_error("norm_ratio_experiment: k must be in 1..3");
  std::vector<LebesgueExponent> ps;
  for (double p : setup.p) ps.emplace_back(p);
  const auto plan = make_plan(build_grid(setup.alpha, setup.n, setup.x_max),
                              build_grid(setup.alpha, setup.n, setup.y_max));
  const auto trials = static_cast<std::size_t>(setup.trials);
  // ratios[trial][p], energy[trial]
  std::vector<std::vector<double>> ratios(trials);
  std::vector<double> energy(trials);
  detail::parallel_for(trials, [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(setup.seed, t));
    const SpectralSample s = make_spectral_sample(*plan, setup.family, rng);
    const std::vector<GridFunction> parts =
        setup.k == 1 ? riesz_components(*plan, s.f, setup.family.r_min)
                     : compositions_apply(*plan, s.f, setup.k, setup.family.r_min).values;
    double e = 0.0;
    for (const auto& g : parts) e += std::pow(lp_norm(g, 2.0), 2);
    energy[t] = std::abs(e / std::pow(lp_norm(s.f, 2.0), 2) - 1.0);
    for (const auto& p : ps) ratios[t].push_back(lp_norm(parts, p) / lp_norm(s.f, p));
  });
  std::vector<NormRatioReport> out;
  for (std::size_t ip = 0; ip < ps.size(); ++ip) {
    NormRatioReport r;
    r.p = ps[ip].p();
    r.alpha = setup.alpha;
    r.d = setup.alpha.dim();
    r.k = setup.k;
    r.family = to_string(setup.family.kind);
    r.seed = setup.seed;
    r.trials = setup.trials;
    for (std::size_t t = 0; t < trials; ++t) r.ratios.push_back(ratios[t][ip]);
    r.max_ratio = *std::max_element(r.ratios.begin(), r.ratios.end());
    r.bound = std::pow(48.0 * (ps[ip].star() - 1.0), setup.k);
    r.proof_bound = std::pow(8.0 * d_p_constant(ps[ip]), setup.k);
    r.energy_defect = *std::max_element(energy.begin(), energy.end());
    r.pass = std::isfinite(r.max_ratio) && r.max_ratio <= r.proof_bound && r.proof_bound <= r.bound;
    if (r.p == 2.0 && r.k == 1) r.pass = r.pass && r.max_ratio <= 1.0 + 1e-6 && r.energy_defect <= 1e-6;
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_json(const NormRatioReport& r) {
  nlohmann::ordered_json j;
  j["p"] = r.p;
  j["alpha"] = r.alpha.values();
  j["d"] = r.d;
  j["k"] = r.k;
  j["family"] = r.family;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["ratios"] = r.ratios;
  j["max_ratio"] = r.max_ratio;
  j["bound"] = r.bound;
  j["proof_bound"] = r.proof_bound;
  j["energy_defect"] = r.energy_defect;
  j["pass"] = r.pass;
  return j.dump();
}

}  // namespace brz
