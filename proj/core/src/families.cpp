#include "brz/families.hpp"

#include <cmath>
#include <stdexcept>

namespace brz {

double laguerre_polynomial(int k, double a, double x) {
  if (k < 0) throw std::invalid_argument("Laguerre degree must be >= 0");
  double l0 = 1.0;
  if (k == 0) return l0;
  double l1 = 1.0 + a - x;
  for (int m = 1; m < k; ++m) {
    const double l2 = ((2.0 * m + 1.0 + a - x) * l1 - (m + a) * l0) / (m + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

double laguerre_gaussian(const MultiIndexAlpha& alpha, const std::vector<int>& k, const double* x) {
  double v = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) {
    const double s = x[j] * x[j];
    v *= laguerre_polynomial(k[static_cast<std::size_t>(j)], alpha[j] - 0.5, s) * std::exp(-0.5 * s);
  }
  return v;
}

double gaussian(int d, const double* x) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) s += x[j] * x[j];
  return std::exp(-0.5 * s);
}

double EigenCombination::value(const MultiIndexAlpha& alpha, const double* x) const {
  double v = 0.0;
  for (std::size_t t = 0; t < degrees.size(); ++t) {
    v += coefficients[t] * laguerre_gaussian(alpha, degrees[t], x);
  }
  return v;
}

double EigenCombination::transformed(const MultiIndexAlpha& alpha, const double* x) const {
  double v = 0.0;
  for (std::size_t t = 0; t < degrees.size(); ++t) {
    int total = 0;
    for (int k : degrees[t]) total += k;
    v += (total % 2 ? -1.0 : 1.0) * coefficients[t] * laguerre_gaussian(alpha, degrees[t], x);
  }
  return v;
}

EigenCombination random_eigen_combination(int d, int terms, int max_degree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::normal_distribution<double> coef;
  EigenCombination c;
  for (int t = 0; t < terms; ++t) {
    std::vector<int> k(static_cast<std::size_t>(d));
    for (int& v : k) v = deg(rng);
    c.degrees.push_back(std::move(k));
    c.coefficients.push_back(coef(rng));
  }
  return c;
}

FamilyKind parse_family(std::string_view name) {
  if (name == "annulus-bump") return FamilyKind::annulus_bump;
  if (name == "gaussian") return FamilyKind::gaussian_shell;
  if (name == "random-spectral") return FamilyKind::random_spectral;
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::annulus_bump: return "annulus-bump";
    case FamilyKind::gaussian_shell: return "gaussian";
    case FamilyKind::random_spectral: return "random-spectral";
  }
  return "?";
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

namespace {

struct Bump {
  std::vector<double> center;
  double width;
  double amplitude;
};

double tensor_bump(const Bump& b, const double* y, int d) {
  double e = 0.0;
  for (int j = 0; j < d; ++j) {
    const double u = y[j] - b.center[static_cast<std::size_t>(j)];
    e += u * u;
  }
  return b.amplitude * std::exp(-e / (2.0 * b.width * b.width));
}

}  // namespace

SpectralSample make_spectral_sample(const HankelPlan& plan, const FamilySpec& spec,
                                    std::mt19937_64& rng) {
  const int d = plan.alpha().dim();
  std::uniform_real_distribution<double> center(spec.center_lo, spec.center_hi);
  std::uniform_real_distribution<double> width(spec.width_lo, spec.width_hi);
  std::normal_distribution<double> amp;
  auto make_bump = [&](double a) {
    Bump b;
    for (int j = 0; j < d; ++j) b.center.push_back(center(rng));
    b.width = width(rng);
    b.amplitude = a;
    return b;
  };
  std::vector<Bump> bumps;
  double shell_c = 0.0, shell_s = 1.0;
  switch (spec.kind) {
    case FamilyKind::annulus_bump:
      bumps.push_back(make_bump(1.0));
      break;
    case FamilyKind::random_spectral:
      for (int k = 0; k < spec.bumps; ++k) bumps.push_back(make_bump(amp(rng)));
      break;
    case FamilyKind::gaussian_shell:
      shell_c = center(rng);
      shell_s = width(rng);
      break;
  }
  auto F = GridFunction::sample(plan.target(), [&](const double* y) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) r2 += y[j] * y[j];
    const double r = std::sqrt(r2);
    const double cut = smooth_step(r / spec.r_min - 1.0);
    if (cut == 0.0) return 0.0;
    if (spec.kind == FamilyKind::gaussian_shell) {
      const double u = r - shell_c;
      return cut * std::exp(-u * u / (2.0 * shell_s * shell_s));
    }
    double v = 0.0;
    for (const Bump& b : bumps) v += tensor_bump(b, y, d);
    return cut * v;
  });
  const double norm = lp_norm(F, 2.0);
  if (!(norm > 0.0)) throw std::runtime_error("spectral sample vanished on the grid");
  F = F.scaled(1.0 / norm);
  GridFunction f = hankel_apply(plan, F);
  return {std::move(F), std::move(f)};
}

GridFunction conjugate_side_data(const GridPtr& grid, int i, double width, double amplitude) {
  const int d = grid->dim();
  return GridFunction::sample(grid, [&](const double* x) {
    double e = 0.0;
    for (int j = 0; j < d; ++j) e += x[j] * x[j];
    return amplitude * x[i] * std::exp(-e / (2.0 * width * width));
  });
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace brz
