#pragma once

// Built-in test functions.
//
// Space-side families (Gaussian, Laguerre-Gaussian eigenfunctions of h_alpha)
// and spectral families prescribed through h_alpha f, which is supported away
// from the origin so the 1/|y| multiplier of the Riesz transforms is harmless.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "brz/grid.hpp"
#include "brz/hankel.hpp"

namespace brz {

/// Generalized Laguerre polynomial L_k^{(a)}(x) by the three-term recurrence.
double laguerre_polynomial(int k, double a, double x);

/// prod_j L_{k_j}^{(alpha_j - 1/2)}(x_j^2) e^{-x_j^2/2}; h_alpha maps it to
/// (-1)^{sum k} times itself.
double laguerre_gaussian(const MultiIndexAlpha& alpha, const std::vector<int>& k, const double* x);

/// e^{-|x|^2/2}, a fixed point of every h_alpha.
double gaussian(int d, const double* x);

struct EigenCombination {
  std::vector<std::vector<int>> degrees;
  std::vector<double> coefficients;

  double value(const MultiIndexAlpha& alpha, const double* x) const;
  /// value of h_alpha applied to the combination
  double transformed(const MultiIndexAlpha& alpha, const double* x) const;
};

/// Random combination of `terms` Laguerre-Gaussians with degrees <= max_degree.
EigenCombination random_eigen_combination(int d, int terms, int max_degree, std::mt19937_64& rng);

enum class FamilyKind { annulus_bump, gaussian_shell, random_spectral };

FamilyKind parse_family(std::string_view name);
std::string to_string(FamilyKind kind);

struct FamilySpec {
  FamilyKind kind = FamilyKind::annulus_bump;
  double center_lo = 3.0;
  double center_hi = 4.0;
  double width_lo = 0.5;
  double width_hi = 0.6;
  /// smooth cutoff rises from 0 at r_min to 1 at 2 r_min
  double r_min = 0.25;
  int bumps = 3;
};

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

struct SpectralSample {
  /// h_alpha f on the plan's target grid
  GridFunction spectrum;
  /// f on the plan's source grid
  GridFunction f;
};

SpectralSample make_spectral_sample(const HankelPlan& plan, const FamilySpec& spec,
                                    std::mt19937_64& rng);

/// Conjugate-side data g_i = a x_i e^{-|x|^2 / (2 s^2)}: nonnegative for
/// a >= 0, and g_i / x_i is an even Gaussian.
GridFunction conjugate_side_data(const GridPtr& grid, int i, double width, double amplitude = 1.0);

/// Seed for trial `index` of a run seeded with `seed`; independent of the
/// order in which trials are processed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace brz
