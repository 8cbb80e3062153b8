#pragma once

// Riesz transforms R_{alpha,i} = d/dx_i B_alpha^{-1/2}.
//
// Multiplier form: R_i f = -x_i h_{alpha+e_i}(h_alpha f / |y|).
// Principal-value form: R_i f(x) = lim int_{|x-y|>eps} R_i(x, y) f(y) y^{2 alpha} dy
// with R_i(x, y) = int_0^inf d/dx_i P_t(x, y) dt.

#include <cstdint>
#include <string>
#include <vector>

#include "brz/families.hpp"
#include "brz/grid.hpp"
#include "brz/hankel.hpp"
#include "brz/semigroups.hpp"

namespace brz {

/// strict: h_alpha f must carry less than 1e-8 of its L^2 mass below r_min,
/// and is zeroed there. bounded: no cutoff; 1/|y| is used at every target
/// node (the grid never contains y = 0). Later stages of a composition use
/// bounded, since their inputs are not spectrally localized.
enum class SpectralPolicy { strict, bounded };

class RieszOperator {
 public:
  RieszOperator(PlanPtr plan, int i, double r_min = 0.25,
                SpectralPolicy policy = SpectralPolicy::strict);

  const HankelPlan& plan() const noexcept { return *plan_; }
  const PlanPtr& plan_ptr() const noexcept { return plan_; }
  const PlanPtr& shifted() const noexcept { return shifted_; }
  int axis() const noexcept { return i_; }
  double r_min() const noexcept { return r_min_; }
  SpectralPolicy policy() const noexcept { return policy_; }

  /// R_i f given F = h_alpha f on plan().target().
  GridFunction apply_spectral(const GridFunction& F) const;

 private:
  PlanPtr plan_;
  PlanPtr shifted_;
  int i_;
  double r_min_;
  SpectralPolicy policy_;
};

/// -x_i h_{alpha+e_i}(h_alpha f / |y|). Throws std::domain_error when a
/// strict operator sees spectral mass below r_min.
GridFunction riesz_apply(const RieszOperator& op, const GridFunction& f);

/// B_alpha^{-1/2} f = h_alpha(h_alpha f / |y|), same spectral policy.
GridFunction inverse_sqrt_apply(const HankelPlan& plan, const GridFunction& f, double r_min = 0.25,
                                SpectralPolicy policy = SpectralPolicy::strict);

/// (sum_i |R_i f|^2)^{1/2}
GridFunction riesz_vector(const HankelPlan& plan, const GridFunction& f, double r_min = 0.25);

/// All components R_1 f, ..., R_d f (one forward transform).
std::vector<GridFunction> riesz_components(const HankelPlan& plan, const GridFunction& f,
                                           double r_min = 0.25);

// ---- kernel ------------------------------------------------------------------

/// R_i(x, y) = int_0^inf d/dx_i P_t(x, y) dt by the trapezoid rule in log t,
/// from ln|x-y| - 12 to ln(|x-y| + |x| + |y|) + 12, step `step`. Slow: every
/// node is a subordination quadrature.
double riesz_kernel(const MultiIndexAlpha& alpha, const double* x, const double* y, int i,
                    double step = 0.3);

/// The same kernel as pi^{-1/2} int_0^inf u^{-1/2} d/dx_i W_u(x, y) du with the
/// closed-form heat kernel, trapezoid in ln u.
double riesz_kernel_heat(const MultiIndexAlpha& alpha, const double* x, const double* y, int i);

/// Shape of the time integral of the derivative bound:
/// (x_i + y_i) / ((2|alpha| + d + 1) |x - y|^{2|alpha| + d + 1}).
double riesz_kernel_envelope(const MultiIndexAlpha& alpha, const double* x, const double* y,
                             int i);

/// Max of |R_i(x, y)| / envelope over seeded pairs, with the doubling check.
EmpiricalConstant riesz_kernel_constant(const MultiIndexAlpha& alpha,
                                        const ConstantSampling& sampling = {});

// ---- principal value -----------------------------------------------------------

enum class KernelRoute { heat, poisson_time };

struct PVOptions {
  /// truncation radius of the principal value
  double epsilon = 1e-6;
  /// radius of the near-field ball; the smooth cut chi(|x-y|/delta) is 1 up to
  /// delta/2 and 0 from delta on. 0 picks 8 times the largest node gap.
  double delta = 0.0;
  int radial_nodes = 24;
  /// directions: d = 2 uses this many angles, d = 3 uses angular/2 polar by
  /// angular azimuthal nodes
  int angular_nodes = 32;
  KernelRoute route = KernelRoute::heat;
};

/// R_i f at scattered points (d coordinates per point), from the kernel.
/// Near |x - y| < delta the integral is done in polar coordinates around x with
/// f synthesized off-grid; the rest is a grid sum. Requires every x_j > delta.
/// Throws std::domain_error("below resolution") when epsilon < 1e-8 delta,
/// epsilon >= delta / 2 or delta < 4 grid spacings.
std::vector<double> riesz_pv_apply(const HankelPlan& plan, int i, const GridFunction& f,
                                   const std::vector<double>& points, const PVOptions& options = {});

// ---- compositions ----------------------------------------------------------------

struct CompositionResult {
  int k;
  /// lexicographic; (i_1, ..., i_k) stands for R_{i_1} ... R_{i_k} f, so
  /// R_{i_k} acts first
  std::vector<std::vector<int>> tuples;
  std::vector<GridFunction> values;
  /// (sum over tuples |R f|^2)^{1/2}
  GridFunction aggregate;
  /// sum over tuples of ||R f||_2^2 taken on the spectral side of the last
  /// stage, sum_s ||h_alpha g_s||^2 over the stage k-1 outputs g_s. Equals
  /// ||f||_2^2 exactly; unlike the grid norm of the outputs it does not see
  /// the algebraic x-tails that stages >= 2 develop.
  double spectral_energy;
};

std::string composition_ordering();

/// Throws std::length_error for k < 1 or k > 3.
CompositionResult compositions_apply(const HankelPlan& plan, const GridFunction& f, int k,
                                     double r_min = 0.25);

// ---- constants and experiments -------------------------------------------------

/// D_p = (1/2) ((1 + gamma) / gamma) ((p/p')^{1/p} + (p'/p)^{1/p'}), evaluated at
/// max(p, p').
double d_p_constant(const LebesgueExponent& p);

struct NormRatioSetup {
  MultiIndexAlpha alpha{std::vector<double>{0.0}};
  int n = 96;
  double x_max = 11.0;
  double y_max = 8.5;
  FamilySpec family;
  std::vector<double> p = {2.0};
  int trials = 50;
  std::uint64_t seed = 1;
  /// composition order; 1 is the vector transform
  int k = 1;
};

struct NormRatioReport {
  double p;
  MultiIndexAlpha alpha{std::vector<double>{0.0}};
  int d;
  int k;
  std::string family;
  std::uint64_t seed;
  int trials;
  std::vector<double> ratios;
  double max_ratio;
  /// 48^k (p* - 1)^k
  double bound;
  /// (8 D_p)^k
  double proof_bound;
  /// |sum_R ||R f||_2^2 / ||f||_2^2 - 1| worst over trials
  double energy_defect;
  bool pass;
};

/// One report per p. Each trial draws its sample from trial_seed(seed, index)
/// and computes R f once for all p.
std::vector<NormRatioReport> norm_ratio_experiment(const NormRatioSetup& setup);

std::string to_json(const NormRatioReport& report);

}  // namespace brz
