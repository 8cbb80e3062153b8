#pragma once

// Heat, Poisson and conjugate Poisson semigroups for the Bessel operator
// B_alpha = sum_j -(d^2/dx_j^2 + (2 alpha_j / x_j) d/dx_j).
//
// Two representations: spectral (multipliers e^{-|y|^2 t}, e^{-|y| t} under
// h_alpha, the main compute path) and kernel (closed-form heat kernel,
// Poisson kernel by subordination), used to validate the formulas.

#include <cstdint>
#include <string>
#include <vector>

#include "brz/grid.hpp"
#include "brz/hankel.hpp"

namespace brz {

enum class Provenance { kernel_quadrature, multiplier };
std::string to_string(Provenance p);

struct SemigroupOutput {
  double t;
  GridFunction values;
  Provenance provenance;
};

// ---- kernels ---------------------------------------------------------------

/// W_t(x, y) = e^{-|x-y|^2/4t} (2t)^{-|alpha|-d/2} prod_j Itilde(alpha_j - 1/2, x_j y_j / 2t)
/// with Itilde(mu, z) = e^{-z} z^{-mu} I_mu(z).
double heat_kernel(const MultiIndexAlpha& alpha, double t, const double* x, const double* y);
double heat_kernel(const MultiIndexAlpha& alpha, double t, const std::vector<double>& x,
                   const std::vector<double>& y);

/// d/dx_i W_t(x, y).
double heat_kernel_dx(const MultiIndexAlpha& alpha, double t, const double* x, const double* y,
                      int i);

/// Poisson kernel by subordination. quadrature_n is the node count per
/// panel; throws std::runtime_error when a run with half the nodes
/// disagrees beyond a relative 1e-9 (the rule is under-resolved).
double poisson_kernel(const MultiIndexAlpha& alpha, double t, const double* x, const double* y,
                      int quadrature_n = 64);
double poisson_kernel(const MultiIndexAlpha& alpha, double t, const std::vector<double>& x,
                      const std::vector<double>& y, int quadrature_n = 64);

/// d/dx_i of the Poisson kernel, same quadrature.
double poisson_kernel_dx(const MultiIndexAlpha& alpha, double t, const double* x,
                         const double* y, int i, int quadrature_n = 64);

// ---- semigroup actions -----------------------------------------------------

/// T_t f = h_alpha(e^{-|y|^2 t} h_alpha f); f on plan.source().
SemigroupOutput heat_apply(const HankelPlan& plan, const GridFunction& f, double t);

/// T_t f by quadrature of the heat kernel against the grid measure. The
/// kernel factorizes over axes so this is a tensor product of n x n matrices.
SemigroupOutput heat_apply_kernel(const GridFunction& f, double t);

/// P_t f = h_alpha(e^{-|y| t} h_alpha f).
SemigroupOutput poisson_apply(const HankelPlan& plan, const GridFunction& f, double t);

/// P_t f by direct quadrature of the Poisson kernel. Cost is size^2 kernel
/// evaluations; intended for validation on small grids.
SemigroupOutput poisson_apply_kernel(const GridFunction& f, double t, int quadrature_n = 64);

/// Conjugate Poisson semigroup x_i P_t^{alpha+e_i}(g / x_i) (g on plan.source()).
SemigroupOutput conjugate_poisson_apply(const HankelPlan& plan, const GridFunction& g, int i,
                                        double t);

/// Conjugate heat semigroup x_i T_t^{alpha+e_i}(g / x_i).
SemigroupOutput conjugate_heat_apply(const HankelPlan& plan, const GridFunction& g, int i,
                                     double t);

GridFunction d_t_poisson(const HankelPlan& plan, const GridFunction& f, double t);
/// -x_i h_{alpha+e_i}(e^{-|y| t} h_alpha f)
GridFunction d_xi_poisson(const HankelPlan& plan, const GridFunction& f, double t, int i);
GridFunction d_t_conjugate(const HankelPlan& plan, const GridFunction& g, int i, double t);
GridFunction d_xj_conjugate(const HankelPlan& plan, const GridFunction& g, int i, int j,
                            double t);

/// Value and first derivatives at tensor-product points, row-major over the
/// per-axis point lists.
struct ExtensionJet {
  std::vector<double> value;
  std::vector<double> d_t;
  /// d_x[j][k] = d/dx_j at point k
  std::vector<std::vector<double>> d_x;
};

/// P_t f with h_alpha f computed once; all t-dependent quantities are then a
/// multiplier and one inverse transform each.
class PoissonExtension {
 public:
  PoissonExtension(PlanPtr plan, const GridFunction& f);

  const HankelPlan& plan() const noexcept { return *plan_; }
  const GridFunction& spectrum() const noexcept { return spectrum_; }

  GridFunction value(double t) const;
  GridFunction d_t(double t) const;
  GridFunction d_x(double t, int j) const;
  /// (|d_t|^2 + sum_j |d_x_j|^2)^{1/2} at every node
  GridFunction star(double t) const;

  /// P_t f at the tensor product of per-axis points (off-grid evaluation).
  std::vector<double> value_at(double t, const std::vector<std::vector<double>>& axis_points) const;
  ExtensionJet jet_at(double t, const std::vector<std::vector<double>>& axis_points) const;

 private:
  PlanPtr plan_;
  GridFunction spectrum_;
};

/// The i-th conjugate extension x_i P_t^{alpha+e_i}(g / x_i).
class ConjugateExtension {
 public:
  ConjugateExtension(PlanPtr plan, const GridFunction& g, int i);

  int axis() const noexcept { return i_; }
  /// plan for alpha + e_i and h_{alpha+e_i}(g / x_i) on its target
  const PlanPtr& shifted_plan() const noexcept { return shifted_; }
  const GridFunction& spectrum() const noexcept { return spectrum_; }

  GridFunction value(double t) const;
  GridFunction d_t(double t) const;
  GridFunction d_x(double t, int j) const;
  GridFunction star(double t) const;

  std::vector<double> value_at(double t, const std::vector<std::vector<double>>& axis_points) const;
  ExtensionJet jet_at(double t, const std::vector<std::vector<double>>& axis_points) const;

 private:
  PlanPtr plan_;
  PlanPtr shifted_;
  int i_;
  /// h_{alpha+e_i}(g / x_i) on the shifted target grid
  GridFunction spectrum_;
};

/// |P_t f(x)|_* at every source node.
GridFunction star_seminorm_field(const HankelPlan& plan, const GridFunction& f, double t);
/// |P_t f(x)|_* at one node (flat index into plan.source()).
double star_seminorm(const HankelPlan& plan, const GridFunction& f, double t, std::size_t node);
/// (sum_i |P^{i}_t g_i(x)|_*^2)^{1/2} at every source node; g has one entry per axis.
GridFunction conjugate_star_seminorm_field(const HankelPlan& plan,
                                           const std::vector<GridFunction>& g, double t);

// ---- finite-difference Bessel operator -----------------------------------

struct BesselOperatorSpec {
  MultiIndexAlpha alpha;
  /// interior step per axis
  std::vector<double> h;

  /// [delta_j, delta_j^*] = 2 alpha_j / x_j^2
  double commutator(int j, double xj) const;
};

/// Samples on a uniform tensor grid in x times a uniform grid in t; values
/// are row-major with t fastest.
struct SpaceTimeField {
  std::vector<std::vector<double>> axes;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const;
  double at(const std::vector<std::size_t>& idx, std::size_t it) const;
};

/// Samples (x, t) -> P_t f(x) (or the i-th conjugate extension) on the tensor grid.
SpaceTimeField sample_space_time(const PoissonExtension& ext, std::vector<std::vector<double>> axes,
                                 std::vector<double> times);
SpaceTimeField sample_space_time(const ConjugateExtension& ext,
                                 std::vector<std::vector<double>> axes, std::vector<double> times);

/// Second-order central differences for L_alpha F = d_t^2 F - B_alpha F on
/// interior nodes; the result lives on the axes and times with both ends
/// removed. Throws std::invalid_argument for fewer than 3 samples along any
/// direction or non-uniform spacing.
SpaceTimeField apply_L_alpha_fd(const BesselOperatorSpec& spec, const SpaceTimeField& F);

// ---- empirical kernel constants -------------------------------------------

enum class KernelBound { poisson_p5, poisson_p6, heat_gaussian, heat_derivative };
std::string to_string(KernelBound b);

struct EmpiricalConstant {
  KernelBound bound;
  /// max ratio over the first `samples` triples
  double value;
  /// max ratio over 2 * samples triples (the first half is the same set)
  double value_doubled;
  std::size_t samples;
  bool stable;
};

struct ConstantSampling {
  std::size_t samples = 1000;
  std::uint64_t seed = 20240611;
  double x_hi = 2.0;
  double t_lo = 0.1;
  double t_hi = 10.0;
  /// admissible relative growth under sample doubling
  double stability = 0.05;
  /// axis for derivative bounds
  int axis = 0;
};

/// Max of kernel / bound-shape over pseudo-random (x, y, t) with
/// x, y in (0, x_hi]^d and t log-uniform in [t_lo, t_hi].
EmpiricalConstant empirical_constant(const MultiIndexAlpha& alpha, KernelBound bound,
                                     const ConstantSampling& sampling = {});

}  // namespace brz
