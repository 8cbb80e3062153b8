#pragma once

// The d-dimensional Hankel transform h_alpha on tensor grids.
//
// h_alpha f(y) = int phi_y(x) f(x) x^{2 alpha} dx with
// phi_y(x) = prod_j (x_j y_j)^{-alpha_j+1/2} J_{alpha_j-1/2}(x_j y_j).
// h_alpha is unitary on L^2(x^{2 alpha} dx) and its own inverse.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Core>

#include "brz/grid.hpp"

namespace brz {

double phi(const MultiIndexAlpha& alpha, const double* x, const double* y);
double phi(const MultiIndexAlpha& alpha, const std::vector<double>& x,
           const std::vector<double>& y);

class HankelPlan;
using PlanPtr = std::shared_ptr<const HankelPlan>;

/// Per-axis kernel matrices between a source (space) grid and a target
/// (frequency) grid carrying the same alpha. Immutable once built, except
/// for the internal cache of shifted plans, which is guarded.
class HankelPlan {
 public:
  /// Throws std::invalid_argument if the grids disagree on alpha or the
  /// Nyquist bound gap * max_frequency / (2 pi) <= 1/4 fails on some axis.
  HankelPlan(GridPtr source, GridPtr target);
  HankelPlan(const HankelPlan&) = delete;
  HankelPlan& operator=(const HankelPlan&) = delete;

  const MultiIndexAlpha& alpha() const noexcept { return source_->alpha(); }
  const GridPtr& source() const noexcept { return source_; }
  const GridPtr& target() const noexcept { return target_; }
  /// K_j[y, x] = scaled_j(alpha_j - 1/2, x y) * w_x
  const std::vector<Eigen::MatrixXd>& forward() const noexcept { return forward_; }
  /// K_j[x, y] = scaled_j(alpha_j - 1/2, x y) * w_y
  const std::vector<Eigen::MatrixXd>& backward() const noexcept { return backward_; }
  /// Largest gap * frequency / (2 pi) over both directions and all axes.
  double nyquist_ratio() const noexcept { return nyquist_; }

  /// Plan for alpha + e_i on the same nodes (measures shifted by x_i^2).
  PlanPtr shifted(int i) const;

  /// Evaluates h_alpha(c) at the tensor product of the given per-axis points,
  /// where c lives on the target grid.
  std::vector<double> synthesize(const std::vector<double>& coeffs,
                                 const std::vector<std::vector<double>>& axis_points) const;

  /// Same at scattered points; `points` holds d coordinates per point.
  std::vector<double> synthesize_points(const std::vector<double>& coeffs,
                                        const std::vector<double>& points) const;

 private:
  GridPtr source_;
  GridPtr target_;
  std::vector<Eigen::MatrixXd> forward_;
  std::vector<Eigen::MatrixXd> backward_;
  double nyquist_;
  mutable std::mutex cache_mutex_;
  mutable std::map<int, PlanPtr> shifted_;
};

PlanPtr make_plan(GridPtr source, GridPtr target);

/// h_alpha f. Maps source -> target or target -> source depending on where
/// f lives; throws std::invalid_argument for any other grid.
GridFunction hankel_apply(const HankelPlan& plan, const GridFunction& f);

struct MultiplierOptions {
  /// m is singular at 0 (for instance 1/|y|)
  bool singular_at_zero = false;
  /// declared spectral cutoff: h_alpha f is treated as zero for |y| < r_min
  double r_min = 0.0;
  /// largest admissible fraction of spectral L^2 mass below r_min
  double mass_tolerance = 1e-8;
};

/// Fraction of sum |F|^2 w carried by target nodes with |y| < r_min.
double spectral_mass_below(const GridFunction& F, double r_min);

/// h_alpha(m(|y|) h_alpha f) for f on the source grid. A singular m needs
/// r_min > 0 and either a target grid avoiding |y| < r_min or f with
/// negligible spectrum there; otherwise std::domain_error.
GridFunction multiplier_apply(const HankelPlan& plan, const GridFunction& f,
                              const std::function<double(double)>& m,
                              const MultiplierOptions& options = {});

/// Same, with the transform h_alpha f already available on the target grid.
GridFunction multiplier_apply_spectral(const HankelPlan& plan, const GridFunction& F,
                                       const std::function<double(double)>& m,
                                       const MultiplierOptions& options = {});

}  // namespace brz
