#pragma once

// Tensor-product quadrature on a truncated box in R_+^d for the measure
// x^{2 alpha} dx, sampled functions on such grids, and weighted norms.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace brz {

class MultiIndexAlpha {
 public:
  explicit MultiIndexAlpha(std::vector<double> alpha);
  static MultiIndexAlpha uniform(int d, double value);

  int dim() const noexcept { return static_cast<int>(alpha_.size()); }
  double operator[](int j) const { return alpha_.at(static_cast<std::size_t>(j)); }
  const std::vector<double>& values() const noexcept { return alpha_; }
  /// |alpha|, the component sum.
  double norm1() const noexcept { return sum_; }

  /// alpha + e_i
  MultiIndexAlpha shifted(int i) const;
  /// alpha with component i removed (requires d >= 2)
  MultiIndexAlpha hat(int i) const;

  bool operator==(const MultiIndexAlpha& other) const noexcept { return alpha_ == other.alpha_; }
  std::string to_string() const;

 private:
  std::vector<double> alpha_;
  double sum_;
};

class LebesgueExponent {
 public:
  explicit LebesgueExponent(double p);

  double p() const noexcept { return p_; }
  double conj() const noexcept { return conj_; }
  double star() const noexcept { return p_ > conj_ ? p_ : conj_; }
  /// p'(p'-1)/8 for p >= 2; for p < 2 the roles of p and p' are swapped.
  double gamma() const noexcept;

 private:
  double p_;
  double conj_;
};

enum class GridProfile { uniform, composite_log_linear };

GridProfile parse_grid_profile(std::string_view name);
std::string to_string(GridProfile profile);

struct AxisNodes {
  std::vector<double> nodes;
  /// weights of the unweighted rule (effective weight divided by x^{2 alpha_j})
  std::vector<double> base_weights;
  /// effective weights for x^{2 alpha_j} dx
  std::vector<double> weights;
};

class WeightedGrid {
 public:
  WeightedGrid(MultiIndexAlpha alpha, std::vector<AxisNodes> axes, double x_max,
               GridProfile profile);

  const MultiIndexAlpha& alpha() const noexcept { return alpha_; }
  int dim() const noexcept { return alpha_.dim(); }
  std::size_t size() const noexcept { return size_; }
  const AxisNodes& axis(int j) const { return axes_.at(static_cast<std::size_t>(j)); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  double x_max() const noexcept { return x_max_; }
  GridProfile profile() const noexcept { return profile_; }

  /// Effective weight of a flat (row-major) index.
  const std::vector<double>& weights() const noexcept { return flat_weights_; }
  void point(std::size_t flat, double* x) const;
  std::vector<double> point(std::size_t flat) const;
  /// |x| for every flat index.
  std::vector<double> radii() const;
  /// x_j at every node, in flat order
  std::vector<double> coordinate(int j) const;

  /// Largest gap between consecutive nodes on axis j (including 0 -> first node).
  double max_gap(int j) const;

  /// Same nodes, measure for alpha + e_i: effective weights times x_i^2.
  WeightedGrid shifted(int i) const;

  bool same_nodes(const WeightedGrid& other) const noexcept;
  bool operator==(const WeightedGrid& other) const noexcept;

 private:
  MultiIndexAlpha alpha_;
  std::vector<AxisNodes> axes_;
  double x_max_;
  GridProfile profile_;
  std::vector<std::size_t> shape_;
  std::size_t size_;
  std::vector<double> flat_weights_;
};

using GridPtr = std::shared_ptr<const WeightedGrid>;

/// Composite Gauss panels on (0, x_max] per axis. The first panel uses a
/// Gauss-Jacobi rule that absorbs x^{2 alpha_j}. Throws std::invalid_argument
/// for n < 8, x_max <= 0 or more than 1e8 total nodes, and std::runtime_error
/// if the moment validation fails.
GridPtr build_grid(const MultiIndexAlpha& alpha, int n_per_axis, double x_max,
                   GridProfile profile = GridProfile::uniform);

/// Same as build_grid but with a separate box size per axis.
GridPtr build_grid(const MultiIndexAlpha& alpha, int n_per_axis,
                   const std::vector<double>& x_max, GridProfile profile);

class GridFunction {
 public:
  GridFunction(GridPtr grid, std::vector<double> values);
  static GridFunction zeros(GridPtr grid);

  template <class F>
  static GridFunction sample(GridPtr grid, F&& fn) {
    std::vector<double> v(grid->size());
    std::vector<double> x(static_cast<std::size_t>(grid->dim()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      grid->point(k, x.data());
      v[k] = fn(x.data());
    }
    return GridFunction(std::move(grid), std::move(v));
  }

  const WeightedGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

  GridFunction scaled(double factor) const;
  double max_abs() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// (sum |f|^p w)^{1/p}
double lp_norm(const GridFunction& f, const LebesgueExponent& p);
double lp_norm(const GridFunction& f, double p);

/// ||(sum_i g_i^2)^{1/2}||_p for a vector-valued function.
double lp_norm(const std::vector<GridFunction>& g, const LebesgueExponent& p);

/// sum f g w. Throws std::invalid_argument when the grids differ.
double inner_product(const GridFunction& f, const GridFunction& g);

void require_same_grid(const WeightedGrid& a, const WeightedGrid& b, const char* what);

/// CSV with columns x_1..x_d,value.
void write_csv(const GridFunction& f, std::ostream& out);

/// Binary layout, all little-endian: magic "BRZG", u32 version, u32 d,
/// f64 alpha[d], u32 profile, f64 x_max, then per axis u64 n and f64 nodes[n],
/// f64 weights[n] (effective); payload u64 count and f64 values[count].
void write_binary(const GridFunction& f, std::ostream& out);
GridFunction read_binary(std::istream& in);

}  // namespace brz
