#include "brz/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "brz/quadrature.hpp"
#include "parallel.hpp"

namespace brz {

// ---------------------------------------------------------------- alpha

MultiIndexAlpha::MultiIndexAlpha(std::vector<double> alpha) : alpha_(std::move(alpha)), sum_(0.0) {
  if (alpha_.empty()) throw std::invalid_argument("alpha must have at least one component");
  for (double a : alpha_) {
    if (!std::isfinite(a) || a < 0.0) {
      throw std::domain_error("alpha components must be finite and >= 0");
    }
    sum_ += a;
  }
}

MultiIndexAlpha MultiIndexAlpha::uniform(int d, double value) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  return MultiIndexAlpha(std::vector<double>(static_cast<std::size_t>(d), value));
}

MultiIndexAlpha MultiIndexAlpha::shifted(int i) const {
  std::vector<double> a = alpha_;
  a.at(static_cast<std::size_t>(i)) += 1.0;
  return MultiIndexAlpha(std::move(a));
}

MultiIndexAlpha MultiIndexAlpha::hat(int i) const {
  if (dim() < 2) throw std::invalid_argument("cannot drop the only component of alpha");
  std::vector<double> a = alpha_;
  a.erase(a.begin() + i);
  return MultiIndexAlpha(std::move(a));
}

std::string MultiIndexAlpha::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t j = 0; j < alpha_.size(); ++j) os << (j ? "," : "") << alpha_[j];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- exponent

LebesgueExponent::LebesgueExponent(double p) : p_(p), conj_(0.0) {
  if (!std::isfinite(p) || p <= 1.0) {
    throw std::domain_error("Lebesgue exponent must lie in (1, inf)");
  }
  conj_ = p / (p - 1.0);
}

double LebesgueExponent::gamma() const noexcept {
  const double q = p_ < conj_ ? p_ : conj_;
  return q * (q - 1.0) / 8.0;
}

// ---------------------------------------------------------------- profile

GridProfile parse_grid_profile(std::string_view name) {
  if (name == "uniform") return GridProfile::uniform;
  if (name == "composite-log-linear") return GridProfile::composite_log_linear;
  throw std::invalid_argument("unknown grid profile '" + std::string(name) + "'");
}

std::string to_string(GridProfile profile) {
  return profile == GridProfile::uniform ? "uniform" : "composite-log-linear";
}

// ---------------------------------------------------------------- grid

WeightedGrid::WeightedGrid(MultiIndexAlpha alpha, std::vector<AxisNodes> axes, double x_max,
                           GridProfile profile)
    : alpha_(std::move(alpha)), axes_(std::move(axes)), x_max_(x_max), profile_(profile),
      size_(1) {
  if (static_cast<int>(axes_.size()) != alpha_.dim()) {
    throw std::invalid_argument("grid axis count does not match alpha");
  }
  for (const AxisNodes& ax : axes_) {
    if (ax.nodes.empty() || ax.nodes.size() != ax.weights.size() ||
        ax.nodes.size() != ax.base_weights.size()) {
      throw std::invalid_argument("inconsistent axis node/weight arrays");
    }
    for (std::size_t k = 0; k < ax.nodes.size(); ++k) {
      if (!(ax.nodes[k] > 0.0) || (k > 0 && !(ax.nodes[k] > ax.nodes[k - 1]))) {
        throw std::invalid_argument("grid nodes must be positive and strictly increasing");
      }
      if (!(ax.weights[k] > 0.0)) throw std::invalid_argument("grid weights must be positive");
    }
    shape_.push_back(ax.nodes.size());
    size_ *= ax.nodes.size();
  }
  flat_weights_.assign(size_, 1.0);
  std::size_t stride = size_;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    stride /= shape_[j];
    for (std::size_t k = 0; k < size_; ++k) {
      flat_weights_[k] *= axes_[j].weights[(k / stride) % shape_[j]];
    }
  }
}

void WeightedGrid::point(std::size_t flat, double* x) const {
  for (int j = dim() - 1; j >= 0; --j) {
    const std::size_t n = shape_[static_cast<std::size_t>(j)];
    x[j] = axes_[static_cast<std::size_t>(j)].nodes[flat % n];
    flat /= n;
  }
}

std::vector<double> WeightedGrid::point(std::size_t flat) const {
  std::vector<double> x(static_cast<std::size_t>(dim()));
  point(flat, x.data());
  return x;
}

std::vector<double> WeightedGrid::radii() const {
  std::vector<double> r(size_);
  std::vector<double> x(static_cast<std::size_t>(dim()));
  for (std::size_t k = 0; k < size_; ++k) {
    point(k, x.data());
    double s = 0.0;
    for (double v : x) s += v * v;
    r[k] = std::sqrt(s);
  }
  return r;
}

std::vector<double> WeightedGrid::coordinate(int j) const {
  const auto& nodes = axis(j).nodes;
  std::size_t inner = 1;
  for (std::size_t k = static_cast<std::size_t>(j) + 1; k < shape_.size(); ++k) inner *= shape_[k];
  std::vector<double> c(size_);
  for (std::size_t k = 0; k < size_; ++k) c[k] = nodes[(k / inner) % nodes.size()];
  return c;
}

double WeightedGrid::max_gap(int j) const {
  const auto& nodes = axis(j).nodes;
  double gap = nodes.front();
  for (std::size_t k = 1; k < nodes.size(); ++k) gap = std::max(gap, nodes[k] - nodes[k - 1]);
  return gap;
}

WeightedGrid WeightedGrid::shifted(int i) const {
  std::vector<AxisNodes> axes = axes_;
  AxisNodes& ax = axes.at(static_cast<std::size_t>(i));
  for (std::size_t k = 0; k < ax.nodes.size(); ++k) ax.weights[k] *= ax.nodes[k] * ax.nodes[k];
  return WeightedGrid(alpha_.shifted(i), std::move(axes), x_max_, profile_);
}

bool WeightedGrid::same_nodes(const WeightedGrid& other) const noexcept {
  if (other.axes_.size() != axes_.size()) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    if (axes_[j].nodes != other.axes_[j].nodes) return false;
  }
  return true;
}

bool WeightedGrid::operator==(const WeightedGrid& other) const noexcept {
  if (this == &other) return true;
  if (!(alpha_ == other.alpha_) || !same_nodes(other)) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    if (axes_[j].weights != other.axes_[j].weights) return false;
  }
  return true;
}

namespace {

int panel_order(int n) {
  for (int q : {16, 12, 10, 8}) {
    if (n % q == 0) return q;
  }
  return n;
}

// Panel end points on (0, x_max].
std::vector<double> panel_breaks(int panels, double x_max, GridProfile profile) {
  std::vector<double> breaks{0.0};
  int log_panels = 0;
  if (profile == GridProfile::composite_log_linear && x_max > 2.0 && panels >= 4) {
    log_panels = std::min(3, panels / 4);
    for (int k = log_panels - 1; k >= 0; --k) breaks.push_back(std::ldexp(1.0, -k));
  }
  const int rest = panels - log_panels;
  const double start = breaks.back();
  for (int k = 1; k <= rest; ++k) breaks.push_back(start + (x_max - start) * k / rest);
  breaks.back() = x_max;
  return breaks;
}

AxisNodes build_axis(double alpha, int n, double x_max, GridProfile profile) {
  const int q = panel_order(n);
  const auto breaks = panel_breaks(n / q, x_max, profile);
  const double two_a = 2.0 * alpha;
  AxisNodes ax;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double lo = breaks[p];
    const double hi = breaks[p + 1];
    if (p == 0) {
      const QuadratureRule rule = gauss_jacobi_left(q, two_a, lo, hi);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        ax.nodes.push_back(rule.nodes[k]);
        ax.weights.push_back(rule.weights[k]);
        ax.base_weights.push_back(rule.weights[k] / std::pow(rule.nodes[k], two_a));
      }
    } else {
      const QuadratureRule rule = gauss_legendre(q, lo, hi);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        ax.nodes.push_back(rule.nodes[k]);
        ax.base_weights.push_back(rule.weights[k]);
        ax.weights.push_back(rule.weights[k] * std::pow(rule.nodes[k], two_a));
      }
    }
  }
  return ax;
}

void validate_axis(const AxisNodes& ax, double alpha, double x_max) {
  for (int k = 0; k <= 4; ++k) {
    const double e = k + 2.0 * alpha + 1.0;
    const double exact = std::pow(x_max, e) / e;
    double sum = 0.0;
    for (std::size_t m = 0; m < ax.nodes.size(); ++m) sum += ax.weights[m] * std::pow(ax.nodes[m], k);
    const double tol = k == 0 ? 1e-10 : 1e-8;
    if (std::abs(sum - exact) > tol * exact) {
      throw std::runtime_error("grid moment validation failed for x^" + std::to_string(k));
    }
  }
}

}  // namespace

GridPtr build_grid(const MultiIndexAlpha& alpha, int n_per_axis,
                   const std::vector<double>& x_max, GridProfile profile) {
  if (n_per_axis < 8) throw std::invalid_argument("n_per_axis must be >= 8");
  if (static_cast<int>(x_max.size()) != alpha.dim()) {
    throw std::invalid_argument("one box size per axis required");
  }
  const double total = std::pow(static_cast<double>(n_per_axis), alpha.dim());
  if (total > 1e8) {
    throw std::invalid_argument("grid budget exceeded: " + std::to_string(total) + " nodes");
  }
  std::vector<AxisNodes> axes;
  double largest = 0.0;
  for (int j = 0; j < alpha.dim(); ++j) {
    const double X = x_max[static_cast<std::size_t>(j)];
    if (!(X > 0.0) || !std::isfinite(X)) throw std::invalid_argument("x_max must be positive");
    axes.push_back(build_axis(alpha[j], n_per_axis, X, profile));
    validate_axis(axes.back(), alpha[j], X);
    largest = std::max(largest, X);
  }
  return std::make_shared<const WeightedGrid>(alpha, std::move(axes), largest, profile);
}

GridPtr build_grid(const MultiIndexAlpha& alpha, int n_per_axis, double x_max,
                   GridProfile profile) {
  return build_grid(alpha, n_per_axis,
                    std::vector<double>(static_cast<std::size_t>(alpha.dim()), x_max), profile);
}

// ---------------------------------------------------------------- functions

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("GridFunction needs a grid");
  if (values_.size() != grid_->size()) {
    throw std::invalid_argument("GridFunction value count does not match grid size");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::domain_error("GridFunction values must be finite");
  }
}

GridFunction GridFunction::zeros(GridPtr grid) {
  const std::size_t n = grid->size();
  return GridFunction(std::move(grid), std::vector<double>(n, 0.0));
}

GridFunction GridFunction::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return GridFunction(grid_, std::move(v));
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const WeightedGrid& a, const WeightedGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

double lp_norm(const GridFunction& f, double p) { return lp_norm(f, LebesgueExponent(p)); }

double lp_norm(const GridFunction& f, const LebesgueExponent& p) {
  const auto& w = f.grid().weights();
  const auto& v = f.values();
  const double e = p.p();
  // scale by the max to keep |f|^p in range
  const double m = f.max_abs();
  if (m == 0.0) return 0.0;
  const double s = detail::ordered_sum(v.size(), [&](std::size_t k) {
    return std::pow(std::abs(v[k]) / m, e) * w[k];
  });
  return m * std::pow(s, 1.0 / e);
}

double lp_norm(const std::vector<GridFunction>& g, const LebesgueExponent& p) {
  if (g.empty()) return 0.0;
  for (const auto& gi : g) require_same_grid(g.front().grid(), gi.grid(), "lp_norm");
  std::vector<double> mod(g.front().size(), 0.0);
  for (const auto& gi : g) {
    for (std::size_t k = 0; k < mod.size(); ++k) mod[k] += gi[k] * gi[k];
  }
  for (double& v : mod) v = std::sqrt(v);
  return lp_norm(GridFunction(g.front().grid_ptr(), std::move(mod)), p);
}

double inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  const auto& w = f.grid().weights();
  return detail::ordered_sum(f.size(), [&](std::size_t k) { return f[k] * g[k] * w[k]; });
}

// ---------------------------------------------------------------- io

void write_csv(const GridFunction& f, std::ostream& out) {
  const int d = f.grid().dim();
  for (int j = 0; j < d; ++j) out << "x_" << (j + 1) << ',';
  out << "value\n";
  std::vector<double> x(static_cast<std::size_t>(d));
  char buf[32];
  for (std::size_t k = 0; k < f.size(); ++k) {
    f.grid().point(k, x.data());
    for (double v : x) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", f[k]);
    out << buf << '\n';
  }
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) throw std::runtime_error("truncated grid function stream");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'B', 'R', 'Z', 'G'};

}  // namespace

void write_binary(const GridFunction& f, std::ostream& out) {
  const WeightedGrid& g = f.grid();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (double a : g.alpha().values()) put<double>(out, a);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.profile()));
  put<double>(out, g.x_max());
  for (int j = 0; j < g.dim(); ++j) {
    const AxisNodes& ax = g.axis(j);
    put<std::uint64_t>(out, ax.nodes.size());
    for (double v : ax.nodes) put<double>(out, v);
    for (double v : ax.weights) put<double>(out, v);
  }
  put<std::uint64_t>(out, f.size());
  for (double v : f.values()) put<double>(out, v);
}

GridFunction read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a grid function stream");
  }
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported grid function version");
  const auto d = get<std::uint32_t>(in);
  if (d == 0 || d > 16) throw std::runtime_error("bad dimension in grid function stream");
  std::vector<double> alpha(d);
  for (double& a : alpha) a = get<double>(in);
  const auto profile = static_cast<GridProfile>(get<std::uint32_t>(in));
  const double x_max = get<double>(in);
  std::vector<AxisNodes> axes(d);
  for (std::uint32_t j = 0; j < d; ++j) {
    const auto n = get<std::uint64_t>(in);
    if (n == 0 || n > 100000000ULL) throw std::runtime_error("bad axis size");
    axes[j].nodes.resize(n);
    axes[j].base_weights.resize(n);
    for (double& v : axes[j].nodes) v = get<double>(in);
    axes[j].weights.resize(n);
    for (double& v : axes[j].weights) v = get<double>(in);
    for (std::size_t k = 0; k < n; ++k) {
      axes[j].base_weights[k] = axes[j].weights[k] / std::pow(axes[j].nodes[k], 2.0 * alpha[j]);
    }
  }
  auto grid = std::make_shared<const WeightedGrid>(MultiIndexAlpha(alpha), std::move(axes),
                                                   x_max, profile);
  const auto count = get<std::uint64_t>(in);
  if (count != grid->size()) throw std::runtime_error("payload size does not match grid");
  std::vector<double> values(count);
  for (double& v : values) v = get<double>(in);
  return GridFunction(std::move(grid), std::move(values));
}

}  // namespace brz
