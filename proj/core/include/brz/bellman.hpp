#pragma once

// The Nazarov-Treil Bellman function
//   beta_p(s1, s2) = s1^p + s2^p' + gamma * (s1^2 s2^{2-p'}       if s1^p <= s2^p',
//                                            (2/p) s1^p + (2/p' - 1) s2^p'  otherwise)
// for p >= 2, B_p(zeta, eta) = beta_p(|zeta|, |eta|) / 2 on R^m1 x R^m2, and its
// mollification B_{kappa,p} = B_p * psi_kappa.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "brz/grid.hpp"

namespace brz {

struct BellmanShape {
  int m1 = 1;
  int m2 = 1;
  /// p >= 2; callers swap the roles of f and g for p < 2
  double p = 2.0;
  /// 0 is the unmollified function
  double kappa = 0.0;

  void validate() const;
  double conj() const { return p / (p - 1.0); }
  /// p'(p'-1)/8
  double gamma() const;
};

double beta_p(const BellmanShape& shape, double s1, double s2);

/// Smooth radial bump exp(-1/(1 - |w/kappa|^2)) on the ball of radius kappa in
/// R^{m1+m2}, normalized so the discrete rule has unit mass.
struct MollifierSpec {
  int radial_nodes = 48;
  /// nodes for the angle between the two blocks
  int polar_nodes = 16;
  /// nodes for the first coordinate on each block's sphere (blocks of dimension >= 2)
  int sphere_nodes = 12;
  /// above m1 + m2 = 4 the tensor rule is refused unless this is positive;
  /// then that many seeded uniform points of the ball are used
  std::size_t monte_carlo = 0;
  std::uint64_t seed = 1;
};

/// Derivatives of B at the reduced point zeta = r e_1, eta = s e_1.
struct BiRadialJet {
  double value;
  double d_r;
  double d_s;
  double d_rr;
  double d_rs;
  double d_ss;
  /// second derivative along a direction of the zeta block orthogonal to e_1
  /// (equals d_r / r for r > 0); zero when m1 = 1
  double d_tt_zeta;
  double d_tt_eta;
};

enum class DerivativeMethod {
  /// exact identity d B_kappa = B_p * d psi_kappa, same quadrature as the value
  mollifier,
  /// central differences with one Richardson step
  finite_difference
};

class BellmanFunction {
 public:
  explicit BellmanFunction(BellmanShape shape, MollifierSpec spec = {});

  const BellmanShape& shape() const noexcept { return shape_; }
  const MollifierSpec& mollifier() const noexcept { return spec_; }
  /// sum of the discrete rule's psi weights before normalization, divided by
  /// the continuous mass of the bump (1 up to quadrature error)
  double rule_mass_ratio() const noexcept { return mass_ratio_; }
  std::size_t rule_size() const noexcept { return nodes_.size(); }

  /// beta_{kappa,p}(r, s) = 2 B_{kappa,p}(r e_1, s e_1)
  double beta(double r, double s) const;
  double value(const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta) const;
  /// value and derivatives up to order two at the reduced point (kappa > 0)
  BiRadialJet jet(double r, double s) const;

  /// kappa = 0: finite differences only, and the point must be farther than
  /// 1e-3 from {eta = 0 or |zeta|^p = |eta|^p'} (std::domain_error otherwise).
  Eigen::VectorXd gradient(const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta,
                           DerivativeMethod method = DerivativeMethod::mollifier) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta,
                          DerivativeMethod method = DerivativeMethod::mollifier) const;

  /// distance from (r, s) to the set where B_p fails to be C^2, measured as
  /// min(s, |r - s^{p'/p}|)
  double singular_distance(double r, double s) const;

 private:
  // weights already multiplied by psi or its derivatives, normalized so the
  // psi weights sum to 1
  struct Node {
    double a1;  // w . e_1 in each block
    double a2;
    double q1;  // |w_1|^2, |w_2|^2
    double q2;
    double c0;
    double c_r;
    double c_s;
    double c_rr;
    double c_rs;
    double c_ss;
    double c_tt1;
    double c_tt2;
  };
  double closed(double r, double s) const;
  double fd_value(const Eigen::VectorXd& x) const;

  BellmanShape shape_;
  MollifierSpec spec_;
  std::vector<Node> nodes_;
  double mass_ratio_ = 1.0;
};

/// B_p(zeta, eta) = beta_p(|zeta|, |eta|) / 2 (shape.kappa must be 0).
double bellman_B(const BellmanShape& shape, const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta);

struct TauSearchResult {
  bool present;
  /// maximizer of the margin
  double tau;
  /// lambda_min(H - (gamma/2) blockdiag(tau Id_m1, Id_m2 / tau)) at tau
  double margin;
  /// ends of the certified interval {tau : margin(tau) >= -1e-9} (0 if absent)
  double tau_lo;
  double tau_hi;
};

/// Scans 60 log-spaced tau in [1e-6, 1e6], then refines by golden section
/// (the margin is concave in tau) and bisects for the interval ends. Throws
/// std::invalid_argument when H is not symmetric or not (m1+m2) square.
TauSearchResult tau_search(const Eigen::MatrixXd& H, double gamma, int m1, int m2);

// ---- certification sweeps ---------------------------------------------------------

struct GradientBoundsReport {
  BellmanShape shape;
  int grid_n;
  double r_max;
  std::size_t points;
  /// size bound 0 <= beta <= (1+gamma)((r+kappa)^p + (s+kappa)^p')
  std::size_t b1_holds;
  /// min over points of the upper slack relative to the bound
  double b1_min_slack;
  /// sign conditions d_r beta >= 0, d_s beta >= 0, with a tolerance of
  /// 1e-10 times the local bound shape for quadrature rounding
  std::size_t b2_signs_hold;
  double b2_min_dr;
  double b2_min_ds;
  /// empirical C_p on this grid and on the half-resolution subgrid
  double cp;
  double cp_coarse;
};

/// Size bound and gradient signs on the grid r, s in {r_max k / grid_n : k = 1..grid_n}.
GradientBoundsReport certify_bounds(const BellmanFunction& b, int grid_n = 200, double r_max = 5.0);

struct HessianRow {
  double r;
  double s;
  TauSearchResult tau;
  double singular_distance;
};

struct HessianReport {
  BellmanShape shape;
  std::uint64_t seed;
  std::vector<HessianRow> rows;
  std::size_t certified;
  double rate;
};

/// kappa = 0 sweeps only use points at least this far from the singular set.
inline constexpr double kUnmollifiedClearance = 1e-2;

/// Hessian condition (tau_search) at `samples` seeded points (r, s) uniform in (0, r_max]^2. For
/// kappa = 0 points within kUnmollifiedClearance of the singular set are
/// redrawn and the Hessian comes from finite differences.
HessianReport certify_hessian(const BellmanFunction& b, std::size_t samples, std::uint64_t seed,
                              double r_max = 5.0);

/// CSV columns p,kappa,m1,m2,r,s,tau_or_absent,min_eig_margin.
void write_certification_csv(const HessianReport& report, std::ostream& out);

}  // namespace brz
