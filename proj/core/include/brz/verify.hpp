#pragma once

// Checks around the bilinear embedding: the duality identity for R_i, the
// square functions, the Bellman field b(x, t) = B_kappa(u(x, t)) with
// u = (P_t f, P^1_t g_1, ..., P^d_t g_d) and its L_alpha lower bound, the
// embedding inequality itself and the aggregate theorem table.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "brz/bellman.hpp"
#include "brz/riesz.hpp"
#include "brz/semigroups.hpp"

namespace brz {

/// Nodes t_k = t_min e^{k step} up to t_max for integrals over (0, inf) in
/// log time: int F(t) dt ~ sum_k step t_k F(t_k).
struct TimeGrid {
  double t_min = 1e-5;
  double t_max = 50.0;
  double step = 0.2;

  void validate() const;
  std::vector<double> nodes() const;
  /// weights of int F(t) dt
  std::vector<double> weights() const;
};

struct VerificationReport {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  /// identity: |lhs - rhs| <= tolerance max(|lhs|, |rhs|, floor);
  /// inequality: lhs <= rhs (1 + tolerance)
  bool inequality = false;
  double floor = 1e-300;
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> metadata;

  /// relative discrepancy for identities, lhs / rhs for inequalities
  double discrepancy() const;
  void add(const std::string& key, double value);
  void add(const std::string& key, const std::string& value);
};

VerificationReport identity_report(std::string check, double lhs, double rhs, double tolerance,
                                   double floor = 1e-300);
VerificationReport inequality_report(std::string check, double lhs, double rhs, double tolerance);

std::string to_json(const VerificationReport& report);

// ---- duality identity and square functions --------------------------------------

/// LHS = <R_i f, g>, RHS = -4 int_0^inf int d_{x_i} P_t f d_t P^i_t g x^{2 alpha} dx t dt.
/// f must pass the strict spectral check of the Riesz transform. The parts of
/// the time integral outside [t_min, t_max] are bounded through
/// ||d P_t f||_2 ||d P^i_t g||_2 on the spectral side; throws
/// std::runtime_error when that bound exceeds a tenth of the tolerance budget.
VerificationReport lemma_identity_check(const PlanPtr& plan, const GridFunction& f,
                                        const GridFunction& g, int i, const TimeGrid& times = {},
                                        double tolerance = 1e-4);

enum class SquareFunction {
  /// (int t |d_t P^i_t f|^2 dt)^{1/2}
  time_conjugate,
  /// (int t |d_{x_i} P_t f|^2 dt)^{1/2}
  space
};

GridFunction g_function(const PlanPtr& plan, const GridFunction& f, SquareFunction kind, int i,
                        const TimeGrid& times = {});

// ---- Bellman field ------------------------------------------------------------------

/// Sample points for the field: `count` seeded (x, t) uniform in
/// [x_lo, x_hi]^d x [t_lo, t_hi]; every sample carries a 3^{d+1} stencil of step h.
struct FieldSampling {
  std::size_t count = 1000;
  double x_lo = 0.5;
  double x_hi = 4.0;
  double t_lo = 0.2;
  double t_hi = 3.0;
  double h = 0.01;
  std::uint64_t seed = 1;
};

struct FieldSample {
  std::vector<double> x;
  double t;
  /// u at the centre, zeta block first
  std::vector<double> u;
  /// L_alpha b by the finite-difference stencil
  double l_direct;
  /// L_alpha b from the Hessian, gradient and the commutator term
  double l_chain;
  /// |P_t f|_* |P_t g|_*
  double star_product;
  double b;
};

/// b = B_kappa(u) on samples. p >= 2 uses zeta = P_t f (m1 = 1), eta = the
/// conjugate components (m2 = d). For p < 2 the blocks are swapped,
/// b = B_{kappa,p'}(P_t g, P_t f) with m1 = d, m2 = 1.
struct BellmanField {
  BellmanShape shape;
  bool swapped;
  double gamma;
  double h;
  std::vector<FieldSample> samples;
  double min_b;
  /// min over samples and components of the conjugate values (>= 0 for g >= 0)
  double min_conjugate;
};

/// kappa must be positive; g has one nonnegative function per axis.
BellmanField build_bellman_field(const PlanPtr& plan, const GridFunction& f,
                                 const std::vector<GridFunction>& g, double p, double kappa,
                                 const FieldSampling& sampling = {}, const MollifierSpec& mollifier = {});

struct PointwiseReport {
  VerificationReport report;
  /// min of L_alpha b - gamma |P f|_* |P g|_* with the stencil value
  double min_slack_direct;
  /// same with the chain-rule value
  double min_slack_chain;
  /// max |direct - chain|
  double route_gap;
  double c_stencil;
  double h;
  std::size_t samples;
};

/// Passes iff min_slack_direct >= -c_stencil h^2.
PointwiseReport pointwise_bellman_inequality_check(const BellmanField& field, double c_stencil);

/// max |direct - chain| / h^2 on the p = 2 field for the same data and samples,
/// where B is quadratic and the gap is pure stencil error.
double calibrate_stencil(const PlanPtr& plan, const GridFunction& f, const std::vector<GridFunction>& g,
                         double kappa, const FieldSampling& sampling = {});

// ---- embedding ------------------------------------------------------------------------

struct EmbeddingReport {
  VerificationReport report;
  /// 4 int int |P_t f|_* |P_t g|_* x^{2 alpha} dx t dt (quadrature plus tail bound)
  double lhs;
  double f_norm;
  double g_norm;
  /// min over lambda of the right side for (lambda f, g / lambda)
  double rhs_minimized;
  /// 4 D_p ||f||_p |||g|||_p'
  double rhs_dp;
  /// rhs at lambda in {1/4, 1, 4}
  std::vector<std::pair<double, double>> lambda_rhs;
};

/// LHS <= (2 (1 + gamma) / gamma) (||f||_p^p + |||g|||_p'^p') at lambda = 1/4, 1, 4.
EmbeddingReport bilinear_embedding_check(const PlanPtr& plan, const GridFunction& f,
                                         const std::vector<GridFunction>& g, double p,
                                         const TimeGrid& times = {}, double tolerance = 1e-6);

// ---- theorem table --------------------------------------------------------------------

struct TheoremRow {
  int d;
  std::vector<double> alpha;
  double p;
  int k;
  std::string family;
  int trials;
  double max_ratio;
  /// (8 D_p)^k
  double proof_bound;
  /// 48^k (p* - 1)^k
  double bound;
  double energy_defect;
  bool pass;
};

struct TheoremReport {
  std::vector<TheoremRow> rows;
  /// worst relative spread of max_ratio across d for fixed (alpha pattern, p, k)
  double dimension_spread;
  bool pass;
};

std::vector<TheoremRow> theorem_rows(const std::vector<NormRatioReport>& reports);
/// Runs norm_ratio_experiment for every setup; rows share pattern labels
/// through `patterns` (same length as setups) for the dimension spread.
TheoremReport theorem_report(const std::vector<NormRatioSetup>& setups,
                             const std::vector<std::string>& patterns);

}  // namespace brz
