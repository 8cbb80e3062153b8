#include <algorithm>
#include <cmath>
#include <random>

#include "brz/families.hpp"
#include "brz/verify.hpp"
#include "doctest.h"

using namespace brz;

namespace {

PlanPtr plan_for(const MultiIndexAlpha& a, int n = 96) {
  return make_plan(build_grid(a, n, 11.0), build_grid(a, n, 8.5));
}

GridFunction spectral_f(const HankelPlan& plan, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return make_spectral_sample(plan, FamilySpec{}, rng).f;
}

std::vector<GridFunction> positive_g(const PlanPtr& plan, double width = 1.0) {
  std::vector<GridFunction> g;
  for (int i = 0; i < plan->alpha().dim(); ++i) g.push_back(conjugate_side_data(plan->source(), i, width));
  return g;
}

}  // namespace

TEST_CASE("time grid") {
  TimeGrid t{1e-2, 1e2, 0.5};
  const auto n = t.nodes();
  const auto w = t.weights();
  CHECK(n.front() == doctest::Approx(1e-2));
  CHECK(n.back() <= 1e2 * (1 + 1e-12));
  // int_a^b dt/t = log(b/a) is exact for the log trapezoid
  double s = 0;
  for (std::size_t k = 0; k < n.size(); ++k) s += w[k] / n[k];
  CHECK(s == doctest::Approx(std::log(n.back() / n.front())).epsilon(1e-12));
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0.1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TimeGrid{1.0, 0.5, 0.1}.validate()), std::invalid_argument);
}

TEST_CASE("report plumbing") {
  auto id = identity_report("x", 1.0, 1.0 + 1e-7, 1e-6);
  CHECK(id.pass);
  CHECK(!identity_report("x", 1.0, 1.1, 1e-6).pass);
  CHECK(identity_report("zero", 0.0, 0.0, 1e-6).pass);
  CHECK(inequality_report("y", 1.0, 1.0, 0.0).pass);
  CHECK(!inequality_report("y", 1.01, 1.0, 1e-3).pass);
  id.add("alpha", "(0.5)");
  const std::string j = to_json(id);
  CHECK(j.find("\"check\":\"x\"") != std::string::npos);
  CHECK(j.find("\"alpha\":\"(0.5)\"") != std::string::npos);
}

TEST_CASE("duality identity for R_i") {
  SUBCASE("g = 0") {
    auto plan = plan_for(MultiIndexAlpha({0.5}));
    auto f = spectral_f(*plan, 3);
    auto r = lemma_identity_check(plan, f, GridFunction::zeros(plan->source()), 0);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.pass);
  }
  SUBCASE("seeded pairs") {
    for (auto a : {MultiIndexAlpha({0.5}), MultiIndexAlpha({0.0, 1.0})}) {
      auto plan = plan_for(a);
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto f = spectral_f(*plan, 2 * seed);
        auto g = spectral_f(*plan, 2 * seed + 1);
        for (int i = 0; i < a.dim(); ++i) {
          auto r = lemma_identity_check(plan, f, g, i);
          CHECK(r.pass);
          CHECK(r.discrepancy() <= 1e-4);
          CHECK(std::abs(r.lhs) > 1e-3);
        }
      }
    }
  }
  SUBCASE("bilinear") {
    auto plan = plan_for(MultiIndexAlpha({0.5}));
    auto f = spectral_f(*plan, 5);
    auto g = spectral_f(*plan, 6);
    auto r1 = lemma_identity_check(plan, f, g, 0);
    auto r2 = lemma_identity_check(plan, f.scaled(2.0), g, 0);
    CHECK(r2.lhs == doctest::Approx(2 * r1.lhs).epsilon(1e-12));
    CHECK(r2.rhs == doctest::Approx(2 * r1.rhs).epsilon(1e-12));
    CHECK(r2.discrepancy() == doctest::Approx(r1.discrepancy()).epsilon(1e-6));
  }
  SUBCASE("refinement") {
    const MultiIndexAlpha a({0.5});
    auto coarse = plan_for(a, 96);
    auto fine = plan_for(a, 144);
    // same data on both grids: spectral samples built from one seed
    auto fc = spectral_f(*coarse, 9), gc = spectral_f(*coarse, 10);
    auto ff = spectral_f(*fine, 9), gf = spectral_f(*fine, 10);
    auto rc = lemma_identity_check(coarse, fc, gc, 0, TimeGrid{1e-5, 50, 0.8});
    auto rf = lemma_identity_check(fine, ff, gf, 0, TimeGrid{1e-5, 50, 0.2});
    CHECK(rf.discrepancy() < rc.discrepancy());
  }
  SUBCASE("unresolved time grid is refused") {
    auto plan = plan_for(MultiIndexAlpha({0.5}));
    CHECK_THROWS_AS(lemma_identity_check(plan, spectral_f(*plan, 1), spectral_f(*plan, 2), 0, TimeGrid{1e-1, 2, 0.2}),
                    std::runtime_error);
  }
}

TEST_CASE("square functions") {
  const MultiIndexAlpha a({0.5, 1.0});
  auto plan = plan_for(a);
  auto f = spectral_f(*plan, 4);
  SUBCASE("zero and homogeneity") {
    auto z = g_function(plan, GridFunction::zeros(plan->source()), SquareFunction::space, 0);
    CHECK(z.max_abs() == 0.0);
    auto g1 = g_function(plan, f, SquareFunction::time_conjugate, 1);
    auto g2 = g_function(plan, f.scaled(-3.0), SquareFunction::time_conjugate, 1);
    for (std::size_t k = 0; k < g1.size(); ++k) CHECK(g2[k] == doctest::Approx(3 * g1[k]).epsilon(1e-12));
  }
  SUBCASE("L2 norms against the spectral side") {
    // int_0^inf t |y|^2 e^{-2|y| t} dt = 1/4
    const auto y = plan->target()->coordinate(0);
    const auto r = plan->target()->radii();
    const auto& F = PoissonExtension(plan, f).spectrum();
    const auto& w = plan->target()->weights();
    double space = 0;
    for (std::size_t k = 0; k < r.size(); ++k) space += r[k] > 0 ? 0.25 * y[k] * y[k] / (r[k] * r[k]) * F[k] * F[k] * w[k] : 0;
    const double gs = lp_norm(g_function(plan, f, SquareFunction::space, 0), 2.0);
    CHECK(gs * gs == doctest::Approx(space).epsilon(1e-6));
    const double gt = lp_norm(g_function(plan, f, SquareFunction::time_conjugate, 0), 2.0);
    // against the spectrum actually held on the shifted plan: f / x_0 is
    // singular at x_0 = 0 and its transform leaks past the frequency box, so
    // Parseval between the two grids only holds to ~5e-4 here
    const double held = lp_norm(ConjugateExtension(plan, f, 0).spectrum(), 2.0);
    CHECK(gt * gt == doctest::Approx(0.25 * held * held).epsilon(1e-3));
  }
  SUBCASE("Lp ratios are stable under refinement") {
    const MultiIndexAlpha a1({0.5});
    for (double p : {2.0, 4.0}) {
      double ratio[2];
      int n[2] = {96, 144};
      for (int j = 0; j < 2; ++j) {
        auto pl = plan_for(a1, n[j]);
        auto fj = spectral_f(*pl, 4);
        ratio[j] = lp_norm(g_function(pl, fj, SquareFunction::time_conjugate, 0), p) / lp_norm(fj, p);
      }
      CHECK(std::isfinite(ratio[0]));
      CHECK(std::abs(ratio[1] / ratio[0] - 1) < 1e-3);
    }
  }
}

TEST_CASE("Bellman field") {
  auto plan = plan_for(MultiIndexAlpha({0.5}));
  auto f = spectral_f(*plan, 7);
  auto g = positive_g(plan);
  FieldSampling fs;
  fs.count = 40;

  SUBCASE("zero data gives a constant field") {
    auto zero = GridFunction::zeros(plan->source());
    auto field = build_bellman_field(plan, zero, {zero}, 3.0, 0.1, fs);
    const double b0 = BellmanFunction({1, 1, 3.0, 0.1}).beta(0, 0) / 2;
    CHECK(b0 > 0);
    for (const auto& s : field.samples) {
      CHECK(s.b == doctest::Approx(b0).epsilon(1e-14));
      CHECK(s.star_product == 0.0);
    }
    auto rep = pointwise_bellman_inequality_check(field, 0.0);
    CHECK(rep.report.pass);
  }
  SUBCASE("nonnegative values and conjugate components") {
    for (double p : {1.5, 3.0}) {
      auto field = build_bellman_field(plan, f, g, p, 0.1, fs);
      CHECK(field.swapped == (p < 2));
      CHECK(field.min_b >= 0);
      CHECK(field.min_conjugate >= 0);
      for (const auto& s : field.samples) {
        for (double v : s.u) CHECK(std::isfinite(v));
      }
    }
  }
  SUBCASE("small-time trace") {
    FieldSampling near = fs;
    near.t_lo = 0.011;
    near.t_hi = 0.012;
    auto field = build_bellman_field(plan, f, g, 3.0, 0.1, near);
    const PoissonExtension pe(plan, f);
    const ConjugateExtension ce(plan, g[0], 0);
    const BellmanFunction bf({1, 1, 3.0, 0.1});
    for (const auto& s : field.samples) {
      const std::vector<std::vector<double>> at{{s.x[0]}};
      Eigen::VectorXd z(1), e(1);
      z << pe.value_at(1e-12, at)[0];
      e << ce.value_at(1e-12, at)[0];
      CHECK(std::abs(s.b - bf.value(z, e)) < 0.05 * (1 + std::abs(s.b)));
    }
  }
  SUBCASE("sampling box is checked") {
    FieldSampling bad = fs;
    bad.t_lo = 0.005;
    CHECK_THROWS_AS(build_bellman_field(plan, f, g, 3.0, 0.1, bad), std::invalid_argument);
    CHECK_THROWS_AS(build_bellman_field(plan, f, g, 3.0, 0.0, fs), std::invalid_argument);
    CHECK_THROWS_AS(build_bellman_field(plan, f, {}, 3.0, 0.1, fs), std::invalid_argument);
  }
}

TEST_CASE("pointwise lower bound for L_alpha b") {
  auto plan = plan_for(MultiIndexAlpha({0.5}));
  auto f = spectral_f(*plan, 7);
  auto g = positive_g(plan);
  FieldSampling fs;
  fs.count = 60;

  SUBCASE("p = 2 routes agree to stencil error") {
    const double c = calibrate_stencil(plan, f, g, 0.1, fs);
    CHECK(c > 0);
    CHECK(c < 1e3);
  }
  SUBCASE("routes converge at second order") {
    auto f1 = build_bellman_field(plan, f, g, 3.0, 0.1, fs);
    fs.h = 0.005;
    auto f2 = build_bellman_field(plan, f, g, 3.0, 0.1, fs);
    const double g1 = pointwise_bellman_inequality_check(f1, 0).route_gap;
    const double g2 = pointwise_bellman_inequality_check(f2, 0).route_gap;
    CHECK(std::log2(g1 / g2) > 1.8);
    CHECK(std::log2(g1 / g2) < 2.2);
  }
  SUBCASE("slack d = 1, p = 3") {
    const double c = calibrate_stencil(plan, f, g, 0.1, fs);
    auto field = build_bellman_field(plan, f, g, 3.0, 0.1, fs);
    auto rep = pointwise_bellman_inequality_check(field, c);
    CHECK(rep.report.pass);
    double scale = 0;
    for (const auto& s : field.samples) scale = std::max(scale, std::abs(s.l_chain));
    CHECK(rep.min_slack_direct >= -1e-3 * scale);
    CHECK(rep.min_slack_chain >= -1e-3 * scale);
  }
  SUBCASE("f = 0 leaves a nonnegative left side") {
    auto zero = GridFunction::zeros(plan->source());
    auto field = build_bellman_field(plan, zero, g, 3.0, 0.1, fs);
    auto rep = pointwise_bellman_inequality_check(field, calibrate_stencil(plan, zero, g, 0.1, fs));
    CHECK(rep.report.pass);
    for (const auto& s : field.samples) CHECK(s.star_product == 0.0);
  }
  SUBCASE("deterministic") {
    auto a = build_bellman_field(plan, f, g, 3.0, 0.1, fs);
    auto b = build_bellman_field(plan, f, g, 3.0, 0.1, fs);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
      CHECK(a.samples[k].l_direct == b.samples[k].l_direct);
      CHECK(a.samples[k].l_chain == b.samples[k].l_chain);
    }
  }
}

TEST_CASE("bilinear embedding") {
  SUBCASE("g = 0") {
    auto plan = plan_for(MultiIndexAlpha({0.5}));
    auto zero = GridFunction::zeros(plan->source());
    auto r = bilinear_embedding_check(plan, spectral_f(*plan, 1), {zero}, 3.0);
    CHECK(r.lhs == 0.0);
    CHECK(r.report.pass);
  }
  SUBCASE("lambda sweep and the minimized form") {
    auto plan = plan_for(MultiIndexAlpha({0.5}));
    auto f = spectral_f(*plan, 2);
    auto g = positive_g(plan);
    for (double p : {1.5, 3.0, 8.0}) {
      auto r = bilinear_embedding_check(plan, f, g, p);
      CHECK(r.report.pass);
      REQUIRE(r.lambda_rhs.size() == 3);
      for (auto [lambda, rhs] : r.lambda_rhs) CHECK(r.lhs <= rhs);
      CHECK(std::abs(r.rhs_minimized / r.rhs_dp - 1) <= 0.05);
      // min_l (l^p A + l^{-p'} B) = p (p'/p)^{1/p'} A^{1/p} B^{1/p'} with the
      // prefactor 2 (1 + gamma) / gamma; independent of d_p_constant
      const LebesgueExponent e(p);
      const double q = e.conj(), gm = e.gamma();
      const double oracle = 2 * (1 + gm) / gm * p * std::pow(q / p, 1 / q) * r.f_norm * r.g_norm;
      CHECK(r.rhs_minimized == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
  SUBCASE("scale covariance") {
    auto plan = plan_for(MultiIndexAlpha({0.5}));
    auto f = spectral_f(*plan, 2);
    auto g = positive_g(plan);
    auto base = bilinear_embedding_check(plan, f, g, 4.0);
    for (double lambda : {0.25, 4.0}) {
      std::vector<GridFunction> gl;
      for (const auto& gi : g) gl.push_back(gi.scaled(1 / lambda));
      auto r = bilinear_embedding_check(plan, f.scaled(lambda), gl, 4.0);
      CHECK(r.lhs == doctest::Approx(base.lhs).epsilon(1e-10));
      CHECK(r.rhs_minimized == doctest::Approx(base.rhs_minimized).epsilon(1e-8));
      CHECK(r.lhs <= r.rhs_minimized);
    }
  }
  SUBCASE("d = 2, alpha = (0, 1), p = 4") {
    auto plan = plan_for(MultiIndexAlpha({0.0, 1.0}));
    auto r = bilinear_embedding_check(plan, spectral_f(*plan, 3), positive_g(plan), 4.0);
    CHECK(r.report.pass);
    CHECK(r.lhs <= r.rhs_minimized);
  }
}

TEST_CASE("theorem table") {
  NormRatioSetup s;
  s.alpha = MultiIndexAlpha({0.5});
  s.p = {1.5, 2.0, 4.0};
  s.trials = 4;
  auto rep = theorem_report({s}, {"half"});
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.pass);
  for (const auto& row : rep.rows) {
    CHECK(row.max_ratio <= row.proof_bound);
    CHECK(row.proof_bound <= row.bound);
    if (row.p == 2.0) CHECK(row.max_ratio <= 1 + 1e-6);
  }
  CHECK(rep.dimension_spread == 0.0);
  CHECK_THROWS_AS(theorem_report({s}, {}), std::invalid_argument);
}
