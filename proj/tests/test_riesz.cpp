#include <cmath>
#include <numbers>
#include <random>

#include "brz/quadrature.hpp"
#include "brz/riesz.hpp"
#include "doctest.h"

using namespace brz;

namespace {

PlanPtr bump_plan(const MultiIndexAlpha& a, int n = 96, double x_max = 11.0, double y_max = 8.5) {
  return make_plan(build_grid(a, n, x_max), build_grid(a, n, y_max));
}

SpectralSample sample(const HankelPlan& plan, std::uint64_t seed,
                      FamilyKind kind = FamilyKind::annulus_bump) {
  std::mt19937_64 rng(seed);
  FamilySpec spec;
  spec.kind = kind;
  return make_spectral_sample(plan, spec, rng);
}

// -x_i h_{alpha+e_i}(F/|y|) summed directly at arbitrary points
std::vector<double> multiplier_at(const HankelPlan& plan, const GridFunction& F, int i,
                                  const std::vector<double>& pts) {
  const auto r = plan.target()->radii();
  std::vector<double> g(F.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = r[k] < 0.25 ? 0.0 : F[k] / r[k];
  auto v = plan.shifted(i)->synthesize_points(g, pts);
  const std::size_t d = static_cast<std::size_t>(plan.alpha().dim());
  for (std::size_t q = 0; q < v.size(); ++q) v[q] *= -pts[q * d + static_cast<std::size_t>(i)];
  return v;
}

double closed_kernel(double x, double y) {
  return -(1.0 / std::numbers::pi) * (1.0 / (x - y) + 1.0 / (x + y));
}

}  // namespace

TEST_CASE("zero input and linearity") {
  const MultiIndexAlpha a({0.5, 1.0});
  auto plan = bump_plan(a);
  RieszOperator op(plan, 1);
  CHECK(riesz_apply(op, GridFunction::zeros(plan->source())).max_abs() == 0.0);
  const auto s1 = sample(*plan, 1);
  const auto s2 = sample(*plan, 2);
  std::vector<double> mix(s1.f.size());
  for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = 2.0 * s1.f[k] - 3.0 * s2.f[k];
  const auto lhs = riesz_apply(op, GridFunction(plan->source(), mix));
  const auto r1 = riesz_apply(op, s1.f);
  const auto r2 = riesz_apply(op, s2.f);
  double err = 0.0;
  for (std::size_t k = 0; k < mix.size(); ++k) err = std::max(err, std::abs(lhs[k] - 2.0 * r1[k] + 3.0 * r2[k]));
  CHECK(err <= 1e-12 * lhs.max_abs());
}

TEST_CASE("energy identity") {
  for (int d : {1, 2, 3}) {
    for (double alpha : {0.0, 0.5, 1.0, 2.3}) {
      if (d == 3 && (alpha == 0.5 || alpha == 1.0)) continue;
      const auto a = MultiIndexAlpha::uniform(d, alpha);
      auto plan = bump_plan(a);
      const auto s = sample(*plan, 40 + static_cast<std::uint64_t>(d));
      const auto parts = riesz_components(*plan, s.f);
      // brute-force quadrature of sum_i int |R_i f|^2 x^{2 alpha} dx
      const auto& w = plan->source()->weights();
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        for (const auto& g : parts) lhs += g[k] * g[k] * w[k];
        rhs += s.f[k] * s.f[k] * w[k];
      }
      INFO("d=" << d << " alpha=" << alpha);
      CHECK(std::abs(lhs / rhs - 1.0) <= 1e-6);
      const auto vec = riesz_vector(*plan, s.f);
      CHECK(std::abs(lp_norm(vec, 2.0) / lp_norm(s.f, 2.0) - 1.0) <= 1e-6);
      if (d == 1) {
        double e = 0.0;
        for (std::size_t k = 0; k < vec.size(); ++k) e = std::max(e, std::abs(vec[k] - std::abs(parts[0][k])));
        CHECK(e == 0.0);
      }
    }
  }
}

TEST_CASE("spectral class is enforced") {
  const MultiIndexAlpha a({0.0});
  auto plan = bump_plan(a);
  auto g = GridFunction::sample(plan->source(), [](const double* x) { return gaussian(1, x); });
  CHECK_THROWS_AS(riesz_apply(RieszOperator(plan, 0), g), std::domain_error);
  CHECK_THROWS_AS(inverse_sqrt_apply(*plan, g), std::domain_error);
  CHECK_THROWS_AS(RieszOperator(plan, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RieszOperator(plan, 1), std::out_of_range);
  // the bounded policy takes it
  CHECK(riesz_apply(RieszOperator(plan, 0, 0.0, SpectralPolicy::bounded), g).max_abs() > 0.0);
}

TEST_CASE("R_i is the derivative of B^{-1/2}") {
  for (double alpha : {0.0, 0.5, 2.3}) {
    const MultiIndexAlpha a({alpha, 1.0});
    auto plan = bump_plan(a);
    const auto s = sample(*plan, 9);
    const auto r = plan->target()->radii();
    std::vector<double> g(s.spectrum.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = r[k] < 0.25 ? 0.0 : s.spectrum[k] / r[k];
    // B^{-1/2} f on grid equals the synthesized values at nodes
    const auto grid_val = inverse_sqrt_apply(*plan, s.f);
    const auto node = plan->source()->point(2000);
    CHECK(plan->synthesize_points(g, node)[0] == doctest::Approx(grid_val[2000]).epsilon(1e-9));
    const double h = 1e-4;
    for (int i = 0; i < 2; ++i) {
      for (std::vector<double> x : {std::vector<double>{1.3, 2.0}, std::vector<double>{3.1, 0.7}}) {
        auto xp = x, xm = x;
        xp[static_cast<std::size_t>(i)] += h;
        xm[static_cast<std::size_t>(i)] -= h;
        std::vector<double> pts = xp;
        pts.insert(pts.end(), xm.begin(), xm.end());
        const auto v = plan->synthesize_points(g, pts);
        const double fd = (v[0] - v[1]) / (2 * h);
        const double R = multiplier_at(*plan, s.spectrum, i, x)[0];
        INFO("alpha=" << alpha << " i=" << i);
        CHECK(std::abs(fd - R) <= 1e-6 * std::max(1.0, std::abs(R)));
      }
    }
  }
}

TEST_CASE("kernel routes against the alpha = 0 closed form") {
  const MultiIndexAlpha a({0.0});
  for (auto [x, y] : {std::pair{1.0, 2.0}, {3.0, 3.1}, {0.5, 5.0}, {2.0, 2.0001}, {0.05, 0.3}}) {
    const double exact = closed_kernel(x, y);
    INFO("x=" << x << " y=" << y);
    CHECK(riesz_kernel_heat(a, &x, &y, 0) == doctest::Approx(exact).epsilon(1e-11));
    CHECK(riesz_kernel(a, &x, &y, 0) == doctest::Approx(exact).epsilon(1e-9));
  }
  const double x = 1.0;
  CHECK_THROWS_AS(riesz_kernel_heat(a, &x, &x, 0), std::domain_error);
  CHECK_THROWS_AS(riesz_kernel(a, &x, &x, 0), std::domain_error);
}

TEST_CASE("kernel routes agree for general alpha") {
  const MultiIndexAlpha a({0.5, 1.0, 2.3});
  const std::vector<std::vector<double>> pairs = {{0.7, 1.2, 2.0, 0.9, 1.0, 2.4},
                                                 {3.0, 0.4, 1.1, 2.2, 0.6, 1.0},
                                                 {1.0, 1.0, 1.0, 1.01, 0.99, 1.0}};
  for (const auto& p : pairs) {
    for (int i = 0; i < 3; ++i) {
      const double h = riesz_kernel_heat(a, p.data(), p.data() + 3, i);
      const double t = riesz_kernel(a, p.data(), p.data() + 3, i);
      CHECK(h == doctest::Approx(t).epsilon(1e-8));
    }
  }
}

TEST_CASE("kernel decay against the integrated derivative bound") {
  for (const auto& a : {MultiIndexAlpha({0.0}), MultiIndexAlpha({0.5, 1.0})}) {
    ConstantSampling cs;
    cs.samples = 2000;
    const auto c = riesz_kernel_constant(a, cs);
    INFO("alpha=" << a.to_string() << " C=" << c.value << " doubled=" << c.value_doubled);
    CHECK(std::isfinite(c.value));
    CHECK(c.value > 0.0);
    CHECK(c.stable);
  }
  // far from the diagonal the envelope is not attained with a growing ratio
  const MultiIndexAlpha a({0.0});
  double prev = 0.0;
  for (double y : {10.0, 20.0, 40.0}) {
    const double x = 1.0;
    const double r = std::abs(riesz_kernel_heat(a, &x, &y, 0)) / riesz_kernel_envelope(a, &x, &y, 0);
    CHECK(std::isfinite(r));
    if (prev > 0.0) CHECK(r <= prev * 1.01);
    prev = r;
  }
}

TEST_CASE("odd kernel cancels on symmetric punctured intervals") {
  const MultiIndexAlpha a({0.0});
  const double x = 4.0, eps = 1e-3, eta = 0.5;
  const auto rule = gauss_legendre(40, eps, eta);
  double s = 0.0, one_side = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double yp = x + rule.nodes[k], ym = x - rule.nodes[k];
    s += rule.weights[k] * (riesz_kernel_heat(a, &x, &yp, 0) + riesz_kernel_heat(a, &x, &ym, 0));
    one_side += rule.weights[k] * std::abs(riesz_kernel_heat(a, &x, &ym, 0));
  }
  // only the reflected term -1/(pi (x+y)) survives
  const double image = -(1.0 / std::numbers::pi) *
                       (std::log((2 * x + eta) / (2 * x + eps)) + std::log((2 * x - eps) / (2 * x - eta)));
  CHECK(s == doctest::Approx(image).epsilon(1e-9));
  CHECK(std::abs(s) < 0.02 * one_side);
}

TEST_CASE("principal value agrees with the multiplier form, d = 1") {
  for (double alpha : {0.0, 0.5, 1.0, 2.3}) {
    const MultiIndexAlpha a({alpha});
    auto plan = bump_plan(a);
    for (auto kind : {FamilyKind::annulus_bump, FamilyKind::gaussian_shell, FamilyKind::random_spectral}) {
      const auto s = sample(*plan, 17, kind);
      const std::vector<double> pts = {1.5, 2.2, 3.7, 5.0, 7.5};
      const auto pv = riesz_pv_apply(*plan, 0, s.f, pts);
      const auto mv = multiplier_at(*plan, s.spectrum, 0, pts);
      const double scale = riesz_apply(RieszOperator(plan, 0), s.f).max_abs();
      for (std::size_t q = 0; q < pts.size(); ++q) {
        INFO("alpha=" << alpha << " family=" << to_string(kind) << " x=" << pts[q]);
        CHECK(std::abs(pv[q] - mv[q]) <= 1e-3 * scale);
      }
    }
  }
}

TEST_CASE("principal value agrees with the multiplier form, d = 2, 3") {
  for (double alpha : {0.0, 2.3}) {
    const auto a = MultiIndexAlpha::uniform(2, alpha);
    auto plan = bump_plan(a);
    const auto s = sample(*plan, 5);
    const std::vector<double> pts = {1.8, 2.2, 3.1, 1.8};
    for (int i = 0; i < 2; ++i) {
      const auto pv = riesz_pv_apply(*plan, i, s.f, pts);
      const auto mv = multiplier_at(*plan, s.spectrum, i, pts);
      const double scale = riesz_apply(RieszOperator(plan, i), s.f).max_abs();
      for (std::size_t q = 0; q < 2; ++q) CHECK(std::abs(pv[q] - mv[q]) <= 1e-3 * scale);
    }
  }
  const MultiIndexAlpha a({0.5, 0.0, 1.0});
  auto plan = bump_plan(a, 64, 8.0, 8.0);
  const auto s = sample(*plan, 6);
  const std::vector<double> pts = {1.8, 2.1, 1.6};
  PVOptions o;
  o.radial_nodes = 16;
  o.angular_nodes = 16;
  const auto pv = riesz_pv_apply(*plan, 2, s.f, pts, o);
  const auto mv = multiplier_at(*plan, s.spectrum, 2, pts);
  const double scale = riesz_apply(RieszOperator(plan, 2), s.f).max_abs();
  CHECK(std::abs(pv[0] - mv[0]) <= 1e-3 * scale);
}

TEST_CASE("principal value through the Poisson time integral") {
  const MultiIndexAlpha a({0.5});
  auto plan = bump_plan(a);
  const auto s = sample(*plan, 23);
  const std::vector<double> pts = {2.6};
  PVOptions o;
  o.route = KernelRoute::poisson_time;
  o.radial_nodes = 12;
  const auto slow = riesz_pv_apply(*plan, 0, s.f, pts, o);
  const auto mv = multiplier_at(*plan, s.spectrum, 0, pts);
  const double scale = riesz_apply(RieszOperator(plan, 0), s.f).max_abs();
  CHECK(std::abs(slow[0] - mv[0]) <= 1e-3 * scale);
}

TEST_CASE("principal value resolution guards") {
  const MultiIndexAlpha a({0.0});
  auto plan = bump_plan(a);
  const auto s = sample(*plan, 1);
  PVOptions o;
  o.epsilon = 1e-12;
  CHECK_THROWS_AS(riesz_pv_apply(*plan, 0, s.f, {3.0}, o), std::domain_error);
  o = PVOptions{};
  o.delta = 0.2;  // about one node gap
  CHECK_THROWS_AS(riesz_pv_apply(*plan, 0, s.f, {3.0}, o), std::domain_error);
  o = PVOptions{};
  o.delta = 2.0;
  o.epsilon = 1.0;
  CHECK_THROWS_AS(riesz_pv_apply(*plan, 0, s.f, {3.0}, o), std::domain_error);
  CHECK_THROWS_AS(riesz_pv_apply(*plan, 0, s.f, {0.5}), std::domain_error);
}

TEST_CASE("compositions: ordering, reduction and budget") {
  const MultiIndexAlpha a({0.5, 1.0});
  auto plan = bump_plan(a);
  const auto s = sample(*plan, 31);
  const auto c1 = compositions_apply(*plan, s.f, 1);
  const auto vec = riesz_vector(*plan, s.f);
  REQUIRE(c1.values.size() == 2);
  for (std::size_t k = 0; k < vec.size(); ++k) CHECK(c1.aggregate[k] == vec[k]);
  const auto c2 = compositions_apply(*plan, s.f, 2);
  REQUIRE(c2.tuples.size() == 4);
  CHECK(c2.tuples[1] == std::vector<int>{0, 1});
  CHECK(c2.tuples[2] == std::vector<int>{1, 0});
  // (0, 1) = R_0 R_1 f
  const auto inner = riesz_apply(RieszOperator(plan, 1), s.f);
  const auto outer = riesz_apply(RieszOperator(plan, 0, 0.0, SpectralPolicy::bounded), inner);
  double e = 0.0;
  for (std::size_t k = 0; k < outer.size(); ++k) e = std::max(e, std::abs(outer[k] - c2.values[1][k]));
  CHECK(e == 0.0);
  CHECK(compositions_apply(*plan, s.f, 3).values.size() == 8);
  CHECK_THROWS_AS(compositions_apply(*plan, s.f, 4), std::length_error);
  CHECK_THROWS_AS(compositions_apply(*plan, s.f, 0), std::length_error);
  CHECK(c1.spectral_energy == doctest::Approx(std::pow(lp_norm(s.f, 2.0), 2)).epsilon(1e-6));
}

TEST_CASE("R^2 is an isometry in d = 1, alpha = 0") {
  const MultiIndexAlpha a({0.0});
  {
    // h_0(R f) ~ 1/y^2, so the spectral side needs a large frequency box
    auto plan = make_plan(build_grid(a, 2048, 11.0), build_grid(a, 2048, 163.0));
    const auto s = sample(*plan, 3);
    const auto c = compositions_apply(*plan, s.f, 2);
    const double nf = std::pow(lp_norm(s.f, 2.0), 2);
    CHECK(std::abs(c.spectral_energy / nf - 1.0) <= 1e-6);
  }
  // the grid norm misses the |x|^{-1} tail of R^2 f; the deficit is ~ 1/X
  double prev = 0.0;
  for (int m : {1, 2, 4}) {
    auto plan = bump_plan(a, 96 * m, 11.0 * m, 8.5);
    const auto s = sample(*plan, 3);
    const auto c = compositions_apply(*plan, s.f, 2);
    const double deficit = 1.0 - std::pow(lp_norm(c.values[0], 2.0) / lp_norm(s.f, 2.0), 2);
    INFO("box=" << 11.0 * m << " deficit=" << deficit);
    CHECK(deficit > 0.0);
    if (prev > 0.0) CHECK(deficit == doctest::Approx(prev / 2).epsilon(0.1));
    prev = deficit;
  }
}

TEST_CASE("D_p constant") {
  CHECK(d_p_constant(LebesgueExponent(2.0)) == doctest::Approx(5.0).epsilon(1e-14));
  const double d4 = d_p_constant(LebesgueExponent(4.0));
  CHECK(std::abs(d4 - 16.67) < 5e-3);
  CHECK(d4 == doctest::Approx(9.5 * (std::pow(3.0, 0.25) + std::pow(3.0, -0.75))).epsilon(1e-14));
  CHECK(d_p_constant(LebesgueExponent(4.0 / 3.0)) == doctest::Approx(d4).epsilon(1e-14));
  for (int k = 0; k < 200; ++k) {
    const double p = 2.0 * std::pow(32.0, k / 199.0);
    const LebesgueExponent e(p);
    CHECK(d_p_constant(e) <= 6.0 * (e.star() - 1.0));
  }
}

TEST_CASE("norm ratio experiment") {
  NormRatioSetup setup;
  setup.alpha = MultiIndexAlpha({0.5, 1.0});
  setup.p = {1.5, 2.0, 8.0};
  setup.trials = 6;
  setup.seed = 77;
  const auto reports = norm_ratio_experiment(setup);
  REQUIRE(reports.size() == 3);
  for (const auto& r : reports) {
    CHECK(r.ratios.size() == 6);
    CHECK(r.pass);
    CHECK(r.max_ratio <= r.proof_bound);
    CHECK(r.proof_bound <= r.bound);
  }
  CHECK(reports[1].max_ratio <= 1.0 + 1e-6);
  CHECK(reports[1].energy_defect <= 1e-6);
  CHECK(reports[2].bound == doctest::Approx(48.0 * 7.0));
  // deterministic and independent of trial order
  const auto again = norm_ratio_experiment(setup);
  CHECK(to_json(again[0]) == to_json(reports[0]));
  setup.trials = 3;
  const auto fewer = norm_ratio_experiment(setup);
  for (int t = 0; t < 3; ++t) CHECK(fewer[2].ratios[static_cast<std::size_t>(t)] == reports[2].ratios[static_cast<std::size_t>(t)]);
  const std::string js = to_json(reports[0]);
  for (const char* key : {"\"p\"", "\"alpha\"", "\"d\"", "\"family\"", "\"seed\"", "\"trials\"",
                          "\"ratios\"", "\"max_ratio\"", "\"bound\"", "\"pass\""}) {
    CHECK(js.find(key) != std::string::npos);
  }
  setup.p.clear();
  CHECK_THROWS_AS(norm_ratio_experiment(setup), std::invalid_argument);
}

TEST_CASE("ratios are invariant under scaling") {
  const MultiIndexAlpha a({1.0});
  auto plan = bump_plan(a);
  const auto s = sample(*plan, 4);
  const auto g = s.f.scaled(-37.5);
  for (double p : {1.5, 3.0}) {
    const double r1 = lp_norm(riesz_components(*plan, s.f), LebesgueExponent(p)) / lp_norm(s.f, p);
    const double r2 = lp_norm(riesz_components(*plan, g), LebesgueExponent(p)) / lp_norm(g, p);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
  }
}
