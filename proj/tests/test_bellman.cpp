#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "brz/bellman.hpp"
#include "doctest.h"

using namespace brz;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

// E|w|^2 under the normalized bump on the ball of radius kappa in R^m
double bump_second_moment(int m, double kappa) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto mom = [&](int k) {
    return ts.integrate([&](double t) { return t < 1 ? std::pow(t, k) * std::exp(-1 / (1 - t * t)) : 0.0; },
                        0.0, 1.0);
  };
  return kappa * kappa * mom(m + 1) / mom(m - 1);
}

Eigen::MatrixXd p2_hessian(int m1, int m2) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m1 + m2, m1 + m2);
  T.topLeftCorner(m1, m1) *= 1.25;
  return T;
}

}  // namespace

TEST_CASE("beta_p closed values") {
  CHECK(beta_p({1, 1, 2.0, 0.0}, 1.0, 1.0) == doctest::Approx(2.25).epsilon(1e-15));
  // gamma(4) = 1/18, second branch
  CHECK(beta_p({1, 1, 4.0, 0.0}, 1.0, 0.0) == doctest::Approx(1.0 + 1.0 / 36.0).epsilon(1e-15));
  CHECK(beta_p({1, 1, 3.0, 0.0}, 0.0, 0.0) == 0.0);
  CHECK(bellman_B({1, 2, 2.0, 0.0}, vec({1.0}), vec({1.0, 0.0})) == doctest::Approx(1.125));
  CHECK_THROWS_AS(bellman_B({1, 1, 2.0, 0.1}, vec({1.0}), vec({1.0})), std::invalid_argument);
}

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(BellmanFunction({0, 1, 2.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(BellmanFunction({1, 1, 1.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(BellmanFunction({1, 1, 2.0, 1.0}), std::invalid_argument);
  CHECK(BellmanShape{1, 1, 4.0, 0.0}.gamma() == doctest::Approx(1.0 / 18.0));
}

TEST_CASE("p = 2 collapses to a quadratic form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  const BellmanShape sh{1, 1, 2.0, 0.0};
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(beta_p(sh, a, b) == doctest::Approx(1.25 * a * a + b * b).epsilon(1e-13));
  }
}

TEST_CASE("beta_p is continuous and C^1 across the branch boundary") {
  for (double p : {2.5, 3.0, 4.0, 8.0}) {
    const BellmanShape sh{1, 1, p, 0.0};
    const double q = sh.conj();
    for (double s : {0.3, 1.0, 2.7}) {
      const double r = std::pow(s, q / p);
      const double lo = beta_p(sh, r * (1 - 1e-13), s);
      const double hi = beta_p(sh, r * (1 + 1e-13), s);
      CHECK(std::abs(hi - lo) <= 1e-10);
      // one-sided slopes in r from each branch
      const double h = 1e-6;
      const double left = (beta_p(sh, r - h, s) - beta_p(sh, r - 2 * h, s)) / h;
      const double right = (beta_p(sh, r + 2 * h, s) - beta_p(sh, r + h, s)) / h;
      CHECK(std::abs(left - right) <= 1e-4 * std::abs(left));
    }
  }
}

TEST_CASE("mollified value against the second-moment oracle at p = 2") {
  // B_2 is quadratic, so B_2 * psi = B_2 + (1/2)(5/4 E|w_1|^2 + E|w_2|^2)
  for (auto [m1, m2] : {std::pair{1, 1}, {1, 2}, {1, 3}, {2, 2}}) {
    const double kappa = 0.1;
    const BellmanFunction b({m1, m2, 2.0, kappa});
    const int m = m1 + m2;
    const double e2 = bump_second_moment(m, kappa);
    const double shift = 0.5 * (1.25 * m1 + m2) * e2 / m;
    CHECK(b.rule_mass_ratio() == doctest::Approx(1.0).epsilon(1e-8));
    Eigen::VectorXd z = Eigen::VectorXd::Constant(m1, 0.7);
    Eigen::VectorXd e = Eigen::VectorXd::Constant(m2, 0.4);
    const double exact = 0.5 * (1.25 * z.squaredNorm() + e.squaredNorm()) + shift;
    CHECK(b.value(z, e) == doctest::Approx(exact).epsilon(1e-10));
    const double origin = b.value(Eigen::VectorXd::Zero(m1), Eigen::VectorXd::Zero(m2));
    CHECK(origin == doctest::Approx(shift).epsilon(1e-10));
    CHECK(origin >= 0.0);
    CHECK(2 * origin <= 1.25 * (0.01 + 0.01));
  }
}

TEST_CASE("mollified function depends only on the block norms") {
  const BellmanFunction b({2, 2, 3.0, 0.05});
  const double v1 = b.value(vec({0.6, 0.8}), vec({0.0, 1.3}));
  const double v2 = b.value(vec({1.0, 0.0}), vec({1.3 * 0.6, 1.3 * 0.8}));
  CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  CHECK(v1 > 0.0);
  CHECK_THROWS_AS(b.value(vec({1.0}), vec({1.0, 0.0})), std::invalid_argument);
}

TEST_CASE("p = 2 Hessian is blockdiag(5/4, 1)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (auto [m1, m2] : {std::pair{1, 1}, {1, 2}, {1, 3}, {2, 2}}) {
    const BellmanFunction b0({m1, m2, 2.0, 0.0});
    const BellmanFunction bk({m1, m2, 2.0, 0.1});
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd z(m1), e(m2);
      for (int i = 0; i < m1; ++i) z(i) = u(rng);
      for (int i = 0; i < m2; ++i) e(i) = u(rng);
      if (b0.singular_distance(z.norm(), e.norm()) <= 2e-3) continue;
      CHECK((b0.hessian(z, e) - p2_hessian(m1, m2)).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK((bk.hessian(z, e) - p2_hessian(m1, m2)).cwiseAbs().maxCoeff() <= 1e-7);
      const Eigen::VectorXd g = b0.gradient(z, e);
      CHECK((g.head(m1) - 1.25 * z).norm() <= 1e-8);
      CHECK((g.tail(m2) - e).norm() <= 1e-8);
    }
  }
}

TEST_CASE("unmollified derivatives refuse the singular set") {
  const BellmanFunction b({1, 1, 3.0, 0.0});
  CHECK_THROWS_AS(b.hessian(vec({1.0}), vec({1e-4})), std::domain_error);
  // on the branch boundary r = s^{1/(p-1)}
  CHECK_THROWS_AS(b.gradient(vec({2.0}), vec({4.0})), std::domain_error);
  CHECK_NOTHROW(b.hessian(vec({1.0}), vec({2.0})));
}

TEST_CASE("mollifier route agrees with finite differences") {
  for (double p : {3.0, 4.0}) {
    const BellmanFunction b({1, 2, p, 0.1});
    const Eigen::VectorXd z = vec({2.0});
    const Eigen::VectorXd e = vec({0.9, 1.2});
    const Eigen::MatrixXd Hm = b.hessian(z, e);
    const Eigen::MatrixXd Hf = b.hessian(z, e, DerivativeMethod::finite_difference);
    CHECK((Hm - Hf).cwiseAbs().maxCoeff() <= 1e-4 * Hm.cwiseAbs().maxCoeff());
    const Eigen::VectorXd gm = b.gradient(z, e);
    const Eigen::VectorXd gf = b.gradient(z, e, DerivativeMethod::finite_difference);
    CHECK((gm - gf).norm() <= 1e-6 * gm.norm());
    CHECK((Hm - Hm.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mollified Hessian converges to the unmollified one") {
  // away from the singular set B_kappa - B_p = O(kappa^2) with smooth data
  const Eigen::VectorXd z = vec({2.0});
  const Eigen::VectorXd e = vec({1.5});
  const Eigen::MatrixXd H0 = BellmanFunction({1, 1, 3.0, 0.0}).hessian(z, e);
  double prev = INFINITY;
  for (double kappa : {0.1, 0.05, 0.025}) {
    const double err = (BellmanFunction({1, 1, 3.0, kappa}).hessian(z, e) - H0).cwiseAbs().maxCoeff();
    CHECK(err < prev / 3);
    prev = err;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("eta-block gradient points outward") {
  const BellmanFunction b({1, 3, 4.0, 0.05});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd z = vec({u(rng)});
    const Eigen::VectorXd e = vec({u(rng), u(rng), u(rng)});
    const Eigen::VectorXd g = b.gradient(z, e);
    CHECK(g.tail(3).dot(e) >= 0.0);
    CHECK(g.head(1).dot(z) >= 0.0);
  }
}

TEST_CASE("tau search") {
  const double gamma = 0.25;
  const TauSearchResult r = tau_search(p2_hessian(1, 1), gamma, 1, 1);
  REQUIRE(r.present);
  // 5/4 - tau/8 = 1 - 1/(8 tau) at the maximizer
  CHECK(r.tau == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-6));
  CHECK(r.tau_lo == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(r.tau_hi == doctest::Approx(10.0).epsilon(1e-6));
  const TauSearchResult r3 = tau_search(p2_hessian(1, 3), gamma, 1, 3);
  CHECK(r3.tau_lo == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(r3.tau_hi == doctest::Approx(10.0).epsilon(1e-6));

  const TauSearchResult z = tau_search(Eigen::MatrixXd::Zero(2, 2), gamma, 1, 1);
  CHECK_FALSE(z.present);
  CHECK(z.margin < 0.0);

  Eigen::MatrixXd ns = p2_hessian(1, 1);
  ns(0, 1) = 0.1;
  CHECK_THROWS_AS(tau_search(ns, gamma, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(tau_search(p2_hessian(1, 1), gamma, 1, 2), std::invalid_argument);

  // an indefinite Hessian has no tau
  Eigen::MatrixXd ind = p2_hessian(1, 1);
  ind(0, 1) = ind(1, 0) = 2.0;
  CHECK_FALSE(tau_search(ind, gamma, 1, 1).present);
}

TEST_CASE("bounds sweep") {
  for (double p : {2.0, 3.0, 4.0}) {
    const BellmanFunction b({1, 2, p, 0.05}, MollifierSpec{24, 8, 6});
    const GradientBoundsReport g = certify_bounds(b, 24);
    CHECK(g.points == 576u);
    CHECK(g.b1_holds == g.points);
    CHECK(g.b2_signs_hold == g.points);
    CHECK(g.b1_min_slack > 0.0);
    CHECK(std::isfinite(g.cp));
    CHECK(g.cp >= g.cp_coarse);
    CHECK(g.cp <= 1.1 * g.cp_coarse);
  }
  CHECK_THROWS_AS(certify_bounds(BellmanFunction({1, 1, 2.0, 0.0}), 10), std::invalid_argument);
}

TEST_CASE("light rule matches the default rule") {
  const BellmanFunction fine({1, 3, 4.0, 0.1});
  const BellmanFunction lite({1, 3, 4.0, 0.1}, MollifierSpec{24, 8, 6});
  for (auto [r, s] : {std::pair{0.05, 0.05}, {0.8, 0.05}, {1.0, 1.0}, {4.0, 2.0}}) {
    const BiRadialJet a = fine.jet(r, s);
    const BiRadialJet b = lite.jet(r, s);
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-4));
    CHECK(b.d_r == doctest::Approx(a.d_r).epsilon(1e-4));
    CHECK(b.d_s == doctest::Approx(a.d_s).epsilon(1e-4));
  }
}

TEST_CASE("Hessian sweep") {
  const BellmanFunction b({1, 2, 3.0, 0.1});
  const HessianReport h = certify_hessian(b, 300, 11);
  CHECK(h.rows.size() == 300u);
  CHECK(h.rate >= 0.999);
  for (const HessianRow& row : h.rows) {
    CHECK(row.r > 0.0);
    CHECK(row.r <= 5.0);
  }
  const HessianReport again = certify_hessian(b, 300, 11);
  CHECK(again.rows[17].tau.tau == h.rows[17].tau.tau);
  CHECK(again.rows[299].r == h.rows[299].r);

  std::ostringstream csv;
  write_certification_csv(h, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("p,kappa,m1,m2,r,s,tau_or_absent,min_eig_margin\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 301);

  HessianReport absent = h;
  absent.rows.resize(1);
  absent.rows[0].tau.present = false;
  std::ostringstream one;
  write_certification_csv(absent, one);
  CHECK(one.str().find(",ABSENT,") != std::string::npos);
}

TEST_CASE("dimension budget") {
  CHECK_THROWS_AS(BellmanFunction({2, 3, 2.0, 0.1}), std::length_error);
  MollifierSpec mc;
  mc.monte_carlo = 20000;
  const BellmanFunction b({2, 3, 2.0, 0.1}, mc);
  const double shift = 0.5 * (1.25 * 2 + 3) * bump_second_moment(5, 0.1) / 5;
  const double v = b.value(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3));
  CHECK(v == doctest::Approx(shift).epsilon(0.05));
}

TEST_CASE("unmollified p = 2 sweep stays off the singular set") {
  const BellmanFunction b({1, 3, 2.0, 0.0});
  const HessianReport h = certify_hessian(b, 200, 4);
  CHECK(h.rate == 1.0);
  for (const HessianRow& row : h.rows) {
    CHECK(row.singular_distance > kUnmollifiedClearance);
    // blockdiag(5/4, 1) with gamma = 1/4: the margin interval is [1/8, 10]
    CHECK(row.tau.tau_lo == doctest::Approx(0.125).epsilon(1e-6));
    CHECK(row.tau.tau_hi == doctest::Approx(10.0).epsilon(1e-6));
  }
}
