#include "brz/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "brz/families.hpp"
#include "brz/quadrature.hpp"
#include "parallel.hpp"

namespace brz {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTauTol = 1e-9;

double sphere_area(int m) {  // |S^{m-1}|
  return 2.0 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m);
}

// first coordinate on S^{k-1}: nodes and weights of dsigma pushed forward to [-1, 1]
QuadratureRule sphere_first_coordinate(int k, int n) {
  if (k == 1) return {{-1.0, 1.0}, {1.0, 1.0}};
  const double a = 0.5 * (k - 3);
  QuadratureRule rule = gauss_jacobi(n, a, a);
  const double s = sphere_area(k - 1);
  for (double& w : rule.weights) w *= s;
  return rule;
}

double bump(double q) { return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0; }

}  // namespace

void BellmanShape::validate() const {
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("bellman: m1, m2 must be positive");
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("bellman: p must be >= 2");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("bellman: kappa must lie in [0, 1)");
}

double BellmanShape::gamma() const {
  const double q = conj();
  return q * (q - 1.0) / 8.0;
}

double beta_p(const BellmanShape& shape, double s1, double s2) {
  const double p = shape.p;
  const double q = shape.conj();
  const double a = std::pow(s1, p);
  const double b = std::pow(s2, q);
  double extra;
  if (a <= b) {
    extra = s2 > 0.0 ? s1 * s1 * std::pow(s2, 2.0 - q) : 0.0;
  } else {
    extra = (2.0 / p) * a + (2.0 / q - 1.0) * b;
  }
  return a + b + shape.gamma() * extra;
}

double bellman_B(const BellmanShape& shape, const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta) {
  if (shape.kappa != 0.0) throw std::invalid_argument("bellman_B: kappa must be 0");
  return 0.5 * beta_p(shape, zeta.norm(), eta.norm());
}

// ---------------------------------------------------------------- mollified function

BellmanFunction::BellmanFunction(BellmanShape shape, MollifierSpec spec)
    : shape_(shape), spec_(spec) {
  shape_.validate();
  if (shape_.kappa == 0.0) return;
  const int m1 = shape_.m1;
  const int m2 = shape_.m2;
  const int m = m1 + m2;
  const double kappa = shape_.kappa;

  struct Raw {
    double w, rho, a1, a2, q1, q2, t1, t2;
  };
  std::vector<Raw> raw;
  if (m > 4) {
    if (spec_.monte_carlo == 0)
      throw std::length_error("bellman: m1 + m2 > 4 needs the Monte Carlo rule (monte_carlo > 0)");
    std::mt19937_64 rng(spec_.seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni;
    const double w = sphere_area(m) * std::pow(kappa, m) / m / static_cast<double>(spec_.monte_carlo);
    std::vector<double> v(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < spec_.monte_carlo; ++k) {
      double n2 = 0.0;
      for (double& x : v) {
        x = gauss(rng);
        n2 += x * x;
      }
      const double rho = kappa * std::pow(uni(rng), 1.0 / m);
      const double sc = rho / std::sqrt(n2);
      double q1 = 0.0, q2 = 0.0;
      for (int j = 0; j < m1; ++j) q1 += v[j] * v[j] * sc * sc;
      for (int j = m1; j < m; ++j) q2 += v[j] * v[j] * sc * sc;
      const double a1 = v[0] * sc;
      const double a2 = v[m1] * sc;
      raw.push_back({w, rho, a1, a2, q1, q2, m1 > 1 ? (q1 - a1 * a1) / (m1 - 1) : 0.0,
                     m2 > 1 ? (q2 - a2 * a2) / (m2 - 1) : 0.0});
    }
  } else {
    // w = (rho cos(phi) sigma_1, rho sin(phi) sigma_2)
    const QuadratureRule rr = gauss_legendre(spec_.radial_nodes, 0.0, kappa);
    const QuadratureRule ph = gauss_legendre(spec_.polar_nodes, 0.0, 0.5 * kPi);
    const QuadratureRule c1 = sphere_first_coordinate(m1, spec_.sphere_nodes);
    const QuadratureRule c2 = sphere_first_coordinate(m2, spec_.sphere_nodes);
    for (std::size_t i = 0; i < rr.size(); ++i) {
      const double rho = rr.nodes[i];
      const double wr = rr.weights[i] * std::pow(rho, m - 1);
      for (std::size_t j = 0; j < ph.size(); ++j) {
        const double cs = std::cos(ph.nodes[j]);
        const double sn = std::sin(ph.nodes[j]);
        const double wp = wr * ph.weights[j] * std::pow(cs, m1 - 1) * std::pow(sn, m2 - 1);
        const double q1 = rho * rho * cs * cs;
        const double q2 = rho * rho * sn * sn;
        for (std::size_t k = 0; k < c1.size(); ++k) {
          for (std::size_t l = 0; l < c2.size(); ++l) {
            const double u = c1.nodes[k];
            const double v = c2.nodes[l];
            raw.push_back({wp * c1.weights[k] * c2.weights[l], rho, rho * cs * u, rho * sn * v, q1, q2,
                           m1 > 1 ? q1 * (1.0 - u * u) / (m1 - 1) : 0.0,
                           m2 > 1 ? q2 * (1.0 - v * v) / (m2 - 1) : 0.0});
          }
        }
      }
    }
  }

  // psi(rho) = bump(rho^2 / kappa^2) = exp(E), E = -1 / (1 - q)
  double mass = 0.0;
  for (const Raw& n : raw) mass += n.w * bump(n.rho * n.rho / (kappa * kappa));
  {
    const QuadratureRule fine = gauss_legendre(400, 0.0, kappa);
    double exact = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i)
      exact += fine.weights[i] * bump(fine.nodes[i] * fine.nodes[i] / (kappa * kappa)) *
               std::pow(fine.nodes[i], m - 1);
    exact *= sphere_area(m);
    mass_ratio_ = mass / exact;
  }
  const double k2 = kappa * kappa;
  nodes_.reserve(raw.size());
  for (const Raw& n : raw) {
    const double rho = n.rho;
    const double q = rho * rho / k2;
    const double psi = bump(q);
    const double om = 1.0 - q;
    const double e1 = -2.0 * rho / (k2 * om * om);
    const double e2 = -2.0 / (k2 * om * om) - 8.0 * rho * rho / (k2 * k2 * om * om * om);
    const double dpsi = psi * e1;
    const double d2psi = psi * (e1 * e1 + e2);
    const double w = n.w / mass;
    const double r2 = rho * rho;
    // d_a d_b psi = psi'' w_a w_b / rho^2 + (psi' / rho)(delta_ab - w_a w_b / rho^2)
    auto second = [&](double ab, double diag) { return w * (d2psi * ab / r2 + dpsi / rho * (diag - ab / r2)); };
    nodes_.push_back({n.a1, n.a2, n.q1, n.q2, w * psi, w * dpsi * n.a1 / rho, w * dpsi * n.a2 / rho,
                      second(n.a1 * n.a1, 1.0), second(n.a1 * n.a2, 0.0), second(n.a2 * n.a2, 1.0),
                      second(n.t1, 1.0), second(n.t2, 1.0)});
  }
}

double BellmanFunction::closed(double r, double s) const { return beta_p(shape_, r, s); }

double BellmanFunction::beta(double r, double s) const {
  if (shape_.kappa == 0.0) return closed(r, s);
  return 2.0 * jet(r, s).value;
}

BiRadialJet BellmanFunction::jet(double r, double s) const {
  if (shape_.kappa == 0.0) throw std::logic_error("bellman: jet needs kappa > 0");
  BiRadialJet j{};
  const double r2 = r * r;
  const double s2 = s * s;
  // derivative weights integrate constants to zero exactly, so g(0) is taken
  // out of them; otherwise it multiplies the rule's moment error by 1/kappa^2
  const double g0 = 0.5 * closed(r, s);
  for (const Node& n : nodes_) {
    const double u = std::sqrt(std::max(0.0, r2 - 2.0 * r * n.a1 + n.q1));
    const double v = std::sqrt(std::max(0.0, s2 - 2.0 * s * n.a2 + n.q2));
    const double gv = 0.5 * closed(u, v);
    j.value += gv * n.c0;
    const double g = gv - g0;
    j.d_r += g * n.c_r;
    j.d_s += g * n.c_s;
    j.d_rr += g * n.c_rr;
    j.d_rs += g * n.c_rs;
    j.d_ss += g * n.c_ss;
    j.d_tt_zeta += g * n.c_tt1;
    j.d_tt_eta += g * n.c_tt2;
  }
  if (shape_.m1 == 1) j.d_tt_zeta = 0.0;
  if (shape_.m2 == 1) j.d_tt_eta = 0.0;
  return j;
}

double BellmanFunction::value(const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta) const {
  if (zeta.size() != shape_.m1 || eta.size() != shape_.m2)
    throw std::invalid_argument("bellman: point has the wrong block sizes");
  return 0.5 * beta(zeta.norm(), eta.norm());
}

double BellmanFunction::singular_distance(double r, double s) const {
  return std::min(s, std::abs(r - std::pow(s, shape_.conj() / shape_.p)));
}

double BellmanFunction::fd_value(const Eigen::VectorXd& x) const {
  return value(x.head(shape_.m1), x.tail(shape_.m2));
}

namespace {

Eigen::VectorXd unit_or_e1(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (n > 0.0) return v / n;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(v.size());
  e(0) = 1.0;
  return e;
}

}  // namespace

Eigen::VectorXd BellmanFunction::gradient(const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta,
                                          DerivativeMethod method) const {
  const int m1 = shape_.m1;
  const int m = m1 + shape_.m2;
  if (zeta.size() != m1 || eta.size() != shape_.m2)
    throw std::invalid_argument("bellman: point has the wrong block sizes");
  if (shape_.kappa > 0.0 && method == DerivativeMethod::mollifier) {
    const BiRadialJet j = jet(zeta.norm(), eta.norm());
    Eigen::VectorXd g(m);
    g.head(m1) = j.d_r * unit_or_e1(zeta);
    g.tail(shape_.m2) = j.d_s * unit_or_e1(eta);
    if (zeta.norm() == 0.0) g.head(m1).setZero();
    if (eta.norm() == 0.0) g.tail(shape_.m2).setZero();
    return g;
  }
  Eigen::VectorXd x(m);
  x << zeta, eta;
  double h;
  if (shape_.kappa == 0.0) {
    const double dist = singular_distance(zeta.norm(), eta.norm());
    if (dist <= 1e-3) throw std::domain_error("bellman: point within 1e-3 of the singular set");
    h = std::min(1e-2 * std::max(1.0, x.norm()), 0.25 * dist);
  } else {
    h = 0.05 * shape_.kappa;
  }
  Eigen::VectorXd g(m);
  for (int a = 0; a < m; ++a) {
    auto d = [&](double step) {
      Eigen::VectorXd xp = x, xm = x;
      xp(a) += step;
      xm(a) -= step;
      return (fd_value(xp) - fd_value(xm)) / (2.0 * step);
    };
    g(a) = (4.0 * d(0.5 * h) - d(h)) / 3.0;
  }
  return g;
}

Eigen::MatrixXd BellmanFunction::hessian(const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta,
                                         DerivativeMethod method) const {
  const int m1 = shape_.m1;
  const int m2 = shape_.m2;
  const int m = m1 + m2;
  if (zeta.size() != m1 || eta.size() != m2)
    throw std::invalid_argument("bellman: point has the wrong block sizes");
  if (shape_.kappa > 0.0 && method == DerivativeMethod::mollifier) {
    const BiRadialJet j = jet(zeta.norm(), eta.norm());
    const Eigen::VectorXd u = unit_or_e1(zeta);
    const Eigen::VectorXd v = unit_or_e1(eta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
    H.topLeftCorner(m1, m1) = j.d_rr * u * u.transpose() +
                              j.d_tt_zeta * (Eigen::MatrixXd::Identity(m1, m1) - u * u.transpose());
    H.bottomRightCorner(m2, m2) = j.d_ss * v * v.transpose() +
                                  j.d_tt_eta * (Eigen::MatrixXd::Identity(m2, m2) - v * v.transpose());
    H.topRightCorner(m1, m2) = j.d_rs * u * v.transpose();
    H.bottomLeftCorner(m2, m1) = H.topRightCorner(m1, m2).transpose();
    return H;
  }
  Eigen::VectorXd x(m);
  x << zeta, eta;
  double h;
  if (shape_.kappa == 0.0) {
    const double dist = singular_distance(zeta.norm(), eta.norm());
    if (dist <= 1e-3) throw std::domain_error("bellman: point within 1e-3 of the singular set");
    h = std::min(1e-2 * std::max(1.0, x.norm()), 0.25 * dist);
  } else {
    h = 0.05 * shape_.kappa;
  }
  const double f0 = fd_value(x);
  Eigen::MatrixXd H(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      auto d = [&](double st) {
        Eigen::VectorXd y = x;
        if (a == b) {
          y(a) = x(a) + st;
          const double fp = fd_value(y);
          y(a) = x(a) - st;
          return (fp - 2.0 * f0 + fd_value(y)) / (st * st);
        }
        double acc = 0.0;
        for (int sa = -1; sa <= 1; sa += 2) {
          for (int sb = -1; sb <= 1; sb += 2) {
            y = x;
            y(a) += sa * st;
            y(b) += sb * st;
            acc += sa * sb * fd_value(y);
          }
        }
        return acc / (4.0 * st * st);
      };
      H(a, b) = H(b, a) = (4.0 * d(0.5 * h) - d(h)) / 3.0;
    }
  }
  return H;
}

// ---------------------------------------------------------------- tau search

TauSearchResult tau_search(const Eigen::MatrixXd& H, double gamma, int m1, int m2) {
  const int m = m1 + m2;
  if (m1 < 1 || m2 < 1 || H.rows() != m || H.cols() != m)
    throw std::invalid_argument("tau_search: H must be (m1+m2) square");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("tau_search: H is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  auto margin = [&](double tau) {
    Eigen::MatrixXd A = H;
    for (int i = 0; i < m1; ++i) A(i, i) -= 0.5 * gamma * tau;
    for (int i = m1; i < m; ++i) A(i, i) -= 0.5 * gamma / tau;
    es.compute(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };

  constexpr int kScan = 60;
  const double lo = std::log(1e-6);
  const double hi = std::log(1e6);
  std::vector<double> lt(kScan), mv(kScan);
  int best = 0;
  for (int k = 0; k < kScan; ++k) {
    lt[k] = lo + (hi - lo) * k / (kScan - 1);
    mv[k] = margin(std::exp(lt[k]));
    if (mv[k] > mv[best]) best = k;
  }
  // golden section in log tau
  double a = lt[std::max(0, best - 1)];
  double b = lt[std::min(kScan - 1, best + 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = margin(std::exp(c)), fd = margin(std::exp(d));
  for (int it = 0; it < 80; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = margin(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = margin(std::exp(d));
    }
  }
  double lt_best = 0.5 * (a + b);
  double m_best = margin(std::exp(lt_best));
  if (mv[best] > m_best) {
    lt_best = lt[best];
    m_best = mv[best];
  }

  TauSearchResult r{m_best >= -kTauTol, std::exp(lt_best), m_best, 0.0, 0.0};
  if (!r.present) return r;
  auto edge = [&](double inside, double outside) {
    if (margin(std::exp(outside)) >= -kTauTol) return outside;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (inside + outside);
      (margin(std::exp(mid)) >= -kTauTol ? inside : outside) = mid;
    }
    return inside;
  };
  r.tau_lo = std::exp(edge(lt_best, lo));
  r.tau_hi = std::exp(edge(lt_best, hi));
  return r;
}

// ---------------------------------------------------------------- sweeps

GradientBoundsReport certify_bounds(const BellmanFunction& b, int grid_n, double r_max) {
  const BellmanShape& sh = b.shape();
  if (sh.kappa == 0.0) throw std::invalid_argument("certify_bounds: kappa must be positive");
  if (grid_n < 2 || !(r_max > 0.0)) throw std::invalid_argument("certify_bounds: bad grid");
  const double p = sh.p;
  const double q = sh.conj();
  const double kappa = sh.kappa;
  const std::size_t n = static_cast<std::size_t>(grid_n);

  struct Cell {
    bool b1, b2;
    double slack, dr, ds, cp;
  };
  std::vector<Cell> cells(n * n);
  detail::parallel_for(n, [&](std::size_t i) {
    const double r = r_max * static_cast<double>(i + 1) / grid_n;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = r_max * static_cast<double>(k + 1) / grid_n;
      const BiRadialJet j = b.jet(r, s);
      const double beta = 2.0 * j.value;
      const double dr = 2.0 * j.d_r;
      const double ds = 2.0 * j.d_s;
      const double bound = (1.0 + sh.gamma()) * (std::pow(r + kappa, p) + std::pow(s + kappa, q));
      const double env_r = std::max(std::pow(r + kappa, p - 1.0), s + kappa);
      const double env_s = std::pow(s + kappa, q - 1.0);
      Cell& c = cells[i * n + k];
      c.b1 = beta >= 0.0 && beta <= bound;
      c.slack = (bound - beta) / bound;
      c.dr = dr / env_r;
      c.ds = ds / env_s;
      c.b2 = c.dr >= -1e-10 && c.ds >= -1e-10;
      c.cp = std::max(c.dr, c.ds);
    }
  });
  GradientBoundsReport rep{sh, grid_n, r_max, n * n, 0, 1.0, 0, 0.0, 0.0, 0.0, 0.0};
  rep.b2_min_dr = rep.b2_min_ds = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Cell& c = cells[i * n + k];
      rep.b1_holds += c.b1;
      rep.b2_signs_hold += c.b2;
      rep.b1_min_slack = std::min(rep.b1_min_slack, c.slack);
      rep.b2_min_dr = std::min(rep.b2_min_dr, c.dr);
      rep.b2_min_ds = std::min(rep.b2_min_ds, c.ds);
      rep.cp = std::max(rep.cp, c.cp);
      if (i % 2 == 1 && k % 2 == 1) rep.cp_coarse = std::max(rep.cp_coarse, c.cp);
    }
  }
  return rep;
}

HessianReport certify_hessian(const BellmanFunction& b, std::size_t samples, std::uint64_t seed,
                              double r_max) {
  const BellmanShape& sh = b.shape();
  HessianReport rep{sh, seed, std::vector<HessianRow>(samples), 0, 0.0};
  detail::parallel_for(samples, [&](std::size_t k) {
    std::mt19937_64 rng(trial_seed(seed, k));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double r = 0.0, s = 0.0;
    do {
      r = r_max * (1.0 - uni(rng));
      s = r_max * (1.0 - uni(rng));
    } while (sh.kappa == 0.0 && b.singular_distance(r, s) <= kUnmollifiedClearance);
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(sh.m1);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(sh.m2);
    zeta(0) = r;
    eta(0) = s;
    const Eigen::MatrixXd H = b.hessian(zeta, eta);
    rep.rows[k] = {r, s, tau_search(H, sh.gamma(), sh.m1, sh.m2), b.singular_distance(r, s)};
  });
  for (const HessianRow& row : rep.rows) rep.certified += row.tau.present;
  rep.rate = samples ? static_cast<double>(rep.certified) / static_cast<double>(samples) : 0.0;
  return rep;
}

void write_certification_csv(const HessianReport& report, std::ostream& out) {
  out << "p,kappa,m1,m2,r,s,tau_or_absent,min_eig_margin\n";
  const auto old = out.precision(17);
  for (const HessianRow& row : report.rows) {
    out << report.shape.p << ',' << report.shape.kappa << ',' << report.shape.m1 << ','
        << report.shape.m2 << ',' << row.r << ',' << row.s << ',';
    if (row.tau.present) {
      out << row.tau.tau;
    } else {
      out << "ABSENT";
    }
    out << ',' << row.tau.margin << '\n';
  }
  out.precision(old);
}

}  // namespace brz
