#include "brz/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

namespace brz {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
// Above this argument e^{-z} I_mu(z) comes from the large-z expansion.
constexpr double kAsymptoticI = 650.0;

void check_argument(double z) {
  if (!std::isfinite(z) || z < 0.0) {
    throw std::domain_error("Bessel argument must be finite and >= 0, got " +
                            std::to_string(z));
  }
}

// sum_k s^k (z^2/4)^k / (k! Gamma(mu+k+1)) / 2^mu, s = -1 for J, +1 for I.
double power_series(double mu, double z, double sign) {
  const double q = sign * 0.25 * z * z;
  double term = scaled_limit_at_zero(BesselOrder(mu));
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (mu + k));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

bool use_series_j(double mu, double z) { return 0.25 * z * z <= 1.0 + mu; }

// e^{-z} I_mu(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(mu) / z^k.
double asymptotic_scaled_i(double mu, double z) {
  const double four_mu2 = 4.0 * mu * mu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (four_mu2 - odd * odd) / (8.0 * k * z);
    if (std::abs(next) > std::abs(term)) break;  // asymptotic series diverging
    term = next;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace

BesselOrder::BesselOrder(double mu) : mu_(mu) {
  if (!std::isfinite(mu) || mu < -0.5) {
    throw std::domain_error("Bessel order must be >= -1/2, got " +
                            std::to_string(mu));
  }
}

double scaled_limit_at_zero(BesselOrder order) {
  const double mu = order.value();
  return std::exp(-mu * std::numbers::ln2 - std::lgamma(mu + 1.0));
}

double bessel_j(BesselOrder order, double z) {
  check_argument(z);
  const double mu = order.value();
  if (order.is_minus_half()) {
    if (z == 0.0) throw std::overflow_error("J_{-1/2}(0) is infinite");
    return std::sqrt(2.0 / (std::numbers::pi * z)) * std::cos(z);
  }
  if (order.is_plus_half()) {
    if (z == 0.0) return 0.0;
    return std::sqrt(2.0 / (std::numbers::pi * z)) * std::sin(z);
  }
  if (z == 0.0) return mu == 0.0 ? 1.0 : 0.0;
  if (use_series_j(mu, z)) return std::pow(z, mu) * power_series(mu, z, -1.0);
  return boost::math::cyl_bessel_j(mu, z);
}

double scaled_j(BesselOrder order, double z) {
  check_argument(z);
  const double mu = order.value();
  if (order.is_minus_half()) return kSqrt2OverPi * std::cos(z);
  if (order.is_plus_half() && z > 0.5) return kSqrt2OverPi * std::sin(z) / z;
  if (use_series_j(mu, z)) return power_series(mu, z, -1.0);
  return boost::math::cyl_bessel_j(mu, z) / std::pow(z, mu);
}

double scaled_i(BesselOrder order, double z, Scaling scaling) {
  check_argument(z);
  const double mu = order.value();
  const bool expo = scaling == Scaling::exponential;
  if (order.is_minus_half()) {
    return expo ? 0.5 * kSqrt2OverPi * (1.0 + std::exp(-2.0 * z))
                : kSqrt2OverPi * std::cosh(z);
  }
  if (order.is_plus_half() && z > 0.5) {
    return expo ? 0.5 * kSqrt2OverPi * (-std::expm1(-2.0 * z)) / z
                : kSqrt2OverPi * std::sinh(z) / z;
  }
  if (z <= 15.0) {
    const double v = power_series(mu, z, 1.0);
    return expo ? v * std::exp(-z) : v;
  }
  if (expo) return bessel_i(order, z, Scaling::exponential) / std::pow(z, mu);
  const double log_value = z + std::log(bessel_i(order, z, Scaling::exponential)) -
                           mu * std::log(z);
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error("z^{-mu} I_mu(z) overflows at z = " + std::to_string(z));
  }
  return std::exp(log_value);
}

double bessel_i(BesselOrder order, double z, Scaling scaling) {
  check_argument(z);
  const double mu = order.value();
  const bool expo = scaling == Scaling::exponential;
  if (z == 0.0) {
    if (order.is_minus_half()) throw std::overflow_error("I_{-1/2}(0) is infinite");
    return mu == 0.0 ? 1.0 : 0.0;
  }
  if (order.is_minus_half() || order.is_plus_half()) {
    // sqrt(2/(pi z)) cosh z and sqrt(2/(pi z)) sinh z with a shared prefactor
    const double c = std::sqrt(2.0 / (std::numbers::pi * z));
    if (expo) {
      const double e = std::exp(-2.0 * z);
      return order.is_minus_half() ? 0.5 * c * (1.0 + e) : -0.5 * c * std::expm1(-2.0 * z);
    }
    if (z >= kAsymptoticI) throw std::overflow_error("I_mu(z) overflows; request Scaling::exponential");
    return order.is_minus_half() ? c * std::cosh(z) : c * std::sinh(z);
  }
  if (z >= kAsymptoticI) {
    const double scaled = asymptotic_scaled_i(mu, z);
    if (expo) return scaled;
    throw std::overflow_error("I_mu(z) overflows at z = " + std::to_string(z) +
                              "; request Scaling::exponential");
  }
  if (z <= 15.0) {
    const double v = std::pow(z, mu) * power_series(mu, z, 1.0);
    return expo ? v * std::exp(-z) : v;
  }
  const double v = boost::math::cyl_bessel_i(mu, z);
  return expo ? v * std::exp(-z) : v;
}

}  // namespace brz
