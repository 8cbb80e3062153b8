#pragma once

// Bessel functions of the first kind J_mu and I_mu for real order mu >= -1/2
// and nonnegative real argument, plus the normalized variants z^{-mu}J_mu(z)
// and z^{-mu}I_mu(z) that stay finite as z -> 0.
//
// All functions are pure and thread-safe.

namespace brz {

/// Order of a Bessel function. Only mu >= -1/2 is supported.
class BesselOrder {
 public:
  explicit BesselOrder(double mu);
  double value() const noexcept { return mu_; }
  bool is_minus_half() const noexcept { return mu_ == -0.5; }
  bool is_plus_half() const noexcept { return mu_ == 0.5; }
  BesselOrder shifted(double by) const { return BesselOrder(mu_ + by); }

 private:
  double mu_;
};

enum class Scaling {
  none,
  /// multiply the result by e^{-z}
  exponential,
};

/// J_mu(z). Throws std::domain_error for z < 0 or non-finite z and
/// std::overflow_error for mu = -1/2 at z = 0.
double bessel_j(BesselOrder order, double z);

/// I_mu(z), or e^{-z} I_mu(z) with Scaling::exponential.
/// Throws std::overflow_error when the unscaled value leaves the double range.
double bessel_i(BesselOrder order, double z, Scaling scaling = Scaling::none);

/// z^{-mu} J_mu(z), with the limit 1/(2^mu Gamma(mu+1)) at z = 0.
double scaled_j(BesselOrder order, double z);

/// z^{-mu} I_mu(z) (or e^{-z} z^{-mu} I_mu(z)), limit 1/(2^mu Gamma(mu+1)) at 0.
double scaled_i(BesselOrder order, double z, Scaling scaling = Scaling::none);

/// Value of z^{-mu}J_mu(z) and z^{-mu}I_mu(z) at z = 0.
double scaled_limit_at_zero(BesselOrder order);

}  // namespace brz
