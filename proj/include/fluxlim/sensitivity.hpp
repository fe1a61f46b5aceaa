#pragma once

#include <string>
#include <vector>

namespace fluxlim {

/// Chemotactic sensitivity S(sigma) of the squared signal gradient
/// sigma = |grad c|^2.
///
/// The prototype is S(sigma) = k_s (1 + sigma)^(-theta/2). A user-supplied
/// limiter is a table of (sigma, S) pairs with linear interpolation, held
/// constant beyond the last abscissa; its (k_s, theta) are the claimed decay
/// constants, which verify_bound checks.
class FluxLimiter {
 public:
  enum class Kind { prototype, tabulated };

  /// Throws Error for k_s <= 0 or theta < 0.
  static FluxLimiter prototype(double k_s, double theta);

  /// Throws Error unless sigma is strictly increasing, starts at 0, and all
  /// values are finite.
  static FluxLimiter tabulated(std::vector<double> sigma, std::vector<double> value, double k_s, double theta);

  /// Reads a two-column CSV "sigma,value" (an optional non-numeric header
  /// line is skipped).
  static FluxLimiter from_csv(const std::string& path, double k_s, double theta);

  Kind kind() const { return kind_; }
  double k_s() const { return k_s_; }
  double theta() const { return theta_; }

  /// theta > 0 is the regime where boundedness is known to hold.
  bool in_proven_regime() const { return theta_ > 0.0; }

  /// S(sigma). Throws Error("negative gradient-square") for sigma < 0.
  double eval(double sigma) const;

  /// dS/dsigma; prototype only (Error("no derivative") otherwise).
  double eval_prime(double sigma) const;

 private:
  Kind kind_ = Kind::prototype;
  double k_s_ = 1.0;
  double theta_ = 0.0;
  std::vector<double> sigma_;
  std::vector<double> value_;
};

/// True iff |S(sigma)| <= k_s_claim (1+sigma)^(-theta_claim/2) at `samples`
/// log-spaced points of [0, 1e8] (sigma = 0 included), with relative slack
/// 1e-12. Requires samples >= 10.
bool verify_bound(const FluxLimiter& lim, double k_s_claim, double theta_claim, int samples);

}  // namespace fluxlim
