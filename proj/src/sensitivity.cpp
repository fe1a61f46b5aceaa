#include "fluxlim/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fluxlim/error.hpp"

namespace fluxlim {

FluxLimiter FluxLimiter::prototype(double k_s, double theta) {
  if (!(k_s > 0.0) || !std::isfinite(k_s)) throw Error("invalid limiter: k_s must be positive");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw Error("invalid limiter: theta must be >= 0");
  FluxLimiter lim;
  lim.kind_ = Kind::prototype;
  lim.k_s_ = k_s;
  lim.theta_ = theta;
  return lim;
}

FluxLimiter FluxLimiter::tabulated(std::vector<double> sigma, std::vector<double> value, double k_s, double theta) {
  FluxLimiter lim = prototype(k_s, theta);
  lim.kind_ = Kind::tabulated;
  if (sigma.size() < 2 || sigma.size() != value.size())
    throw Error("invalid limiter table: need at least two (sigma, value) rows");
  if (sigma.front() != 0.0) throw Error("invalid limiter table: first sigma must be 0");
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!std::isfinite(sigma[i]) || !std::isfinite(value[i]))
      throw Error("invalid limiter table: non-finite entry at row " + std::to_string(i));
    if (i > 0 && !(sigma[i] > sigma[i - 1]))
      throw Error("invalid limiter table: sigma not strictly increasing at row " + std::to_string(i));
  }
  lim.sigma_ = std::move(sigma);
  lim.value_ = std::move(value);
  return lim;
}

FluxLimiter FluxLimiter::from_csv(const std::string& path, double k_s, double theta) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open limiter table '" + path + "'");
  std::vector<double> sigma, value;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double s = 0.0, v = 0.0;
    if (!(row >> s >> v)) {
      if (sigma.empty() && lineno == 1) continue;  // header
      throw Error(path + ":" + std::to_string(lineno) + ": expected 'sigma,value'");
    }
    sigma.push_back(s);
    value.push_back(v);
  }
  return tabulated(std::move(sigma), std::move(value), k_s, theta);
}

double FluxLimiter::eval(double sigma) const {
  if (sigma < 0.0) throw Error("negative gradient-square");
  if (kind_ == Kind::prototype) {
    if (theta_ == 0.0) return k_s_;
    return k_s_ * std::pow(1.0 + sigma, -0.5 * theta_);
  }
  if (sigma >= sigma_.back()) return value_.back();
  const auto hi = std::upper_bound(sigma_.begin(), sigma_.end(), sigma);
  const std::size_t j = static_cast<std::size_t>(hi - sigma_.begin());
  const double w = (sigma - sigma_[j - 1]) / (sigma_[j] - sigma_[j - 1]);
  return (1.0 - w) * value_[j - 1] + w * value_[j];
}

double FluxLimiter::eval_prime(double sigma) const {
  if (sigma < 0.0) throw Error("negative gradient-square");
  if (kind_ != Kind::prototype) throw Error("no derivative");
  if (theta_ == 0.0) return 0.0;
  return -0.5 * theta_ * k_s_ * std::pow(1.0 + sigma, -0.5 * theta_ - 1.0);
}

bool verify_bound(const FluxLimiter& lim, double k_s_claim, double theta_claim, int samples) {
  if (samples < 10) throw Error("verify_bound: need at least 10 samples");
  constexpr double lo = 1e-8, hi = 1e8;
  auto holds = [&](double sigma) {
    const double bound = k_s_claim * std::pow(1.0 + sigma, -0.5 * theta_claim);
    return std::abs(lim.eval(sigma)) <= bound * (1.0 + 1e-12);
  };
  if (!holds(0.0)) return false;
  const double step = std::log(hi / lo) / (samples - 2);
  for (int i = 0; i < samples - 1; ++i)
    if (!holds(lo * std::exp(step * i))) return false;
  return true;
}

}  // namespace fluxlim
