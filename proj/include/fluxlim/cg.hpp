#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fluxlim/grid.hpp"

namespace fluxlim {

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  ///< final Euclidean residual
  double residual_inf = 0.0;
  bool converged = false;
};

enum class Precond { none, jacobi, spectral };

struct CgOptions {
  double rel_tol = 0.0;   ///< stop when ||r||_2 <= rel_tol ||b||_2
  double inf_tol = 0.0;   ///< or when ||r||_inf <= inf_tol
  int max_iter = 1000;
  bool mean_zero = false; ///< operator is singular on constants (pure Neumann)
  std::span<const double> inv_diag;  ///< Jacobi preconditioner; empty = none
  /// General preconditioner z = M^-1 r; takes precedence over inv_diag.
  std::function<void(std::span<const double>, std::span<double>)> precond;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  return pairwise_reduce(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}
inline void remove_mean(std::span<double> v) {
  const double mean = pairwise_reduce(0, v.size(), [&](std::size_t i) { return v[i]; }) / v.size();
  for (double& x : v) x -= mean;
}
}  // namespace detail

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi)definite operator given as apply(in, out). x holds the initial guess
/// on entry and the iterate on exit.
template <class Apply>
SolveReport conjugate_gradient(Apply&& apply, std::span<const double> b_in, std::span<double> x, const CgOptions& opt) {
  const std::size_t n = b_in.size();
  std::vector<double> b(b_in.begin(), b_in.end());
  if (opt.mean_zero) {
    detail::remove_mean(b);
    detail::remove_mean(x);
  }
  std::vector<double> r(n), z, p(n), q(n);
  apply(std::span<const double>(x.data(), n), std::span<double>(q));
  double r_inf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - q[i];
    r_inf = std::max(r_inf, std::abs(r[i]));
  }
  const bool precond = opt.precond || !opt.inv_diag.empty();
  auto precondition = [&]() {
    if (!precond) return;
    z.resize(n);
    if (opt.precond)
      opt.precond(r, z);
    else
      for (std::size_t i = 0; i < n; ++i) z[i] = opt.inv_diag[i] * r[i];
    if (opt.mean_zero) detail::remove_mean(z);
  };
  const double b_norm = std::sqrt(detail::dot(b, b));
  SolveReport rep;
  double rr = detail::dot(r, r);
  auto done = [&](double rr_now, double rinf_now) {
    return std::sqrt(rr_now) <= opt.rel_tol * b_norm || rinf_now <= opt.inf_tol;
  };
  if (done(rr, r_inf)) {
    rep.converged = true;
    rep.residual = std::sqrt(rr);
    rep.residual_inf = r_inf;
    return rep;
  }
  precondition();
  const std::vector<double>& zr = precond ? z : r;
  p = zr;
  double rz = precond ? detail::dot(r, z) : rr;
  for (int it = 1; it <= opt.max_iter; ++it) {
    apply(std::span<const double>(p), std::span<double>(q));
    const double pq = detail::dot(p, q);
    if (!(pq > 0.0)) {
      rep.iterations = it;
      break;  // breakdown: operator not positive on this direction
    }
    const double alpha = rz / pq;
    r_inf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      r_inf = std::max(r_inf, std::abs(r[i]));
    }
    rr = detail::dot(r, r);
    rep.iterations = it;
    if (done(rr, r_inf)) {
      rep.converged = true;
      break;
    }
    precondition();
    const double rz_new = precond ? detail::dot(r, z) : rr;
    const double beta = rz_new / rz;
    rz = rz_new;
    const std::vector<double>& zn = precond ? z : r;
    for (std::size_t i = 0; i < n; ++i) p[i] = zn[i] + beta * p[i];
  }
  if (opt.mean_zero) detail::remove_mean(x);
  rep.residual = std::sqrt(rr);
  rep.residual_inf = r_inf;
  return rep;
}

}  // namespace fluxlim
