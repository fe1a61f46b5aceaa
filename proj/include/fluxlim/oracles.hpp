#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fluxlim/grid.hpp"
#include "fluxlim/integrator.hpp"

namespace fluxlim {

struct Homogeneous {
  double n = 0.0, c = 0.0, m = 0.0;
};

/// Spatially homogeneous solution with u = 0: n, m from the exact reaction
/// flow, c = c0 e^-t + int_0^t e^-(t-s) m(s) ds by adaptive Gauss-Kronrod
/// quadrature (exponential-integral closed form when n0 = m0).
Homogeneous homogeneous_exact(double n0, double m0, double c0, double t);

struct OdeSample {
  double t;
  Homogeneous y;
};

/// Classical RK4 on n' = -nm, m' = -nm, c' = -c + m. Requires
/// 0 < dt <= t_end / 100. The last step is shortened to land on t_end.
std::vector<OdeSample> ode_reference(double n0, double m0, double c0, double t_end, double dt);

using SpaceTimeFn = std::function<double(const Point&, double)>;

struct MmsCase {
  std::string id;
  int dim = 1;
  double k_s = 1.0;
  double theta = 1.0;
  double t_end = 0.1;
  SpaceTimeFn n, c, m;           // exact fields
  SpaceTimeFn s_n, s_c, s_m;     // sources; empty means zero
};

const std::vector<std::string>& mms_case_ids();
/// Throws Error for an unknown id.
MmsCase mms_case(const std::string& id);

struct ErrorRow {
  double h = 0.0;
  double dt = 0.0;
  std::string field;
  std::string norm;  // "linf" or "l2"
  double error = 0.0;
};

/// Integrates the case with explicit diffusion and fixed dt from the exact
/// data at t = 0 to t_end; returns linf and l2 errors of n, c, m and linf of u.
std::vector<ErrorRow> mms_run(const MmsCase& mc, const GridSpec& g, double dt, double t_end);

/// Least-squares slope of log e against log h. Needs >= 2 points, h strictly
/// decreasing, e > 0.
double convergence_order(const std::vector<std::array<double, 2>>& h_e);

/// Lid-free cavity flow with stream function sin^2(pi x) sin^2(pi y) driven by
/// the compensating body force (pressure 0). Marches the implicit Stokes step
/// on an n x n grid to steady state; returns the max face error of u.
double stokes_cavity_error(int n);

}  // namespace fluxlim
