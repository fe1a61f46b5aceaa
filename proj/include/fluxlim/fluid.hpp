#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>

#include "fluxlim/cg.hpp"
#include "fluxlim/grid.hpp"

namespace fluxlim {

/// Gravitational potential. Only affine potentials Phi = g . x are supported,
/// so grad Phi is the constant vector g.
struct Potential {
  enum class Kind { zero, linear };
  Kind kind = Kind::zero;
  std::array<double, 3> g{0.0, 0.0, 0.0};

  static Potential zero() { return {}; }
  static Potential linear(std::array<double, 3> g) { return {Kind::linear, g}; }
};

using PoissonSolveReport = SolveReport;

/// (n + m) averaged to interior faces times the face-normal component of
/// grad Phi. Boundary-normal faces are zero.
VectorField buoyancy_force(const ScalarField& n, const ScalarField& m, const Potential& phi);

struct PoissonOptions {
  double inf_tol = 0.0;  ///< extra absolute stopping test on max |residual|
  Precond precond = Precond::spectral;
  int max_iter = 0;      ///< 0: 10 * dim * (prod N)^(1/dim)
};

/// Solves laplacian_neumann(phi) = rhs - mean(rhs) for mean-zero phi by
/// conjugate gradients, stopping at ||L phi - rhs||_2 <= tol ||rhs||_2.
/// `guess` (if given) seeds the iteration. Throws Error("poisson diverged")
/// when the iteration cap is hit.
std::pair<ScalarField, PoissonSolveReport> poisson_solve_neumann(const ScalarField& rhs, double tol,
                                                                 const PoissonOptions& opt = {},
                                                                 const ScalarField* guess = nullptr);

/// Default CG iteration cap for a grid.
int default_max_iterations(const GridSpec& g);

/// Component-wise MAC Laplacian of a no-slip velocity: Dirichlet zero on
/// boundary-normal faces, reflected (negated) ghosts for tangential walls.
VectorField vector_laplacian(const VectorField& u);
void apply_vector_laplacian(const GridSpec& g, int axis, std::span<const double> in, std::span<double> out);

/// Discrete MAC divergence.
ScalarField divergence(const VectorField& u);

/// h_min^2 / (4 dim): the explicit viscous step limit.
double dt_visc(const GridSpec& g);

enum class ViscousMode { explicit_euler, implicit_be };

struct StokesOptions {
  ViscousMode viscous = ViscousMode::explicit_euler;
  double tol_poisson = 1e-12;
  double tol_proj = 1e-8;
  double tol_implicit = 1e-12;
  Precond precond = Precond::spectral;
};

struct StokesResult {
  VectorField u;
  ScalarField p;
  PoissonSolveReport poisson;
  int viscous_iterations = 0;
  double div_inf = 0.0;
};

/// One step of u_t = Delta u + grad P + force, div u = 0, u = 0 on walls by
/// incremental Chorin projection:
///   u* = u + dt (Delta u* or Delta u + force + grad P_old)
///   Delta phi = div u* / dt,  u = u* - dt grad phi,  P = P_old - phi.
/// P is returned mean-zero. With p_old = nullptr the previous pressure is 0.
/// In 1D the only admissible velocity is 0, so u = 0 and P = 0.
/// Throws Error("viscous CFL") for an explicit step with dt > dt_visc.
StokesResult stokes_step(const VectorField& u, const VectorField& force, double dt, const StokesOptions& opt,
                         const ScalarField* p_old = nullptr);

/// Removes the gradient part of u (Leray projection on the MAC grid).
VectorField project_divergence_free(const VectorField& u, double tol_proj, const StokesOptions& opt = {});

}  // namespace fluxlim
