#include "fluxlim/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fluxlim/error.hpp"
#include "fluxlim/operators.hpp"
#include "fluxlim/parallel.hpp"
#include "fluxlim/spectral.hpp"

namespace fluxlim {

VectorField buoyancy_force(const ScalarField& n, const ScalarField& m, const Potential& phi) {
  const GridSpec& g = n.grid;
  VectorField F(g);
  if (phi.kind == Potential::Kind::zero) return F;
  for (int a = 0; a < g.dim(); ++a) {
    const Extents& fe = g.face_extents(a);
    const Extents& ce = g.cell_extents();
    const std::size_t s = ce.stride[a];
    const int nc = g.cells(a);
    const double ga = phi.g[a];
    for (int i = 0; i < fe.n[0]; ++i)
      for (int j = 0; j < fe.n[1]; ++j)
        for (int k = 0; k < fe.n[2]; ++k) {
          const int ia = a == 0 ? i : (a == 1 ? j : k);
          if (ia == 0 || ia == nc) continue;
          const std::size_t r = ce.index(i, j, k);
          const double rho = 0.5 * ((n.values[r - s] + m.values[r - s]) + (n.values[r] + m.values[r]));
          F[a][fe.index(i, j, k)] = rho * ga;
        }
  }
  return F;
}

int default_max_iterations(const GridSpec& g) {
  const double geo = std::pow(static_cast<double>(g.size()), 1.0 / g.dim());
  return std::min(100000, static_cast<int>(10.0 * g.dim() * std::ceil(geo)));
}

namespace {

std::vector<double> neumann_inverse_diagonal(const GridSpec& g) {
  std::vector<double> d(g.size(), 0.0);
  const Extents& e = g.cell_extents();
  for (int i = 0; i < e.n[0]; ++i)
    for (int j = 0; j < e.n[1]; ++j)
      for (int k = 0; k < e.n[2]; ++k) {
        const std::array<int, 3> ix{i, j, k};
        double diag = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
          const int neighbours = (ix[a] > 0) + (ix[a] + 1 < e.n[a]);
          diag += neighbours / (g.h(a) * g.h(a));
        }
        d[e.index(i, j, k)] = 1.0 / diag;
      }
  return d;
}

}  // namespace

std::pair<ScalarField, PoissonSolveReport> poisson_solve_neumann(const ScalarField& rhs, double tol,
                                                                 const PoissonOptions& opt, const ScalarField* guess) {
  require_finite(rhs.values);
  const GridSpec& g = rhs.grid;
  ScalarField phi(g);
  if (guess != nullptr) phi.values = guess->values;
  // Solve (-L) phi = -rhs: -L is positive semidefinite with the constants as kernel.
  std::vector<double> b(rhs.values.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = -rhs.values[i];
  CgOptions cg;
  cg.rel_tol = tol;
  cg.inf_tol = opt.inf_tol;
  cg.max_iter = opt.max_iter > 0 ? opt.max_iter : default_max_iterations(g);
  cg.mean_zero = true;
  std::vector<double> inv_diag;
  if (opt.precond == Precond::jacobi) {
    inv_diag = neumann_inverse_diagonal(g);
    cg.inv_diag = inv_diag;
  } else if (opt.precond == Precond::spectral) {
    auto inv = SpectralInverse::cell_neumann(g);
    cg.precond = [inv](std::span<const double> r, std::span<double> z) { inv->apply(0.0, 1.0, r, z); };
  }
  auto apply = [&g](std::span<const double> in, std::span<double> out) {
    apply_laplacian(g, in, out);
    for (double& x : out) x = -x;
  };
  const bool zero_rhs = std::all_of(rhs.values.begin(), rhs.values.end(), [](double x) { return x == 0.0; });
  if (zero_rhs) {
    phi.values.assign(phi.size(), 0.0);
    PoissonSolveReport rep;
    rep.converged = true;
    return {std::move(phi), rep};
  }
  const PoissonSolveReport rep = conjugate_gradient(apply, b, phi.values, cg);
  if (!rep.converged) throw Error("poisson diverged");
  return {std::move(phi), rep};
}

void apply_vector_laplacian(const GridSpec& g, int axis, std::span<const double> in, std::span<double> out) {
  const Extents& fe = g.face_extents(axis);
  const int dim = g.dim();
  std::array<double, 3> inv_h2{};
  for (int a = 0; a < dim; ++a) inv_h2[a] = 1.0 / (g.h(a) * g.h(a));
  const int n_axis = g.cells(axis);
  parallel_for(static_cast<std::size_t>(fe.n[0]), [&](std::size_t lo, std::size_t hi) {
    for (int i = static_cast<int>(lo); i < static_cast<int>(hi); ++i)
      for (int j = 0; j < fe.n[1]; ++j)
        for (int k = 0; k < fe.n[2]; ++k) {
          const std::array<int, 3> ix{i, j, k};
          const std::size_t f = fe.index(i, j, k);
          if (ix[axis] == 0 || ix[axis] == n_axis) {
            out[f] = 0.0;
            continue;
          }
          const double x = in[f];
          double acc = 0.0;
          for (int b = 0; b < dim; ++b) {
            const std::size_t s = fe.stride[b];
            // Along the normal axis the boundary faces hold exact zeros; across
            // tangential walls the ghost is -x so the wall value vanishes.
            const double lo_v = ix[b] > 0 ? in[f - s] : -x;
            const double hi_v = ix[b] + 1 < fe.n[b] ? in[f + s] : -x;
            acc += (hi_v - 2.0 * x + lo_v) * inv_h2[b];
          }
          out[f] = acc;
        }
  });
}

VectorField vector_laplacian(const VectorField& u) {
  VectorField out(u.grid);
  for (int a = 0; a < u.grid.dim(); ++a) apply_vector_laplacian(u.grid, a, u[a], out[a]);
  return out;
}

ScalarField divergence(const VectorField& u) { return div_face_to_cc(u); }

double dt_visc(const GridSpec& g) {
  const double h = g.h_min();
  return h * h / (4.0 * g.dim());
}

namespace {

// u <- u - scale * grad(phi) on interior faces.
void subtract_gradient(VectorField& u, const ScalarField& phi, double scale) {
  const FaceFlux G = grad_cc_to_face(phi);
  for (int a = 0; a < u.grid.dim(); ++a)
    for (std::size_t f = 0; f < u[a].size(); ++f) u[a][f] -= scale * G[a][f];
}

void zero_wall_normal(FaceField& u) {
  const GridSpec& g = u.grid;
  for (int a = 0; a < g.dim(); ++a) {
    const Extents& fe = g.face_extents(a);
    const int n = g.cells(a);
    for (int i = 0; i < fe.n[0]; ++i)
      for (int j = 0; j < fe.n[1]; ++j)
        for (int k = 0; k < fe.n[2]; ++k) {
          const int ia = a == 0 ? i : (a == 1 ? j : k);
          if (ia == 0 || ia == n) u[a][fe.index(i, j, k)] = 0.0;
        }
  }
}

void remove_mean(ScalarField& p) {
  const double mean = pairwise_sum(p.values) / static_cast<double>(p.size());
  for (double& x : p.values) x -= mean;
}

}  // namespace

StokesResult stokes_step(const VectorField& u, const VectorField& force, double dt, const StokesOptions& opt,
                         const ScalarField* p_old) {
  const GridSpec& g = u.grid;
  StokesResult res;
  res.u = VectorField(g);
  res.p = ScalarField(g);
  if (g.dim() == 1) {
    res.poisson.converged = true;
    return res;
  }
  if (!(dt > 0.0)) throw Error("stokes_step: dt must be positive");

  VectorField rhs(g);
  const FaceFlux gp = p_old != nullptr ? grad_cc_to_face(*p_old) : FaceFlux(g);
  for (int a = 0; a < g.dim(); ++a)
    for (std::size_t f = 0; f < rhs[a].size(); ++f) rhs[a][f] = dt * (force[a][f] + gp[a][f]);
  zero_wall_normal(rhs);

  VectorField ustar(g);
  if (opt.viscous == ViscousMode::explicit_euler) {
    if (dt > dt_visc(g) * (1.0 + 1e-12)) throw Error("viscous CFL");
    const VectorField lap = vector_laplacian(u);
    for (int a = 0; a < g.dim(); ++a)
      for (std::size_t f = 0; f < rhs[a].size(); ++f) ustar[a][f] = u[a][f] + dt * lap[a][f] + rhs[a][f];
  } else {
    for (int a = 0; a < g.dim(); ++a) {
      std::vector<double> b(rhs[a].size());
      double b_inf = 0.0;
      for (std::size_t f = 0; f < b.size(); ++f) {
        b[f] = u[a][f] + rhs[a][f];
        b_inf = std::max(b_inf, std::abs(b[f]));
      }
      ustar[a] = b;
      if (b_inf == 0.0) continue;
      std::vector<double> tmp(b.size());
      auto apply = [&](std::span<const double> in, std::span<double> out) {
        apply_vector_laplacian(g, a, in, out);
        for (std::size_t f = 0; f < out.size(); ++f) out[f] = in[f] - dt * out[f];
      };
      CgOptions cg;
      cg.inf_tol = opt.tol_implicit * b_inf;
      cg.max_iter = default_max_iterations(g);
      if (opt.precond == Precond::spectral) {
        auto inv = SpectralInverse::face(g, a);
        cg.precond = [inv, dt](std::span<const double> r, std::span<double> z) { inv->apply(1.0, dt, r, z); };
      }
      const SolveReport rep = conjugate_gradient(apply, b, ustar[a], cg);
      if (!rep.converged) throw Error("implicit viscous solve did not converge");
      res.viscous_iterations += rep.iterations;
    }
  }
  zero_wall_normal(ustar);

  ScalarField div = divergence(ustar);
  for (double& x : div.values) x /= dt;
  PoissonOptions popt;
  popt.inf_tol = 1e-2 * opt.tol_proj / dt;
  popt.precond = opt.precond;
  auto [phi, rep] = poisson_solve_neumann(div, opt.tol_poisson, popt);
  res.poisson = rep;
  subtract_gradient(ustar, phi, dt);
  res.u = std::move(ustar);
  if (p_old != nullptr) res.p = *p_old;
  for (std::size_t i = 0; i < res.p.size(); ++i) res.p.values[i] -= phi.values[i];
  remove_mean(res.p);
  res.div_inf = lp_norm(divergence(res.u), std::numeric_limits<double>::infinity());
  return res;
}

VectorField project_divergence_free(const VectorField& u, double tol_proj, const StokesOptions& opt) {
  const GridSpec& g = u.grid;
  if (g.dim() == 1) return VectorField(g);
  VectorField out = u;
  zero_wall_normal(out);
  PoissonOptions popt;
  popt.inf_tol = 1e-2 * tol_proj;
  popt.precond = opt.precond;
  auto [phi, rep] = poisson_solve_neumann(divergence(out), opt.tol_poisson, popt);
  subtract_gradient(out, phi, 1.0);
  return out;
}

}  // namespace fluxlim
