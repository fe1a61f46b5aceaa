#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fluxlim/error.hpp"
#include "fluxlim/fluid.hpp"
#include "fluxlim/operators.hpp"
#include "support.hpp"

using namespace fluxlim;
using fluxlim::test::random_faces;
using fluxlim::test::random_field;

namespace {

double sup(const ScalarField& f) { return lp_norm(f, INFINITY); }

VectorField face_diff(const VectorField& a, const VectorField& b) {
  VectorField d(a.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t f = 0; f < a[c].size(); ++f) d[c][f] = a[c][f] - b[c][f];
  return d;
}

}  // namespace

TEST_CASE("buoyancy examples") {
  const GridSpec g = GridSpec::cube(3, 6);
  std::mt19937_64 rng(1);
  const ScalarField n = random_field(g, rng, 0.0, 1.0), m = random_field(g, rng, 0.0, 1.0);
  CHECK(face_linf(buoyancy_force(n, m, Potential::zero())) == 0.0);

  const ScalarField half(g, 0.5);
  const VectorField F = buoyancy_force(half, half, Potential::linear({0.0, 0.0, -1.0}));
  CHECK(face_linf(F) == 1.0);
  const Extents& ez = g.face_extents(2);
  CHECK(F[2][ez.index(2, 3, 3)] == -1.0);
  CHECK(F[2][ez.index(2, 3, 0)] == 0.0);
  CHECK(F[2][ez.index(2, 3, 6)] == 0.0);
  for (int a = 0; a < 2; ++a)
    for (double x : F[a]) CHECK(x == 0.0);

  const Potential tilt = Potential::linear({0.3, -0.2, 1.1});
  const VectorField f1 = buoyancy_force(n, m, tilt);
  const VectorField f2 = buoyancy_force(axpy(n, 1.0, n), axpy(m, 1.0, m), tilt);
  for (int a = 0; a < 3; ++a)
    for (std::size_t f = 0; f < f1[a].size(); ++f) CHECK(f2[a][f] == 2.0 * f1[a][f]);
}

TEST_CASE("poisson solve of a zero rhs takes no iterations") {
  const GridSpec g = GridSpec::cube(2, 8);
  auto [phi, rep] = poisson_solve_neumann(ScalarField(g), 1e-12);
  CHECK(rep.iterations == 0);
  CHECK(sup(phi) == 0.0);
}

TEST_CASE("poisson solve inverts the laplacian") {
  std::mt19937_64 rng(2);
  for (Precond pc : {Precond::spectral, Precond::jacobi, Precond::none}) {
    for (int dim = 1; dim <= 3; ++dim) {
      const GridSpec g = GridSpec::cube(dim, dim == 3 ? 8 : 16);
      ScalarField f = random_field(g, rng);
      f = shifted(f, -integrate(f) / g.volume());
      PoissonOptions opt;
      opt.precond = pc;
      auto [phi, rep] = poisson_solve_neumann(laplacian_neumann(f), 1e-13, opt);
      CHECK(rep.converged);
      CHECK(sup(axpy(phi, -1.0, f)) <= 1e-8);
      CHECK(std::abs(integrate(phi)) <= 1e-12);
    }
  }
}

TEST_CASE("spectral preconditioning converges in one iteration on a uniform box") {
  const GridSpec g = GridSpec::make(std::vector<int>{24, 16}, std::vector<double>{1.5, 1.0});
  std::mt19937_64 rng(3);
  const ScalarField rhs = random_field(g, rng);
  PoissonOptions opt;
  opt.precond = Precond::spectral;
  auto [a, ra] = poisson_solve_neumann(rhs, 1e-12, opt);
  opt.precond = Precond::none;
  auto [b, rb] = poisson_solve_neumann(rhs, 1e-12, opt);
  CHECK(ra.iterations <= 2);
  CHECK(rb.iterations > ra.iterations);
  CHECK(sup(axpy(a, -1.0, b)) <= 1e-9 * sup(a));
}

TEST_CASE("poisson solve of the cosine mode is second order") {
  auto err = [](int n) {
    const GridSpec g = GridSpec::cube(1, n);
    const double k = std::numbers::pi;
    const ScalarField rhs = ScalarField::sample(g, [k](const Point& p) { return -k * k * std::cos(k * p[0]); });
    const ScalarField exact = ScalarField::sample(g, [k](const Point& p) { return std::cos(k * p[0]); });
    auto [phi, rep] = poisson_solve_neumann(rhs, 1e-14);
    return sup(axpy(phi, -1.0, exact));
  };
  CHECK(err(32) / err(64) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("poisson iteration cap raises an error") {
  const GridSpec g = GridSpec::cube(2, 16);
  std::mt19937_64 rng(4);
  PoissonOptions opt;
  opt.precond = Precond::none;
  opt.max_iter = 1;
  CHECK_THROWS_WITH_AS(poisson_solve_neumann(random_field(g, rng), 1e-12, opt), "poisson diverged", Error);
}

TEST_CASE("stokes step from rest without force stays at rest") {
  const GridSpec g = GridSpec::cube(2, 8);
  const StokesResult r = stokes_step(VectorField(g), VectorField(g), 1e-3, {});
  CHECK(face_linf(r.u) == 0.0);
  CHECK(sup(r.p) == 0.0);
}

TEST_CASE("stokes step output is discretely divergence free") {
  std::mt19937_64 rng(5);
  for (int dim = 2; dim <= 3; ++dim) {
    const GridSpec g = GridSpec::cube(dim, 10);
    for (ViscousMode mode : {ViscousMode::explicit_euler, ViscousMode::implicit_be}) {
      StokesOptions opt;
      opt.viscous = mode;
      const double dt = mode == ViscousMode::explicit_euler ? dt_visc(g) : 0.05;
      const StokesResult r = stokes_step(random_faces(g, rng), random_faces(g, rng), dt, opt);
      CHECK(sup(divergence(r.u)) <= 1e-8);
      CHECK(r.div_inf == sup(divergence(r.u)));
      CHECK(std::abs(integrate(r.p)) <= 1e-12);
    }
  }
}

TEST_CASE("one-dimensional velocity is identically zero") {
  const GridSpec g = GridSpec::cube(1, 16);
  std::mt19937_64 rng(6);
  const StokesResult r = stokes_step(random_faces(g, rng), random_faces(g, rng), 1e-3, {});
  CHECK(face_linf(r.u) == 0.0);
  CHECK(sup(r.p) == 0.0);
  CHECK(face_linf(project_divergence_free(random_faces(g, rng), 1e-8)) == 0.0);
}

TEST_CASE("explicit viscous step beyond its limit is rejected") {
  const GridSpec g = GridSpec::cube(2, 8);
  CHECK(dt_visc(g) == doctest::Approx(1.0 / (64.0 * 8.0)));
  StokesOptions opt;
  opt.viscous = ViscousMode::explicit_euler;
  CHECK_THROWS_WITH_AS(stokes_step(VectorField(g), VectorField(g), 2 * dt_visc(g), opt), "viscous CFL", Error);
  opt.viscous = ViscousMode::implicit_be;
  CHECK_NOTHROW(stokes_step(VectorField(g), VectorField(g), 2 * dt_visc(g), opt));
}

TEST_CASE("projection is idempotent") {
  const GridSpec g = GridSpec::cube(3, 8);
  std::mt19937_64 rng(7);
  const double tol = 1e-8;
  const VectorField once = project_divergence_free(random_faces(g, rng), tol);
  const VectorField twice = project_divergence_free(once, tol);
  CHECK(face_linf(face_diff(once, twice)) <= 10 * tol);
  CHECK(sup(divergence(once)) <= tol);
}

TEST_CASE("unforced stokes steps dissipate energy") {
  const GridSpec g = GridSpec::cube(2, 12);
  std::mt19937_64 rng(8);
  VectorField u = project_divergence_free(random_faces(g, rng), 1e-12);
  for (ViscousMode mode : {ViscousMode::explicit_euler, ViscousMode::implicit_be}) {
    StokesOptions opt;
    opt.viscous = mode;
    VectorField v = u;
    ScalarField p(g);
    for (int s = 0; s < 20; ++s) {
      const StokesResult r = stokes_step(v, VectorField(g), dt_visc(g), opt, &p);
      CHECK(face_l2(r.u) <= face_l2(v) * (1.0 + 1e-12));
      v = r.u;
      p = r.p;
    }
  }
}

TEST_CASE("vector laplacian of a zero field is zero and matches the matrix-free form") {
  const GridSpec g = GridSpec::cube(2, 8);
  CHECK(face_linf(vector_laplacian(VectorField(g))) == 0.0);
  std::mt19937_64 rng(9);
  const VectorField u = random_faces(g, rng);
  const VectorField L = vector_laplacian(u);
  for (int a = 0; a < 2; ++a) {
    std::vector<double> out(u[a].size());
    apply_vector_laplacian(g, a, u[a], out);
    CHECK(out == L[a]);
  }
}
