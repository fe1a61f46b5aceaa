#include <doctest.h>

#include <cmath>
#include <random>

#include "fluxlim/error.hpp"
#include "fluxlim/integrator.hpp"
#include "fluxlim/operators.hpp"
#include "support.hpp"

using namespace fluxlim;
using fluxlim::test::random_faces;
using fluxlim::test::random_field;

namespace {

double spread(const ScalarField& f) { return max_value(f) - min_value(f); }

StateSnapshot bumps(const GridSpec& g) {
  StateSnapshot s = StateSnapshot::zeros(g);
  auto bump = [](const Point& p, double cx, double amp) {
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) r2 += (p[a] - cx) * (p[a] - cx);
    return amp * std::exp(-r2 / 0.02);
  };
  s.n = ScalarField::sample(g, [&](const Point& p) { return 0.5 + bump(p, 0.3, 2.0); });
  s.m = ScalarField::sample(g, [&](const Point& p) { return 0.2 + bump(p, 0.6, 1.0); });
  s.c = ScalarField::sample(g, [&](const Point& p) { return bump(p, 0.5, 0.7); });
  return s;
}

}  // namespace

TEST_CASE("exact reaction examples") {
  auto [n1, m1] = reaction_exact(1.0, 1.0, 1.0);
  CHECK(n1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m1 == doctest::Approx(0.5).epsilon(1e-15));
  auto [n2, m2] = reaction_exact(2.0, 0.0, 5.0);
  CHECK(n2 == 2.0);
  CHECK(m2 == 0.0);
  auto [n3, m3] = reaction_exact(2.0, 1.0, std::log(2.0));
  CHECK(n3 == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(m3 == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(reaction_exact(-1.0, 1.0, 0.1), doctest::Contains("positivity violated"), Error);
}

TEST_CASE("exact reaction against RK4") {
  const double n0 = 2.0, m0 = 1.0, T = std::log(2.0);
  double n = n0, m = m0;
  const int steps = 100000;
  const double h = T / steps;
  auto f = [](double a, double b) { return -a * b; };
  for (int s = 0; s < steps; ++s) {
    const double k1 = f(n, m);
    const double k2 = f(n + 0.5 * h * k1, m + 0.5 * h * k1);
    const double k3 = f(n + 0.5 * h * k2, m + 0.5 * h * k2);
    const double k4 = f(n + h * k3, m + h * k3);
    n += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    m += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  auto [ne, me] = reaction_exact(n0, m0, T);
  CHECK(std::abs(ne - n) <= 1e-12);
  CHECK(std::abs(me - m) <= 1e-12);
}

TEST_CASE("exact reaction conserves the difference and stays nonnegative") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double n = d(rng), m = d(rng), dt = d(rng);
    auto [a, b] = reaction_exact(n, m, dt);
    CHECK(a >= 0.0);
    CHECK(b >= 0.0);
    CHECK(std::abs((a - b) - (n - m)) <= 1e-14 * (n + m));
  }
}

TEST_CASE("c reaction examples") {
  CHECK(c_reaction_exact(0.7, 0.7, 3.0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(c_reaction_exact(0.8, 0.0, std::log(2.0)) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(c_reaction_exact(0.8, 0.3, INFINITY) == 0.3);
  CHECK(c_reaction_exact(0.8, 0.3, 50.0) == doctest::Approx(0.3).epsilon(1e-15));
  const double c = c_reaction_exact(0.2, 1.0, 0.4);
  CHECK(c >= 0.2);
  CHECK(c <= 1.0);
}

TEST_CASE("stable_dt examples") {
  const GridSpec g = GridSpec::cube(3, 32);
  StateSnapshot s = StateSnapshot::zeros(g);
  s.c = ScalarField(g, 0.3);
  SchemeConfig cfg;
  cfg.dt = 1.0;
  cfg.cfl_safety = 1.0;
  cfg.diffusion = Diffusion::explicit_euler;
  const double h = 1.0 / 32.0;
  CHECK(stable_dt(s, cfg, FluxLimiter::prototype(1, 1)) == doctest::Approx(h * h / 12.0).epsilon(1e-14));
  cfg.diffusion = Diffusion::implicit_be;
  cfg.dt = 0.05;
  CHECK(stable_dt(s, cfg, FluxLimiter::prototype(1, 1)) == 0.05);
}

TEST_CASE("doubling speeds at most halves the advective step") {
  const GridSpec g = GridSpec::cube(2, 16);
  std::mt19937_64 rng(2);
  StateSnapshot s = StateSnapshot::zeros(g);
  s.u = random_faces(g, rng);
  s.c = ScalarField(g, 1.0);
  SchemeConfig cfg;
  cfg.dt = 10.0;
  cfg.diffusion = Diffusion::implicit_be;
  const FluxLimiter lim = FluxLimiter::prototype(1, 1);
  const double dt1 = stable_dt(s, cfg, lim);
  StateSnapshot fast = s;
  for (auto& comp : fast.u.comp)
    for (double& x : comp) x *= 2.0;
  const double dt2 = stable_dt(fast, cfg, lim);
  CHECK(dt2 < dt1);
  CHECK(dt2 >= 0.5 * dt1 * (1.0 - 1e-14));
}

TEST_CASE("homogeneous data stays homogeneous") {
  const GridSpec g = GridSpec::cube(2, 8);
  StateSnapshot s = StateSnapshot::zeros(g);
  s.n = ScalarField(g, 2.0);
  s.m = ScalarField(g, 0.5);
  s.c = ScalarField(g, 1.0);
  SchemeConfig cfg;
  for (Diffusion d : {Diffusion::explicit_euler, Diffusion::implicit_be}) {
    cfg.diffusion = d;
    StateSnapshot x = s;
    for (int i = 0; i < 20; ++i) x = step(x, cfg, FluxLimiter::prototype(1, 1), Potential::zero(), 1e-3);
    CHECK(spread(x.n) == 0.0);
    CHECK(spread(x.c) == 0.0);
    CHECK(spread(x.m) == 0.0);
    CHECK(face_linf(x.u) == 0.0);
    CHECK(x.t == doctest::Approx(0.02));
  }
}

TEST_CASE("empty n decouples: m is transported and diffused with fixed mass") {
  const GridSpec g = GridSpec::cube(2, 16);
  StateSnapshot s = bumps(g);
  s.n = ScalarField(g);
  SchemeConfig cfg;
  cfg.diffusion = Diffusion::implicit_be;
  const double mass0 = integrate(s.m);
  for (int i = 0; i < 10; ++i) {
    s = step(s, cfg, FluxLimiter::prototype(1, 1), Potential::linear({0.0, -1.0, 0.0}), 5e-3);
    CHECK(max_value(s.n) == 0.0);
  }
  CHECK(face_linf(s.u) > 0.0);
  CHECK(std::abs(integrate(s.m) - mass0) <= 1e-12 * mass0);
}

TEST_CASE("one step conserves the mass difference and reports its losses") {
  for (int dim = 1; dim <= 3; ++dim) {
    const GridSpec g = GridSpec::cube(dim, dim == 3 ? 10 : 16);
    const StateSnapshot s = bumps(g);
    SchemeConfig cfg;
    cfg.diffusion = Diffusion::implicit_be;
    StepReport rep;
    const Potential phi = dim == 1 ? Potential::zero() : Potential::linear({0.0, 0.0, -1.0});
    const StateSnapshot x = step(s, cfg, FluxLimiter::prototype(1, 1), phi, 1e-2, &rep);
    const double scale = integrate(s.n) + integrate(s.m);
    CHECK(std::abs((integrate(x.n) - integrate(x.m)) - (integrate(s.n) - integrate(s.m))) <= 1e-12 * scale);
    CHECK(integrate(x.n) <= integrate(s.n));
    CHECK(integrate(s.n) - integrate(x.n) == doctest::Approx(rep.nm_loss).epsilon(1e-10));
    CHECK(rep.gradm2 > 0.0);
    CHECK(rep.div_u_inf <= 1e-8);
    CHECK(min_value(x.n) >= 0.0);
    CHECK(min_value(x.m) >= 0.0);
    CHECK(min_value(x.c) >= 0.0);
  }
}

TEST_CASE("negative data is rejected by a step") {
  const GridSpec g = GridSpec::cube(1, 8);
  StateSnapshot s = bumps(g);
  s.n(3) = -0.1;
  CHECK_THROWS_WITH_AS(step(s, SchemeConfig{}, FluxLimiter::prototype(1, 1), Potential::zero(), 1e-4),
                       doctest::Contains("positivity violated"), Error);
}

TEST_CASE("a step beyond the transport limit raises CflViolation") {
  const GridSpec g = GridSpec::cube(1, 32);
  SchemeConfig cfg;
  cfg.diffusion = Diffusion::explicit_euler;
  CHECK_THROWS_AS(step(bumps(g), cfg, FluxLimiter::prototype(1, 1), Potential::zero(), 0.1), CflViolation);
}

TEST_CASE("run with t_end = 0 records only the initial state") {
  RunSpec spec;
  spec.initial = bumps(GridSpec::cube(2, 8));
  spec.t_end = 0.0;
  const RunResult r = run(spec);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].t == 0.0);
  CHECK(r.records[0].cum_nm == 0.0);
  CHECK(r.steps == 0);
  CHECK_FALSE(r.error);
}

TEST_CASE("run records on the cadence and at t_end") {
  RunSpec spec;
  spec.initial = bumps(GridSpec::cube(1, 16));
  spec.scheme.dt = 0.01;
  spec.t_end = 0.25;
  spec.record_every = 0.1;
  int seen = 0;
  spec.on_record = [&seen](const DiagRecord&) { ++seen; };
  const RunResult r = run(spec);
  REQUIRE(r.records.size() == 4);
  CHECK(r.records[1].t == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(r.records[2].t == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(r.records[3].t == 0.25);
  CHECK(seen == 4);
  CHECK(r.final_state.t == 0.25);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    CHECK(r.records[i].mass_n <= r.records[i - 1].mass_n);
    CHECK(r.records[i].cum_nm >= r.records[i - 1].cum_nm);
  }
}

TEST_CASE("a tight guard aborts the run with the last good state") {
  RunSpec spec;
  spec.initial = bumps(GridSpec::cube(1, 16));
  spec.t_end = 1.0;
  spec.guard_factor = 1e-9;
  const RunResult r = run(spec);
  REQUIRE(r.error);
  CHECK(r.error->rfind("blow-up suspected", 0) == 0);
  CHECK_FALSE(r.records.empty());
}

TEST_CASE("homogeneous run tracks the reaction ODE") {
  RunSpec spec;
  const GridSpec g = GridSpec::cube(1, 8);
  spec.initial = StateSnapshot::zeros(g);
  spec.initial.n = ScalarField(g, 2.0);
  spec.initial.m = ScalarField(g, 1.0);
  spec.scheme.dt = 1e-3;
  spec.t_end = 1.0;
  spec.record_every = 0.5;
  const RunResult r = run(spec);
  REQUIRE_FALSE(r.error);
  // n - m = 1, so m(t) = 1 / (2 e^t - 1).
  const double m_exact = 1.0 / (2.0 * std::exp(1.0) - 1.0);
  CHECK(std::abs(max_value(r.final_state.m) - m_exact) <= 1e-12);
  CHECK(std::abs(max_value(r.final_state.n) - (1.0 + m_exact)) <= 1e-12);
}

TEST_CASE("manufactured sources enter the step") {
  const GridSpec g = GridSpec::cube(1, 8);
  StateSnapshot s = StateSnapshot::zeros(g);
  SourceTerms src;
  src.n = [](const Point&, double) { return 1.0; };
  src.c = [](const Point&, double) { return 0.0; };
  src.m = [](const Point&, double) { return 0.0; };
  const StateSnapshot x = step(s, SchemeConfig{}, FluxLimiter::prototype(1, 1), Potential::zero(), 1e-3, nullptr, &src);
  CHECK(max_value(x.n) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(min_value(x.n) == doctest::Approx(1e-3).epsilon(1e-12));
}
