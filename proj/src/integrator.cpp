#include "fluxlim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fluxlim/cg.hpp"
#include "fluxlim/error.hpp"
#include "fluxlim/operators.hpp"
#include "fluxlim/spectral.hpp"

namespace fluxlim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::pair<double, double> reaction_exact(double n, double m, double dt) {
  if (n < 0.0 || m < 0.0) throw Error("positivity violated");
  if (dt < 0.0) throw Error("reaction_exact: negative dt");
  if (dt == 0.0 || n == 0.0 || m == 0.0) return {n, m};
  const double d = n - m;
  if (d > 0.0) {
    // m(t) = d m e^{-dt} / (m (1 - e^{-dt}) + d): stable for any t.
    const double m_new = d * m * std::exp(-d * dt) / (-m * std::expm1(-d * dt) + d);
    return {m_new + d, m_new};
  }
  if (d < 0.0) {
    const double e = -d;
    const double n_new = e * n * std::exp(-e * dt) / (-n * std::expm1(-e * dt) + e);
    return {n_new, n_new + e};
  }
  const double v = m / (1.0 + m * dt);
  return {v, v};
}

double c_reaction_exact(double c, double m, double dt) {
  if (c < 0.0 || m < 0.0) throw Error("positivity violated");
  if (dt < 0.0) throw Error("c_reaction_exact: negative dt");
  if (std::isinf(dt)) return m;
  return c * std::exp(-dt) - m * std::expm1(-dt);
}

namespace {

// max over cells of sum over the cell's faces of (|u_f| + |V_f|) / h_f.
double transport_rate(const GridSpec& g, const VectorField& u, const FaceField& chemo_v) {
  const Extents& e = g.cell_extents();
  std::vector<double> rate(g.size(), 0.0);
  for (int a = 0; a < g.dim(); ++a) {
    const Extents& fe = g.face_extents(a);
    const double inv_h = 1.0 / g.h(a);
    for (int i = 0; i < e.n[0]; ++i)
      for (int j = 0; j < e.n[1]; ++j)
        for (int k = 0; k < e.n[2]; ++k) {
          const std::size_t lo = fe.index(i, j, k);
          const std::size_t hi = lo + fe.stride[a];
          const double s = std::abs(u[a][lo]) + std::abs(chemo_v[a][lo]) + std::abs(u[a][hi]) + std::abs(chemo_v[a][hi]);
          rate[e.index(i, j, k)] += s * inv_h;
        }
  }
  return rate.empty() ? 0.0 : *std::max_element(rate.begin(), rate.end());
}

}  // namespace

double stable_dt(const StateSnapshot& state, const SchemeConfig& cfg, const FluxLimiter& lim) {
  const GridSpec& g = state.grid();
  double denom = transport_rate(g, state.u, chemo_velocity(state.c, lim));
  if (cfg.diffusion == Diffusion::explicit_euler) denom += 4.0 * g.inv_h2_sum();
  if (!(denom > 0.0)) return cfg.dt;
  return std::min(cfg.dt, cfg.cfl_safety / denom);
}

namespace {

void require_nonnegative(const ScalarField& f, const char* name) {
  const Extents& e = f.grid.cell_extents();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.values[i] < -kTolPos || std::isnan(f.values[i])) {
      const int i0 = static_cast<int>(i / e.stride[0]);
      const int i1 = static_cast<int>((i % e.stride[0]) / e.stride[1]);
      const int i2 = static_cast<int>(i % e.stride[1]);
      std::ostringstream os;
      os << "positivity violated: " << name << " = " << f.values[i] << " at cell (" << i0 << "," << i1 << "," << i2
         << ")";
      throw Error(os.str());
    }
  }
}

// f_new = rhs + dt L f (explicit) or (I - dt L) f_new = rhs (implicit).
int diffuse(const ScalarField& f, std::vector<double>& rhs, double dt, const SchemeConfig& cfg) {
  const GridSpec& g = f.grid;
  if (cfg.diffusion == Diffusion::explicit_euler) {
    std::vector<double> lap(g.size());
    apply_laplacian(g, f.values, lap);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * lap[i];
    return 0;
  }
  double b_inf = 0.0;
  for (double x : rhs) b_inf = std::max(b_inf, std::abs(x));
  if (b_inf == 0.0) return 0;
  const std::vector<double> b = rhs;
  auto apply = [&g, dt](std::span<const double> in, std::span<double> out) {
    apply_laplacian(g, in, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] - dt * out[i];
  };
  CgOptions opt;
  opt.inf_tol = cfg.tol_implicit * b_inf;
  opt.max_iter = default_max_iterations(g);
  if (cfg.precond == Precond::spectral) {
    auto inv = SpectralInverse::cell_neumann(g);
    opt.precond = [inv, dt](std::span<const double> r, std::span<double> z) { inv->apply(1.0, dt, r, z); };
  }
  const SolveReport rep = conjugate_gradient(apply, b, rhs, opt);
  if (!rep.converged) throw Error("implicit diffusion solve did not converge");
  return rep.iterations;
}

}  // namespace

StateSnapshot step(const StateSnapshot& s, const SchemeConfig& cfg, const FluxLimiter& lim, const Potential& phi,
                   double dt, StepReport* report, const SourceTerms* sources) {
  if (!(dt > 0.0)) throw Error("step: dt must be positive");
  const GridSpec& g = s.grid();
  StepReport rep;
  StateSnapshot out;
  out.t = s.t + dt;

  // 1. Stokes with buoyancy from the current densities.
  StokesOptions sopt;
  sopt.viscous = cfg.diffusion == Diffusion::implicit_be ? ViscousMode::implicit_be : ViscousMode::explicit_euler;
  sopt.tol_poisson = cfg.tol_poisson;
  sopt.tol_proj = cfg.tol_proj;
  sopt.tol_implicit = cfg.tol_implicit;
  sopt.precond = cfg.precond;
  StokesResult fluid = stokes_step(s.u, buoyancy_force(s.n, s.m, phi), dt, sopt, &s.p);
  out.u = std::move(fluid.u);
  out.p = std::move(fluid.p);
  rep.poisson_iterations = fluid.poisson.iterations;
  rep.implicit_iterations = fluid.viscous_iterations;
  rep.div_u_inf = fluid.div_inf;

  // 2. Transport and diffusion with u frozen at its new value.
  const FaceField chemo_v = chemo_velocity(s.c, lim);
  double cfl = dt * transport_rate(g, out.u, chemo_v);
  if (cfg.diffusion == Diffusion::explicit_euler) cfl += dt * 2.0 * g.inv_h2_sum();
  if (cfl > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "CFL violated: dt = " << dt << " gives transport number " << cfl;
    throw CflViolation(os.str());
  }
  const FaceFlux chemo = chemo_flux(s.n, s.c, lim);

  auto transport = [&](const ScalarField& f, const FaceFlux* extra,
                       const std::function<double(const Point&, double)>* src) {
    FaceFlux flux = advective_flux(f, out.u);
    if (extra != nullptr)
      for (int a = 0; a < g.dim(); ++a)
        for (std::size_t i = 0; i < flux[a].size(); ++i) flux[a][i] += (*extra)[a][i];
    const ScalarField div = div_face_to_cc(flux);
    ScalarField next(g);
    for (std::size_t i = 0; i < g.size(); ++i) next.values[i] = f.values[i] - dt * div.values[i];
    if (src != nullptr && *src) {
      const ScalarField sv = ScalarField::sample(g, [&](const Point& x) { return (*src)(x, s.t); });
      for (std::size_t i = 0; i < g.size(); ++i) next.values[i] += dt * sv.values[i];
    }
    rep.implicit_iterations += diffuse(f, next.values, dt, cfg);
    return next;
  };
  ScalarField n_t = transport(s.n, &chemo, sources ? &sources->n : nullptr);
  ScalarField c_t = transport(s.c, nullptr, sources ? &sources->c : nullptr);
  ScalarField m_t = transport(s.m, nullptr, sources ? &sources->m : nullptr);
  require_finite(n_t.values);
  require_finite(c_t.values);
  require_finite(m_t.values);
  require_nonnegative(n_t, "n");
  require_nonnegative(c_t, "c");
  require_nonnegative(m_t, "m");
  rep.gradm2 = dt * integral_gradm2(m_t);

  // 3. Exact pointwise reaction. Roundoff-level negatives are read as 0.
  out.n = ScalarField(g);
  out.c = ScalarField(g);
  out.m = ScalarField(g);
  std::vector<double> loss(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double n0 = std::max(n_t.values[i], 0.0);
    const double m0 = std::max(m_t.values[i], 0.0);
    const auto [n1, m1] = reaction_exact(n0, m0, dt);
    out.n.values[i] = n1;
    out.m.values[i] = m1;
    loss[i] = m0 - m1;
    // Signal production sees the step-average of m.
    out.c.values[i] = c_reaction_exact(std::max(c_t.values[i], 0.0), 0.5 * (m0 + m1), dt);
  }
  rep.nm_loss = g.cell_volume() * pairwise_sum(loss);
  if (report != nullptr) *report = rep;
  return out;
}

RunResult run(const RunSpec& spec) {
  RunResult res;
  StateSnapshot state = spec.initial;
  state.t = 0.0;
  const GridSpec& g = state.grid();
  res.targets = equilibrium_targets(integrate(state.n), integrate(state.m), g.volume());
  const double n0_inf = lp_norm(state.n, kInf);
  const double guard = spec.guard_factor * n0_inf;

  auto emit = [&](const DiagRecord& r) {
    res.records.push_back(r);
    if (spec.on_record) spec.on_record(r);
  };
  emit(record(state, std::nullopt, 0.0, res.targets));

  Increments acc;
  double div_since = 0.0;
  double t_prev_record = 0.0;
  double next_snapshot = 0.0;
  auto maybe_snapshot = [&]() {
    if (!spec.snapshot_every || !spec.on_snapshot) return;
    if (state.t + 1e-12 >= next_snapshot) {
      spec.on_snapshot(state);
      while (next_snapshot <= state.t + 1e-12) next_snapshot += *spec.snapshot_every;
    }
  };

  try {
    if (lp_norm(state.n, kInf) > guard) throw Error("blow-up suspected: ||n||_inf exceeds guard at t = 0");
    maybe_snapshot();
    long k = 1;
    while (state.t < spec.t_end) {
      const double target = std::min(static_cast<double>(k) * spec.record_every, spec.t_end);
      double dt = stable_dt(state, spec.scheme, spec.limiter);
      bool hit = false;
      if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
        dt = target - state.t;
        hit = true;
      }
      StepReport rep;
      StateSnapshot next;
      for (int attempt = 0;; ++attempt) {
        try {
          next = step(state, spec.scheme, spec.limiter, spec.phi, dt, &rep, spec.sources);
          break;
        } catch (const CflViolation&) {
          if (attempt == 30) throw;
          dt *= 0.5;
          hit = false;
        }
      }
      if (hit) next.t = target;
      state = std::move(next);
      ++res.steps;
      acc.nm += rep.nm_loss;
      acc.gradm2 += rep.gradm2;
      div_since = std::max(div_since, rep.div_u_inf);
      const double n_inf = lp_norm(state.n, kInf);
      if (n_inf > guard) {
        std::ostringstream os;
        os << "blow-up suspected: ||n||_inf = " << n_inf << " exceeds guard " << guard << " at t = " << state.t;
        throw Error(os.str());
      }
      if (hit) {
        emit(record(state, res.records.back(), state.t - t_prev_record, res.targets, acc, div_since));
        t_prev_record = state.t;
        acc = {};
        div_since = 0.0;
        ++k;
      }
      maybe_snapshot();
    }
  } catch (const std::exception& e) {
    res.error = e.what();
    if (state.t > res.records.back().t)
      emit(record(state, res.records.back(), state.t - t_prev_record, res.targets, acc, div_since));
  }
  res.final_state = std::move(state);
  return res;
}

}  // namespace fluxlim
