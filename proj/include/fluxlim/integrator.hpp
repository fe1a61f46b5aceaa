#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fluxlim/diagnostics.hpp"
#include "fluxlim/error.hpp"
#include "fluxlim/fluid.hpp"
#include "fluxlim/grid.hpp"
#include "fluxlim/sensitivity.hpp"

namespace fluxlim {

enum class Diffusion { explicit_euler, implicit_be };

/// Thrown by step when the post-Stokes velocity makes dt too large for the
/// upwind transport; run retries with a smaller dt.
class CflViolation : public Error {
 public:
  using Error::Error;
};

struct SchemeConfig {
  double dt = 1e-3;  ///< upper bound on the step; stable_dt never exceeds it
  Diffusion diffusion = Diffusion::explicit_euler;
  double cfl_safety = 0.8;
  double tol_poisson = 1e-12;
  double tol_proj = 1e-8;
  double tol_implicit = 1e-12;
  Precond precond = Precond::spectral;
};

/// Exact flow of n' = -nm, m' = -nm over dt. n - m is conserved; both
/// outputs are nonnegative. Throws Error("positivity violated") on negative
/// input.
std::pair<double, double> reaction_exact(double n, double m, double dt);

/// Exact flow of c' = -c + m with m frozen: c e^-dt + m (1 - e^-dt).
double c_reaction_exact(double c, double m, double dt);

/// Largest step the scheme accepts in this state:
///   cfl_safety / (4 sum_a 1/h_a^2 [explicit only] + max_cell sum_faces s_f / h_f)
/// with face speed s_f = |u_f| + S(|grad c|^2_f) |dc/dn|_f; capped by cfg.dt.
double stable_dt(const StateSnapshot& state, const SchemeConfig& cfg, const FluxLimiter& lim);

/// Manufactured source terms added to the n, c and m equations.
struct SourceTerms {
  std::function<double(const Point&, double)> n, c, m;
};

struct StepReport {
  double nm_loss = 0.0;  ///< integral over the step of the integral of n*m (exact reaction mass loss)
  double gradm2 = 0.0;   ///< dt * integral of |grad m|^2 after the diffusion substep
  int poisson_iterations = 0;
  int implicit_iterations = 0;
  double div_u_inf = 0.0;
};

/// One Lie-split step: Stokes with buoyancy, then transport-diffusion of n, c,
/// m with the new u frozen (chemotaxis on n), then the exact pointwise
/// reaction. Throws Error on positivity or CFL violation and on solver
/// failure.
StateSnapshot step(const StateSnapshot& state, const SchemeConfig& cfg, const FluxLimiter& lim,
                   const Potential& phi, double dt, StepReport* report = nullptr,
                   const SourceTerms* sources = nullptr);

struct RunSpec {
  StateSnapshot initial;
  SchemeConfig scheme;
  FluxLimiter limiter = FluxLimiter::prototype(1.0, 1.0);
  Potential phi;
  double t_end = 0.0;
  double record_every = 0.1;
  std::optional<double> snapshot_every;
  double guard_factor = 1e6;  ///< "blow-up suspected" once ||n||_inf > guard_factor ||n0||_inf
  const SourceTerms* sources = nullptr;
  std::function<void(const StateSnapshot&)> on_snapshot;
  std::function<void(const DiagRecord&)> on_record;
};

struct RunResult {
  std::vector<DiagRecord> records;
  StateSnapshot final_state;
  Targets targets;
  std::optional<std::string> error;  ///< set when the run aborted
  long steps = 0;
};

/// Integrates from t = 0 to t_end, recording at multiples of record_every and
/// at t_end. Never throws for solver or invariant failures: they end the run
/// and are reported in RunResult::error with the last good state.
RunResult run(const RunSpec& spec);

}  // namespace fluxlim
