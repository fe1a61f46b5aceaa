#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluxlim/grid.hpp"

namespace fluxlim {

/// Everything monitored at one recorded time level.
struct DiagRecord {
  double t = 0.0;
  double mass_n = 0.0, mass_m = 0.0, mass_c = 0.0;
  double linf_n = 0.0, linf_m = 0.0, linf_c = 0.0, linf_u = 0.0, l2_u = 0.0;
  double w1inf_c = 0.0, w1inf_m = 0.0;
  double cum_nm = 0.0;      ///< running integral over [0,t] of the integral of n*m
  double cum_gradm2 = 0.0;  ///< running integral over [0,t] of the integral of |grad m|^2
  double int_nm = 0.0;      ///< integral of n*m at t
  double int_gradm2 = 0.0;  ///< integral of |grad m|^2 at t
  double min_n = 0.0, min_m = 0.0, min_c = 0.0;
  double div_u_inf = 0.0;
  double dist_n = 0.0, dist_c = 0.0, dist_m = 0.0, dist_u = 0.0;
  double energy_m = 0.0;  ///< (1/2) integral of m^2
};

/// Column names of DiagRecord in CSV order.
const std::vector<std::string>& diag_columns();
std::vector<double> diag_values(const DiagRecord& r);
DiagRecord diag_from_values(const std::vector<double>& v);

/// Constant equilibria: n_inf = (mass_n0 - mass_m0)_+ / |Omega| and
/// m_inf = (mass_m0 - mass_n0)_+ / |Omega|.
struct Targets {
  double n_inf = 0.0;
  double m_inf = 0.0;
};
Targets equilibrium_targets(double mass_n0, double mass_m0, double volume);

/// Exact per-interval increments of the cumulative integrals, when the
/// integrator tracked them step by step.
struct Increments {
  double nm = 0.0;
  double gradm2 = 0.0;
};

/// Measures `state`. Cumulative fields are prev + increment, where the
/// increment is `exact` if given and otherwise the trapezoid rule over
/// dt_since_prev. `div_override` replaces the instantaneous ||div u||_inf
/// (the integrator passes the maximum seen since the previous record).
DiagRecord record(const StateSnapshot& state, const std::optional<DiagRecord>& prev, double dt_since_prev,
                  const Targets& targets, const std::optional<Increments>& exact = std::nullopt,
                  std::optional<double> div_override = std::nullopt);

/// Integral of n*m and of |grad m|^2 (face-based) at one time level.
double integral_nm(const StateSnapshot& s);
double integral_gradm2(const ScalarField& m);

struct AuditTolerances {
  double tol_pos = 1e-12;
  double mass_slack = 1e-12;     ///< relative to the initial mass
  double diff_slack = 1e-10;     ///< relative to mass_n0 + mass_m0
  double maxprin_slack = 1e-10;
  double compare_slack = 1e-10;
  double cum_slack = 1e-8;
  double tol_proj = 1e-8;
  double bound_factor = 10.0;    ///< sup ||n||_inf allowed as a multiple of ||n0||_inf
  double eps_conv = 1e-3;
  bool check_convergence = true;
};

enum class CheckStatus { pass, fail, skipped };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double slack = 0.0;  ///< worst (smallest) margin; negative on failure
  std::optional<double> t_violation;
};

struct AuditReport {
  std::vector<CheckResult> checks;
  bool tail_settled = true;  ///< last 10% of records within 2x the final distance
  std::vector<std::string> notes;

  bool all_passed() const;
  const CheckResult& check(const std::string& name) const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Names of the audit checks in report order.
const std::vector<std::string>& audit_check_names();

/// Evaluates every check over the trajectory. Throws Error if `records` is
/// empty or not sorted by time.
AuditReport audit(const std::vector<DiagRecord>& records, const AuditTolerances& tol, const Targets& targets,
                  const DiagRecord& initial);

}  // namespace fluxlim
