#include "fluxlim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fluxlim/error.hpp"
#include "fluxlim/fluid.hpp"
#include "fluxlim/operators.hpp"

namespace fluxlim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const std::vector<std::string>& diag_columns() {
  static const std::vector<std::string> cols{
      "t",       "mass_n",  "mass_m",  "mass_c",     "linf_n",  "linf_m",    "linf_c",
      "linf_u",  "l2_u",    "w1inf_c", "w1inf_m",    "cum_nm",  "cum_gradm2", "int_nm", "int_gradm2", "min_n",
      "min_m",   "min_c",   "div_u_inf", "dist_n",   "dist_c",  "dist_m",    "dist_u",
      "energy_m"};
  return cols;
}

std::vector<double> diag_values(const DiagRecord& r) {
  return {r.t,       r.mass_n,  r.mass_m, r.mass_c,    r.linf_n,    r.linf_m, r.linf_c, r.linf_u,
          r.l2_u,    r.w1inf_c, r.w1inf_m, r.cum_nm,   r.cum_gradm2, r.int_nm, r.int_gradm2, r.min_n, r.min_m,  r.min_c,
          r.div_u_inf, r.dist_n, r.dist_c, r.dist_m,   r.dist_u,    r.energy_m};
}

DiagRecord diag_from_values(const std::vector<double>& v) {
  if (v.size() != diag_columns().size()) throw Error("diag row has wrong number of columns");
  DiagRecord r;
  std::size_t i = 0;
  for (double* f : {&r.t,       &r.mass_n,  &r.mass_m, &r.mass_c,    &r.linf_n,    &r.linf_m, &r.linf_c, &r.linf_u,
                    &r.l2_u,    &r.w1inf_c, &r.w1inf_m, &r.cum_nm,   &r.cum_gradm2, &r.int_nm, &r.int_gradm2, &r.min_n, &r.min_m,  &r.min_c,
                    &r.div_u_inf, &r.dist_n, &r.dist_c, &r.dist_m,   &r.dist_u,    &r.energy_m})
    *f = v[i++];
  return r;
}

Targets equilibrium_targets(double mass_n0, double mass_m0, double volume) {
  if (!(volume > 0.0)) throw Error("equilibrium_targets: volume must be positive");
  if (mass_n0 < 0.0 || mass_m0 < 0.0) throw Error("equilibrium_targets: masses must be nonnegative");
  return {std::max(mass_n0 - mass_m0, 0.0) / volume, std::max(mass_m0 - mass_n0, 0.0) / volume};
}

double integral_nm(const StateSnapshot& s) {
  const auto& n = s.n.values;
  const auto& m = s.m.values;
  return s.grid().cell_volume() * pairwise_reduce(0, n.size(), [&](std::size_t i) { return n[i] * m[i]; });
}

double integral_gradm2(const ScalarField& m) {
  const FaceFlux G = grad_cc_to_face(m);
  return face_inner(G, G);
}

DiagRecord record(const StateSnapshot& s, const std::optional<DiagRecord>& prev, double dt_since_prev,
                  const Targets& targets, const std::optional<Increments>& exact, std::optional<double> div_override) {
  DiagRecord r;
  r.t = s.t;
  r.mass_n = integrate(s.n);
  r.mass_m = integrate(s.m);
  r.mass_c = integrate(s.c);
  r.linf_n = lp_norm(s.n, kInf);
  r.linf_m = lp_norm(s.m, kInf);
  r.linf_c = lp_norm(s.c, kInf);
  r.linf_u = face_linf(s.u);
  r.l2_u = face_l2(s.u);
  r.w1inf_c = w1inf(s.c);
  r.w1inf_m = w1inf(s.m);
  r.min_n = min_value(s.n);
  r.min_m = min_value(s.m);
  r.min_c = min_value(s.c);
  r.div_u_inf = div_override ? *div_override : lp_norm(divergence(s.u), kInf);
  r.dist_n = lp_norm(shifted(s.n, -targets.n_inf), kInf);
  r.dist_c = w1inf(shifted(s.c, -targets.m_inf));
  r.dist_m = w1inf(shifted(s.m, -targets.m_inf));
  r.dist_u = r.linf_u;
  r.energy_m = 0.5 * inner(s.m, s.m);
  r.int_nm = integral_nm(s);
  r.int_gradm2 = integral_gradm2(s.m);
  if (prev) {
    if (exact) {
      r.cum_nm = prev->cum_nm + exact->nm;
      r.cum_gradm2 = prev->cum_gradm2 + exact->gradm2;
    } else {
      r.cum_nm = prev->cum_nm + 0.5 * dt_since_prev * (prev->int_nm + r.int_nm);
      r.cum_gradm2 = prev->cum_gradm2 + 0.5 * dt_since_prev * (prev->int_gradm2 + r.int_gradm2);
    }
  }
  return r;
}

const std::vector<std::string>& audit_check_names() {
  static const std::vector<std::string> names{
      "mass-monotone-n", "mass-monotone-m", "diff-conserved",   "maxprin-m", "compare-c", "positivity",
      "cum-nm-bound",    "cum-gradm2-bound", "div-free",        "bounded",   "converged"};
  return names;
}

namespace {

// Tracks the smallest margin of one check and the first time it went negative.
struct Tracker {
  double worst = kInf;
  std::optional<double> t_fail;

  void see(double margin, double t) {
    if (std::isnan(margin)) margin = -kInf;
    worst = std::min(worst, margin);
    if (margin < 0.0 && !t_fail) t_fail = t;
  }
  CheckResult result(const std::string& name) const {
    CheckResult c;
    c.name = name;
    c.slack = std::isinf(worst) ? 0.0 : worst;
    c.status = t_fail ? CheckStatus::fail : CheckStatus::pass;
    c.t_violation = t_fail;
    return c;
  }
};

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "?";
}

}  // namespace

AuditReport audit(const std::vector<DiagRecord>& records, const AuditTolerances& tol, const Targets& targets,
                  const DiagRecord& initial) {
  if (records.empty()) throw Error("audit: no records");
  for (std::size_t k = 1; k < records.size(); ++k)
    if (!(records[k].t > records[k - 1].t)) throw Error("records not time-sorted");

  Tracker mono_n, mono_m, diff, maxprin, compare, pos, cum_nm, cum_g, divfree, bounded;
  const double diff0 = initial.mass_n - initial.mass_m;
  const double c_cap = std::max(initial.linf_c, initial.linf_m) + tol.compare_slack;
  const double nm_cap = std::min(initial.mass_n, initial.mass_m) + tol.cum_slack;
  const double g_cap = initial.energy_m + tol.cum_slack;
  const double n_cap = tol.bound_factor * initial.linf_n;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const DiagRecord& r = records[k];
    if (k > 0) {
      const DiagRecord& p = records[k - 1];
      mono_n.see(p.mass_n + tol.mass_slack * initial.mass_n - r.mass_n, r.t);
      mono_m.see(p.mass_m + tol.mass_slack * initial.mass_m - r.mass_m, r.t);
      maxprin.see(p.linf_m + tol.maxprin_slack - r.linf_m, r.t);
    }
    diff.see(tol.diff_slack * (initial.mass_n + initial.mass_m) - std::abs((r.mass_n - r.mass_m) - diff0), r.t);
    compare.see(c_cap - r.linf_c, r.t);
    pos.see(std::min({r.min_n, r.min_m, r.min_c}) + tol.tol_pos, r.t);
    cum_nm.see(nm_cap - r.cum_nm, r.t);
    cum_g.see(g_cap - r.cum_gradm2, r.t);
    divfree.see(tol.tol_proj - r.div_u_inf, r.t);
    const bool finite = std::isfinite(r.linf_n) && std::isfinite(r.w1inf_c) && std::isfinite(r.w1inf_m);
    bounded.see(finite ? n_cap - r.linf_n : -kInf, r.t);
  }

  AuditReport rep;
  rep.checks = {mono_n.result("mass-monotone-n"), mono_m.result("mass-monotone-m"), diff.result("diff-conserved"),
                maxprin.result("maxprin-m"),      compare.result("compare-c"),      pos.result("positivity"),
                cum_nm.result("cum-nm-bound"),    cum_g.result("cum-gradm2-bound"), divfree.result("div-free"),
                bounded.result("bounded")};

  const DiagRecord& last = records.back();
  auto dist = [](const DiagRecord& r) { return std::max({r.dist_n, r.dist_c, r.dist_m, r.dist_u}); };
  CheckResult conv;
  conv.name = "converged";
  conv.slack = tol.eps_conv - dist(last);
  if (!tol.check_convergence || records.size() < 2) {
    conv.status = CheckStatus::skipped;
  } else if (conv.slack >= 0.0) {
    conv.status = CheckStatus::pass;
  } else {
    conv.status = CheckStatus::fail;
    conv.t_violation = last.t;
  }
  rep.checks.push_back(conv);

  const double t_tail = records.front().t + 0.9 * (last.t - records.front().t);
  for (const DiagRecord& r : records)
    if (r.t >= t_tail && dist(r) > 2.0 * dist(last)) rep.tail_settled = false;

  rep.notes.push_back("W1,inf distances use max(sup|f|, sup|grad f|)");
  rep.notes.push_back("targets n_inf=" + std::to_string(targets.n_inf) + " m_inf=" + std::to_string(targets.m_inf));
  return rep;
}

bool AuditReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::fail; });
}

const CheckResult& AuditReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw Error("unknown audit check '" + name + "'");
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  os << "audit report\n";
  for (const auto& n : notes) os << "  # " << n << "\n";
  os << std::setprecision(6);
  for (const auto& c : checks) {
    os << "  " << std::left << std::setw(18) << c.name << std::setw(8) << status_name(c.status)
       << "slack=" << std::scientific << c.slack << std::defaultfloat;
    if (c.t_violation) os << "  first violation t=" << *c.t_violation;
    os << "\n";
  }
  os << "  tail settled: " << (tail_settled ? "yes" : "no") << " (reported only)\n";
  os << "  overall: " << (all_passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string AuditReport::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["status"] = status_name(c.status);
    e["slack"] = c.slack;
    e["t_violation"] = c.t_violation ? nlohmann::ordered_json(*c.t_violation) : nlohmann::ordered_json(nullptr);
    j[c.name] = e;
  }
  return j.dump(2) + "\n";
}

}  // namespace fluxlim
