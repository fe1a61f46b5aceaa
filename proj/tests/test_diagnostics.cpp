#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "fluxlim/diagnostics.hpp"
#include "fluxlim/error.hpp"
#include "support.hpp"

using namespace fluxlim;

namespace {

StateSnapshot constant_state(const GridSpec& g, double n, double c, double m) {
  StateSnapshot s = StateSnapshot::zeros(g);
  s.n = ScalarField(g, n);
  s.c = ScalarField(g, c);
  s.m = ScalarField(g, m);
  return s;
}

std::vector<DiagRecord> equilibrium_trajectory(int count) {
  const GridSpec g = GridSpec::cube(2, 8);
  const Targets tg = equilibrium_targets(1.0, 0.0, 1.0);
  std::vector<DiagRecord> recs;
  std::optional<DiagRecord> prev;
  for (int k = 0; k < count; ++k) {
    StateSnapshot s = constant_state(g, 1.0, 0.0, 0.0);
    s.t = 0.5 * k;
    recs.push_back(record(s, prev, 0.5, tg));
    prev = recs.back();
  }
  return recs;
}

}  // namespace

TEST_CASE("equilibrium targets examples") {
  const Targets a = equilibrium_targets(2, 1, 1);
  CHECK(a.n_inf == 1.0);
  CHECK(a.m_inf == 0.0);
  for (double v : {0.5, 1.0, 7.0}) {
    const Targets b = equilibrium_targets(1, 1, v);
    CHECK(b.n_inf == 0.0);
    CHECK(b.m_inf == 0.0);
  }
  const Targets c = equilibrium_targets(1, 3, 2);
  CHECK(c.n_inf == 0.0);
  CHECK(c.m_inf == 1.0);
  CHECK_THROWS_AS(equilibrium_targets(1, 1, 0), Error);
}

TEST_CASE("equilibrium targets structure over random inputs") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double a = d(rng), b = d(rng), v = 0.1 + d(rng);
    const Targets t = equilibrium_targets(a, b, v);
    CHECK(t.n_inf * t.m_inf == 0.0);
    CHECK(v * (t.n_inf - t.m_inf) == doctest::Approx(a - b).epsilon(1e-13));
  }
}

TEST_CASE("record of the equilibrium state has zero distances") {
  const GridSpec g = GridSpec::cube(3, 6);
  const Targets tg = equilibrium_targets(0.5, 2.0, 1.0);
  const DiagRecord r = record(constant_state(g, tg.n_inf, tg.m_inf, tg.m_inf), std::nullopt, 0.0, tg);
  CHECK(r.dist_n == 0.0);
  CHECK(r.dist_c == 0.0);
  CHECK(r.dist_m == 0.0);
  CHECK(r.dist_u == 0.0);
  CHECK(r.cum_nm == 0.0);
  CHECK(r.cum_gradm2 == 0.0);
  CHECK(r.mass_m == doctest::Approx(1.5));
  CHECK(r.energy_m == doctest::Approx(0.5 * 1.5 * 1.5));
}

TEST_CASE("cumulative integrals of constants are exact") {
  const GridSpec g = GridSpec::cube(2, 8);
  const Targets tg{};
  StateSnapshot s = constant_state(g, 0.7, 0.0, 1.3);
  const DiagRecord r0 = record(s, std::nullopt, 0.0, tg);
  s.t = 0.37;
  const DiagRecord r1 = record(s, r0, 0.37, tg);
  CHECK(std::abs(r1.cum_nm - 0.7 * 1.3 * 0.37) <= 1e-13);
  CHECK(r1.cum_gradm2 == 0.0);

  const DiagRecord r2 = record(s, r1, 0.1, tg, Increments{0.25, 0.125}, 3e-9);
  CHECK(r2.cum_nm == r1.cum_nm + 0.25);
  CHECK(r2.cum_gradm2 == 0.125);
  CHECK(r2.div_u_inf == 3e-9);
}

TEST_CASE("gradient square integral of a linear profile") {
  const GridSpec g = GridSpec::cube(1, 16);
  const ScalarField m = ScalarField::sample(g, [](const Point& p) { return 2.0 * p[0]; });
  // 15 interior faces of slope 2, each weighted by h.
  CHECK(integral_gradm2(m) == doctest::Approx(4.0 * 15.0 / 16.0).epsilon(1e-13));
}

TEST_CASE("diag values round trip") {
  DiagRecord r;
  r.t = 1.5;
  r.mass_n = 2.0;
  r.energy_m = 0.25;
  r.dist_u = 1e-7;
  const std::vector<double> v = diag_values(r);
  CHECK(v.size() == diag_columns().size());
  const DiagRecord back = diag_from_values(v);
  CHECK(diag_values(back) == v);
}

TEST_CASE("audit of a constant equilibrium passes every check") {
  const auto recs = equilibrium_trajectory(5);
  const AuditReport rep = audit(recs, {}, equilibrium_targets(1, 0, 1), recs.front());
  CHECK(rep.all_passed());
  CHECK(rep.checks.size() == audit_check_names().size());
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    CHECK(rep.checks[i].name == audit_check_names()[i]);
    CHECK(rep.checks[i].status == CheckStatus::pass);
  }
}

TEST_CASE("audit reports the first violation time") {
  auto recs = equilibrium_trajectory(6);
  recs[3].mass_n += 1e-6;
  recs[4].mass_n += 2e-6;
  const AuditReport rep = audit(recs, {}, equilibrium_targets(1, 0, 1), recs.front());
  const CheckResult& c = rep.check("mass-monotone-n");
  CHECK(c.status == CheckStatus::fail);
  REQUIRE(c.t_violation);
  CHECK(*c.t_violation == recs[3].t);
  CHECK(c.slack < 0.0);
  CHECK_FALSE(rep.all_passed());
  CHECK(rep.check("diff-conserved").status == CheckStatus::fail);
  CHECK(rep.check("mass-monotone-m").status == CheckStatus::pass);
}

TEST_CASE("audit checks each invariant") {
  auto base = equilibrium_trajectory(4);
  const Targets tg = equilibrium_targets(1, 0, 1);
  auto fails = [&](auto mutate, const std::string& name) {
    auto recs = base;
    mutate(recs);
    return audit(recs, {}, tg, recs.front()).check(name).status == CheckStatus::fail;
  };
  CHECK(fails([](auto& r) { r[2].min_c = -1e-9; }, "positivity"));
  CHECK(fails([](auto& r) { r[2].linf_m = 1.0; }, "maxprin-m"));
  CHECK(fails([](auto& r) { r[2].linf_c = 2.0; }, "compare-c"));
  CHECK(fails([](auto& r) { r[3].cum_nm = 0.1; }, "cum-nm-bound"));
  CHECK(fails([](auto& r) { r[3].cum_gradm2 = 0.1; }, "cum-gradm2-bound"));
  CHECK(fails([](auto& r) { r[1].div_u_inf = 1e-6; }, "div-free"));
  CHECK(fails([](auto& r) { r[1].linf_n = 11.0; }, "bounded"));
  CHECK(fails([](auto& r) { r[1].linf_n = NAN; }, "bounded"));
  CHECK(fails([](auto& r) { r[3].dist_n = 0.5; }, "converged"));
}

TEST_CASE("convergence check is skipped when disabled or for a single record") {
  auto recs = equilibrium_trajectory(3);
  recs.back().dist_m = 1.0;
  AuditTolerances tol;
  tol.check_convergence = false;
  CHECK(audit(recs, tol, {}, recs.front()).check("converged").status == CheckStatus::skipped);
  const std::vector<DiagRecord> one{recs.front()};
  CHECK(audit(one, {}, {}, one.front()).check("converged").status == CheckStatus::skipped);
}

TEST_CASE("audit input errors") {
  CHECK_THROWS_WITH_AS(audit({}, {}, {}, DiagRecord{}), "audit: no records", Error);
  auto recs = equilibrium_trajectory(3);
  std::swap(recs[0], recs[2]);
  CHECK_THROWS_WITH_AS(audit(recs, {}, {}, recs.front()), "records not time-sorted", Error);
}

TEST_CASE("audit is pure and serialises") {
  auto recs = equilibrium_trajectory(4);
  recs[2].mass_m = 5.0;
  const Targets tg = equilibrium_targets(1, 0, 1);
  const AuditReport a = audit(recs, {}, tg, recs.front());
  const AuditReport b = audit(recs, {}, tg, recs.front());
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_text() == b.to_text());

  const auto j = nlohmann::json::parse(a.to_json());
  CHECK(j.size() == audit_check_names().size());
  CHECK(j["mass-monotone-m"]["status"] == "fail");
  CHECK(j["mass-monotone-m"]["t_violation"] == recs[2].t);
  CHECK(j["positivity"]["t_violation"].is_null());
  CHECK(a.to_text().find("overall: FAIL") != std::string::npos);
  CHECK_THROWS_AS(a.check("no-such-check"), Error);
}
