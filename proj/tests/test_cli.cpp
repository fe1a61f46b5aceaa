#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "fluxlim/commands.hpp"
#include "fluxlim/config.hpp"
#include "fluxlim/error.hpp"
#include "fluxlim/io.hpp"
#include "fluxlim/operators.hpp"
#include "support.hpp"

using namespace fluxlim;
namespace fs = std::filesystem;
using fluxlim::test::scratch;

namespace {

const char* kSmall = R"({
  "schema": 1,
  "grid": {"cells": [16, 16]},
  "limiter": {"kind": "prototype", "k_s": 1, "theta": 1},
  "potential": {"kind": "linear", "g": [0, -1]},
  "initial": {
    "n": {"kind": "gaussian-bump", "center": [0.3, 0.3], "width": 0.1, "floor": 1.0, "mass": 1.0},
    "c": {"kind": "constant", "value": 0},
    "m": {"kind": "constant", "value": 0.5}
  },
  "scheme": {"dt": 0.01, "diffusion": "implicit-be"},
  "t_end": 0.2,
  "record_every": 0.05,
  "check_convergence": false
})";

RunConfig constant_config() {
  RunConfig cfg;
  cfg.cells = {8, 8};
  cfg.lengths = {1.0, 1.0};
  cfg.n.value = 1.0;
  cfg.c.value = 0.2;
  cfg.m.value = 0.5;
  cfg.t_end = 0.1;
  cfg.record_every = 0.05;
  cfg.audit.check_convergence = false;
  return cfg;
}

}  // namespace

TEST_CASE("config parses and round trips") {
  const RunConfig cfg = parse_config(kSmall);
  CHECK(cfg.cells == std::vector<int>{16, 16});
  CHECK(cfg.lengths == std::vector<double>{1.0, 1.0});
  CHECK(cfg.n.kind == FieldInit::Kind::gaussian_bump);
  CHECK(cfg.n.mass == 1.0);
  CHECK(cfg.scheme.diffusion == Diffusion::implicit_be);
  CHECK(cfg.phi.kind == Potential::Kind::linear);
  CHECK_FALSE(cfg.audit.check_convergence);

  const RunConfig again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("malformed configs name the offending location") {
  CHECK_THROWS_WITH_AS(parse_config("{not json"), doctest::Contains("parse error"), Error);
  auto j = nlohmann::json::parse(kSmall);
  j["scheme"]["dt"] = "soon";
  CHECK_THROWS_WITH_AS(parse_config(j.dump()), doctest::Contains("/scheme/dt"), Error);
  j = nlohmann::json::parse(kSmall);
  j["bogus"] = 1;
  CHECK_THROWS_WITH_AS(parse_config(j.dump()), doctest::Contains("bogus"), Error);
  j = nlohmann::json::parse(kSmall);
  j["schema"] = 2;
  CHECK_THROWS_WITH_AS(parse_config(j.dump()), doctest::Contains("schema"), Error);
  j = nlohmann::json::parse(kSmall);
  j["initial"].erase("m");
  CHECK_THROWS_WITH_AS(parse_config(j.dump()), doctest::Contains("/initial/m"), Error);
  j = nlohmann::json::parse(kSmall);
  j["potential"]["g"] = {0, 0, -1};
  CHECK_THROWS_WITH_AS(parse_config(j.dump()), doctest::Contains("/potential/g"), Error);
  j = nlohmann::json::parse(kSmall);
  j["scheme"]["dt"] = "auto";
  CHECK(parse_config(j.dump()).dt_auto);
}

TEST_CASE("validate examples") {
  RunConfig cfg = constant_config();
  Validation v = validate(cfg);
  CHECK(v.ok());
  CHECK(v.warnings.empty());

  cfg.n.value = -0.1;
  v = validate(cfg);
  REQUIRE_FALSE(v.ok());
  CHECK(v.errors.front().find("initial n") != std::string::npos);
  CHECK(v.errors.front().find("cell") != std::string::npos);
  CHECK_THROWS_AS(build_run(cfg), Error);

  cfg = constant_config();
  cfg.limiter.theta = 0.0;
  v = validate(cfg);
  CHECK(v.ok());
  REQUIRE(v.warnings.size() == 1);
  CHECK(v.warnings.front().find("outside the proven") != std::string::npos);

  cfg = constant_config();
  cfg.cells = {2, 8};
  CHECK_FALSE(validate(cfg).ok());
}

TEST_CASE("demo configs") {
  for (const auto& name : demo_names()) {
    const auto cfg = demo_config(name);
    REQUIRE(cfg);
    CHECK(validate(*cfg).ok());
  }
  CHECK_FALSE(demo_config("demo4d"));
  const RunConfig d2 = *demo_config("demo2d");
  CHECK(d2.cells == std::vector<int>{128, 128});
  const RunSpec spec = build_run(d2);
  CHECK(integrate(spec.initial.n) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate(spec.initial.m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random initial velocity is projected") {
  RunConfig cfg = constant_config();
  cfg.u.kind = VelocityInit::Kind::random;
  cfg.u.seed = 42;
  const RunSpec a = build_run(cfg), b = build_run(cfg);
  CHECK(face_linf(a.initial.u) > 0.0);
  CHECK(a.initial.u.comp == b.initial.u.comp);
  CHECK(lp_norm(div_face_to_cc(a.initial.u), INFINITY) <= 1e-8);
}

TEST_CASE("run command with t_end = 0 writes one row") {
  const fs::path dir = scratch("t0");
  RunConfig cfg = constant_config();
  cfg.t_end = 0.0;
  cfg.output_dir = dir.string();
  std::ostringstream out, err;
  CHECK(cmd_run(cfg, out, err) == kExitPass);
  const DiagFile f = read_diag_csv((dir / "diag.csv").string());
  CHECK(f.records.size() == 1);
  CHECK(fs::exists(dir / "audit.json"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("run command with a tight guard aborts") {
  const fs::path dir = scratch("guard");
  RunConfig cfg = parse_config(kSmall);
  cfg.guard = 1e-9;
  cfg.output_dir = dir.string();
  std::ostringstream out, err;
  CHECK(cmd_run(cfg, out, err) == kExitFail);
  CHECK(err.str().find("blow-up suspected") != std::string::npos);
  CHECK(read_text((dir / "abort.txt").string()).find("check: bounded") != std::string::npos);
  const auto j = nlohmann::json::parse(read_text((dir / "audit.json").string()));
  CHECK(j["bounded"]["status"] == "fail");
}

TEST_CASE("invalid config gives a usage exit") {
  RunConfig cfg = constant_config();
  cfg.m.value = -1.0;
  cfg.output_dir = scratch("invalid").string();
  std::ostringstream out, err;
  CHECK(cmd_run(cfg, out, err) == kExitUsage);
  CHECK(err.str().find("initial m") != std::string::npos);
}

TEST_CASE("run, check and sweep agree") {
  const fs::path dir = scratch("small");
  RunConfig cfg = parse_config(kSmall);
  cfg.output_dir = (dir / "run").string();
  std::ostringstream out, err;
  REQUIRE(cmd_run(cfg, out, err) == kExitPass);
  const std::string diag = read_text((dir / "run" / "diag.csv").string());
  CHECK(diag.rfind("# fluxlim diag schema=1", 0) == 0);

  const DiagFile f = parse_diag_csv(diag);
  CHECK(f.records.size() == 5);
  CHECK(diag_csv(f.records, f.volume) == diag);
  for (std::size_t i = 1; i < f.records.size(); ++i) CHECK(f.records[i].mass_n <= f.records[i - 1].mass_n);

  std::ostringstream cout_, cerr_;
  CHECK(cmd_check((dir / "run" / "diag.csv").string(), R"({"check_convergence": false})", cout_, cerr_) ==
        kExitPass);
  CHECK(cmd_check((dir / "run" / "diag.csv").string(), R"({"eps_conv": 1e-12})", cout_, cerr_) == kExitFail);
  CHECK(cmd_check((dir / "run" / "diag.csv").string(), R"({"nope": 1})", cout_, cerr_) == kExitUsage);
  CHECK(cmd_check((dir / "missing.csv").string(), "default", cout_, cerr_) == kExitUsage);

  cfg.output_dir = (dir / "sweep").string();
  std::ostringstream sout, serr;
  REQUIRE(cmd_sweep(cfg, {1.0}, 1, sout, serr) == kExitPass);
  CHECK(read_text((dir / "sweep" / "theta_1" / "diag.csv").string()) == diag);
  const std::string summary = read_text((dir / "sweep" / "summary.csv").string());
  CHECK(summary.rfind("theta,sup_linf_n", 0) == 0);
}

TEST_CASE("sweep with no thetas is a usage error") {
  std::ostringstream out, err;
  CHECK(cmd_sweep(constant_config(), {}, 1, out, err) == kExitUsage);
  CHECK(err.str().find("usage") != std::string::npos);
}

TEST_CASE("parse_diag_csv rejects malformed input") {
  CHECK_THROWS_AS(parse_diag_csv(""), Error);
  CHECK_THROWS_AS(parse_diag_csv("t,mass_n\n1,2\n"), Error);
}

TEST_CASE("snapshot round trip and file initial data") {
  const fs::path dir = scratch("snap");
  const GridSpec g = GridSpec::cube(2, 8);
  const ScalarField f = ScalarField::sample(g, [](const Point& p) { return 1.0 + p[0] * p[1]; });
  const std::string path = (dir / "n.bin").string();
  write_snapshot(path, f, "n", 0.125);
  CHECK(fs::file_size(path) == 64 + 8 * g.size());
  const Snapshot s = read_snapshot(path);
  CHECK(s.dim == 2);
  CHECK(s.cells == std::array<int, 3>{8, 8, 1});
  CHECK(s.field == "n");
  CHECK(s.t == 0.125);
  CHECK(s.values == f.values);

  RunConfig cfg = constant_config();
  cfg.n.kind = FieldInit::Kind::file;
  cfg.n.path = path;
  CHECK(build_run(cfg).initial.n.values == f.values);
  cfg.cells = {16, 16};
  CHECK_THROWS_AS(build_run(cfg), Error);

  write_text((dir / "junk.bin").string(), "garbage");
  CHECK_THROWS_AS(read_snapshot((dir / "junk.bin").string()), Error);
}

TEST_CASE("run writes snapshots and vtk when asked") {
  const fs::path dir = scratch("snaps");
  RunConfig cfg = constant_config();
  cfg.snapshot_every = 0.05;
  cfg.vtk = true;
  cfg.output_dir = dir.string();
  std::ostringstream out, err;
  REQUIRE(cmd_run(cfg, out, err) == kExitPass);
  CHECK(fs::exists(dir / "snapshots" / "n_00000.bin"));
  CHECK(fs::exists(dir / "snapshots" / "state_00000.vtk"));
  CHECK(read_text((dir / "snapshots" / "state_00000.vtk").string()).find("STRUCTURED_POINTS") != std::string::npos);
}

TEST_CASE("unknown case ids list the known ones") {
  std::ostringstream out, err;
  CHECK(cmd_oracle("nope", out, err) == kExitUsage);
  CHECK(err.str().find("homogeneous") != std::string::npos);
  CHECK(err.str().find("stokes-cavity") != std::string::npos);
  std::ostringstream out2, err2;
  CHECK(cmd_mms("nope", {}, "", out2, err2) == kExitUsage);
  CHECK(err2.str().find("chemo-1d") != std::string::npos);
}

TEST_CASE("manufactured steady case through the command") {
  std::ostringstream out, err;
  CHECK(cmd_mms("steady-2d", {8}, "", out, err) == kExitPass);
  CHECK(out.str().find("PASS") != std::string::npos);
}

TEST_CASE("tolerance parsing") {
  CHECK(parse_tolerances("default").eps_conv == AuditTolerances{}.eps_conv);
  const AuditTolerances t = parse_tolerances(R"({"eps_conv": 0.5, "check_convergence": false})");
  CHECK(t.eps_conv == 0.5);
  CHECK_FALSE(t.check_convergence);
  CHECK_THROWS_AS(parse_tolerances(R"({"eps_conv": -1})"), Error);
  CHECK_THROWS_AS(parse_tolerances("[1, 2]"), Error);
}
