// Command-line driver: run, sweep, mms, oracle, check.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluxlim/commands.hpp"
#include "fluxlim/error.hpp"

using namespace fluxlim;

namespace {

RunConfig load_or_exit(const std::string& what, const std::string& out_dir, double t_end) {
  RunConfig cfg = resolve_config(what);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (t_end >= 0.0) cfg.t_end = t_end;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluxlim: flux-limited chemotaxis-Stokes coral fertilization simulator"};
  app.require_subcommand(1);

  std::string config, out_dir, diag, tolerances = "default", csv, case_id;
  double t_end = -1.0;
  std::vector<double> thetas;
  std::vector<int> grids;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run a config file or a built-in demo (demo1d, demo2d, demo3d)");
  run->add_option("config", config, "config JSON path or demo name")->required();
  run->add_option("-o,--output-dir", out_dir, "override output_dir");
  run->add_option("--t-end", t_end, "override t_end");

  auto* sweep = app.add_subcommand("sweep", "one run per theta, plus summary.csv");
  sweep->add_option("config", config, "config JSON path or demo name")->required();
  sweep->add_option("--theta", thetas, "comma-separated theta values")->delimiter(',')->required();
  sweep->add_option("-o,--output-dir", out_dir, "override output_dir");
  sweep->add_option("--t-end", t_end, "override t_end");
  sweep->add_option("-j,--jobs", jobs, "runs executed concurrently")->check(CLI::PositiveNumber);

  auto* mms = app.add_subcommand("mms", "manufactured-solution order study");
  mms->add_option("case", case_id, "pure-diffusion-1d, chemo-1d or steady-2d")->required();
  mms->add_option("--grids", grids, "comma-separated cell counts")->delimiter(',');
  mms->add_option("--csv", csv, "write the error table here");

  auto* oracle = app.add_subcommand("oracle", "reference-solution comparison (homogeneous, stokes-cavity)");
  oracle->add_option("case", case_id, "oracle case id")->required();

  auto* check = app.add_subcommand("check", "re-audit an existing diag.csv");
  check->add_option("diag", diag, "diag.csv path")->required();
  check->add_option("tolerances", tolerances, "tolerances JSON file, inline JSON, or 'default'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return cmd_run(load_or_exit(config, out_dir, t_end), std::cout, std::cerr);
    if (*sweep) return cmd_sweep(load_or_exit(config, out_dir, t_end), thetas, jobs, std::cout, std::cerr);
    if (*mms) return cmd_mms(case_id, grids, csv, std::cout, std::cerr);
    if (*oracle) return cmd_oracle(case_id, std::cout, std::cerr);
    if (*check) return cmd_check(diag, tolerances, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
