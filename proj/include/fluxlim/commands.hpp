#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fluxlim/config.hpp"
#include "fluxlim/diagnostics.hpp"
#include "fluxlim/integrator.hpp"

namespace fluxlim {

// Exit codes: 0 every executed check passed, 1 a check failed or the run
// aborted, 2 usage or configuration error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct RunOutcome {
  RunResult result;
  AuditReport audit;
  double volume = 1.0;
  double sup_linf_n = 0.0;
};

/// Runs a validated configuration and audits the trajectory; writes nothing.
RunOutcome execute(const RunConfig& cfg);

/// Resolves a demo name or a config file path.
RunConfig resolve_config(const std::string& name_or_path);

/// Reads audit tolerances from a JSON object ("default" gives the defaults).
AuditTolerances parse_tolerances(const std::string& spec);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& base, const std::vector<double>& thetas, int jobs, std::ostream& out,
              std::ostream& err);
int cmd_mms(const std::string& id, const std::vector<int>& grids, const std::string& csv_path, std::ostream& out,
            std::ostream& err);
int cmd_oracle(const std::string& id, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& diag_path, const std::string& tolerances, std::ostream& out, std::ostream& err);

const std::vector<std::string>& oracle_case_ids();

}  // namespace fluxlim
