#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fluxlim/diagnostics.hpp"
#include "fluxlim/fluid.hpp"
#include "fluxlim/integrator.hpp"
#include "fluxlim/sensitivity.hpp"

namespace fluxlim {

inline constexpr int kConfigSchema = 1;

struct FieldInit {
  enum class Kind { constant, gaussian_bump, file };
  Kind kind = Kind::constant;
  double value = 0.0;
  Point center{0.5, 0.5, 0.5};
  double width = 0.1;
  double amplitude = 1.0;
  double floor = 0.0;
  std::optional<double> mass;  ///< rescales the bump so its integral is `mass`
  std::string path;
};

struct VelocityInit {
  enum class Kind { zero, random };
  Kind kind = Kind::zero;
  std::uint64_t seed = 0;
  double amplitude = 0.1;
};

struct LimiterSpec {
  enum class Kind { prototype, tabulated };
  Kind kind = Kind::prototype;
  double k_s = 1.0;
  double theta = 1.0;
  std::string path;
};

struct RunConfig {
  std::vector<int> cells{64};
  std::vector<double> lengths{1.0};
  LimiterSpec limiter;
  Potential phi;
  FieldInit n, c, m;
  VelocityInit u;
  SchemeConfig scheme;
  bool dt_auto = false;  ///< cap dt only by stability and the record cadence
  double t_end = 1.0;
  double record_every = 0.1;
  std::optional<double> snapshot_every;
  double guard = 1e6;
  AuditTolerances audit;
  bool vtk = false;
  std::string output_dir = "out";
};

/// Parses a schema-1 JSON document. Throws Error naming the offending JSON
/// location for malformed input.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

/// Built-in configurations: demo1d, demo2d, demo3d.
const std::vector<std::string>& demo_names();
std::optional<RunConfig> demo_config(const std::string& name);

struct Validation {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Checks the grid, tolerances, limiter and initial data (nonnegative,
/// finite) without running anything.
Validation validate(const RunConfig& cfg);

/// Builds the run: samples the initial data and projects u0 onto discretely
/// divergence-free fields. Throws Error listing the validation errors.
RunSpec build_run(const RunConfig& cfg);
GridSpec make_grid(const RunConfig& cfg);
FluxLimiter make_limiter(const RunConfig& cfg);

}  // namespace fluxlim
