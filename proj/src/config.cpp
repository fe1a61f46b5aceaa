#include "fluxlim/config.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fluxlim/error.hpp"
#include "fluxlim/io.hpp"

namespace fluxlim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// A JSON object plus its location, for error messages like "/scheme/dt: ...".
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error("config " + (path_.empty() && key.empty() ? std::string("/") : path_ + (key.empty() ? "" : "/" + key)) +
                ": " + what);
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  bool is_string(const std::string& key) const { return has(key) && j_.at(key).is_string(); }
  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) fail(k, "unknown key");
  }
  double num(const std::string& key, double def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key) const {
    if (!has(key)) fail(key, "required");
    return num(key, 0.0);
  }
  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) fail(key, "expected true or false");
    return j_.at(key).get<bool>();
  }
  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_string()) fail(key, "expected a string");
    return j_.at(key).get<std::string>();
  }
  std::string str(const std::string& key) const {
    if (!has(key)) fail(key, "required");
    return str(key, "");
  }
  template <class T>
  std::vector<T> list(const std::string& key) const {
    if (!has(key)) fail(key, "required");
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key + "/" + std::to_string(i), "expected a number");
      if constexpr (std::is_integral_v<T>) {
        if (!v[i].is_number_integer()) fail(key + "/" + std::to_string(i), "expected an integer");
      }
      out.push_back(v[i].get<T>());
    }
    return out;
  }
  Node child(const std::string& key) const {
    if (!has(key)) fail(key, "required");
    return Node(j_.at(key), path_ + "/" + key);
  }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

Point to_point(const std::vector<double>& v) {
  Point p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < v.size() && i < 3; ++i) p[i] = v[i];
  return p;
}

FieldInit parse_field(const Node& f) {
  FieldInit out;
  const std::string kind = f.str("kind");
  if (kind == "constant") {
    f.only({"kind", "value"});
    out.kind = FieldInit::Kind::constant;
    out.value = f.num("value");
  } else if (kind == "gaussian-bump") {
    f.only({"kind", "center", "width", "amplitude", "floor", "mass"});
    out.kind = FieldInit::Kind::gaussian_bump;
    out.center = to_point(f.list<double>("center"));
    out.width = f.num("width");
    out.amplitude = f.num("amplitude", 1.0);
    out.floor = f.num("floor", 0.0);
    if (f.has("mass")) out.mass = f.num("mass");
  } else if (kind == "file") {
    f.only({"kind", "path"});
    out.kind = FieldInit::Kind::file;
    out.path = f.str("path");
  } else {
    f.fail("kind", "expected constant, gaussian-bump or file");
  }
  return out;
}

ordered_json field_json(const FieldInit& f) {
  ordered_json j;
  switch (f.kind) {
    case FieldInit::Kind::constant:
      j["kind"] = "constant";
      j["value"] = f.value;
      break;
    case FieldInit::Kind::gaussian_bump:
      j["kind"] = "gaussian-bump";
      j["center"] = f.center;
      j["width"] = f.width;
      j["amplitude"] = f.amplitude;
      j["floor"] = f.floor;
      if (f.mass) j["mass"] = *f.mass;
      break;
    case FieldInit::Kind::file:
      j["kind"] = "file";
      j["path"] = f.path;
      break;
  }
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }
  const Node root(doc, "");
  root.only({"schema", "grid", "limiter", "potential", "initial", "scheme", "t_end", "record_every", "snapshot_every",
             "guard", "eps_conv", "check_convergence", "bound_factor", "vtk", "output_dir"});
  const double schema = root.num("schema");
  if (schema != kConfigSchema) root.fail("schema", "unsupported schema version (expected 1)");

  RunConfig cfg;
  const Node grid = root.child("grid");
  grid.only({"cells", "lengths"});
  cfg.cells = grid.list<int>("cells");
  cfg.lengths = grid.has("lengths") ? grid.list<double>("lengths") : std::vector<double>(cfg.cells.size(), 1.0);

  if (root.has("limiter")) {
    const Node lim = root.child("limiter");
    lim.only({"kind", "k_s", "theta", "file"});
    const std::string kind = lim.str("kind", "prototype");
    cfg.limiter.k_s = lim.num("k_s", 1.0);
    cfg.limiter.theta = lim.num("theta", 1.0);
    if (kind == "prototype") {
      cfg.limiter.kind = LimiterSpec::Kind::prototype;
    } else if (kind == "tabulated") {
      cfg.limiter.kind = LimiterSpec::Kind::tabulated;
      cfg.limiter.path = lim.str("file");
    } else {
      lim.fail("kind", "expected prototype or tabulated");
    }
  }

  if (root.has("potential")) {
    const Node pot = root.child("potential");
    pot.only({"kind", "g"});
    const std::string kind = pot.str("kind");
    if (kind == "zero") {
      cfg.phi = Potential::zero();
    } else if (kind == "linear") {
      const auto g = pot.list<double>("g");
      if (g.size() != cfg.cells.size()) pot.fail("g", "needs one component per grid axis");
      cfg.phi = Potential::linear(to_point(g));
    } else {
      pot.fail("kind", "expected zero or linear");
    }
  }

  const Node init = root.child("initial");
  init.only({"n", "c", "m", "u"});
  cfg.n = parse_field(init.child("n"));
  cfg.c = parse_field(init.child("c"));
  cfg.m = parse_field(init.child("m"));
  if (init.has("u")) {
    const Node u = init.child("u");
    u.only({"kind", "seed", "amplitude"});
    const std::string kind = u.str("kind");
    if (kind == "zero") {
      cfg.u.kind = VelocityInit::Kind::zero;
    } else if (kind == "random") {
      cfg.u.kind = VelocityInit::Kind::random;
      const double seed = u.num("seed", 0.0);
      if (seed < 0.0 || seed != std::floor(seed)) u.fail("seed", "expected a nonnegative integer");
      cfg.u.seed = static_cast<std::uint64_t>(seed);
      cfg.u.amplitude = u.num("amplitude", 0.1);
    } else {
      u.fail("kind", "expected zero or random");
    }
  }

  if (root.has("scheme")) {
    const Node sc = root.child("scheme");
    sc.only({"dt", "diffusion", "cfl_safety", "tol_poisson", "tol_proj", "tol_implicit", "preconditioner"});
    if (sc.is_string("dt")) {
      if (sc.str("dt") != "auto") sc.fail("dt", "expected a number or \"auto\"");
      cfg.dt_auto = true;
    } else {
      cfg.scheme.dt = sc.num("dt", cfg.scheme.dt);
    }
    const std::string diff = sc.str("diffusion", "explicit");
    if (diff == "explicit")
      cfg.scheme.diffusion = Diffusion::explicit_euler;
    else if (diff == "implicit-be")
      cfg.scheme.diffusion = Diffusion::implicit_be;
    else
      sc.fail("diffusion", "expected explicit or implicit-be");
    cfg.scheme.cfl_safety = sc.num("cfl_safety", cfg.scheme.cfl_safety);
    cfg.scheme.tol_poisson = sc.num("tol_poisson", cfg.scheme.tol_poisson);
    cfg.scheme.tol_proj = sc.num("tol_proj", cfg.scheme.tol_proj);
    cfg.scheme.tol_implicit = sc.num("tol_implicit", cfg.scheme.tol_implicit);
    const std::string pc = sc.str("preconditioner", "spectral");
    if (pc == "spectral")
      cfg.scheme.precond = Precond::spectral;
    else if (pc == "jacobi")
      cfg.scheme.precond = Precond::jacobi;
    else if (pc == "none")
      cfg.scheme.precond = Precond::none;
    else
      sc.fail("preconditioner", "expected spectral, jacobi or none");
  }

  cfg.t_end = root.num("t_end");
  cfg.record_every = root.num("record_every", cfg.record_every);
  if (root.has("snapshot_every")) cfg.snapshot_every = root.num("snapshot_every");
  cfg.guard = root.num("guard", cfg.guard);
  cfg.audit.eps_conv = root.num("eps_conv", cfg.audit.eps_conv);
  cfg.audit.check_convergence = root.flag("check_convergence", true);
  cfg.audit.bound_factor = root.num("bound_factor", cfg.audit.bound_factor);
  cfg.audit.tol_proj = cfg.scheme.tol_proj;
  cfg.vtk = root.flag("vtk", false);
  cfg.output_dir = root.str("output_dir", cfg.output_dir);
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

std::string config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["grid"] = {{"cells", cfg.cells}, {"lengths", cfg.lengths}};
  ordered_json lim;
  lim["kind"] = cfg.limiter.kind == LimiterSpec::Kind::prototype ? "prototype" : "tabulated";
  lim["k_s"] = cfg.limiter.k_s;
  lim["theta"] = cfg.limiter.theta;
  if (cfg.limiter.kind == LimiterSpec::Kind::tabulated) lim["file"] = cfg.limiter.path;
  j["limiter"] = lim;
  if (cfg.phi.kind == Potential::Kind::zero) {
    j["potential"] = {{"kind", "zero"}};
  } else {
    j["potential"] = {{"kind", "linear"},
                      {"g", std::vector<double>(cfg.phi.g.begin(), cfg.phi.g.begin() + cfg.cells.size())}};
  }
  ordered_json init;
  init["n"] = field_json(cfg.n);
  init["c"] = field_json(cfg.c);
  init["m"] = field_json(cfg.m);
  if (cfg.u.kind == VelocityInit::Kind::zero)
    init["u"] = {{"kind", "zero"}};
  else
    init["u"] = {{"kind", "random"}, {"seed", cfg.u.seed}, {"amplitude", cfg.u.amplitude}};
  j["initial"] = init;
  ordered_json sc;
  if (cfg.dt_auto)
    sc["dt"] = "auto";
  else
    sc["dt"] = cfg.scheme.dt;
  sc["diffusion"] = cfg.scheme.diffusion == Diffusion::explicit_euler ? "explicit" : "implicit-be";
  sc["cfl_safety"] = cfg.scheme.cfl_safety;
  sc["tol_poisson"] = cfg.scheme.tol_poisson;
  sc["tol_proj"] = cfg.scheme.tol_proj;
  sc["tol_implicit"] = cfg.scheme.tol_implicit;
  sc["preconditioner"] = cfg.scheme.precond == Precond::spectral ? "spectral"
                         : cfg.scheme.precond == Precond::jacobi ? "jacobi"
                                                                 : "none";
  j["scheme"] = sc;
  j["t_end"] = cfg.t_end;
  j["record_every"] = cfg.record_every;
  if (cfg.snapshot_every) j["snapshot_every"] = *cfg.snapshot_every;
  j["guard"] = cfg.guard;
  j["eps_conv"] = cfg.audit.eps_conv;
  j["check_convergence"] = cfg.audit.check_convergence;
  j["bound_factor"] = cfg.audit.bound_factor;
  j["vtk"] = cfg.vtk;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names{"demo1d", "demo2d", "demo3d"};
  return names;
}

std::optional<RunConfig> demo_config(const std::string& name) {
  int dim = 0;
  if (name == "demo1d") dim = 1;
  if (name == "demo2d") dim = 2;
  if (name == "demo3d") dim = 3;
  if (dim == 0) return std::nullopt;

  RunConfig cfg;
  const int n = dim == 1 ? 64 : (dim == 2 ? 128 : 32);
  cfg.cells.assign(dim, n);
  cfg.lengths.assign(dim, 1.0);
  cfg.limiter = LimiterSpec{};
  const double width = dim == 3 ? 0.2 : 0.1;
  // Sperm: floor 1 plus a bump of mass 1; eggs: floor 1/2 plus a bump of
  // mass 1/2. On the unit box the totals are 2 and 1.
  cfg.n.kind = FieldInit::Kind::gaussian_bump;
  cfg.n.center = {0.3, 0.3, 0.3};
  cfg.n.width = width;
  cfg.n.floor = 1.0;
  cfg.n.mass = 1.0;
  cfg.m = cfg.n;
  cfg.m.center = {0.7, 0.7, 0.7};
  cfg.m.floor = 0.5;
  cfg.m.mass = 0.5;
  cfg.c.kind = FieldInit::Kind::constant;
  cfg.c.value = 0.0;
  if (dim == 1) {
    cfg.phi = Potential::zero();
  } else {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    g[dim - 1] = -1.0;
    cfg.phi = Potential::linear(g);
  }
  cfg.scheme.diffusion = Diffusion::implicit_be;
  cfg.scheme.dt = 0.01;
  cfg.t_end = dim == 1 ? 20.0 : (dim == 2 ? 50.0 : 12.0);
  cfg.record_every = dim == 2 ? 0.5 : 0.2;
  cfg.output_dir = "out/" + name;
  return cfg;
}

GridSpec make_grid(const RunConfig& cfg) { return GridSpec::make(cfg.cells, cfg.lengths); }

FluxLimiter make_limiter(const RunConfig& cfg) {
  if (cfg.limiter.kind == LimiterSpec::Kind::prototype) return FluxLimiter::prototype(cfg.limiter.k_s, cfg.limiter.theta);
  return FluxLimiter::from_csv(cfg.limiter.path, cfg.limiter.k_s, cfg.limiter.theta);
}

namespace {

std::string cell_name(const GridSpec& g, std::size_t i) {
  const Extents& e = g.cell_extents();
  std::ostringstream os;
  os << "(" << i / e.stride[0] << "," << (i % e.stride[0]) / e.stride[1] << "," << i % e.stride[1] << ")";
  return os.str();
}

ScalarField sample_field(const GridSpec& g, const FieldInit& f, const std::string& name) {
  switch (f.kind) {
    case FieldInit::Kind::constant:
      return ScalarField(g, f.value);
    case FieldInit::Kind::gaussian_bump: {
      if (!(f.width > 0.0)) throw Error("initial " + name + ": width must be positive");
      const double w2 = 2.0 * f.width * f.width;
      const ScalarField bump = ScalarField::sample(g, [&](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - f.center[a]) * (x[a] - f.center[a]);
        return std::exp(-r2 / w2);
      });
      double amp = f.amplitude;
      if (f.mass) amp = *f.mass / integrate(bump);
      ScalarField out(g, f.floor);
      for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += amp * bump.values[i];
      return out;
    }
    case FieldInit::Kind::file: {
      const Snapshot s = read_snapshot(f.path);
      if (s.dim != g.dim() || s.cells != std::array<int, 3>{g.cells(0), g.cells(1), g.cells(2)})
        throw Error("initial " + name + ": snapshot '" + f.path + "' does not match the grid");
      ScalarField out(g);
      out.values = s.values;
      return out;
    }
  }
  return ScalarField(g);
}

void check_field(const ScalarField& f, const std::string& name, Validation& v) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f.values[i])) {
      v.errors.push_back("initial " + name + " is not finite at cell " + cell_name(f.grid, i));
      return;
    }
    if (f.values[i] < 0.0) {
      std::ostringstream os;
      os << "initial " << name << " is negative (" << f.values[i] << ") at cell " << cell_name(f.grid, i);
      v.errors.push_back(os.str());
      return;
    }
  }
}

}  // namespace

Validation validate(const RunConfig& cfg) {
  Validation v;
  auto positive = [&](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) v.errors.push_back(std::string(what) + " must be positive");
  };
  GridSpec g;
  try {
    if (cfg.cells.size() != cfg.lengths.size()) throw Error("grid: cells and lengths differ in length");
    g = make_grid(cfg);
  } catch (const Error& e) {
    v.errors.push_back(e.what());
  }
  if (!cfg.dt_auto) positive(cfg.scheme.dt, "scheme.dt");
  if (!(cfg.scheme.cfl_safety > 0.0 && cfg.scheme.cfl_safety <= 1.0)) v.errors.push_back("scheme.cfl_safety must lie in (0, 1]");
  positive(cfg.scheme.tol_poisson, "scheme.tol_poisson");
  positive(cfg.scheme.tol_proj, "scheme.tol_proj");
  positive(cfg.scheme.tol_implicit, "scheme.tol_implicit");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) v.errors.push_back("t_end must be nonnegative");
  positive(cfg.record_every, "record_every");
  if (cfg.snapshot_every) positive(*cfg.snapshot_every, "snapshot_every");
  positive(cfg.guard, "guard");
  positive(cfg.audit.eps_conv, "eps_conv");
  positive(cfg.audit.bound_factor, "bound_factor");
  if (cfg.u.kind == VelocityInit::Kind::random && !(cfg.u.amplitude >= 0.0))
    v.errors.push_back("initial u: amplitude must be nonnegative");
  for (double x : cfg.phi.g)
    if (!std::isfinite(x)) v.errors.push_back("potential: g must be finite");

  try {
    const FluxLimiter lim = make_limiter(cfg);
    if (lim.kind() == FluxLimiter::Kind::tabulated && !verify_bound(lim, lim.k_s(), lim.theta(), 200))
      v.errors.push_back("limiter: table exceeds k_s (1 + sigma)^(-theta/2)");
    if (!lim.in_proven_regime())
      v.warnings.push_back("limiter: theta = 0 is outside the proven boundedness regime (theta > 0)");
  } catch (const Error& e) {
    v.errors.push_back(std::string("limiter: ") + e.what());
  }

  if (g.dim() > 0) {
    for (const auto& [name, f] : {std::pair<std::string, const FieldInit*>{"n", &cfg.n}, {"c", &cfg.c}, {"m", &cfg.m}}) {
      try {
        const ScalarField s = sample_field(g, *f, name);
        check_field(s, name, v);
      } catch (const Error& e) {
        v.errors.push_back(e.what());
      }
    }
  }
  return v;
}

RunSpec build_run(const RunConfig& cfg) {
  const Validation v = validate(cfg);
  if (!v.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw Error(msg);
  }
  const GridSpec g = make_grid(cfg);
  RunSpec spec;
  spec.initial = StateSnapshot::zeros(g);
  spec.initial.n = sample_field(g, cfg.n, "n");
  spec.initial.c = sample_field(g, cfg.c, "c");
  spec.initial.m = sample_field(g, cfg.m, "m");
  if (cfg.u.kind == VelocityInit::Kind::random && g.dim() > 1) {
    std::mt19937_64 rng(cfg.u.seed);
    std::uniform_real_distribution<double> dist(-cfg.u.amplitude, cfg.u.amplitude);
    VectorField u(g);
    for (int a = 0; a < g.dim(); ++a)
      for (double& x : u[a]) x = dist(rng);
    StokesOptions so;
    so.tol_poisson = cfg.scheme.tol_poisson;
    so.precond = cfg.scheme.precond;
    spec.initial.u = project_divergence_free(u, cfg.scheme.tol_proj, so);
    const double div = lp_norm(divergence(spec.initial.u), std::numeric_limits<double>::infinity());
    if (div > cfg.scheme.tol_proj) throw Error("initial u: projection left divergence above tol_proj");
  }
  spec.scheme = cfg.scheme;
  if (cfg.dt_auto) spec.scheme.dt = cfg.record_every;
  spec.limiter = make_limiter(cfg);
  spec.phi = cfg.phi;
  spec.t_end = cfg.t_end;
  spec.record_every = cfg.record_every;
  spec.snapshot_every = cfg.snapshot_every;
  spec.guard_factor = cfg.guard;
  return spec;
}

}  // namespace fluxlim
