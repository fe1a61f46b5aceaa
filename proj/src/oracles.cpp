#include "fluxlim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "fluxlim/error.hpp"
#include "fluxlim/fluid.hpp"

namespace fluxlim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Homogeneous homogeneous_exact(double n0, double m0, double c0, double t) {
  if (n0 < 0.0 || m0 < 0.0 || c0 < 0.0 || t < 0.0 || !std::isfinite(t))
    throw Error("homogeneous_exact: inputs must be finite and nonnegative");
  const auto [n, m] = reaction_exact(n0, m0, t);
  Homogeneous out{n, 0.0, m};
  double forced = 0.0;
  if (m0 > 0.0 && t > 0.0) {
    const double a = 1.0 / m0;
    if (n0 == m0 && t + a < 600.0) {
      // m(s) = 1/(a + s): the convolution is e^-(t+a) (Ei(t+a) - Ei(a)).
      forced = std::exp(-(t + a)) * (boost::math::expint(t + a) - boost::math::expint(a));
    } else {
      // Contributions from s < t - 60 are below e^-60 max(m).
      const double lo = std::max(0.0, t - 60.0);
      auto f = [&](double s) { return std::exp(-(t - s)) * reaction_exact(n0, m0, s).second; };
      forced = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, t, 20, 1e-14);
    }
  }
  out.c = c0 * std::exp(-t) + forced;
  return out;
}

std::vector<OdeSample> ode_reference(double n0, double m0, double c0, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0) || dt > t_end / 100.0 * (1.0 + 1e-12))
    throw Error("ode_reference: need 0 < dt <= t_end/100");
  auto rhs = [](const Homogeneous& y) {
    const double r = y.n * y.m;
    return Homogeneous{-r, -y.c + y.m, -r};
  };
  auto add = [](const Homogeneous& y, double s, const Homogeneous& k) {
    return Homogeneous{y.n + s * k.n, y.c + s * k.c, y.m + s * k.m};
  };
  std::vector<OdeSample> traj{{0.0, {n0, c0, m0}}};
  Homogeneous y{n0, c0, m0};
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double h = std::min(dt, t_end - t);
    const Homogeneous k1 = rhs(y);
    const Homogeneous k2 = rhs(add(y, 0.5 * h, k1));
    const Homogeneous k3 = rhs(add(y, 0.5 * h, k2));
    const Homogeneous k4 = rhs(add(y, h, k3));
    y.n += h / 6.0 * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n);
    y.c += h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
    y.m += h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
    traj.push_back({k + 1 == steps ? t_end : t + h, y});
  }
  return traj;
}

const std::vector<std::string>& mms_case_ids() {
  static const std::vector<std::string> ids{"pure-diffusion-1d", "chemo-1d", "steady-2d"};
  return ids;
}

MmsCase mms_case(const std::string& id) {
  MmsCase mc;
  mc.id = id;
  if (id == "pure-diffusion-1d") {
    mc.dim = 1;
    mc.t_end = 0.1;
    mc.n = [](const Point& x, double t) { return 2.0 + std::cos(kPi * x[0]) * std::exp(-kPi * kPi * t); };
    mc.c = [](const Point&, double) { return 0.0; };
    mc.m = [](const Point&, double) { return 0.0; };
    return mc;
  }
  if (id == "chemo-1d") {
    mc.dim = 1;
    mc.t_end = 0.1;
    const FluxLimiter lim = FluxLimiter::prototype(mc.k_s, mc.theta);
    // n = 1 + cos/2, c = 3/2 + cos, m = 1/2 + cos/4, each cos = cos(pi x) e^-t.
    auto q = [](const Point& x, double t) { return std::cos(kPi * x[0]) * std::exp(-t); };
    auto qx = [](const Point& x, double t) { return -kPi * std::sin(kPi * x[0]) * std::exp(-t); };
    mc.n = [q](const Point& x, double t) { return 1.0 + 0.5 * q(x, t); };
    mc.c = [q](const Point& x, double t) { return 1.5 + q(x, t); };
    mc.m = [q](const Point& x, double t) { return 0.5 + 0.25 * q(x, t); };
    // q_t = -q, q_xx = -pi^2 q.
    mc.s_n = [=](const Point& x, double t) {
      const double Q = q(x, t), Qx = qx(x, t);
      const double n = 1.0 + 0.5 * Q, nx = 0.5 * Qx, n_t = -0.5 * Q, nxx = -0.5 * kPi * kPi * Q;
      const double cx = Qx, cxx = -kPi * kPi * Q;
      const double m = 0.5 + 0.25 * Q;
      const double s = lim.eval(cx * cx), sp = lim.eval_prime(cx * cx);
      const double chemo = nx * s * cx + n * cxx * (s + 2.0 * cx * cx * sp);
      return n_t - nxx + chemo + n * m;
    };
    mc.s_c = [=](const Point& x, double t) {
      const double Q = q(x, t);
      const double c = 1.5 + Q, m = 0.5 + 0.25 * Q;
      return -Q + kPi * kPi * Q + c - m;
    };
    mc.s_m = [=](const Point& x, double t) {
      const double Q = q(x, t);
      const double n = 1.0 + 0.5 * Q, m = 0.5 + 0.25 * Q;
      return -0.25 * Q + 0.25 * kPi * kPi * Q + n * m;
    };
    return mc;
  }
  if (id == "steady-2d") {
    mc.dim = 2;
    mc.t_end = 0.5;
    mc.n = [](const Point&, double) { return 0.0; };
    mc.c = [](const Point&, double) { return 0.6; };
    mc.m = [](const Point&, double) { return 0.6; };
    return mc;
  }
  std::string known;
  for (const auto& k : mms_case_ids()) known += (known.empty() ? "" : ", ") + k;
  throw Error("unknown MMS case '" + id + "' (known: " + known + ")");
}

std::vector<ErrorRow> mms_run(const MmsCase& mc, const GridSpec& g, double dt, double t_end) {
  if (g.dim() != mc.dim) throw Error("mms_run: case dimension does not match the grid");
  StateSnapshot s = StateSnapshot::zeros(g);
  auto at = [&](const SpaceTimeFn& f, double t) { return ScalarField::sample(g, [&](const Point& x) { return f(x, t); }); };
  s.n = at(mc.n, 0.0);
  s.c = at(mc.c, 0.0);
  s.m = at(mc.m, 0.0);
  SourceTerms src{mc.s_n, mc.s_c, mc.s_m};
  SchemeConfig cfg;
  cfg.dt = dt;
  const FluxLimiter lim = FluxLimiter::prototype(mc.k_s, mc.theta);
  while (s.t < t_end) {
    const double h = std::min(dt, t_end - s.t);
    const bool last = s.t + h >= t_end - 1e-12 * std::max(1.0, t_end);
    s = step(s, cfg, lim, Potential::zero(), last ? t_end - s.t : h, nullptr, &src);
    if (last) s.t = t_end;
  }
  std::vector<ErrorRow> rows;
  const std::pair<const char*, std::pair<const ScalarField*, const SpaceTimeFn*>> fields[] = {
      {"n", {&s.n, &mc.n}}, {"c", {&s.c, &mc.c}}, {"m", {&s.m, &mc.m}}};
  for (const auto& [name, pf] : fields) {
    const ScalarField err = axpy(*pf.first, -1.0, at(*pf.second, t_end));
    rows.push_back({g.h_min(), dt, name, "linf", lp_norm(err, kInf)});
    rows.push_back({g.h_min(), dt, name, "l2", lp_norm(err, 2.0)});
  }
  rows.push_back({g.h_min(), dt, "u", "linf", face_linf(s.u)});
  return rows;
}

double convergence_order(const std::vector<std::array<double, 2>>& h_e) {
  if (h_e.size() < 2) throw Error("convergence_order: need at least two points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < h_e.size(); ++i) {
    if (!(h_e[i][1] > 0.0)) throw Error("convergence_order: errors must be positive");
    if (!(h_e[i][0] > 0.0) || (i > 0 && !(h_e[i][0] < h_e[i - 1][0])))
      throw Error("convergence_order: h must be positive and strictly decreasing");
    sx += std::log(h_e[i][0]);
    sy += std::log(h_e[i][1]);
  }
  const double k = static_cast<double>(h_e.size());
  const double mx = sx / k, my = sy / k;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : h_e) {
    const double dx = std::log(p[0]) - mx;
    sxy += dx * (std::log(p[1]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double stokes_cavity_error(int n) {
  const GridSpec g = GridSpec::cube(2, n);
  const double p3 = kPi * kPi * kPi;
  auto u_ex = [](double x, double y) { return kPi * std::pow(std::sin(kPi * x), 2) * std::sin(2 * kPi * y); };
  auto v_ex = [](double x, double y) { return -kPi * std::sin(2 * kPi * x) * std::pow(std::sin(kPi * y), 2); };
  auto fx = [&](double x, double y) { return -2 * p3 * std::sin(2 * kPi * y) * (2 * std::cos(2 * kPi * x) - 1); };
  auto fy = [&](double x, double y) { return 2 * p3 * std::sin(2 * kPi * x) * (2 * std::cos(2 * kPi * y) - 1); };

  VectorField force(g), exact(g);
  for (int a = 0; a < 2; ++a) {
    const Extents& fe = g.face_extents(a);
    for (int i = 0; i < fe.n[0]; ++i)
      for (int j = 0; j < fe.n[1]; ++j) {
        const double x = a == 0 ? g.face(0, i) : g.centre(0, i);
        const double y = a == 1 ? g.face(1, j) : g.centre(1, j);
        force[a][fe.index(i, j, 0)] = a == 0 ? fx(x, y) : fy(x, y);
        exact[a][fe.index(i, j, 0)] = a == 0 ? u_ex(x, y) : v_ex(x, y);
      }
  }
  StokesOptions opt;
  opt.viscous = ViscousMode::implicit_be;
  opt.tol_implicit = 1e-14;
  opt.tol_proj = 1e-12;
  const double dt = 1.0;
  VectorField u(g);
  ScalarField p(g);
  for (int it = 0; it < 500; ++it) {
    StokesResult r = stokes_step(u, force, dt, opt, &p);
    double change = 0.0;
    for (int a = 0; a < 2; ++a)
      for (std::size_t f = 0; f < u[a].size(); ++f) change = std::max(change, std::abs(r.u[a][f] - u[a][f]));
    u = std::move(r.u);
    p = std::move(r.p);
    if (change < 1e-9) break;
  }
  double err = 0.0;
  for (int a = 0; a < 2; ++a)
    for (std::size_t f = 0; f < u[a].size(); ++f) err = std::max(err, std::abs(u[a][f] - exact[a][f]));
  return err;
}

}  // namespace fluxlim
