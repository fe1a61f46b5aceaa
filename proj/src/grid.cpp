#include "fluxlim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fluxlim/error.hpp"

namespace fluxlim {

Extents Extents::of(std::array<int, 3> n) {
  Extents e;
  e.n = n;
  e.stride[2] = 1;
  e.stride[1] = static_cast<std::size_t>(n[2]);
  e.stride[0] = static_cast<std::size_t>(n[1]) * n[2];
  return e;
}

GridSpec GridSpec::make(std::span<const int> cells, std::span<const double> lengths) {
  if (cells.size() < 1 || cells.size() > 3)
    throw Error("invalid grid: dim must be 1, 2 or 3");
  if (lengths.size() != cells.size())
    throw Error("invalid grid: cells and lengths differ in size");
  GridSpec g;
  g.dim_ = static_cast<int>(cells.size());
  for (int a = 0; a < g.dim_; ++a) {
    if (cells[a] < 4) {
      std::ostringstream os;
      os << "invalid grid: axis " << a << " has " << cells[a] << " cells (need >= 4)";
      throw Error(os.str());
    }
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
      std::ostringstream os;
      os << "invalid grid: axis " << a << " length must be positive";
      throw Error(os.str());
    }
    g.cells_[a] = cells[a];
    g.lengths_[a] = lengths[a];
    g.h_[a] = lengths[a] / cells[a];
  }
  g.cell_volume_ = 1.0;
  for (int a = 0; a < g.dim_; ++a) g.cell_volume_ *= g.h_[a];
  g.cell_ext_ = Extents::of(g.cells_);
  for (int a = 0; a < 3; ++a) {
    auto n = g.cells_;
    if (a < g.dim_) n[a] += 1;
    g.face_ext_[a] = Extents::of(n);
  }
  return g;
}

GridSpec GridSpec::cube(int dim, int n, double length) {
  std::vector<int> cells(dim, n);
  std::vector<double> lengths(dim, length);
  return make(cells, lengths);
}

double GridSpec::h_min() const {
  double h = h_[0];
  for (int a = 1; a < dim_; ++a) h = std::min(h, h_[a]);
  return h;
}

double GridSpec::inv_h2_sum() const {
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) s += 1.0 / (h_[a] * h_[a]);
  return s;
}

double GridSpec::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= lengths_[a];
  return v;
}

ScalarField ScalarField::sample(const GridSpec& g, const std::function<double(const Point&)>& f) {
  ScalarField out(g);
  const auto& e = g.cell_extents();
  for (int i = 0; i < e.n[0]; ++i)
    for (int j = 0; j < e.n[1]; ++j)
      for (int k = 0; k < e.n[2]; ++k) {
        Point x{g.centre(0, i), g.dim() > 1 ? g.centre(1, j) : 0.0, g.dim() > 2 ? g.centre(2, k) : 0.0};
        out.values[e.index(i, j, k)] = f(x);
      }
  return out;
}

FaceField::FaceField(const GridSpec& g) : grid(g) {
  for (int a = 0; a < g.dim(); ++a) comp[a].assign(g.face_extents(a).size(), 0.0);
}

StateSnapshot StateSnapshot::zeros(const GridSpec& g) {
  StateSnapshot s;
  s.n = ScalarField(g);
  s.c = ScalarField(g);
  s.m = ScalarField(g);
  s.u = VectorField(g);
  s.p = ScalarField(g);
  return s;
}

double pairwise_sum(std::span<const double> v) {
  return pairwise_reduce(0, v.size(), [&](std::size_t i) { return v[i]; });
}

double pairwise_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  return pairwise_reduce(0, n, term);
}

void require_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error("non-finite field");
}

double integrate(const ScalarField& f) {
  require_finite(f.values);
  return f.grid.cell_volume() * pairwise_sum(f.values);
}

double lp_norm(const ScalarField& f, double p) {
  if (!(p >= 1.0)) throw Error("invalid exponent");
  require_finite(f.values);
  double mx = 0.0;
  for (double x : f.values) mx = std::max(mx, std::abs(x));
  if (std::isinf(p) || mx == 0.0) return mx;
  // Scale by the max so large p cannot overflow.
  const double s = pairwise_reduce(0, f.size(), [&](std::size_t i) { return std::pow(std::abs(f.values[i]) / mx, p); });
  return mx * std::pow(f.grid.cell_volume() * s, 1.0 / p);
}

double max_value(const ScalarField& f) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : f.values) mx = std::max(mx, x);
  return mx;
}

double min_value(const ScalarField& f) {
  double mn = std::numeric_limits<double>::infinity();
  for (double x : f.values) mn = std::min(mn, x);
  return mn;
}

double grad_linf(const ScalarField& f) {
  require_finite(f.values);
  const GridSpec& g = f.grid;
  const auto& e = g.cell_extents();
  double mx = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t s = e.stride[a];
    const double inv_h = 1.0 / g.h(a);
    for (int i = 0; i < e.n[0]; ++i)
      for (int j = 0; j < e.n[1]; ++j)
        for (int k = 0; k < e.n[2]; ++k) {
          const int ia = a == 0 ? i : (a == 1 ? j : k);
          if (ia == 0) continue;
          const std::size_t c = e.index(i, j, k);
          mx = std::max(mx, std::abs(f.values[c] - f.values[c - s]) * inv_h);
        }
  }
  return mx;
}

double w1inf(const ScalarField& f) { return std::max(lp_norm(f, std::numeric_limits<double>::infinity()), grad_linf(f)); }

double face_linf(const FaceField& u) {
  double mx = 0.0;
  for (int a = 0; a < u.grid.dim(); ++a)
    for (double x : u.comp[a]) {
      if (!std::isfinite(x)) throw Error("non-finite field");
      mx = std::max(mx, std::abs(x));
    }
  return mx;
}

double face_l2(const FaceField& u) {
  double s = 0.0;
  for (int a = 0; a < u.grid.dim(); ++a) {
    const auto& v = u.comp[a];
    s += pairwise_reduce(0, v.size(), [&](std::size_t i) { return v[i] * v[i]; });
  }
  return std::sqrt(u.grid.cell_volume() * s);
}

double inner(const ScalarField& a, const ScalarField& b) {
  return a.grid.cell_volume() * pairwise_reduce(0, a.size(), [&](std::size_t i) { return a.values[i] * b.values[i]; });
}

ScalarField axpy(const ScalarField& a, double s, const ScalarField& b) {
  ScalarField out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] + s * b.values[i];
  return out;
}

ScalarField shifted(const ScalarField& a, double s) {
  ScalarField out = a;
  for (double& x : out.values) x += s;
  return out;
}

}  // namespace fluxlim
