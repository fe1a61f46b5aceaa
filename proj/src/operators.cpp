#include "fluxlim/operators.hpp"

#include <array>

#include "fluxlim/error.hpp"
#include "fluxlim/parallel.hpp"

namespace fluxlim {

namespace {

// Visits every face normal to `axis` as fn(face_index, axis_coord, right_cell_index).
// The left cell is right_cell_index - cell_stride[axis]; for axis_coord == N the
// right cell index is one-past and must not be dereferenced.
template <class Fn>
void for_each_face(const GridSpec& g, int axis, Fn&& fn) {
  const Extents& fe = g.face_extents(axis);
  const Extents& ce = g.cell_extents();
  for (int i = 0; i < fe.n[0]; ++i)
    for (int j = 0; j < fe.n[1]; ++j)
      for (int k = 0; k < fe.n[2]; ++k) {
        const int ia = axis == 0 ? i : (axis == 1 ? j : k);
        fn(fe.index(i, j, k), ia, ce.index(i, j, k));
      }
}

}  // namespace

void apply_laplacian(const GridSpec& g, std::span<const double> in, std::span<double> out) {
  const Extents& e = g.cell_extents();
  const int dim = g.dim();
  std::array<double, 3> inv_h{};
  for (int a = 0; a < dim; ++a) inv_h[a] = 1.0 / g.h(a);
  const std::size_t plane = e.stride[0];
  parallel_for(static_cast<std::size_t>(e.n[0]), [&](std::size_t i_lo, std::size_t i_hi) {
    for (int i = static_cast<int>(i_lo); i < static_cast<int>(i_hi); ++i)
      for (int j = 0; j < e.n[1]; ++j)
        for (int k = 0; k < e.n[2]; ++k) {
          const std::array<int, 3> ix{i, j, k};
          const std::size_t c = i * plane + j * e.stride[1] + k;
          double acc = 0.0;
          for (int a = 0; a < dim; ++a) {
            const std::size_t s = e.stride[a];
            const double fr = ix[a] + 1 < e.n[a] ? (in[c + s] - in[c]) * inv_h[a] : 0.0;
            const double fl = ix[a] > 0 ? (in[c] - in[c - s]) * inv_h[a] : 0.0;
            acc += (fr - fl) * inv_h[a];
          }
          out[c] = acc;
        }
  });
}

ScalarField laplacian_neumann(const ScalarField& f) {
  ScalarField out(f.grid);
  apply_laplacian(f.grid, f.values, out.values);
  return out;
}

FaceFlux grad_cc_to_face(const ScalarField& f) {
  const GridSpec& g = f.grid;
  FaceFlux G(g);
  for (int a = 0; a < g.dim(); ++a) {
    const double inv_h = 1.0 / g.h(a);
    const std::size_t s = g.cell_extents().stride[a];
    const int n = g.cells(a);
    auto& Ga = G[a];
    for_each_face(g, a, [&](std::size_t fi, int ia, std::size_t cr) {
      Ga[fi] = (ia == 0 || ia == n) ? 0.0 : (f.values[cr] - f.values[cr - s]) * inv_h;
    });
  }
  return G;
}

ScalarField div_face_to_cc(const FaceField& F) {
  const GridSpec& g = F.grid;
  ScalarField out(g);
  const Extents& e = g.cell_extents();
  const int dim = g.dim();
  std::array<double, 3> inv_h{};
  for (int a = 0; a < dim; ++a) inv_h[a] = 1.0 / g.h(a);
  for (int i = 0; i < e.n[0]; ++i)
    for (int j = 0; j < e.n[1]; ++j)
      for (int k = 0; k < e.n[2]; ++k) {
        double acc = 0.0;
        for (int a = 0; a < dim; ++a) {
          const Extents& fe = g.face_extents(a);
          const std::size_t fl = fe.index(i, j, k);
          acc += (F[a][fl + fe.stride[a]] - F[a][fl]) * inv_h[a];
        }
        out.values[e.index(i, j, k)] = acc;
      }
  return out;
}

FaceFlux advective_flux(const ScalarField& f, const VectorField& u) {
  const GridSpec& g = f.grid;
  FaceFlux F(g);
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t s = g.cell_extents().stride[a];
    const int n = g.cells(a);
    const auto& ua = u[a];
    auto& Fa = F[a];
    for_each_face(g, a, [&](std::size_t fi, int ia, std::size_t cr) {
      if (ia == 0 || ia == n) {
        Fa[fi] = 0.0;
        return;
      }
      const double v = ua[fi];
      Fa[fi] = v * (v > 0.0 ? f.values[cr - s] : f.values[cr]);
    });
  }
  return F;
}

ScalarField advect_conservative(const ScalarField& f, const VectorField& u) {
  return div_face_to_cc(advective_flux(f, u));
}

FaceField face_grad_squared(const ScalarField& c) {
  const GridSpec& g = c.grid;
  const FaceFlux G = grad_cc_to_face(c);
  FaceField out(g);
  for (int a = 0; a < g.dim(); ++a) {
    const int n = g.cells(a);
    const Extents& fe = g.face_extents(a);
    auto& Oa = out[a];
    for (int i = 0; i < fe.n[0]; ++i)
      for (int j = 0; j < fe.n[1]; ++j)
        for (int k = 0; k < fe.n[2]; ++k) {
          const std::array<int, 3> ix{i, j, k};
          const std::size_t fi = fe.index(i, j, k);
          if (ix[a] == 0 || ix[a] == n) {
            Oa[fi] = 0.0;
            continue;
          }
          const double gn = G[a][fi];
          double sum = gn * gn;
          for (int b = 0; b < g.dim(); ++b) {
            if (b == a) continue;
            const Extents& be = g.face_extents(b);
            // Right cell shares coordinates ix; left cell is ix - e_a.
            std::array<int, 3> left = ix;
            left[a] -= 1;
            const std::size_t r_lo = be.index(ix[0], ix[1], ix[2]);
            const std::size_t l_lo = be.index(left[0], left[1], left[2]);
            const double gt =
                0.25 * (G[b][r_lo] + G[b][r_lo + be.stride[b]] + G[b][l_lo] + G[b][l_lo + be.stride[b]]);
            sum += gt * gt;
          }
          Oa[fi] = sum;
        }
  }
  return out;
}

FaceField chemo_velocity(const ScalarField& c, const FluxLimiter& lim) {
  const GridSpec& g = c.grid;
  const FaceFlux G = grad_cc_to_face(c);
  FaceField V = face_grad_squared(c);
  for (int a = 0; a < g.dim(); ++a) {
    auto& Va = V[a];
    const auto& Ga = G[a];
    for (std::size_t fi = 0; fi < Va.size(); ++fi) Va[fi] = Ga[fi] == 0.0 ? 0.0 : lim.eval(Va[fi]) * Ga[fi];
  }
  return V;
}

FaceFlux chemo_flux(const ScalarField& n, const ScalarField& c, const FluxLimiter& lim) {
  for (double x : n.values)
    if (x < -kTolPos) throw Error("positivity violated");
  const GridSpec& g = n.grid;
  const FaceField V = chemo_velocity(c, lim);
  FaceFlux F(g);
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t s = g.cell_extents().stride[a];
    const int nc = g.cells(a);
    const auto& Va = V[a];
    auto& Fa = F[a];
    for_each_face(g, a, [&](std::size_t fi, int ia, std::size_t cr) {
      if (ia == 0 || ia == nc) {
        Fa[fi] = 0.0;
        return;
      }
      const double v = Va[fi];
      Fa[fi] = v * (v > 0.0 ? n.values[cr - s] : n.values[cr]);
    });
  }
  return F;
}

ScalarField chemo_flux_div(const ScalarField& n, const ScalarField& c, const FluxLimiter& lim) {
  return div_face_to_cc(chemo_flux(n, c, lim));
}

double face_inner(const FaceField& F, const FaceField& G) {
  double s = 0.0;
  for (int a = 0; a < F.grid.dim(); ++a) {
    const auto& Fa = F[a];
    const auto& Ga = G[a];
    s += pairwise_reduce(0, Fa.size(), [&](std::size_t i) { return Fa[i] * Ga[i]; });
  }
  return F.grid.cell_volume() * s;
}

}  // namespace fluxlim
