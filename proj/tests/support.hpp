#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "fluxlim/grid.hpp"

namespace fluxlim::test {

inline ScalarField random_field(const GridSpec& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(g);
  for (double& x : f.values) x = d(rng);
  return f;
}

/// Random face field with zero boundary-normal faces.
inline VectorField random_faces(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorField u(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Extents& e = g.face_extents(a);
    for (int i = 0; i < e.n[0]; ++i)
      for (int j = 0; j < e.n[1]; ++j)
        for (int k = 0; k < e.n[2]; ++k) {
          const int idx[3] = {i, j, k};
          const bool wall = idx[a] == 0 || idx[a] == g.cells(a);
          u[a][e.index(i, j, k)] = wall ? 0.0 : d(rng);
        }
  }
  return u;
}

inline double rel_err(double a, double b, double scale) { return std::abs(a - b) / scale; }

/// Fresh per-test scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(FLUXLIM_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fluxlim::test
