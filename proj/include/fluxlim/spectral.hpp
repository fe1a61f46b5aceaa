#pragma once

#include <memory>
#include <span>

#include "fluxlim/grid.hpp"

namespace fluxlim {

/// Exact inverse of sigma I - beta L for the grid's constant-coefficient
/// operators, by real-to-real trigonometric transforms (FFTW):
///   cell_neumann: the scalar Neumann Laplacian (DCT-II on every axis);
///   face(axis):   the no-slip vector Laplacian acting on component `axis`
///                 (DST-I along `axis`, DST-II across the walls).
/// Used as a CG preconditioner; CG then converges in one or two iterations.
class SpectralInverse {
 public:
  static std::shared_ptr<const SpectralInverse> cell_neumann(const GridSpec& g);
  static std::shared_ptr<const SpectralInverse> face(const GridSpec& g, int axis);

  /// x = (sigma I - beta L)^+ b. A zero eigenvalue (pure Neumann, sigma = 0)
  /// maps to 0, so the result is mean-zero. For faces, wall-normal entries
  /// of x are set to 0.
  void apply(double sigma, double beta, std::span<const double> b, std::span<double> x) const;

  ~SpectralInverse();
  SpectralInverse(const SpectralInverse&) = delete;
  SpectralInverse& operator=(const SpectralInverse&) = delete;

  struct Impl;

 private:
  explicit SpectralInverse(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace fluxlim
