#include "fluxlim/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace fluxlim {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  double* p = nullptr;
  explicit FftwBuffer(std::size_t n) : p(static_cast<double*>(fftw_malloc(sizeof(double) * std::max<std::size_t>(n, 1)))) {}
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

struct SpectralInverse::Impl {
  GridSpec grid;
  int axis = -1;                 // -1: cell-centred scalar
  std::array<int, 3> n{1, 1, 1}; // transform extents (interior unknowns)
  std::size_t count = 1;
  std::vector<double> eig;       // eigenvalues of -L, one per mode
  double norm = 1.0;
  fftw_plan forward = nullptr, backward = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SpectralInverse::SpectralInverse(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
SpectralInverse::~SpectralInverse() = default;

namespace {

std::unique_ptr<SpectralInverse::Impl> build(const GridSpec& g, int axis) {
  auto im = std::make_unique<SpectralInverse::Impl>();
  im->grid = g;
  im->axis = axis;
  const int dim = g.dim();
  std::array<int, 3> dims{};
  std::array<fftw_r2r_kind, 3> fwd{}, bwd{};
  // Per-axis 1D eigenvalues of -d2/dx2: (4/h^2) sin^2(pi k / (2 N)), with
  // k = index for DCT-II and index + 1 for both sine transforms.
  std::array<std::vector<double>, 3> lam;
  for (int a = 0; a < dim; ++a) {
    const int N = g.cells(a);
    const double s = 4.0 / (g.h(a) * g.h(a));
    int len = N, shift = 0;
    if (axis < 0) {
      fwd[a] = FFTW_REDFT10;
      bwd[a] = FFTW_REDFT01;
    } else if (a == axis) {
      len = N - 1;
      shift = 1;
      fwd[a] = FFTW_RODFT00;
      bwd[a] = FFTW_RODFT00;
    } else {
      shift = 1;
      fwd[a] = FFTW_RODFT10;
      bwd[a] = FFTW_RODFT01;
    }
    dims[a] = len;
    im->n[a] = len;
    im->norm *= 2.0 * N;
    lam[a].resize(len);
    for (int k = 0; k < len; ++k) {
      const double sn = std::sin(std::numbers::pi * (k + shift) / (2.0 * N));
      lam[a][k] = s * sn * sn;
    }
  }
  for (int a = dim; a < 3; ++a) lam[a] = {0.0};
  im->count = static_cast<std::size_t>(im->n[0]) * im->n[1] * im->n[2];
  im->eig.resize(im->count);
  std::size_t idx = 0;
  for (int i = 0; i < im->n[0]; ++i)
    for (int j = 0; j < im->n[1]; ++j)
      for (int k = 0; k < im->n[2]; ++k) im->eig[idx++] = lam[0][i] + lam[1][j] + lam[2][k];

  FftwBuffer in(im->count), out(im->count);
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_ESTIMATE: the plan does not depend on timing, so results are reproducible.
  im->forward = fftw_plan_r2r(dim, dims.data(), in.p, out.p, fwd.data(), FFTW_ESTIMATE);
  im->backward = fftw_plan_r2r(dim, dims.data(), out.p, in.p, bwd.data(), FFTW_ESTIMATE);
  return im;
}

using Key = std::tuple<int, std::array<int, 3>, std::array<double, 3>, int>;

std::shared_ptr<const SpectralInverse> cached(const GridSpec& g, int axis,
                                              std::shared_ptr<const SpectralInverse> (*make)(const GridSpec&, int)) {
  static std::mutex m;
  static std::map<Key, std::shared_ptr<const SpectralInverse>> cache;
  const Key key{g.dim(), {g.cells(0), g.cells(1), g.cells(2)}, {g.length(0), g.length(1), g.length(2)}, axis};
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto s = make(g, axis);
  cache.emplace(key, s);
  return s;
}

}  // namespace

std::shared_ptr<const SpectralInverse> SpectralInverse::cell_neumann(const GridSpec& g) {
  return cached(g, -1, [](const GridSpec& gg, int ax) {
    return std::shared_ptr<const SpectralInverse>(new SpectralInverse(build(gg, ax)));
  });
}

std::shared_ptr<const SpectralInverse> SpectralInverse::face(const GridSpec& g, int axis) {
  return cached(g, axis, [](const GridSpec& gg, int ax) {
    return std::shared_ptr<const SpectralInverse>(new SpectralInverse(build(gg, ax)));
  });
}

void SpectralInverse::apply(double sigma, double beta, std::span<const double> b, std::span<double> x) const {
  const Impl& im = *impl_;
  FftwBuffer in(im.count), out(im.count);
  // Gather the interior unknowns into a dense block.
  const Extents& src = im.axis < 0 ? im.grid.cell_extents() : im.grid.face_extents(im.axis);
  const int off0 = im.axis == 0, off1 = im.axis == 1, off2 = im.axis == 2;
  std::size_t idx = 0;
  for (int i = 0; i < im.n[0]; ++i)
    for (int j = 0; j < im.n[1]; ++j)
      for (int k = 0; k < im.n[2]; ++k) in.p[idx++] = b[src.index(i + off0, j + off1, k + off2)];
  fftw_execute_r2r(im.forward, in.p, out.p);
  for (std::size_t q = 0; q < im.count; ++q) {
    const double d = sigma + beta * im.eig[q];
    out.p[q] = d != 0.0 ? out.p[q] / (d * im.norm) : 0.0;
  }
  fftw_execute_r2r(im.backward, out.p, in.p);
  if (im.axis >= 0)
    for (double& v : x) v = 0.0;
  idx = 0;
  for (int i = 0; i < im.n[0]; ++i)
    for (int j = 0; j < im.n[1]; ++j)
      for (int k = 0; k < im.n[2]; ++k) x[src.index(i + off0, j + off1, k + off2)] = in.p[idx++];
}

}  // namespace fluxlim
