#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fluxlim {

/// Cell-count/stride description of a 3-index row-major array. Axes beyond
/// the grid dimension have extent 1.
struct Extents {
  std::array<int, 3> n{1, 1, 1};
  std::array<std::size_t, 3> stride{0, 0, 1};

  static Extents of(std::array<int, 3> n);
  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const { return i * stride[0] + j * stride[1] + k * stride[2]; }
};

/// Uniform axis-aligned box [0,L_0] x ... discretised into N_0 x ... cells.
class GridSpec {
 public:
  GridSpec() = default;

  /// Throws Error when N_i < 4, L_i <= 0, or dim is not 1, 2 or 3.
  static GridSpec make(std::span<const int> cells, std::span<const double> lengths);
  static GridSpec cube(int dim, int n, double length = 1.0);

  int dim() const { return dim_; }
  int cells(int axis) const { return cells_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double h(int axis) const { return h_[axis]; }
  double h_min() const;
  /// Sum over active axes of 1/h_a^2.
  double inv_h2_sum() const;

  std::size_t size() const { return cell_ext_.size(); }
  double cell_volume() const { return cell_volume_; }
  double volume() const;

  const Extents& cell_extents() const { return cell_ext_; }
  /// Faces normal to `axis`: N_axis + 1 along that axis.
  const Extents& face_extents(int axis) const { return face_ext_[axis]; }

  /// Cell-centre coordinate along `axis`.
  double centre(int axis, int idx) const { return (idx + 0.5) * h_[axis]; }
  /// Coordinate of face `idx` (0..N) along `axis`.
  double face(int axis, int idx) const { return idx * h_[axis]; }

  bool operator==(const GridSpec& o) const {
    return dim_ == o.dim_ && cells_ == o.cells_ && lengths_ == o.lengths_;
  }

 private:
  int dim_ = 0;
  std::array<int, 3> cells_{1, 1, 1};
  std::array<double, 3> lengths_{1.0, 1.0, 1.0};
  std::array<double, 3> h_{1.0, 1.0, 1.0};
  double cell_volume_ = 1.0;
  Extents cell_ext_;
  std::array<Extents, 3> face_ext_;
};

using Point = std::array<double, 3>;

/// Cell-centred samples with zero-flux (Neumann) boundary behaviour.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  /// Samples f at cell centres (unused coordinates are 0).
  static ScalarField sample(const GridSpec& g, const std::function<double(const Point&)>& f);

  double& operator()(int i, int j = 0, int k = 0) { return values[grid.cell_extents().index(i, j, k)]; }
  double operator()(int i, int j = 0, int k = 0) const { return values[grid.cell_extents().index(i, j, k)]; }
  std::size_t size() const { return values.size(); }
};

/// Face-staggered (MAC) storage: component a lives on faces normal to axis a.
struct FaceField {
  GridSpec grid;
  std::array<std::vector<double>, 3> comp;

  FaceField() = default;
  explicit FaceField(const GridSpec& g);

  std::vector<double>& operator[](int a) { return comp[a]; }
  const std::vector<double>& operator[](int a) const { return comp[a]; }
};

/// Velocity with no-slip walls: boundary-normal face values are exactly zero.
struct VectorField : FaceField {
  using FaceField::FaceField;
};

/// Face fluxes for scalar transport; boundary-normal faces carry zero flux.
struct FaceFlux : FaceField {
  using FaceField::FaceField;
};

/// The solution (n, c, m, u, P) at time t.
struct StateSnapshot {
  ScalarField n, c, m;
  VectorField u;
  ScalarField p;
  double t = 0.0;

  static StateSnapshot zeros(const GridSpec& g);
  const GridSpec& grid() const { return n.grid; }
};

/// Roundoff allowance below zero for n, c, m.
inline constexpr double kTolPos = 1e-12;

// Reductions. All sums are pairwise over the flat array order so results do
// not depend on how kernels were scheduled.

inline constexpr std::size_t kPairwiseBlock = 128;

/// Pairwise (tree) sum of term(i) for i in [lo, hi).
template <class Term>
double pairwise_reduce(std::size_t lo, std::size_t hi, const Term& term) {
  if (hi - lo <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_reduce(lo, mid, term) + pairwise_reduce(mid, hi, term);
}

double pairwise_sum(std::span<const double> v);
double pairwise_sum(std::size_t n, const std::function<double(std::size_t)>& term);

/// Throws Error("non-finite field") on NaN/Inf.
void require_finite(std::span<const double> v);

/// Discrete integral over the box: cell volume times the sum of values.
double integrate(const ScalarField& f);

/// ((prod h) sum |f|^p)^(1/p); p = infinity gives max |f|. Throws for p < 1.
double lp_norm(const ScalarField& f, double p);

double max_value(const ScalarField& f);
double min_value(const ScalarField& f);

/// Max over faces of |normal face difference| / h (boundary faces count as 0).
double grad_linf(const ScalarField& f);

/// max(||f||_inf, grad_linf(f)).
double w1inf(const ScalarField& f);

/// Max |u| over all face components.
double face_linf(const FaceField& u);
/// sqrt(cell_volume * sum of squared face values).
double face_l2(const FaceField& u);

/// Discrete L2 inner product (cell volume weighted).
double inner(const ScalarField& a, const ScalarField& b);

/// a + s*b, elementwise.
ScalarField axpy(const ScalarField& a, double s, const ScalarField& b);
ScalarField shifted(const ScalarField& a, double s);

}  // namespace fluxlim
