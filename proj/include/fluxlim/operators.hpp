#pragma once

#include <span>

#include "fluxlim/grid.hpp"
#include "fluxlim/sensitivity.hpp"

namespace fluxlim {

// Finite-volume operators on the cell-centred / face-staggered grid. Scalar
// fields carry zero normal flux on every box face: boundary-normal face
// gradients and fluxes are identically zero.

/// Second-order (2*dim+1)-point Laplacian with reflected ghosts. Equals
/// div_face_to_cc(grad_cc_to_face(f)) bit for bit.
ScalarField laplacian_neumann(const ScalarField& f);

/// Matrix-free form of laplacian_neumann for solvers: out = L in.
void apply_laplacian(const GridSpec& g, std::span<const double> in, std::span<double> out);

/// Normal difference quotient on interior faces, 0 on boundary faces.
FaceFlux grad_cc_to_face(const ScalarField& f);

/// Per-cell sum over axes of (F_out - F_in) / h.
ScalarField div_face_to_cc(const FaceField& F);

/// div(u f) with first-order upwind face values of f.
ScalarField advect_conservative(const ScalarField& f, const VectorField& u);

/// Upwind advective face flux u_f * f_upwind.
FaceFlux advective_flux(const ScalarField& f, const VectorField& u);

/// |grad c|^2 at each face: squared normal difference plus the squares of the
/// tangential derivatives averaged from the four adjacent tangential faces.
FaceField face_grad_squared(const ScalarField& c);

/// Chemotactic drift velocity S(|grad c|^2) dc/dn on each face.
FaceField chemo_velocity(const ScalarField& c, const FluxLimiter& lim);

/// Face flux n_upwind * S(|grad c|^2) dc/dn, upwinded on the drift sign.
/// Throws Error("positivity violated") if n < -kTolPos anywhere.
FaceFlux chemo_flux(const ScalarField& n, const ScalarField& c, const FluxLimiter& lim);

/// div(n S(|grad c|^2) grad c).
ScalarField chemo_flux_div(const ScalarField& n, const ScalarField& c, const FluxLimiter& lim);

/// Sum over faces of F * G weighted by the cell volume (face inner product).
double face_inner(const FaceField& F, const FaceField& G);

}  // namespace fluxlim
