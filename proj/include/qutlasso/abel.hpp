#pragma once

#include "qutlasso/types.hpp"

namespace qut {

struct AbelOperator {
  Matrix matrix;  // N x N, zero below the diagonal, positive on it
  Vector radii;   // midpoint grid r_i = (i - 1/2) r_max / N
  double r_max = 0.0;
};

/// Quadrature for the radial projection (Af)(x) = 2 int_x^rmax f(r) r /
/// sqrt(r^2 - x^2) dr on the shared midpoint grid x_i = r_i, with f held
/// constant on each cell [(i-1)h, ih]. The weight of cell [a, b] at x is the
/// exact integral 2(sqrt(b^2-x^2) - sqrt(a^2-x^2)) of the singular factor
/// over the cell clipped to [x, rmax], so the square-root singularity is
/// never evaluated. The strict lower triangle vanishes and the diagonal is
/// positive, so the matrix is nonsingular.
AbelOperator build_abel(int n, double r_max);

/// Orthonormal Haar synthesis matrix: column 0 is the scaling vector, later
/// columns are wavelets ordered coarse to fine.
Matrix haar_synthesis(int n);

// Fast pyramid transforms; W^T v and W c for the matrix above.
Vector haar_analysis_transform(const Vector& v);
Vector haar_synthesis_transform(const Vector& c);

/// Canonical eleven-jump piecewise-constant test profile sampled on the
/// midpoint grid. Jump locations are multiples of 1/512 of the domain
/// (snapped from the classical positions) so that at n = 512 the profile
/// has exactly 54 nonzero Haar coefficients.
Vector blocks_profile(int n, double r_max);

}  // namespace qut
