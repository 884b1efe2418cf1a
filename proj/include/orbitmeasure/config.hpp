#pragma once

#include <cstddef>

namespace orbitmeasure {

/// Numerical thresholds used across the library. All defaults can be
/// overridden per call (and from the CLI through the --tol-* flags).
struct Tolerances {
  // linear algebra
  double symmetry = 1e-12;        // |G_ij - G_ji| for Gram forms
  double positive_definite = 1e-12;  // lambda_min > this * lambda_max
  double span_residual = 1e-10;   // coordinate resolution inside a space
  double orthogonal_fast_path = 1e-10;
  double clamp = 1e-12;           // roundoff band for negative Gram determinants
  double rank_deficiency = 1e-10; // Gram-Schmidt rejection threshold

  // finite differences
  double fd_step = 1e-5;
  bool richardson = true;

  // geometry
  double rank = 1e-8;             // singular value cut, relative to the largest
  double gap = 1e-8;              // regular-predicate proxy for Y_z
  double orthogonality = 1e-8;    // relative to the product of vector scales
  double gauge = 1e-5;
  double invariance = 1e-9;
  double bracket_closure = 1e-9;
};

/// Tensor-grid quadrature over the ordered chamber.
struct QuadratureOptions {
  std::size_t grid = 400;         // points per axis
  double gaussian_box = 8.0;      // |t| <= box for Gaussian-weighted charts
  double wishart_box = 60.0;      // 0 < t <= box for the SPD chart
  double tail_mass = 1e-8;        // accepted truncation loss
  double edge_band = 0.05;        // fraction of the box used to estimate the tail
};

}  // namespace orbitmeasure
