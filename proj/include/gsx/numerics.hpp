#pragma once

#include "gsx/types.hpp"

namespace gsx {

/// Result of a symmetric eigendecomposition: eigenvalues ascending,
/// eigenvector columns orthonormal, each column's first non-negligible
/// component made positive so downstream selections are reproducible.
struct EigenDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Decomposes a symmetric matrix. Throws DataError if the input is not
/// square or deviates from symmetry by more than 1e-10.
EigenDecomposition sym_eigen(const Matrix& m);

/// Solves a x = b for symmetric positive-definite a via Cholesky.
/// Throws NumericError naming the offending pivot if a is singular or
/// indefinite.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Largest absolute eigenvalue of a symmetric matrix.
double spectral_norm(const Matrix& m);

/// Shared symmetry check (tolerance on the maximum absolute asymmetry).
bool is_symmetric(const Matrix& m, double tol = 1e-10);

}  // namespace gsx
