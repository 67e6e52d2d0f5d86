#pragma once

#include <cstdint>

#include "gsx/graph.hpp"

namespace gsx {

/// M distinct uniform vertices in draw order; attention all ones.
SamplingPlan random_sample(int n, int m, std::uint64_t seed);

/// Bandlimited-space greedy: at each step add the vertex maximizing the
/// smallest singular value of the first-k Laplacian eigenvector rows
/// restricted to the selection. Ties go to the lowest vertex id.
SamplingPlan bls_sample(const Graph& g, int bandwidth, int m);

/// Same greedy given a precomputed n x k eigenvector basis (shared across
/// samplers in experiments).
SamplingPlan bls_sample_from_basis(const Matrix& basis, int m);

/// Spectral-proxy greedy: at each step take the minimizing eigenvector of
/// L^{2k} restricted to the unselected vertices and add the vertex with the
/// largest squared entry. Ties go to the lowest vertex id.
SamplingPlan spectral_proxy_sample(const Graph& g, int proxy_order, int m);

/// A^p by square-and-multiply on the dense matrix.
Matrix matrix_power(const Matrix& a, int p);

/// Eigenvector for the smallest eigenvalue of a symmetric PSD matrix; exact
/// decomposition for small sizes, shifted inverse iteration above that.
Vector smallest_eigenvector(const Matrix& m);

}  // namespace gsx
