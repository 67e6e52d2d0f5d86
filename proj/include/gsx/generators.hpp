#pragma once

#include <cstdint>
#include <vector>

#include "gsx/graph.hpp"

namespace gsx {

/// Stochastic block model: block_sizes partition the vertices, probabilities
/// is the symmetric matrix of intra/inter-block edge probabilities.
struct SbmSpec {
  std::vector<int> block_sizes;
  Matrix probabilities;
  std::uint64_t seed = 0;
};

/// Unit-weight SBM draw; each unordered pair is connected independently with
/// its block-pair probability. Deterministic per seed.
Graph sbm(const SbmSpec& spec);

/// Block id per vertex for an SbmSpec (vertices numbered block by block).
std::vector<int> sbm_block_of(const SbmSpec& spec);

/// Random geometric graph: n uniform positions in the unit square, unit
/// weight edge iff Euclidean distance <= radius. Positions kept for plots.
struct GeometricGraph {
  Graph graph;
  Matrix positions;  // n x 2
};

GeometricGraph random_geometric(int n, double radius, std::uint64_t seed);

/// First k Laplacian eigenvectors (ascending eigenvalues, deterministic
/// signs) as an n x k signal matrix.
SignalMatrix bandlimited_signals(const Graph& g, int k);

/// Row v of the output is mask[v] times row v of the input.
SignalMatrix apply_boundary_mask(const SignalMatrix& signals, const Vector& mask);

/// A random line through the unit square; mask(v) = 1 on one side, 0 on the
/// other. Used to cut bandlimited signals into piecewise ones.
struct BoundaryLine {
  double nx = 0.0, ny = 0.0, offset = 0.0;  // nx*x + ny*y - offset >= 0 is the kept side

  double signed_distance(double x, double y) const { return nx * x + ny * y - offset; }
};

BoundaryLine random_boundary_line(std::uint64_t seed);
Vector boundary_mask(const BoundaryLine& line, const Matrix& positions);

}  // namespace gsx
