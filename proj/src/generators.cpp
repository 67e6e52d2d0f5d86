#include "gsx/generators.hpp"

#include <cmath>
#include <numeric>

#include "gsx/numerics.hpp"
#include "gsx/rng.hpp"

namespace gsx {

namespace {

void check_spec(const SbmSpec& spec) {
  const int b = static_cast<int>(spec.block_sizes.size());
  require(b > 0, "sbm: no blocks");
  for (int s : spec.block_sizes) require(s > 0, "sbm: non-positive block size");
  require(spec.probabilities.rows() == b && spec.probabilities.cols() == b,
          "sbm: probability matrix shape != block count");
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      const double p = spec.probabilities(i, j);
      require(p >= 0.0 && p <= 1.0, "sbm: probability outside [0,1]");
      require(p == spec.probabilities(j, i), "sbm: probability matrix not symmetric");
    }
  }
}

}  // namespace

std::vector<int> sbm_block_of(const SbmSpec& spec) {
  std::vector<int> block;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    block.insert(block.end(), spec.block_sizes[b], static_cast<int>(b));
  }
  return block;
}

Graph sbm(const SbmSpec& spec) {
  check_spec(spec);
  const std::vector<int> block = sbm_block_of(spec);
  const int n = static_cast<int>(block.size());
  Rng rng(spec.seed);
  Graph g;
  g.n = n;
  g.adjacency = Matrix::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < spec.probabilities(block[u], block[v])) {
        g.adjacency(u, v) = 1.0;
        g.adjacency(v, u) = 1.0;
      }
    }
  }
  return g;
}

GeometricGraph random_geometric(int n, double radius, std::uint64_t seed) {
  require(n >= 0, "random_geometric: negative vertex count");
  require(radius >= 0.0, "random_geometric: negative radius");
  Rng rng(seed);
  GeometricGraph out;
  out.positions.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    out.positions(i, 0) = rng.uniform();
    out.positions(i, 1) = rng.uniform();
  }
  out.graph.n = n;
  out.graph.adjacency = Matrix::Zero(n, n);
  const double r2 = radius * radius;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double dx = out.positions(u, 0) - out.positions(v, 0);
      const double dy = out.positions(u, 1) - out.positions(v, 1);
      if (dx * dx + dy * dy <= r2) {
        out.graph.adjacency(u, v) = 1.0;
        out.graph.adjacency(v, u) = 1.0;
      }
    }
  }
  return out;
}

SignalMatrix bandlimited_signals(const Graph& g, int k) {
  require(k >= 0 && k <= g.n, "bandlimited_signals: bandwidth " + std::to_string(k) +
                                  " exceeds vertex count " + std::to_string(g.n));
  const EigenDecomposition d = sym_eigen(laplacian(g));
  return d.eigenvectors.leftCols(k);
}

SignalMatrix apply_boundary_mask(const SignalMatrix& signals, const Vector& mask) {
  require(mask.size() == signals.rows(), "apply_boundary_mask: mask length " +
                                             std::to_string(mask.size()) + " != signal rows " +
                                             std::to_string(signals.rows()));
  return mask.asDiagonal() * signals;
}

BoundaryLine random_boundary_line(std::uint64_t seed) {
  Rng rng(seed);
  BoundaryLine line;
  const double angle = rng.uniform(0.0, 6.283185307179586476925286766559);
  line.nx = std::cos(angle);
  line.ny = std::sin(angle);
  // Pass through a point well inside the square so both sides are populated.
  const double px = rng.uniform(0.3, 0.7);
  const double py = rng.uniform(0.3, 0.7);
  line.offset = line.nx * px + line.ny * py;
  return line;
}

Vector boundary_mask(const BoundaryLine& line, const Matrix& positions) {
  require(positions.cols() == 2, "boundary_mask: positions must be n x 2");
  Vector mask(positions.rows());
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    mask(i) = line.signed_distance(positions(i, 0), positions(i, 1)) >= 0.0 ? 1.0 : 0.0;
  }
  return mask;
}

}  // namespace gsx
