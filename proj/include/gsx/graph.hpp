#pragma once

#include <limits>
#include <vector>

#include "gsx/types.hpp"

namespace gsx {

/// Undirected weighted graph on vertices 0..n-1. The adjacency matrix doubles
/// as the graph shift operator; it is kept symmetric with a zero diagonal and
/// non-negative weights.
struct Graph {
  int n = 0;
  Matrix adjacency;
};

/// N x L matrix of graph signals: column i is one signal, row v collects the
/// coefficients supported at vertex v.
using SignalMatrix = Matrix;

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

/// Ordered selection of vertices (the sampling operator) plus the per-vertex
/// attention weights multiplied into a signal before selection.
struct SamplingPlan {
  std::vector<int> indices;
  Vector attention;

  int size() const { return static_cast<int>(indices.size()); }
  void validate(int n) const;
};

/// Polynomial graph filter h(S) = sum_l coefficients[l] * S^l.
struct FilterSpec {
  std::vector<double> coefficients;
};

/// R-hop neighborhood of an anchor vertex: members sorted ascending and the
/// principal submatrix of the adjacency over them.
struct Neighborhood {
  int anchor = 0;
  std::vector<int> members;
  Matrix sub_adjacency;
};

enum class NormalizeMode { kNone, kSymmetric, kRowStochastic };

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

Graph build_graph(int n, const std::vector<Edge>& edges);

/// Checks the Graph invariants (symmetry, non-negative weights, zero
/// diagonal); throws DataError naming the first violation.
void validate_graph(const Graph& g);

/// kSymmetric: D^{-1/2} A D^{-1/2}; kRowStochastic: D^{-1} A. Rows and
/// columns of isolated vertices stay zero.
Matrix normalize_adjacency(const Graph& g, NormalizeMode mode);

/// Combinatorial Laplacian D - A.
Matrix laplacian(const Graph& g);

/// Unweighted hop counts from v over edges with weight > 0; kUnreachable for
/// vertices in other components.
std::vector<int> hop_distances(const Graph& g, int v);

Neighborhood neighborhood(const Graph& g, const SignalMatrix& signals, int v, int radius);

/// y_i = attention[indices_i] * x[indices_i].
Vector apply_sampling(const SamplingPlan& plan, const Vector& x);

/// Applies sum_l h_l shift^l x by iterated multiplication.
Vector apply_filter(const FilterSpec& h, const Matrix& shift, const Vector& x);
Matrix apply_filter(const FilterSpec& h, const Matrix& shift, const Matrix& x);

/// shift^0 .. shift^max_power, computed once and reused by samplers,
/// embeddings and unrolled layers.
std::vector<Matrix> shift_powers(const Matrix& shift, int max_power);

}  // namespace gsx
