#include "gsx/graph.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <string>

namespace gsx {

void SamplingPlan::validate(int n) const {
  std::set<int> seen;
  for (int idx : indices) {
    require(idx >= 0 && idx < n, "SamplingPlan: index " + std::to_string(idx) + " out of range");
    require(seen.insert(idx).second, "SamplingPlan: duplicate index " + std::to_string(idx));
  }
  require(attention.size() == n, "SamplingPlan: attention length " +
                                     std::to_string(attention.size()) + " != n " +
                                     std::to_string(n));
  for (Eigen::Index i = 0; i < attention.size(); ++i) {
    require(attention(i) >= 0.0 && attention(i) <= 1.0,
            "SamplingPlan: attention entry outside [0,1]");
  }
}

Graph build_graph(int n, const std::vector<Edge>& edges) {
  require(n >= 0, "build_graph: negative vertex count");
  Graph g;
  g.n = n;
  g.adjacency = Matrix::Zero(n, n);
  for (const Edge& e : edges) {
    require(e.u >= 0 && e.u < n && e.v >= 0 && e.v < n,
            "build_graph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                ") out of range");
    require(e.u != e.v, "build_graph: self-loop at vertex " + std::to_string(e.u));
    require(e.weight > 0.0, "build_graph: non-positive weight on edge (" + std::to_string(e.u) +
                                "," + std::to_string(e.v) + ")");
    require(g.adjacency(e.u, e.v) == 0.0, "build_graph: duplicate edge (" + std::to_string(e.u) +
                                              "," + std::to_string(e.v) + ")");
    g.adjacency(e.u, e.v) = e.weight;
    g.adjacency(e.v, e.u) = e.weight;
  }
  return g;
}

void validate_graph(const Graph& g) {
  require(g.adjacency.rows() == g.n && g.adjacency.cols() == g.n,
          "Graph: adjacency shape does not match n");
  for (int i = 0; i < g.n; ++i) {
    require(g.adjacency(i, i) == 0.0, "Graph: nonzero diagonal at vertex " + std::to_string(i));
    for (int j = 0; j < g.n; ++j) {
      require(std::isfinite(g.adjacency(i, j)), "Graph: non-finite weight");
      require(g.adjacency(i, j) >= 0.0, "Graph: negative weight at (" + std::to_string(i) + "," +
                                            std::to_string(j) + ")");
      require(g.adjacency(i, j) == g.adjacency(j, i), "Graph: asymmetric adjacency");
    }
  }
}

Matrix normalize_adjacency(const Graph& g, NormalizeMode mode) {
  if (mode == NormalizeMode::kNone) return g.adjacency;
  const Vector degrees = g.adjacency.rowwise().sum();
  Matrix out = g.adjacency;
  if (mode == NormalizeMode::kSymmetric) {
    Vector inv_sqrt(g.n);
    for (int i = 0; i < g.n; ++i) inv_sqrt(i) = degrees(i) > 0.0 ? 1.0 / std::sqrt(degrees(i)) : 0.0;
    out = inv_sqrt.asDiagonal() * out * inv_sqrt.asDiagonal();
  } else {
    for (int i = 0; i < g.n; ++i) {
      if (degrees(i) > 0.0) out.row(i) /= degrees(i);
    }
  }
  return out;
}

Matrix laplacian(const Graph& g) {
  Matrix l = -g.adjacency;
  l.diagonal() = g.adjacency.rowwise().sum();
  return l;
}

std::vector<int> hop_distances(const Graph& g, int v) {
  require(v >= 0 && v < g.n, "hop_distances: vertex out of range");
  std::vector<int> dist(g.n, kUnreachable);
  dist[v] = 0;
  std::deque<int> frontier{v};
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int w = 0; w < g.n; ++w) {
      if (g.adjacency(u, w) > 0.0 && dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        frontier.push_back(w);
      }
    }
  }
  return dist;
}

Neighborhood neighborhood(const Graph& g, const SignalMatrix& signals, int v, int radius) {
  require(v >= 0 && v < g.n, "neighborhood: vertex out of range");
  require(radius >= 0, "neighborhood: negative radius");
  require(signals.rows() == g.n, "neighborhood: signal rows != vertex count");
  const std::vector<int> dist = hop_distances(g, v);
  Neighborhood nb;
  nb.anchor = v;
  for (int u = 0; u < g.n; ++u) {
    if (dist[u] <= radius) nb.members.push_back(u);
  }
  const int m = static_cast<int>(nb.members.size());
  nb.sub_adjacency.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      nb.sub_adjacency(i, j) = g.adjacency(nb.members[i], nb.members[j]);
    }
  }
  return nb;
}

Vector apply_sampling(const SamplingPlan& plan, const Vector& x) {
  require(plan.attention.size() == x.size(),
          "apply_sampling: signal length " + std::to_string(x.size()) +
              " != attention length " + std::to_string(plan.attention.size()));
  Vector y(plan.size());
  for (int i = 0; i < plan.size(); ++i) {
    const int idx = plan.indices[i];
    require(idx >= 0 && idx < x.size(), "apply_sampling: index out of range");
    y(i) = plan.attention(idx) * x(idx);
  }
  return y;
}

Matrix apply_filter(const FilterSpec& h, const Matrix& shift, const Matrix& x) {
  require(!h.coefficients.empty(), "apply_filter: empty coefficient list");
  require(shift.rows() == shift.cols(), "apply_filter: shift not square");
  require(shift.cols() == x.rows(), "apply_filter: shift is " + std::to_string(shift.rows()) +
                                        "x" + std::to_string(shift.cols()) + ", signal has " +
                                        std::to_string(x.rows()) + " rows");
  Matrix power = x;  // shift^0 x
  Matrix out = h.coefficients[0] * x;
  for (std::size_t l = 1; l < h.coefficients.size(); ++l) {
    power = shift * power;
    out += h.coefficients[l] * power;
  }
  return out;
}

Vector apply_filter(const FilterSpec& h, const Matrix& shift, const Vector& x) {
  return Vector(apply_filter(h, shift, Matrix(x)));
}

std::vector<Matrix> shift_powers(const Matrix& shift, int max_power) {
  require(shift.rows() == shift.cols(), "shift_powers: shift not square");
  std::vector<Matrix> pows;
  pows.reserve(max_power + 1);
  pows.push_back(Matrix::Identity(shift.rows(), shift.cols()));
  for (int r = 1; r <= max_power; ++r) pows.push_back(shift * pows.back());
  return pows;
}

}  // namespace gsx
