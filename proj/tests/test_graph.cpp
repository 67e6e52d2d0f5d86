#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "gsx/graph.hpp"
#include "gsx/numerics.hpp"
#include "gsx/rng.hpp"

using namespace gsx;

namespace {

Graph path4() {
  return build_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
}

Graph triangle() {
  return build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
}

Graph random_weighted(int n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.push_back({u, v, rng.uniform(0.2, 2.0)});
    }
  }
  return build_graph(n, edges);
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  Graph out;
  out.n = g.n;
  out.adjacency = Matrix::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) out.adjacency(perm[i], perm[j]) = g.adjacency(i, j);
  }
  return out;
}

// Independent breadth-first layering used as the oracle for neighborhoods.
std::vector<int> bfs_oracle(const Graph& g, int source) {
  std::vector<int> dist(g.n, kUnreachable);
  std::vector<int> frontier{source};
  dist[source] = 0;
  int level = 0;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int u : frontier) {
      for (int w = 0; w < g.n; ++w) {
        if (g.adjacency(u, w) > 0.0 && dist[w] == kUnreachable) {
          dist[w] = level + 1;
          next.push_back(w);
        }
      }
    }
    frontier = next;
    ++level;
  }
  return dist;
}

}  // namespace

TEST_CASE("build_graph basics") {
  const Graph empty = build_graph(3, {});
  CHECK(empty.adjacency.isZero());
  const Graph pair = build_graph(2, {{0, 1, 1.0}});
  CHECK(pair.adjacency(0, 1) == 1.0);
  CHECK(pair.adjacency(1, 0) == 1.0);
  validate_graph(pair);
}

TEST_CASE("build_graph rejects bad edges") {
  CHECK_THROWS_AS(build_graph(3, {{0, 0, 1.0}}), DataError);
  CHECK_THROWS_AS(build_graph(3, {{0, 1, 1.0}, {1, 0, 2.0}}), DataError);
  CHECK_THROWS_AS(build_graph(3, {{0, 3, 1.0}}), DataError);
  CHECK_THROWS_AS(build_graph(3, {{0, 1, 0.0}}), DataError);
}

TEST_CASE("normalize_adjacency on K3 and with isolated vertices") {
  const Matrix sym = normalize_adjacency(triangle(), NormalizeMode::kSymmetric);
  CHECK(sym(0, 1) == doctest::Approx(0.5));
  CHECK(sym(1, 2) == doctest::Approx(0.5));

  const Graph with_isolated = build_graph(4, {{0, 1, 2.0}, {1, 2, 1.0}});
  const Matrix rs = normalize_adjacency(with_isolated, NormalizeMode::kRowStochastic);
  for (int i = 0; i < 3; ++i) CHECK(rs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rs.row(3).sum() == 0.0);
  CHECK(rs.allFinite());
  const Matrix sym2 = normalize_adjacency(with_isolated, NormalizeMode::kSymmetric);
  CHECK(sym2.allFinite());
  CHECK(sym2.row(3).isZero());
  CHECK(sym2.col(3).isZero());
}

TEST_CASE("laplacian definition and null space") {
  const Graph p = build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Matrix l = laplacian(p);
  CHECK(l(0, 0) == 1.0);
  CHECK(l(1, 1) == 2.0);
  CHECK(l(2, 2) == 1.0);
  CHECK(l(0, 1) == -1.0);
  CHECK((l * Vector::Ones(3)).norm() <= 1e-12);
}

TEST_CASE("K3 Laplacian eigenvalues are 0, 3, 3") {
  const EigenDecomposition d = sym_eigen(laplacian(triangle()));
  CHECK(d.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(d.eigenvalues(1) == doctest::Approx(3.0));
  CHECK(d.eigenvalues(2) == doctest::Approx(3.0));
}

TEST_CASE("hop distances") {
  const Graph p = build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto d = hop_distances(p, 0);
  CHECK(d[0] == 0);
  CHECK(d[2] == 2);
  const Graph two = build_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK(hop_distances(two, 0)[2] == kUnreachable);
}

TEST_CASE("neighborhood construction") {
  const SignalMatrix s = Matrix::Zero(4, 1);
  const Graph p = path4();
  const Neighborhood r0 = neighborhood(p, s, 2, 0);
  CHECK(r0.members == std::vector<int>{2});
  CHECK(r0.sub_adjacency.rows() == 1);

  const Graph star = build_graph(5, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {0, 4, 1.0}});
  const Neighborhood all = neighborhood(star, Matrix::Zero(5, 1), 0, 1);
  CHECK(all.members.size() == 5);

  const Neighborhood nb = neighborhood(p, s, 1, 1);
  CHECK(nb.members == std::vector<int>{0, 1, 2});
  CHECK(nb.sub_adjacency.rows() == 3);
  // against the independent BFS oracle
  const auto dist = bfs_oracle(p, 1);
  for (int v = 0; v < p.n; ++v) {
    const bool inside = std::find(nb.members.begin(), nb.members.end(), v) != nb.members.end();
    CHECK(inside == (dist[v] <= 1));
  }
}

TEST_CASE("neighborhood grows monotonically with the radius") {
  Rng rng(5);
  const Graph g = random_weighted(9, 0.3, rng);
  const SignalMatrix s = Matrix::Zero(9, 2);
  for (int v = 0; v < g.n; ++v) {
    std::size_t prev = 0;
    for (int r = 0; r <= 4; ++r) {
      const auto nb = neighborhood(g, s, v, r);
      CHECK(nb.members.size() >= prev);
      prev = nb.members.size();
    }
  }
}

TEST_CASE("apply_sampling") {
  SamplingPlan plan;
  plan.indices = {0, 1, 2};
  plan.attention = Vector::Ones(3);
  Vector x(3);
  x << 5, 6, 7;
  CHECK((apply_sampling(plan, x) - x).norm() == 0.0);

  plan.indices = {2, 0};
  const Vector y = apply_sampling(plan, x);
  CHECK(y(0) == 7.0);
  CHECK(y(1) == 5.0);

  plan.attention = Vector::Constant(3, 0.5);
  const Vector h = apply_sampling(plan, x);
  CHECK(h(0) == doctest::Approx(3.5));
  CHECK(h(1) == doctest::Approx(2.5));

  Vector wrong(2);
  CHECK_THROWS_AS(apply_sampling(plan, wrong), DataError);
}

TEST_CASE("apply_filter identity, Haar on constants, and the square oracle") {
  Rng rng(9);
  const Graph g = random_weighted(7, 0.5, rng);
  Vector x(7);
  for (int i = 0; i < 7; ++i) x(i) = rng.uniform(-1.0, 1.0);

  const Matrix row = normalize_adjacency(g, NormalizeMode::kRowStochastic);
  CHECK((apply_filter(FilterSpec{{1.0}}, row, x) - x).norm() <= 1e-14);

  // High-pass Haar: constants are in the null space of I - row-stochastic A.
  const Vector c = Vector::Constant(7, 3.0);
  CHECK(apply_filter(FilterSpec{{1.0, -1.0}}, row, c).norm() <= 1e-12);

  const Matrix sym = normalize_adjacency(g, NormalizeMode::kSymmetric);
  const Vector direct = sym * (sym * x);
  CHECK((apply_filter(FilterSpec{{0.0, 0.0, 1.0}}, sym, x) - direct).norm() <= 1e-12);
}

TEST_CASE("apply_filter is linear") {
  Rng rng(13);
  const Graph g = random_weighted(8, 0.4, rng);
  const Matrix sym = normalize_adjacency(g, NormalizeMode::kSymmetric);
  const FilterSpec h{{0.3, -0.7, 0.2, 0.5}};
  for (int t = 0; t < 10; ++t) {
    Vector x(8), y(8);
    for (int i = 0; i < 8; ++i) {
      x(i) = rng.uniform(-1.0, 1.0);
      y(i) = rng.uniform(-1.0, 1.0);
    }
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    const Vector lhs = apply_filter(h, sym, Vector(a * x + b * y));
    const Vector rhs = a * apply_filter(h, sym, x) + b * apply_filter(h, sym, y);
    CHECK((lhs - rhs).norm() <= 1e-10);
  }
}

TEST_CASE("relabeling commutes with laplacian, distances, neighborhoods and filtering") {
  Rng rng(21);
  const Graph g = random_weighted(8, 0.4, rng);
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  const Graph pg = permute_graph(g, perm);

  const Matrix l = laplacian(g);
  const Matrix pl = laplacian(pg);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(pl(perm[i], perm[j]) == doctest::Approx(l(i, j)));

  const auto d = hop_distances(g, 3);
  const auto pd = hop_distances(pg, perm[3]);
  for (int v = 0; v < 8; ++v) CHECK(pd[perm[v]] == d[v]);

  const SignalMatrix s = Matrix::Zero(8, 1);
  const auto nb = neighborhood(g, s, 3, 2);
  const auto pnb = neighborhood(pg, s, perm[3], 2);
  std::vector<int> mapped;
  for (int v : nb.members) mapped.push_back(perm[v]);
  std::sort(mapped.begin(), mapped.end());
  CHECK(pnb.members == mapped);

  Vector x(8);
  for (int i = 0; i < 8; ++i) x(i) = rng.uniform(-1.0, 1.0);
  Vector px(8);
  for (int i = 0; i < 8; ++i) px(perm[i]) = x(i);
  const FilterSpec h{{0.1, 0.8, -0.3}};
  const Vector fx = apply_filter(h, normalize_adjacency(g, NormalizeMode::kSymmetric), x);
  const Vector pfx = apply_filter(h, normalize_adjacency(pg, NormalizeMode::kSymmetric), px);
  for (int i = 0; i < 8; ++i) CHECK(pfx(perm[i]) == doctest::Approx(fx(i)).epsilon(1e-10));
}
