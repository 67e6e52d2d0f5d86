#include "gsx/analytic_sampling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <numeric>

#include "gsx/numerics.hpp"
#include "gsx/rng.hpp"

namespace gsx {

SamplingPlan random_sample(int n, int m, std::uint64_t seed) {
  require(m >= 0 && m <= n, "random_sample: m " + std::to_string(m) + " exceeds n " +
                                std::to_string(n));
  Rng rng(seed);
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  SamplingPlan plan;
  plan.attention = Vector::Ones(n);
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[j]);
    plan.indices.push_back(pool[i]);
  }
  return plan;
}

namespace {

double smallest_singular_value(const Matrix& rows) {
  Eigen::JacobiSVD<Matrix> svd(rows);
  return svd.singularValues().minCoeff();
}

// Lowest index whose score is within a whisker of the maximum, so exact
// mathematical ties (e.g. the constant null vector of a Laplacian power)
// resolve by vertex id instead of rounding noise.
int argmax_lowest_id(const std::vector<double>& scores) {
  double best = -std::numeric_limits<double>::infinity();
  for (double s : scores) best = std::max(best, s);
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= best - tol) return static_cast<int>(i);
  }
  return 0;
}

}  // namespace

SamplingPlan bls_sample_from_basis(const Matrix& basis, int m) {
  const int n = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  require(k <= m, "bls_sample: bandwidth " + std::to_string(k) + " exceeds budget " +
                      std::to_string(m) + " (underdetermined bandlimited recovery)");
  require(m <= n, "bls_sample: budget exceeds vertex count");
  SamplingPlan plan;
  plan.attention = Vector::Ones(n);
  std::vector<bool> taken(n, false);
  Matrix selected_rows(m, k);
  for (int step = 0; step < m; ++step) {
    std::vector<int> candidates;
    std::vector<double> scores;
    for (int v = 0; v < n; ++v) {
      if (taken[v]) continue;
      selected_rows.row(step) = basis.row(v);
      candidates.push_back(v);
      scores.push_back(smallest_singular_value(selected_rows.topRows(step + 1)));
    }
    const int best = candidates[argmax_lowest_id(scores)];
    taken[best] = true;
    plan.indices.push_back(best);
    selected_rows.row(step) = basis.row(best);
  }
  return plan;
}

SamplingPlan bls_sample(const Graph& g, int bandwidth, int m) {
  require(bandwidth >= 1, "bls_sample: bandwidth must be positive");
  const EigenDecomposition d = sym_eigen(laplacian(g));
  return bls_sample_from_basis(d.eigenvectors.leftCols(bandwidth), m);
}

Matrix matrix_power(const Matrix& a, int p) {
  require(a.rows() == a.cols(), "matrix_power: matrix not square");
  require(p >= 0, "matrix_power: negative power");
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  Matrix base = a;
  int e = p;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

Vector smallest_eigenvector(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n <= 128) {
    return sym_eigen(m).eigenvectors.col(0);
  }
  // Shifted inverse iteration; the shift keeps the factorization positive
  // definite even when the smallest eigenvalue is exactly zero.
  const double shift = 1e-10 * (1.0 + m.diagonal().cwiseAbs().sum() / static_cast<double>(n));
  Eigen::LLT<Matrix> llt(m + shift * Matrix::Identity(n, n));
  if (llt.info() != Eigen::Success) {
    return sym_eigen(m).eigenvectors.col(0);
  }
  Vector x = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double rayleigh_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 500; ++it) {
    Vector y = llt.solve(x);
    x = y / y.norm();
    const double rayleigh = x.dot(m * x);
    if (std::abs(rayleigh - rayleigh_prev) <= 1e-13 * std::max(1.0, std::abs(rayleigh))) break;
    rayleigh_prev = rayleigh;
  }
  // Match the deterministic sign convention of sym_eigen.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(x(i)) > 1e-12) {
      if (x(i) < 0) x = -x;
      break;
    }
  }
  return x;
}

SamplingPlan spectral_proxy_sample(const Graph& g, int proxy_order, int m) {
  require(proxy_order >= 1, "spectral_proxy_sample: proxy order must be >= 1");
  require(m >= 0 && m <= g.n, "spectral_proxy_sample: budget exceeds vertex count");
  const Matrix proxy = matrix_power(laplacian(g), 2 * proxy_order);
  SamplingPlan plan;
  plan.attention = Vector::Ones(g.n);
  std::vector<int> complement(g.n);
  std::iota(complement.begin(), complement.end(), 0);
  for (int step = 0; step < m; ++step) {
    const int c = static_cast<int>(complement.size());
    Matrix sub(c, c);
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) sub(i, j) = proxy(complement[i], complement[j]);
    }
    const Vector psi = smallest_eigenvector(sub);
    std::vector<double> scores(c);
    for (int i = 0; i < c; ++i) scores[i] = psi(i) * psi(i);
    const int best_pos = argmax_lowest_id(scores);
    plan.indices.push_back(complement[best_pos]);
    complement.erase(complement.begin() + best_pos);
  }
  return plan;
}

}  // namespace gsx
