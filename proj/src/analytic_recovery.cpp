#include "gsx/analytic_recovery.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "gsx/numerics.hpp"

namespace gsx {

namespace {

Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

}  // namespace

Matrix RecoveryOperator::block_mm() const { return submatrix(h_full, measured, measured); }
Matrix RecoveryOperator::block_mu() const { return submatrix(h_full, measured, unmeasured); }

RecoveryOperator build_recovery_operator(const Graph& g, const FilterSpec& h,
                                         const SamplingPlan& plan, NormalizeMode shift_mode) {
  plan.validate(g.n);
  RecoveryOperator op;
  op.shift = normalize_adjacency(g, shift_mode);
  const Matrix filtered = apply_filter(h, op.shift, Matrix(Matrix::Identity(g.n, g.n)));
  op.h_full = filtered.transpose() * filtered;
  op.measured = plan.indices;
  std::vector<bool> taken(g.n, false);
  for (int idx : plan.indices) taken[idx] = true;
  for (int v = 0; v < g.n; ++v) {
    if (!taken[v]) op.unmeasured.push_back(v);
  }
  op.h_uu = submatrix(op.h_full, op.unmeasured, op.unmeasured);
  op.h_um = submatrix(op.h_full, op.unmeasured, op.measured);
  return op;
}

Vector divide_by_attention(const SamplingPlan& plan, const Vector& y,
                           std::vector<std::string>* warnings) {
  require(y.size() == plan.size(), "recover: measurement length " + std::to_string(y.size()) +
                                       " != plan size " + std::to_string(plan.size()));
  Vector x(y.size());
  bool clamped = false;
  for (int i = 0; i < plan.size(); ++i) {
    double a = plan.attention(plan.indices[i]);
    if (a < kAttentionClamp) {
      a = kAttentionClamp;
      clamped = true;
    }
    x(i) = y(i) / a;
  }
  if (clamped && warnings) {
    warnings->push_back("attention below " + std::to_string(kAttentionClamp) +
                        " clamped before division");
  }
  return x;
}

RecoveryResult recover_closed_form(const RecoveryOperator& op, const SamplingPlan& plan,
                                   const Vector& y) {
  RecoveryResult res;
  const Vector x_m = divide_by_attention(plan, y, &res.warnings);
  const int n = static_cast<int>(op.h_full.rows());
  res.signal = Vector::Zero(n);
  for (int i = 0; i < plan.size(); ++i) res.signal(op.measured[i]) = x_m(i);
  if (op.unmeasured.empty()) return res;

  const Vector rhs = -(op.h_um * x_m);
  Vector x_u;
  bool solved = false;
  Eigen::LLT<Matrix> llt(op.h_uu);
  if (llt.info() == Eigen::Success) {
    // A suspiciously small Cholesky pivot means the block may be singular
    // even though the factorization went through; confirm with the spectrum.
    const double min_pivot = Matrix(llt.matrixL()).diagonal().minCoeff();
    const double scale = std::sqrt(std::max(op.h_uu.diagonal().maxCoeff(), 1e-30));
    bool well_posed = min_pivot > 1e-5 * scale;
    if (!well_posed) {
      const EigenDecomposition d = sym_eigen(op.h_uu);
      well_posed = d.eigenvalues(0) > 1e-10;
    }
    if (well_posed) {
      x_u = llt.solve(rhs);
      solved = (op.h_uu * x_u - rhs).norm() <= 1e-6 * (1.0 + rhs.norm());
    }
  }
  if (!solved) {
    // Minimum-norm completion: invert only the well-separated spectrum and
    // leave null-space directions at zero.
    const EigenDecomposition d = sym_eigen(op.h_uu);
    Vector inv = Vector::Zero(d.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
      if (d.eigenvalues(i) > 1e-10) inv(i) = 1.0 / d.eigenvalues(i);
    }
    x_u = d.eigenvectors * (inv.asDiagonal() * (d.eigenvectors.transpose() * rhs));
    res.warnings.push_back("H_UU singular: used minimum-norm pseudo-solve; "
                           "consider a different filter or sample set");
  }
  for (std::size_t i = 0; i < op.unmeasured.size(); ++i) res.signal(op.unmeasured[i]) = x_u(i);
  return res;
}

IterativeResult recover_iterative(const RecoveryOperator& op, const SamplingPlan& plan,
                                  const Vector& y, double step_size, int iterations,
                                  const Vector* reference) {
  require(step_size > 0.0, "recover_iterative: step size must be positive");
  IterativeResult res;
  const Vector x_m = divide_by_attention(plan, y, &res.warnings);
  const int n = static_cast<int>(op.h_full.rows());
  Vector x = Vector::Zero(n);
  for (int i = 0; i < plan.size(); ++i) x(op.measured[i]) = x_m(i);
  for (int it = 0; it < iterations; ++it) {
    const Vector prev = x;
    x -= step_size * (op.h_full * x);
    for (int i = 0; i < plan.size(); ++i) x(op.measured[i]) = x_m(i);
    if (x.norm() > 1e12) {
      throw NumericError("recover_iterative: diverged at iteration " + std::to_string(it) +
                         " with step size " + std::to_string(step_size));
    }
    if (reference) {
      const double denom = std::max(reference->norm(), 1e-30);
      res.error_trace.push_back((x - *reference).norm() / denom);
    } else {
      res.error_trace.push_back((x - prev).norm());
    }
  }
  res.signal = x;
  return res;
}

double default_step_size(const RecoveryOperator& op) {
  const double lambda_max = spectral_norm(op.h_full);
  if (lambda_max <= 1e-14) {
    throw NumericError("default_step_size: H is zero, no step size exists");
  }
  return 1.0 / lambda_max;
}

}  // namespace gsx
