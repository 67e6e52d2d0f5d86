#include "gsx/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace gsx {

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

void check_symmetric(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw DataError(std::string(op) + ": matrix is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", expected square");
  }
  if (m.size() > 0 && !is_symmetric(m)) {
    throw DataError(std::string(op) + ": matrix is not symmetric within 1e-10");
  }
}

// First component with magnitude above tol decides the sign of the column.
void fix_eigenvector_signs(Matrix& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
      const double v = vecs(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0) vecs.col(c) = -vecs.col(c);
        break;
      }
    }
  }
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& m) {
  check_symmetric(m, "sym_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eigen: eigensolver failed to converge");
  }
  EigenDecomposition d{solver.eigenvalues(), solver.eigenvectors()};
  fix_eigenvector_signs(d.eigenvectors);
  return d;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  check_symmetric(a, "solve_spd");
  if (a.rows() != b.rows()) {
    throw DataError("solve_spd: rhs has " + std::to_string(b.rows()) + " rows, expected " +
                    std::to_string(a.rows()));
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    // Re-run a scalar Cholesky just to identify where positivity fails.
    const Eigen::Index n = a.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      double d = a(k, k) - l.row(k).head(k).squaredNorm();
      if (d <= 0.0) {
        throw NumericError("solve_spd: matrix not positive definite at pivot " +
                           std::to_string(k));
      }
      l(k, k) = std::sqrt(d);
      for (Eigen::Index i = k + 1; i < n; ++i) {
        l(i, k) = (a(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / l(k, k);
      }
    }
    throw NumericError("solve_spd: Cholesky failed");
  }
  return llt.solve(b);
}

double spectral_norm(const Matrix& m) {
  check_symmetric(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("spectral_norm: eigensolver failed to converge");
  }
  const Vector& ev = solver.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace gsx
