#pragma once

// Common dense types and small matrix helpers shared across the library.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace htw {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Matrix>;

// Force exact symmetry; cheap insurance after products of the form A^T B A.
inline Matrix symmetrize(const MatrixRef& a) { return 0.5 * (a + a.transpose()); }

inline bool is_symmetric(const MatrixRef& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool is_spd(const MatrixRef& a, double tol = 1e-12) {
  if (!is_symmetric(a, tol)) return false;
  Eigen::LLT<Matrix> llt(symmetrize(a));
  return llt.info() == Eigen::Success;
}

inline void require_spd(const MatrixRef& a, const std::string& name) {
  if (!is_symmetric(a))
    throw std::invalid_argument(name + " must be symmetric");
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(name + " must be positive definite (Cholesky failed)");
}

// Symmetric PSD square root via eigendecomposition. Used wherever a matrix
// square root appears; the symmetric root is fixed by convention so that
// factorization ambiguity never leaks into results.
inline Matrix spd_sqrt(const MatrixRef& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed in spd_sqrt");
  if (es.eigenvalues().minCoeff() < 0.0 && es.eigenvalues().minCoeff() < -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff())
    throw std::invalid_argument("spd_sqrt requires a positive semidefinite matrix");
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

// log det of an SPD matrix through its Cholesky factor.
inline double logdet_spd(const MatrixRef& a, const std::string& name = "matrix") {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(name + " must be positive definite (Cholesky failed)");
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

template <typename DerivedA, typename DerivedB>
Matrix kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double log_sum_exp(double la, double lb) {
  if (la < lb) std::swap(la, lb);
  if (lb == -std::numeric_limits<double>::infinity()) return la;
  return la + std::log1p(std::exp(lb - la));
}

// log(exp(la) - exp(lb)) for la > lb.
inline double log_diff_exp(double la, double lb) {
  if (lb == -std::numeric_limits<double>::infinity()) return la;
  if (la <= lb) throw std::domain_error("log_diff_exp requires la > lb");
  return la + std::log1p(-std::exp(lb - la));
}

}  // namespace htw
