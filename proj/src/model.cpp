#include "htw/model.hpp"

#include <cmath>
#include <sstream>

namespace htw {

namespace {

void check_structure(const ModelParams& p) {
  if (p.K < 1 || p.N < 1) throw std::invalid_argument("K and N must be positive");
  if (!std::isfinite(p.L) || !std::isfinite(p.M))
    throw std::invalid_argument("L and M must be finite");
  if (p.M <= 0.0) throw std::invalid_argument("M must be positive");
  if (p.sigma.rows() != p.K || p.sigma.cols() != p.K) {
    std::ostringstream os;
    os << "sigma must be " << p.K << "x" << p.K << ", got " << p.sigma.rows() << "x"
       << p.sigma.cols();
    throw std::invalid_argument(os.str());
  }
  if (p.xi.rows() != p.N || p.xi.cols() != p.N) {
    std::ostringstream os;
    os << "xi must be " << p.N << "x" << p.N << ", got " << p.xi.rows() << "x" << p.xi.cols();
    throw std::invalid_argument(os.str());
  }
}

void require_density(const ModelParams& p) {
  if (!density_exists(p)) {
    std::ostringstream os;
    os << "density requires L > (K+N-1)/2 = " << 0.5 * (p.K + p.N - 1) << ", got L = " << p.L;
    throw std::domain_error(os.str());
  }
}

}  // namespace

ModelParams make_scalar_params(double L, double M, double sigma, double xi) {
  ModelParams p;
  p.K = 1;
  p.N = 1;
  p.L = L;
  p.M = M;
  p.sigma = Matrix::Constant(1, 1, sigma);
  p.xi = Matrix::Constant(1, 1, xi);
  return p;
}

ModelParams swap_sides(const ModelParams& p) {
  ModelParams q;
  q.K = p.N;
  q.N = p.K;
  q.L = p.L;
  q.M = p.M;
  q.sigma = p.xi;
  q.xi = p.sigma;
  return q;
}

ValidationReport validate_params(const ModelParams& p) {
  check_structure(p);
  ValidationReport rep;
  if (!is_symmetric(p.sigma))
    rep.messages.push_back("sigma is not symmetric");
  else if (!is_spd(p.sigma))
    rep.messages.push_back("sigma is not positive definite");
  if (!is_symmetric(p.xi))
    rep.messages.push_back("xi is not symmetric");
  else if (!is_spd(p.xi))
    rep.messages.push_back("xi is not positive definite");

  rep.density_exists = density_exists(p);
  rep.first_moment_exists = first_moment_exists(p);
  rep.second_moment_exists = second_moment_exists(p);
  if (!rep.density_exists)
    rep.messages.push_back("density requires L > (K+N-1)/2");
  else {
    if (!rep.first_moment_exists)
      rep.messages.push_back("first moment requires L > (K+N+1)/2");
    if (!rep.second_moment_exists)
      rep.messages.push_back("second moment requires L > (K+N+3)/2");
  }
  return rep;
}

ThetaSpectrum theta_spectrum(const ModelParams& p) {
  check_structure(p);
  require_spd(p.xi, "xi");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(p.xi));
  return ThetaSpectrum{es.eigenvalues()};
}

double log_normalization(const ModelParams& p) {
  check_structure(p);
  require_density(p);
  const double logdet_xi = logdet_spd(p.xi, "xi");
  const double logdet_sigma = logdet_spd(p.sigma, "sigma");
  double gamma_ratio = 0.0;
  for (int n = 1; n <= p.N; ++n)
    gamma_ratio += std::lgamma(p.L - 0.5 * (n - 1)) - std::lgamma(p.L - 0.5 * (p.K + n - 1));
  return -0.5 * p.K * p.N * std::log(M_PI * p.M) - 0.5 * p.K * logdet_xi -
         0.5 * p.N * logdet_sigma + gamma_ratio;
}

double log_density_alg(const ModelParams& p, const MatrixRef& X) {
  const double log_alpha = log_normalization(p);  // also validates
  if (X.rows() != p.K || X.cols() != p.N)
    throw std::invalid_argument("X must be K x N");
  // Symmetric form of the determinant argument keeps the matrix SPD, so the
  // log-determinant can go through a Cholesky factor.
  Eigen::LLT<Matrix> sig(symmetrize(p.sigma));
  const Matrix sig_inv_X = sig.solve(X);
  const Matrix xi_sqrt = spd_sqrt(p.xi);
  Eigen::LLT<Matrix> xis(xi_sqrt);  // xi_sqrt is SPD
  // A = Xi^-1/2 X^T Sigma^-1 X Xi^-1/2, computed via two triangular solves.
  const Matrix inner = X.transpose() * sig_inv_X;
  const Matrix A = symmetrize(xis.solve(xis.solve(inner).transpose()));
  const Matrix arg = Matrix::Identity(p.N, p.N) + A / p.M;
  return log_alpha - p.L * logdet_spd(arg, "determinant argument");
}

double log_density_gauss(const ModelParams& p, const MatrixRef& X) {
  check_structure(p);
  if (X.rows() != p.K || X.cols() != p.N)
    throw std::invalid_argument("X must be K x N");
  const double logdet_xi = logdet_spd(p.xi, "xi");
  const double logdet_sigma = logdet_spd(p.sigma, "sigma");
  Eigen::LLT<Matrix> sig(symmetrize(p.sigma));
  Eigen::LLT<Matrix> xil(symmetrize(p.xi));
  const Matrix sig_inv_X = sig.solve(X);
  const Matrix X_xi_inv = xil.solve(X.transpose()).transpose();
  const double quad = (sig_inv_X.array() * X_xi_inv.array()).sum();
  return -0.5 * (p.K * p.N * std::log(2.0 * M_PI) + p.K * logdet_xi + p.N * logdet_sigma) -
         0.5 * quad;
}

}  // namespace htw
