#include "htw/sampling.hpp"

#include <cmath>
#include <sstream>

namespace htw {

namespace {

// Lower-triangular Bartlett factor T with T_ii^2 ~ chi^2(dof - i) (0-based i)
// and standard normals below the diagonal.
Matrix bartlett_factor(int dim, double dof, PhiloxRng& rng) {
  Matrix t = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    t(i, i) = std::sqrt(rng.chi_square(dof - i));
    for (int j = 0; j < i; ++j) t(i, j) = rng.normal();
  }
  return t;
}

Matrix standard_normal_matrix(int rows, int cols, PhiloxRng& rng) {
  Matrix z(rows, cols);
  for (int a = 0; a < rows; ++a)
    for (int n = 0; n < cols; ++n) z(a, n) = rng.normal();
  return z;
}

void require_density_for_sampling(const ModelParams& p) {
  if (!density_exists(p)) {
    std::ostringstream os;
    os << "sampling requires the density to exist: L > (K+N-1)/2 = " << 0.5 * (p.K + p.N - 1)
       << ", got L = " << p.L;
    throw std::domain_error(os.str());
  }
}

}  // namespace

Matrix sample_wishart(const WishartSpec& spec, PhiloxRng& rng) {
  if (spec.dim < 1) throw std::invalid_argument("Wishart dimension must be positive");
  if (!(spec.dof > spec.dim - 1)) {
    std::ostringstream os;
    os << "Wishart dof must exceed dim - 1 = " << spec.dim - 1 << ", got " << spec.dof;
    throw std::domain_error(os.str());
  }
  if (spec.scale.rows() != spec.dim || spec.scale.cols() != spec.dim)
    throw std::invalid_argument("Wishart scale must be dim x dim");
  require_spd(spec.scale, "Wishart scale");
  Eigen::LLT<Matrix> llt(symmetrize(spec.scale));
  const Matrix a = Matrix(llt.matrixL()) * bartlett_factor(spec.dim, spec.dof, rng);
  return a * a.transpose();
}

GaussSampler::GaussSampler(const ModelParams& p) : params_(p) {
  validate_params(p);
  require_spd(p.sigma, "sigma");
  require_spd(p.xi, "xi");
  chol_sigma_ = Eigen::LLT<Matrix>(symmetrize(p.sigma)).matrixL();
  chol_xi_ = Eigen::LLT<Matrix>(symmetrize(p.xi)).matrixL();
}

DataMatrix GaussSampler::draw(PhiloxRng& rng) const {
  const Matrix z = standard_normal_matrix(params_.K, params_.N, rng);
  return chol_sigma_ * z * chol_xi_.transpose();
}

AlgSampler::AlgSampler(const ModelParams& p) : params_(p) {
  validate_params(p);
  require_density_for_sampling(p);
  require_spd(p.sigma, "sigma");
  require_spd(p.xi, "xi");
  chol_sigma_ = Eigen::LLT<Matrix>(symmetrize(p.sigma)).matrixL();
  xi_sqrt_ = spd_sqrt(p.xi);
  dof_ = 2.0 * p.L - p.K;
}

DataMatrix AlgSampler::draw(PhiloxRng& rng) {
  const int N = params_.N;
  Matrix t;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 100)
      throw std::runtime_error("mixing matrix stayed ill-conditioned after 100 retries");
    t = bartlett_factor(N, dof_, rng);
    // S = T T^T / 2; its conditioning is checked on the triangular factor.
    Eigen::JacobiSVD<Matrix> svd(t);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin > 0.0 && (smax / smin) * (smax / smin) <= 1e12) break;
    ++total_retries_;
  }
  const Matrix z = standard_normal_matrix(params_.K, N, rng);
  // X = sqrt(M) * chol(Sigma) * Z * T^-1 * Xi^1/2 realizes the conditional
  // Gaussian with row covariance (M/2) Xi^1/2 S^-1 Xi^1/2.
  const Matrix w = t.triangularView<Eigen::Lower>().solve(xi_sqrt_);
  return std::sqrt(params_.M) * (chol_sigma_ * z * w);
}

DataMatrix sample_gauss(const ModelParams& p, PhiloxRng& rng) {
  return GaussSampler(p).draw(rng);
}

DataMatrix sample_alg(const ModelParams& p, PhiloxRng& rng) {
  return AlgSampler(p).draw(rng);
}

}  // namespace htw
