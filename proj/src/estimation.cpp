#include "htw/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace htw {

double choose_M(int K, int N, double L) {
  if (K < 1 || N < 1) throw std::invalid_argument("K and N must be positive");
  const double m = 2.0 * L - 1.0 - (K + N);
  if (!(m > kPoleGuard)) {
    std::ostringstream os;
    os << "matched scale requires L > (K+N+1)/2 = " << 0.5 * (K + N + 1) << ", got L = " << L;
    throw std::domain_error(os.str());
  }
  return m;
}

EstimationResult estimate_sigma_xi(const std::vector<DataMatrix>& batches, double L,
                                   const Matrix& xi0) {
  if (batches.size() < 2)
    throw std::invalid_argument("estimation needs at least two batches");
  const int K = static_cast<int>(batches.front().rows());
  const int N = static_cast<int>(batches.front().cols());
  if (K < 1 || N < 1) throw std::invalid_argument("batches must be non-empty matrices");
  for (const auto& x : batches) {
    if (x.rows() != K || x.cols() != N)
      throw std::invalid_argument("all batches must share the same K x N shape");
    if (!x.allFinite()) throw std::invalid_argument("batches must be finite");
  }

  const double B = static_cast<double>(batches.size());
  Matrix mean_time = Matrix::Zero(K, K);
  Matrix mean_pos = Matrix::Zero(N, N);
  for (const auto& x : batches) {
    mean_time += x * x.transpose() / double(N);
    mean_pos += x.transpose() * x / double(K);
  }
  mean_time = symmetrize(mean_time / B);
  mean_pos = symmetrize(mean_pos / B);
  if (!is_spd(mean_time) || !is_spd(mean_pos))
    throw std::runtime_error(
        "batch means are rank deficient; more batches than max(K, N) are needed");

  Matrix xi_hat;
  if (xi0.size() == 0) {
    xi_hat = Matrix::Identity(N, N);
  } else {
    if (xi0.rows() != N || xi0.cols() != N)
      throw std::invalid_argument("xi0 must be N x N");
    require_spd(xi0, "xi0");
    xi_hat = symmetrize(xi0);
  }

  Matrix sigma_hat = Matrix::Zero(K, K);
  double residual = std::numeric_limits<double>::infinity();
  int sweeps = 0;
  for (int it = 1; it <= 100; ++it) {
    sweeps = it;
    const Matrix sigma_new = mean_time * (double(N) / xi_hat.trace());
    Matrix xi_new = mean_pos * (double(K) / sigma_new.trace());
    xi_new *= double(N) / xi_new.trace();  // gauge
    const double ds = (sigma_new - sigma_hat).norm() / std::max(sigma_new.norm(), 1e-300);
    const double dx = (xi_new - xi_hat).norm() / std::max(xi_new.norm(), 1e-300);
    sigma_hat = sigma_new;
    xi_hat = xi_new;
    residual = std::max(ds, dx);
    if (it >= 2 && residual < 1e-10) break;
  }

  EstimationResult out;
  out.sigma_hat = sigma_hat;
  out.xi_hat = xi_hat;
  out.L = L;
  out.M = choose_M(K, N, L);
  out.n_batches = static_cast<int>(batches.size());
  out.sweeps = sweeps;
  out.residual = residual;
  return out;
}

}  // namespace htw
