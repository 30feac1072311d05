#pragma once

// Model parameters and densities for the correlated heavy-tailed Wishart
// model and its Gaussian counterpart.
//
// Data is a K x N real matrix X ("time" dimension K, "position" dimension N)
// with two-sided correlations Sigma (K x K) and Xi (N x N). The heavy-tailed
// density is
//
//   w(X) = alpha * det(1_N + (1/M) Xi^-1/2 X^T Sigma^-1 X Xi^-1/2)^(-L)
//
// and the Gaussian counterpart has covariance kron(Xi, Sigma) in vec space.
// Existence of the density and of the first/second matrix moments is a strict
// tail-index condition on L; everything downstream checks it through
// validate_params.

#include <string>
#include <vector>

#include "htw/types.hpp"

namespace htw {

using DataMatrix = Matrix;  // K x N

struct ModelParams {
  int K = 1;          // rows (time)
  int N = 1;          // columns (position)
  double L = 2.0;     // tail index of the determinant law
  double M = 1.0;     // scale parameter
  Matrix sigma;       // K x K correlation, SPD
  Matrix xi;          // N x N correlation, SPD
};

// Eigenvalues of Xi, used by the generating-function fast path.
struct ThetaSpectrum {
  Vector theta;
};

struct ValidationReport {
  bool density_exists = false;
  bool first_moment_exists = false;
  bool second_moment_exists = false;
  std::vector<std::string> messages;
  bool ok() const { return density_exists && messages.empty(); }
};

ModelParams make_scalar_params(double L, double M, double sigma, double xi);

// Swap the two sides: (K, N, Sigma, Xi) -> (N, K, Xi, Sigma). Position-side
// moments are obtained from time-side formulas through this swap only.
ModelParams swap_sides(const ModelParams& p);

// Margin used for all strict existence inequalities; values this close to a
// pole of the moment formulas are treated as nonexistent.
inline constexpr double kPoleGuard = 1e-9;

inline bool density_exists(const ModelParams& p) {
  return 2.0 * p.L - (p.K + p.N) + 1.0 > kPoleGuard;
}
inline bool first_moment_exists(const ModelParams& p) {
  return 2.0 * p.L - (p.K + p.N) - 1.0 > kPoleGuard;
}
inline bool second_moment_exists(const ModelParams& p) {
  return 2.0 * p.L - (p.K + p.N) - 3.0 > kPoleGuard;
}

// Checks dimensions (throws std::invalid_argument on structural mismatch),
// reports SPD failures and the three existence thresholds.
ValidationReport validate_params(const ModelParams& p);

ThetaSpectrum theta_spectrum(const ModelParams& p);

// log of the normalization constant alpha of the heavy-tailed density.
double log_normalization(const ModelParams& p);

// log density of the heavy-tailed model at X (K x N).
double log_density_alg(const ModelParams& p, const MatrixRef& X);

// log density of the Gaussian counterpart at X.
double log_density_gauss(const ModelParams& p, const MatrixRef& X);

}  // namespace htw
