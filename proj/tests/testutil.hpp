#pragma once

// Shared helpers for the test binaries.

#include <cmath>

#include "htw/rng.hpp"
#include "htw/types.hpp"

namespace htw::testutil {

// Random SPD matrix with eigenvalues bounded away from zero.
inline Matrix random_spd(PhiloxRng& rng, int n, double ridge = 0.4) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return Matrix(a * a.transpose() / n + ridge * Matrix::Identity(n, n));
}

// Random orthogonal matrix via QR of a Gaussian matrix.
inline Matrix random_orthogonal(PhiloxRng& rng, int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  return Matrix(qr.householderQ());
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace htw::testutil
