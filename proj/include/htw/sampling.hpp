#pragma once

// Exact samplers. The Gaussian model is a two-sided correlated Gaussian; the
// heavy-tailed model is drawn from its exact scale-mixture representation:
//
//   S ~ Wishart(dim N, dof 2L - K, scale I/2),
//   X | S ~ Gaussian with column covariance Sigma and row covariance
//           (M/2) Xi^1/2 S^-1 Xi^1/2,
//
// whose X-marginal is the heavy-tailed density exactly (no approximation,
// no rejection). Bartlett's construction handles non-integer dof.

#include <cstdint>

#include "htw/model.hpp"
#include "htw/rng.hpp"
#include "htw/types.hpp"

namespace htw {

struct WishartSpec {
  int dim = 1;
  double dof = 1.0;    // may be non-integer; must exceed dim - 1
  Matrix scale;        // SPD dim x dim
};

// One Wishart draw via Bartlett decomposition. Draw order is pinned (each
// row: diagonal chi-square first, then the sub-diagonal normals) so that
// streams are reproducible.
Matrix sample_wishart(const WishartSpec& spec, PhiloxRng& rng);

class GaussSampler {
 public:
  explicit GaussSampler(const ModelParams& p);
  DataMatrix draw(PhiloxRng& rng) const;
  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  Matrix chol_sigma_;  // lower factor of Sigma
  Matrix chol_xi_;     // lower factor of Xi
};

class AlgSampler {
 public:
  // Requires the density to exist (L > (K+N-1)/2); the mixing Wishart is
  // well defined exactly on that range.
  explicit AlgSampler(const ModelParams& p);

  // Draws the mixing matrix first (with retries while its condition number
  // exceeds 1e12, capped at 100), then the Gaussian block.
  DataMatrix draw(PhiloxRng& rng);

  const ModelParams& params() const { return params_; }
  std::uint64_t total_retries() const { return total_retries_; }

 private:
  ModelParams params_;
  Matrix chol_sigma_;  // lower factor of Sigma
  Matrix xi_sqrt_;     // symmetric square root of Xi, fixed once
  double dof_;         // 2L - K
  std::uint64_t total_retries_ = 0;
};

DataMatrix sample_gauss(const ModelParams& p, PhiloxRng& rng);
DataMatrix sample_alg(const ModelParams& p, PhiloxRng& rng);

}  // namespace htw
