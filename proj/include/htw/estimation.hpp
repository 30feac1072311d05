#pragma once

// Two-sided correlation estimation from batched data by flip-flop iteration
// of the coupled moment relations, under the gauge tr(Xi) = N that removes
// the scale degeneracy (c Sigma, Xi / c).

#include <string>
#include <vector>

#include "htw/model.hpp"
#include "htw/types.hpp"

namespace htw {

struct EstimationResult {
  Matrix sigma_hat;
  Matrix xi_hat;      // normalized to tr(xi_hat) = N
  double L = 0.0;
  double M = 0.0;     // the matched scale 2L - 1 - (K+N)
  std::string gauge = "tr_xi=N";
  int n_batches = 0;
  int sweeps = 0;     // flip-flop sweeps until the residual stalled
  double residual = 0.0;
};

// The scale M that makes the first moment of the heavy-tailed model equal
// its Gaussian counterpart, M = 2L - 1 - (K+N). Requires the first moment
// to exist.
double choose_M(int K, int N, double L);

// Estimates (Sigma, Xi) from i.i.d. batches X_b (all K x N) for known L.
// xi0 optionally seeds the iteration (default identity); any positive
// rescaling of it leaves the result unchanged.
EstimationResult estimate_sigma_xi(const std::vector<DataMatrix>& batches, double L,
                                   const Matrix& xi0 = Matrix());

}  // namespace htw
