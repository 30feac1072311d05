#pragma once

// Monte Carlo verification layer: moment estimators with standard errors,
// estimators of the quadratic SPD integrals, the empirical heavy-tailed
// generating function, and a deterministic quadrature fallback for the
// scalar case.
//
// Reproducibility protocol: a run is addressed by (seed, stream, count,
// chunk). The sample budget is split into chunks of fixed size; chunk k uses
// its own stream (base stream + k) and chunk results are reduced in index
// order, so the result is bit-identical for any thread count.

#include <cstdint>

#include "htw/model.hpp"
#include "htw/moments.hpp"
#include "htw/rng.hpp"
#include "htw/types.hpp"

namespace htw {

struct McEstimate {
  Matrix mean;       // point estimate
  Matrix std_error;  // elementwise standard error of the point estimate
  std::int64_t count = 0;
  RngState rng;      // base state of the run
  double seconds = 0.0;
};

// Monte Carlo moment of the chosen model/order/side. For order "variance"
// the estimate is the unbiased n/(n-1) matrix variance and the standard
// error comes from batch means over the chunks.
McEstimate estimate_moment_mc(const ModelParams& p, ModelKind model, MomentOrder order,
                              Side side, std::int64_t count, RngState base, int threads = 1,
                              std::int64_t chunk = 0);

enum class PsiKind { d, p, m };

// Importance-sampling estimate of a quadratic SPD integral, reported as the
// ratio to its closed form (1 x 1 matrix). The Gamma-product scale cancels
// analytically in the ratio, so nothing here can overflow.
McEstimate estimate_psi_mc(PsiKind which, int K, int N, double L, std::int64_t count,
                           RngState base, int threads = 1, std::int64_t chunk = 0);

// Empirical generating function of the heavy-tailed model at source J:
// mean of exp(-tr(X X^T J) / N) over exact draws.
McEstimate mc_generating_function_alg(const ModelParams& p, const MatrixRef& J,
                                      std::int64_t count, RngState base, int threads = 1,
                                      std::int64_t chunk = 0);

// Deterministic quadrature for the scalar case K = N = 1: order 0 is the
// density normalization, order nu > 0 the moment <x^(2 nu)>. Handles the
// integrable endpoint singularity of low L after the tangent substitution.
double quad_scalar_case(const ModelParams& p, int order, double rel_tol = 1e-10);

}  // namespace htw
