#pragma once

// Closed forms of the special integrals behind the moment formulas: the
// matrix Gamma-type integral over SPD matrices, the Aomoto/Selberg family on
// the unit cube with its Laguerre-weight limit, and the Psi/Phi integrals
// that carry the heavy-tailed second moments. Everything is evaluated and
// returned in log space; the Gamma products overflow double well inside the
// parameter range of interest otherwise.

#include "htw/model.hpp"
#include "htw/types.hpp"

namespace htw {

// log of integral over SPD S (N x N) of exp(-tr(R S)) det(S)^(q-(N+1)/2).
// Requires q > (N-1)/2 and R SPD.
double ingham_siegel_closed(double q, const MatrixRef& R);

// Parameters of the Aomoto integral over [0,1]^N with Selberg weight
// prod_i t_i^(a-1) (1-t_i)^(b-1) |Delta(t)|^(2 gamma) and the first m
// coordinates inserted as a monomial factor.
struct AomotoParams {
  double a = 1.0;
  double b = 1.0;
  double gamma = 0.5;
  int N = 1;
  int m = 0;
};

// log of the closed-form value of the Aomoto integral.
double aomoto_closed(const AomotoParams& ap);

// log of the Laguerre-weight limit (b -> inf after rescaling) at gamma = 1/2:
// integral over [0,inf)^N of prod_i s_i^(a-1) e^(-s_i) |Delta(s)| times the
// first m coordinates.
double aomoto_laguerre_limit(double a, int N, int m);

// The three quadratic-order integrals over SPD matrices, in log space.
// For N = 1 the off-diagonal ones vanish; their logs are -infinity.
struct PsiTriple {
  double log_d;  // diagonal-squared integral
  double log_p;  // product of two distinct diagonals
  double log_m;  // squared off-diagonal
  int K;
  int N;
  double L;
};

// Requires L > (K+N+3)/2. Each member is evaluated from its own closed form,
// not chained through the others, so identities between them are testable.
PsiTriple psi_closed(int K, int N, double L);

// log of (Psi_p - Psi_m), which has its own one-line closed form; used to
// cross-check the pair independently of psi_closed's individual values.
double psi_pm_difference_log(int K, int N, double L);

// log of the linear-order integral Phi_1; scales linearly with tr(Xi).
// Requires the first moment to exist.
double phi1(const ModelParams& p);

// The two quadratic-order trace contractions of Phi_2.
struct Phi2Pair {
  double log_phi21;  // contraction paired with Sigma^2
  double log_phi22;  // contraction paired with (tr Sigma) Sigma
};

// Requires the second moment to exist.
Phi2Pair phi2(const ModelParams& p);

}  // namespace htw
