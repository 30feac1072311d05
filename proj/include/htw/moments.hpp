#pragma once

// Closed-form matrix moments of both models, the Gaussian moment generating
// function, and a finite-difference extraction of moments from it (used as an
// independent oracle for the closed forms).
//
// Time-side moments are the K x K averages <(X X^T / N)^nu>; position-side
// ones are the N x N averages of (X^T X / K)^nu and are produced from the
// time-side formulas by swapping (K, Sigma) <-> (N, Xi).

#include <string>
#include <vector>

#include "htw/model.hpp"
#include "htw/types.hpp"

namespace htw {

using SourceMatrix = Matrix;  // symmetric K x K source conjugate to X X^T / N

enum class ModelKind { algebraic, gaussian };
enum class MomentOrder { first, second, variance };
enum class Side { time, position };

std::string to_string(ModelKind m);
std::string to_string(MomentOrder o);
std::string to_string(Side s);

struct MomentReport {
  MomentOrder order = MomentOrder::first;
  ModelKind model = ModelKind::algebraic;
  Side side = Side::time;
  Matrix matrix;        // empty when exists is false
  bool exists = false;
  std::string message;  // existence diagnostic when exists is false
  int K = 0;
  int N = 0;
  double L = 0.0;
  double M = 0.0;
};

MomentReport first_moment(const ModelParams& p, ModelKind model, Side side = Side::time);
MomentReport second_moment(const ModelParams& p, ModelKind model, Side side = Side::time);

// Closed-form matrix variance <W^2> - <W>^2. The direct closed form and the
// difference of the two moment formulas are both evaluated and must agree;
// disagreement is a logic error, not a user error.
MomentReport matrix_variance(const ModelParams& p, ModelKind model, Side side = Side::time);

// Gaussian moment generating function Z(J) = det(1 + (2/N) kron(Xi, Sigma J))^(-1/2)
// for symmetric J, evaluated through the dense Kronecker determinant.
double generating_function_gauss(const ModelParams& p, const MatrixRef& J);

// Same value through the eigenvalue factorization prod_ij (1 + 2 theta_i mu_j / N)^(-1/2);
// O(N^3 + K^3) instead of O((NK)^3). Cross-checked against the dense path in tests.
double generating_function_gauss_eig(const ModelParams& p, const MatrixRef& J);

// Extract the first or second moment from Z by symmetric finite differences
// in the matrix source, honoring the 1/2 weights on off-diagonal entries of
// J. step <= 0 selects h = 1e-4 * (1 + ||Sigma||); richardson turns on one
// step-halving extrapolation.
MomentReport moment_from_generating_fd(const ModelParams& p, MomentOrder order,
                                       double step = 0.0, bool richardson = true);

struct GaussianLimitRow {
  double L = 0.0;
  double M = 0.0;
  double dist_first = 0.0;     // relative Frobenius distances alg vs gauss
  double dist_second = 0.0;
  double dist_variance = 0.0;
};

// Distances between the two models' moments along an L grid with the matched
// scale M = 2L - 1 - (K+N); the first-moment distance is identically zero and
// the quadratic ones decay like 1/L.
std::vector<GaussianLimitRow> gaussian_limit_check(const ModelParams& p,
                                                   const std::vector<double>& L_grid);

}  // namespace htw
