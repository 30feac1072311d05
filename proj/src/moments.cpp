#include "htw/moments.hpp"

#include <cmath>
#include <sstream>

namespace htw {

namespace {

struct TraceBundle {
  double t1;   // tr Xi
  double t2;   // tr Xi^2
  double ts;   // tr Sigma
  double dlt;  // tr^2 Xi - tr Xi^2 >= 0
};

TraceBundle traces(const ModelParams& p) {
  const double t1 = p.xi.trace();
  const double t2 = (p.xi * p.xi).trace();
  return {t1, t2, p.sigma.trace(), t1 * t1 - t2};
}

MomentReport base_report(const ModelParams& p, MomentOrder o, ModelKind m, Side s) {
  MomentReport r;
  r.order = o;
  r.model = m;
  r.side = s;
  r.K = p.K;
  r.N = p.N;
  r.L = p.L;
  r.M = p.M;
  return r;
}

bool check_exists(const ModelParams& p, MomentOrder o, ModelKind m, MomentReport& r) {
  if (m == ModelKind::gaussian) return true;  // Gaussian moments always exist
  const bool need_second = (o != MomentOrder::first);
  if (need_second ? second_moment_exists(p) : first_moment_exists(p)) return true;
  std::ostringstream os;
  if (need_second)
    os << "second moment requires L > (K+N+3)/2 = " << 0.5 * (p.K + p.N + 3) << ", got L = " << p.L;
  else
    os << "first moment requires L > (K+N+1)/2 = " << 0.5 * (p.K + p.N + 1) << ", got L = " << p.L;
  r.exists = false;
  r.message = os.str();
  return false;
}

Matrix first_moment_matrix(const ModelParams& p, ModelKind m) {
  const TraceBundle t = traces(p);
  if (m == ModelKind::gaussian) return (t.t1 / p.N) * p.sigma;
  const double c = p.K + p.N;
  return (p.M / (2.0 * p.L - 1.0 - c)) * (t.t1 / p.N) * p.sigma;
}

Matrix second_moment_matrix(const ModelParams& p, ModelKind m) {
  const TraceBundle t = traces(p);
  const double n2 = double(p.N) * p.N;
  const Matrix sig2 = p.sigma * p.sigma;
  if (m == ModelKind::gaussian)
    return ((t.t2 + t.t1 * t.t1) / n2) * sig2 + (t.t2 / n2) * t.ts * p.sigma;
  const double c = p.K + p.N;
  const double pref = p.M * p.M / ((2.0 * p.L - 3.0 - c) * (2.0 * p.L - 1.0 - c));
  const double ca = (2.0 * t.t2 + (2.0 * p.L - 1.0 - c) / (2.0 * p.L - c) * t.dlt) / n2;
  const double cb = (t.t2 + t.dlt / (2.0 * p.L - c)) / n2;
  return pref * (ca * sig2 + cb * t.ts * p.sigma);
}

Matrix variance_matrix(const ModelParams& p, ModelKind m) {
  const TraceBundle t = traces(p);
  const double n2 = double(p.N) * p.N;
  const Matrix sig2 = p.sigma * p.sigma;
  if (m == ModelKind::gaussian) return (t.t2 / n2) * (sig2 + t.ts * p.sigma);
  const double c = p.K + p.N;
  const double bracket = (t.t2 + t.t1 * t.t1 / (2.0 * p.L - 1.0 - c)) / n2;
  const double va = p.M * p.M * (2.0 * p.L + 1.0 - c) /
                    ((2.0 * p.L - 3.0 - c) * (2.0 * p.L - 1.0 - c) * (2.0 * p.L - c));
  const double vb = p.M * p.M / ((2.0 * p.L - 3.0 - c) * (2.0 * p.L - c));
  return bracket * (va * sig2 + vb * t.ts * p.sigma);
}

void check_source(const ModelParams& p, const MatrixRef& J) {
  if (J.rows() != p.K || J.cols() != p.K)
    throw std::invalid_argument("source matrix must be K x K");
  if (!is_symmetric(J)) throw std::invalid_argument("source matrix must be symmetric");
}

// Both generating-function paths reject sources outside the convergence
// domain, detected on the eigenvalue grid.
Eigen::ArrayXXd log_factors(const ModelParams& p, const MatrixRef& J) {
  const Matrix sig_half = spd_sqrt(p.sigma);
  Eigen::SelfAdjointEigenSolver<Matrix> mu_es(symmetrize(sig_half * J * sig_half));
  Eigen::SelfAdjointEigenSolver<Matrix> th_es(symmetrize(p.xi));
  const Vector mu = mu_es.eigenvalues();
  const Vector theta = th_es.eigenvalues();
  Eigen::ArrayXXd g(p.N, p.K);
  for (int i = 0; i < p.N; ++i)
    for (int j = 0; j < p.K; ++j) g(i, j) = 1.0 + 2.0 * theta(i) * mu(j) / p.N;
  if (g.minCoeff() <= 0.0)
    throw std::domain_error("generating function undefined: source pushes a factor 1 + 2 theta mu / N to zero or below");
  return g.log();
}

}  // namespace

std::string to_string(ModelKind m) { return m == ModelKind::algebraic ? "alg" : "gauss"; }
std::string to_string(MomentOrder o) {
  switch (o) {
    case MomentOrder::first: return "first";
    case MomentOrder::second: return "second";
    default: return "variance";
  }
}
std::string to_string(Side s) { return s == Side::time ? "time" : "position"; }

MomentReport first_moment(const ModelParams& p, ModelKind model, Side side) {
  const ModelParams& q0 = p;
  const ModelParams qs = side == Side::position ? swap_sides(p) : p;
  const ModelParams& q = side == Side::position ? qs : q0;
  validate_params(q);
  require_spd(q.sigma, "sigma");
  require_spd(q.xi, "xi");
  MomentReport r = base_report(p, MomentOrder::first, model, side);
  if (!check_exists(q, MomentOrder::first, model, r)) return r;
  r.exists = true;
  r.matrix = first_moment_matrix(q, model);
  return r;
}

MomentReport second_moment(const ModelParams& p, ModelKind model, Side side) {
  const ModelParams qs = side == Side::position ? swap_sides(p) : p;
  const ModelParams& q = side == Side::position ? qs : p;
  validate_params(q);
  require_spd(q.sigma, "sigma");
  require_spd(q.xi, "xi");
  MomentReport r = base_report(p, MomentOrder::second, model, side);
  if (!check_exists(q, MomentOrder::second, model, r)) return r;
  r.exists = true;
  r.matrix = second_moment_matrix(q, model);
  return r;
}

MomentReport matrix_variance(const ModelParams& p, ModelKind model, Side side) {
  const ModelParams qs = side == Side::position ? swap_sides(p) : p;
  const ModelParams& q = side == Side::position ? qs : p;
  validate_params(q);
  require_spd(q.sigma, "sigma");
  require_spd(q.xi, "xi");
  MomentReport r = base_report(p, MomentOrder::variance, model, side);
  if (!check_exists(q, MomentOrder::variance, model, r)) return r;
  const Matrix direct = variance_matrix(q, model);
  const Matrix m1 = first_moment_matrix(q, model);
  const Matrix recomputed = second_moment_matrix(q, model) - m1 * m1;
  const double rel = (direct - recomputed).norm() / std::max(recomputed.norm(), 1e-300);
  if (rel > 1e-10)
    throw std::logic_error("variance closed form disagrees with moment difference");
  r.exists = true;
  r.matrix = direct;
  return r;
}

double generating_function_gauss(const ModelParams& p, const MatrixRef& J) {
  validate_params(p);
  check_source(p, J);
  log_factors(p, J);  // domain check
  const Matrix big =
      Matrix::Identity(p.N * p.K, p.N * p.K) + (2.0 / p.N) * kron(p.xi, p.sigma * J);
  Eigen::PartialPivLU<Matrix> lu(big);
  const Matrix& u = lu.matrixLU();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) logdet += std::log(std::abs(u(i, i)));
  return std::exp(-0.5 * logdet);
}

double generating_function_gauss_eig(const ModelParams& p, const MatrixRef& J) {
  validate_params(p);
  check_source(p, J);
  return std::exp(-0.5 * log_factors(p, J).sum());
}

MomentReport moment_from_generating_fd(const ModelParams& p, MomentOrder order, double step,
                                       bool richardson) {
  validate_params(p);
  require_spd(p.sigma, "sigma");
  require_spd(p.xi, "xi");
  if (order == MomentOrder::variance)
    throw std::invalid_argument("finite differences extract the first or second moment only");
  const int K = p.K;
  const double sig_norm = p.sigma.operatorNorm();
  const double h0 = step > 0.0 ? step : 1e-4 * (1.0 + sig_norm);

  auto zval = [&](const Matrix& J) { return generating_function_gauss(p, J); };
  auto pair_dir = [&](int a, int b) {
    Matrix e = Matrix::Zero(K, K);
    e(a, b) += 1.0;
    e(b, a) += 1.0;  // E_aa gets 1, off-diagonal pairs get 1 in both slots
    if (a == b) e(a, a) = 1.0;
    return e;
  };
  auto weight = [](int a, int b) { return a == b ? 1.0 : 0.5; };

  MomentReport r = base_report(p, order, ModelKind::gaussian, Side::time);
  r.exists = true;
  Matrix out = Matrix::Zero(K, K);

  if (order == MomentOrder::first) {
    auto d1 = [&](int a, int b, double h) {
      const Matrix e = pair_dir(a, b);
      return (zval(h * e) - zval(-h * e)) / (2.0 * h);
    };
    for (int a = 0; a < K; ++a)
      for (int b = a; b < K; ++b) {
        double d = d1(a, b, h0);
        if (richardson) d = (4.0 * d1(a, b, 0.5 * h0) - d) / 3.0;
        out(a, b) = out(b, a) = -weight(a, b) * d;
      }
    r.matrix = out;
    return r;
  }

  // Second derivative in the weighted matrix source: the (a, b) entry sums
  // mixed partials over the intermediate index c with the 1/2 weights of
  // both participating source entries.
  auto d2 = [&](int a, int b, int c, double h) {
    if (a == b) {
      const Matrix e = pair_dir(a, c);
      return (zval(h * e) - 2.0 * zval(Matrix::Zero(K, K)) + zval(-h * e)) / (h * h);
    }
    const Matrix e1 = pair_dir(a, c);
    const Matrix e2 = pair_dir(c, b);
    return (zval(h * (e1 + e2)) - zval(h * (e1 - e2)) - zval(h * (e2 - e1)) +
            zval(-h * (e1 + e2))) /
           (4.0 * h * h);
  };
  for (int a = 0; a < K; ++a)
    for (int b = a; b < K; ++b) {
      double acc = 0.0;
      for (int c = 0; c < K; ++c) {
        double d = d2(a, b, c, h0);
        if (richardson) d = (4.0 * d2(a, b, c, 0.5 * h0) - d) / 3.0;
        acc += weight(a, c) * weight(c, b) * d;
      }
      out(a, b) = out(b, a) = acc;
    }
  r.matrix = out;
  return r;
}

std::vector<GaussianLimitRow> gaussian_limit_check(const ModelParams& p,
                                                   const std::vector<double>& L_grid) {
  std::vector<GaussianLimitRow> rows;
  rows.reserve(L_grid.size());
  auto rel_dist = [](const Matrix& a, const Matrix& g) {
    return (a - g).norm() / std::max(g.norm(), 1e-300);
  };
  for (double L : L_grid) {
    ModelParams q = p;
    q.L = L;
    q.M = 2.0 * L - 1.0 - (p.K + p.N);
    GaussianLimitRow row;
    row.L = L;
    row.M = q.M;
    row.dist_first = rel_dist(first_moment(q, ModelKind::algebraic).matrix,
                              first_moment(q, ModelKind::gaussian).matrix);
    row.dist_second = rel_dist(second_moment(q, ModelKind::algebraic).matrix,
                               second_moment(q, ModelKind::gaussian).matrix);
    row.dist_variance = rel_dist(matrix_variance(q, ModelKind::algebraic).matrix,
                                 matrix_variance(q, ModelKind::gaussian).matrix);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace htw
