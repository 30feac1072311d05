#include "htw/special_integrals.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace htw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of a factor that must stay strictly away from its pole at zero.
double guarded_log(double x, const char* factor) {
  if (!(x > kPoleGuard)) {
    std::ostringstream os;
    os << "factor " << factor << " = " << x << " is at or beyond its pole";
    throw std::domain_error(os.str());
  }
  return std::log(x);
}

// sum_n lgamma(L - (K+n-1)/2) for n = 1..N, the Gamma product common to the
// Psi/Phi family. All arguments are positive once the density exists.
double log_gamma_product(int K, int N, double L) {
  double s = 0.0;
  for (int n = 1; n <= N; ++n) s += std::lgamma(L - 0.5 * (K + n - 1));
  return s;
}

void require_second_moment_range(int K, int N, double L, const char* who) {
  if (!(2.0 * L - (K + N) - 3.0 > kPoleGuard)) {
    std::ostringstream os;
    os << who << " requires L > (K+N+3)/2 = " << 0.5 * (K + N + 3) << ", got L = " << L;
    throw std::domain_error(os.str());
  }
}

}  // namespace

double ingham_siegel_closed(double q, const MatrixRef& R) {
  if (R.rows() != R.cols() || R.rows() < 1)
    throw std::invalid_argument("R must be square and non-empty");
  const int N = static_cast<int>(R.rows());
  if (!(q - 0.5 * (N - 1) > kPoleGuard)) {
    std::ostringstream os;
    os << "matrix Gamma integral requires q > (N-1)/2 = " << 0.5 * (N - 1) << ", got q = " << q;
    throw std::domain_error(os.str());
  }
  require_spd(R, "R");
  double s = 0.25 * N * (N - 1) * std::log(M_PI);
  for (int n = 1; n <= N; ++n) s += std::lgamma(q - 0.5 * (n - 1));
  return s - q * logdet_spd(R, "R");
}

double aomoto_closed(const AomotoParams& ap) {
  if (ap.N < 1) throw std::invalid_argument("N must be positive");
  if (ap.m < 0 || ap.m > ap.N) throw std::invalid_argument("m must lie in [0, N]");
  if (!(ap.a > 0.0) || !(ap.b > 0.0)) throw std::domain_error("a and b must be positive");
  if (!(ap.gamma >= 0.0)) throw std::domain_error("gamma must be non-negative");
  const double a = ap.a, b = ap.b, g = ap.gamma;
  double s = 0.0;
  for (int i = 0; i < ap.N; ++i) {
    s += std::lgamma(a + 1.0 + i * g) + std::lgamma(b + i * g) + std::lgamma(1.0 + (i + 1) * g);
    s -= std::lgamma(a + b + 1.0 + (ap.N - 1 + i) * g) + std::lgamma(1.0 + g);
  }
  // Dividing out the insertion factors for the N-m coordinates that do not
  // carry the extra monomial.
  for (int j = 0; j < ap.N - ap.m; ++j)
    s += std::log(a + b + (ap.N - 1 + j) * g) - std::log(a + j * g);
  return s;
}

double aomoto_laguerre_limit(double a, int N, int m) {
  if (N < 1) throw std::invalid_argument("N must be positive");
  if (m < 0 || m > N) throw std::invalid_argument("m must lie in [0, N]");
  if (!(a > 0.0)) throw std::domain_error("a must be positive");
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    s += std::lgamma(a + 1.0 + 0.5 * i) + std::lgamma(0.5 * (3 + i)) - std::lgamma(1.5);
  for (int j = 0; j < N - m; ++j) s -= std::log(a + 0.5 * j);
  return s;
}

PsiTriple psi_closed(int K, int N, double L) {
  if (K < 1 || N < 1) throw std::invalid_argument("K and N must be positive");
  require_second_moment_range(K, N, L, "Psi");
  const double c = K + N;
  const double lp = 0.25 * N * (N - 1) * std::log(M_PI);
  const double lg = log_gamma_product(K, N, L);
  const double d3 = guarded_log(2.0 * L - 3.0 - c, "2L-3-(K+N)");
  const double d1 = guarded_log(2.0 * L - 1.0 - c, "2L-1-(K+N)");
  PsiTriple t{kNegInf, kNegInf, kNegInf, K, N, L};
  t.log_d = std::log(4.0) + std::log(double(N)) + lp + lg - d3 - d1;
  if (N >= 2) {
    const double d2 = guarded_log(2.0 * L - 2.0 - c, "2L-2-(K+N)");
    const double d0 = guarded_log(2.0 * L - c, "2L-(K+N)");
    const double common = std::log(4.0) + std::log(double(N)) + std::log(double(N - 1)) + lp + lg;
    t.log_p = common + d2 - d3 - d1 - d0;
    t.log_m = common - d3 - d1 - d0;
  }
  return t;
}

double psi_pm_difference_log(int K, int N, double L) {
  if (K < 1 || N < 1) throw std::invalid_argument("K and N must be positive");
  if (N == 1) return kNegInf;
  require_second_moment_range(K, N, L, "Psi");
  const double c = K + N;
  const double d1 = guarded_log(2.0 * L - 1.0 - c, "2L-1-(K+N)");
  const double d0 = guarded_log(2.0 * L - c, "2L-(K+N)");
  return std::log(4.0) + std::log(double(N)) + std::log(double(N - 1)) +
         0.25 * N * (N - 1) * std::log(M_PI) + log_gamma_product(K, N, L) - d1 - d0;
}

double phi1(const ModelParams& p) {
  validate_params(p);  // throws on structural problems
  if (!first_moment_exists(p)) {
    std::ostringstream os;
    os << "Phi_1 requires L > (K+N+1)/2 = " << 0.5 * (p.K + p.N + 1) << ", got L = " << p.L;
    throw std::domain_error(os.str());
  }
  require_spd(p.xi, "xi");
  const double c = p.K + p.N;
  const double d1 = guarded_log(2.0 * p.L - 1.0 - c, "2L-1-(K+N)");
  return std::log(2.0) + 0.25 * p.N * (p.N - 1) * std::log(M_PI) + std::log(p.xi.trace()) -
         d1 + log_gamma_product(p.K, p.N, p.L);
}

Phi2Pair phi2(const ModelParams& p) {
  validate_params(p);
  require_second_moment_range(p.K, p.N, p.L, "Phi_2");
  require_spd(p.xi, "xi");
  const double c = p.K + p.N;
  const double t1 = p.xi.trace();
  const double t2 = (p.xi * p.xi).trace();
  const double delta = t1 * t1 - t2;  // tr^2 - tr of square, zero for N = 1
  const double d0 = 2.0 * p.L - c;
  guarded_log(d0, "2L-(K+N)");
  const double log_d = psi_closed(p.K, p.N, p.L).log_d;
  Phi2Pair out;
  out.log_phi21 = std::log(t2 + (d0 - 2.0) / d0 * delta) - std::log(double(p.N)) + log_d;
  out.log_phi22 = std::log(t2 + delta / d0) - std::log(double(p.N)) + log_d;
  return out;
}

}  // namespace htw
