#include "htw/montecarlo.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "htw/quadrature.hpp"
#include "htw/sampling.hpp"

namespace htw {

namespace {

struct ChunkResult {
  Matrix sum;    // sum of the statistic
  Matrix sumsq;  // elementwise sum of squares
  std::int64_t n = 0;
};

using StatFn = std::function<Matrix(PhiloxRng&)>;
using StatFactory = std::function<StatFn()>;

// Runs `count` evaluations of a per-draw statistic split into fixed chunks.
// Each chunk builds its own statistic (so samplers are never shared between
// threads) and consumes randomness only from its own stream, base.stream_id
// + chunk index. Reduction is in chunk order; results are therefore
// bit-identical for any thread count.
std::vector<ChunkResult> run_chunks(std::int64_t count, std::int64_t chunk_size, int threads,
                                    RngState base, int rows, int cols,
                                    const StatFactory& make_stat) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  if (chunk_size < 1) throw std::invalid_argument("chunk size must be positive");
  const std::int64_t n_chunks = (count + chunk_size - 1) / chunk_size;
  std::vector<ChunkResult> results(static_cast<std::size_t>(n_chunks));

  auto run_one = [&](std::int64_t k) {
    PhiloxRng rng(base.seed, base.stream_id + static_cast<std::uint64_t>(k));
    StatFn stat = make_stat();
    const std::int64_t lo = k * chunk_size;
    const std::int64_t hi = std::min(count, lo + chunk_size);
    ChunkResult r;
    r.sum = Matrix::Zero(rows, cols);
    r.sumsq = Matrix::Zero(rows, cols);
    for (std::int64_t i = lo; i < hi; ++i) {
      const Matrix s = stat(rng);
      r.sum += s;
      r.sumsq += s.cwiseProduct(s);
    }
    r.n = hi - lo;
    results[static_cast<std::size_t>(k)] = std::move(r);
  };

  if (threads <= 1) {
    for (std::int64_t k = 0; k < n_chunks; ++k) run_one(k);
  } else {
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(std::min<std::int64_t>(threads, n_chunks));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::int64_t k = next.fetch_add(1);
          if (k >= n_chunks || failed.load()) return;
          try {
            run_one(k);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true);
            return;
          }
        }
      });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  return results;
}

// Mean and standard error of the mean, reduced over chunks in index order.
void reduce_mean(const std::vector<ChunkResult>& chunks, Matrix& mean, Matrix& se) {
  Matrix sum = Matrix::Zero(chunks[0].sum.rows(), chunks[0].sum.cols());
  Matrix sumsq = sum;
  std::int64_t n = 0;
  for (const auto& c : chunks) {
    sum += c.sum;
    sumsq += c.sumsq;
    n += c.n;
  }
  mean = sum / double(n);
  if (n > 1) {
    const Matrix var = (sumsq / double(n) - mean.cwiseProduct(mean)) * (double(n) / double(n - 1));
    se = (var.cwiseMax(0.0) / double(n)).cwiseSqrt();
  } else {
    se = Matrix::Zero(mean.rows(), mean.cols());
  }
}

std::int64_t default_chunk(std::int64_t count, MomentOrder order) {
  if (order == MomentOrder::variance) {
    // Batch means want a few dozen chunks.
    return std::max<std::int64_t>(2, (count + 63) / 64);
  }
  return std::min<std::int64_t>(4096, count);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

McEstimate estimate_moment_mc(const ModelParams& p, ModelKind model, MomentOrder order,
                              Side side, std::int64_t count, RngState base, int threads,
                              std::int64_t chunk) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_params(p);
  require_spd(p.sigma, "sigma");
  require_spd(p.xi, "xi");
  if (model == ModelKind::algebraic && !density_exists(p))
    throw std::domain_error("sampling requires L > (K+N-1)/2");
  const int dim = side == Side::time ? p.K : p.N;
  const std::int64_t cs = chunk > 0 ? chunk : default_chunk(count, order);
  const int cols = order == MomentOrder::variance ? 2 * dim : dim;

  // For the variance the per-draw statistic is W stacked beside W^2 so one
  // pass collects both; the estimate is assembled from the stacks afterwards.
  StatFactory factory = [&p, model, side, order, dim]() -> StatFn {
    auto gauss = model == ModelKind::gaussian ? std::make_shared<GaussSampler>(p) : nullptr;
    auto alg = model == ModelKind::algebraic ? std::make_shared<AlgSampler>(p) : nullptr;
    return [gauss, alg, model, side, order, dim, &p](PhiloxRng& rng) -> Matrix {
      const DataMatrix x = model == ModelKind::gaussian ? gauss->draw(rng) : alg->draw(rng);
      const Matrix w = side == Side::time ? Matrix(x * x.transpose() / double(p.N))
                                          : Matrix(x.transpose() * x / double(p.K));
      if (order == MomentOrder::first) return w;
      const Matrix w2 = w * w;
      if (order == MomentOrder::second) return w2;
      Matrix stacked(dim, 2 * dim);
      stacked << w, w2;
      return stacked;
    };
  };

  const auto chunks = run_chunks(count, cs, threads, base, dim, cols, factory);

  McEstimate est;
  est.count = count;
  est.rng = base;

  if (order != MomentOrder::variance) {
    reduce_mean(chunks, est.mean, est.std_error);
    est.seconds = elapsed_s(t0);
    return est;
  }

  // Variance: unbiased estimate from the global sums, SE from batch means.
  Matrix sum = Matrix::Zero(dim, 2 * dim);
  std::int64_t n = 0;
  for (const auto& c : chunks) {
    sum += c.sum;
    n += c.n;
  }
  if (n < 2) throw std::invalid_argument("variance estimation needs at least two draws");
  const Matrix mw = sum.leftCols(dim) / double(n);
  const Matrix mw2 = sum.rightCols(dim) / double(n);
  est.mean = (double(n) / double(n - 1)) * (mw2 - mw * mw);

  std::vector<Matrix> batch_vals;
  for (const auto& c : chunks) {
    if (c.n != chunks.front().n || c.n < 2) continue;  // short tail chunk: skip in SE
    const Matrix bw = c.sum.leftCols(dim) / double(c.n);
    const Matrix bw2 = c.sum.rightCols(dim) / double(c.n);
    batch_vals.push_back((double(c.n) / double(c.n - 1)) * (bw2 - bw * bw));
  }
  if (batch_vals.size() >= 2) {
    Matrix bm = Matrix::Zero(dim, dim), bs = Matrix::Zero(dim, dim);
    for (const auto& b : batch_vals) bm += b;
    bm /= double(batch_vals.size());
    for (const auto& b : batch_vals) bs += (b - bm).cwiseProduct(b - bm);
    bs /= double(batch_vals.size() - 1);
    est.std_error = (bs / double(batch_vals.size())).cwiseSqrt();
  } else {
    est.std_error = Matrix::Zero(dim, dim);
  }
  est.seconds = elapsed_s(t0);
  return est;
}

McEstimate estimate_psi_mc(PsiKind which, int K, int N, double L, std::int64_t count,
                           RngState base, int threads, std::int64_t chunk) {
  const auto t0 = std::chrono::steady_clock::now();
  if (K < 1 || N < 1) throw std::invalid_argument("K and N must be positive");
  if (which != PsiKind::d && N < 2)
    throw std::invalid_argument("off-diagonal integrals need N >= 2");
  const double c = K + N;
  if (!(2.0 * L - c - 3.0 > kPoleGuard)) {
    std::ostringstream os;
    os << "integral requires L > (K+N+3)/2 = " << 0.5 * (c + 3) << ", got L = " << L;
    throw std::domain_error(os.str());
  }

  StatFactory factory = [K, N, L, which]() -> StatFn {
    auto spec = std::make_shared<WishartSpec>();
    spec->dim = N;
    spec->dof = 2.0 * L - K;
    spec->scale = 0.5 * Matrix::Identity(N, N);
    return [spec, N, which](PhiloxRng& rng) -> Matrix {
      const Matrix s = sample_wishart(*spec, rng);
      const Matrix sinv = Eigen::LLT<Matrix>(s).solve(Matrix::Identity(N, N));
      double f = 0.0;
      switch (which) {
        case PsiKind::d: f = sinv(0, 0) * sinv(0, 0); break;
        case PsiKind::p: f = sinv(0, 0) * sinv(1, 1); break;
        case PsiKind::m: f = sinv(0, 1) * sinv(0, 1); break;
      }
      return Matrix::Constant(1, 1, f);
    };
  };

  const std::int64_t cs = chunk > 0 ? chunk : default_chunk(count, MomentOrder::first);
  const auto chunks = run_chunks(count, cs, threads, base, 1, 1, factory);

  McEstimate est;
  est.count = count;
  est.rng = base;
  reduce_mean(chunks, est.mean, est.std_error);

  // Ratio to the closed form; the Gamma products cancel analytically and
  // only the pole factors survive, so the scaling is overflow-free.
  const double d3 = 2.0 * L - 3.0 - c;
  const double d1 = 2.0 * L - 1.0 - c;
  const double d0 = 2.0 * L - c;
  double factor = 0.0;
  switch (which) {
    case PsiKind::d: factor = d3 * d1 / 4.0; break;
    case PsiKind::p: factor = d3 * d1 * d0 / (4.0 * (2.0 * L - 2.0 - c)); break;
    case PsiKind::m: factor = d3 * d1 * d0 / 4.0; break;
  }
  est.mean *= factor;
  est.std_error *= factor;
  est.seconds = elapsed_s(t0);
  return est;
}

McEstimate mc_generating_function_alg(const ModelParams& p, const MatrixRef& J,
                                      std::int64_t count, RngState base, int threads,
                                      std::int64_t chunk) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_params(p);
  require_spd(p.sigma, "sigma");
  require_spd(p.xi, "xi");
  if (!density_exists(p)) throw std::domain_error("sampling requires L > (K+N-1)/2");
  if (J.rows() != p.K || J.cols() != p.K || !is_symmetric(J))
    throw std::invalid_argument("source matrix must be symmetric K x K");
  const Matrix Jc = J;

  StatFactory factory = [&p, Jc]() -> StatFn {
    auto alg = std::make_shared<AlgSampler>(p);
    return [alg, Jc, &p](PhiloxRng& rng) -> Matrix {
      const DataMatrix x = alg->draw(rng);
      const double tr = (Jc * x).cwiseProduct(x).sum() / double(p.N);
      return Matrix::Constant(1, 1, std::exp(-tr));
    };
  };

  const std::int64_t cs = chunk > 0 ? chunk : default_chunk(count, MomentOrder::first);
  const auto chunks = run_chunks(count, cs, threads, base, 1, 1, factory);

  McEstimate est;
  est.count = count;
  est.rng = base;
  reduce_mean(chunks, est.mean, est.std_error);
  est.seconds = elapsed_s(t0);
  return est;
}

double quad_scalar_case(const ModelParams& p, int order, double rel_tol) {
  if (p.K != 1 || p.N != 1)
    throw std::invalid_argument("quadrature path is for the scalar case K = N = 1");
  if (order < 0 || order > 2) throw std::invalid_argument("order must be 0, 1 or 2");
  validate_params(p);
  require_spd(p.sigma, "sigma");
  require_spd(p.xi, "xi");
  if (order >= 1 && !first_moment_exists(p))
    throw std::domain_error("first moment requires L > 3/2 in the scalar case");
  if (order == 2 && !second_moment_exists(p))
    throw std::domain_error("second moment requires L > 5/2 in the scalar case");
  const double s = p.M * p.xi(0, 0) * p.sigma(0, 0);
  const double alpha = std::exp(log_normalization(p));
  const double L = p.L;
  // 2 alpha * int_0^inf x^(2 order) (1 + x^2/s)^(-L) dx, in log form so the
  // algebraic tail underflows cleanly instead of overflowing on the way.
  auto f = [&](double x) {
    const double lx = std::log(x);
    return std::exp(2.0 * order * lx - L * std::log1p(x * x / s));
  };
  const double integral = exp_sinh(f, rel_tol * 0.01, 14);
  return 2.0 * alpha * integral;
}

}  // namespace htw
