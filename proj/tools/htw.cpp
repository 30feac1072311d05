// Command-line front end: sampling, closed-form moments, Monte Carlo
// verification, special-function evaluation, density evaluation and
// two-sided correlation estimation.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation or existence failure,
// 3 Monte Carlo verification exceeded its z-score band.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "htw/estimation.hpp"
#include "htw/io.hpp"
#include "htw/model.hpp"
#include "htw/moments.hpp"
#include "htw/montecarlo.hpp"
#include "htw/rng.hpp"
#include "htw/sampling.hpp"
#include "htw/special_integrals.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace htw;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct ParamArgs {
  int K = 1;
  int N = 1;
  double L = 0.0;
  double M = 1.0;
  std::string params_file;
  std::string sigma_path;
  std::string xi_path;
  std::optional<double> sigma_scalar;
  std::optional<double> xi_scalar;
};

void add_param_options(CLI::App* cmd, ParamArgs& a) {
  cmd->add_option("--params", a.params_file, "JSON file with K, N, L, M, sigma, xi");
  cmd->add_option("--K", a.K, "rows (time dimension)");
  cmd->add_option("--N", a.N, "columns (position dimension)");
  cmd->add_option("--L", a.L, "tail index");
  cmd->add_option("--M", a.M, "scale parameter");
  cmd->add_option("--sigma", a.sigma_path, "CSV file with the K x K correlation");
  cmd->add_option("--sigma-scalar", [&a](const std::vector<std::string>& v) {
    a.sigma_scalar = std::stod(v.front());
    return true;
  }, "scalar sigma (K = 1)");
  cmd->add_option("--xi", a.xi_path, "CSV file with the N x N correlation");
  cmd->add_option("--xi-scalar", [&a](const std::vector<std::string>& v) {
    a.xi_scalar = std::stod(v.front());
    return true;
  }, "scalar xi (N = 1)");
}

ModelParams resolve_params(const ParamArgs& a) {
  if (!a.params_file.empty()) return params_from_file(a.params_file);
  ModelParams p;
  p.K = a.K;
  p.N = a.N;
  p.L = a.L;
  p.M = a.M;
  if (a.sigma_scalar)
    p.sigma = Matrix::Constant(1, 1, *a.sigma_scalar);
  else if (!a.sigma_path.empty())
    p.sigma = read_matrix_csv(fs::path(a.sigma_path));
  else
    p.sigma = Matrix::Identity(p.K, p.K);
  if (a.xi_scalar)
    p.xi = Matrix::Constant(1, 1, *a.xi_scalar);
  else if (!a.xi_path.empty())
    p.xi = read_matrix_csv(fs::path(a.xi_path));
  else
    p.xi = Matrix::Identity(p.N, p.N);
  return p;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("HTW_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

json provenance(const std::string& subcommand, const json& config,
                std::optional<std::uint64_t> seed = std::nullopt) {
  json p{{"tool", "htw"},
         {"version", kToolVersion},
         {"rng", std::string(kRngVersion)},
         {"subcommand", subcommand},
         {"config", config}};
  if (seed) p["seed"] = *seed;
  return p;
}

json params_config(const ModelParams& p) { return params_to_json(p); }

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw IoError("cannot open for writing: " + out_path);
  f << j.dump(2) << '\n';
  if (!f.flush()) throw IoError("write failed: " + out_path);
}

ModelKind parse_model(const std::string& s) {
  if (s == "alg") return ModelKind::algebraic;
  if (s == "gauss") return ModelKind::gaussian;
  throw std::invalid_argument("model must be alg or gauss");
}

MomentOrder parse_order(const std::string& s) {
  if (s == "first" || s == "1") return MomentOrder::first;
  if (s == "second" || s == "2") return MomentOrder::second;
  if (s == "variance") return MomentOrder::variance;
  throw std::invalid_argument("order must be first, second or variance");
}

Side parse_side(const std::string& s) {
  if (s == "time") return Side::time;
  if (s == "position") return Side::position;
  throw std::invalid_argument("side must be time or position");
}

int run_density(const ParamArgs& pa, const std::string& model, const std::string& x_path,
                const std::string& out_path) {
  const ModelParams p = resolve_params(pa);
  const Matrix x = read_matrix_csv(fs::path(x_path));
  const double ld = parse_model(model) == ModelKind::algebraic ? log_density_alg(p, x)
                                                               : log_density_gauss(p, x);
  json out{{"log_density", ld},
           {"model", model},
           {"provenance", provenance("density", params_config(p))}};
  emit(out, out_path);
  return 0;
}

int run_moments(const ParamArgs& pa, const std::string& model, const std::string& order,
                const std::string& side, const std::string& format,
                const std::string& out_path) {
  const ModelParams p = resolve_params(pa);
  const ModelKind mk = parse_model(model);
  const MomentOrder mo = parse_order(order);
  const Side sd = parse_side(side);
  MomentReport rep;
  switch (mo) {
    case MomentOrder::first: rep = first_moment(p, mk, sd); break;
    case MomentOrder::second: rep = second_moment(p, mk, sd); break;
    case MomentOrder::variance: rep = matrix_variance(p, mk, sd); break;
  }
  if (format == "csv") {
    if (!rep.exists) {
      std::cerr << rep.message << '\n';
      return 2;
    }
    if (out_path.empty())
      write_matrix_csv(std::cout, rep.matrix);
    else
      write_matrix_csv(fs::path(out_path), rep.matrix);
    return 0;
  }
  json out{{"order", to_string(rep.order)},
           {"model", to_string(rep.model)},
           {"side", to_string(rep.side)},
           {"exists", rep.exists},
           {"matrix", rep.exists ? matrix_to_json(rep.matrix) : json(nullptr)},
           {"message", rep.message},
           {"provenance", provenance("moments", params_config(p))}};
  emit(out, out_path);
  return rep.exists ? 0 : 2;
}

int run_special(const std::string& which, const ParamArgs& pa, double a, double b, double gamma,
                int n_dim, int m_ins, double q, const std::string& r_path,
                const std::string& out_path) {
  double value_log = 0.0;
  json extra;
  if (which == "psi_d" || which == "psi_p" || which == "psi_m") {
    const PsiTriple t = psi_closed(pa.K, pa.N, pa.L);
    value_log = which == "psi_d" ? t.log_d : (which == "psi_p" ? t.log_p : t.log_m);
    extra = {{"K", pa.K}, {"N", pa.N}, {"L", pa.L}};
  } else if (which == "phi1") {
    const ModelParams p = resolve_params(pa);
    value_log = phi1(p);
    extra = params_config(p);
  } else if (which == "phi21" || which == "phi22") {
    const ModelParams p = resolve_params(pa);
    const Phi2Pair pr = phi2(p);
    value_log = which == "phi21" ? pr.log_phi21 : pr.log_phi22;
    extra = params_config(p);
  } else if (which == "aomoto") {
    value_log = aomoto_closed({a, b, gamma, n_dim, m_ins});
    extra = {{"a", a}, {"b", b}, {"gamma", gamma}, {"N", n_dim}, {"m", m_ins}};
  } else if (which == "laguerre") {
    value_log = aomoto_laguerre_limit(a, n_dim, m_ins);
    extra = {{"a", a}, {"N", n_dim}, {"m", m_ins}};
  } else if (which == "ingham_siegel") {
    const Matrix r = r_path.empty() ? Matrix::Identity(n_dim, n_dim)
                                    : read_matrix_csv(fs::path(r_path));
    value_log = ingham_siegel_closed(q, r);
    extra = {{"q", q}, {"N", r.rows()}};
  } else {
    throw std::invalid_argument("unknown special function: " + which);
  }
  json out{{"which", which},
           {"value_log", value_log},
           {"value", std::exp(value_log)},
           {"exists", true},
           {"provenance", provenance("special", extra)}};
  emit(out, out_path);
  return 0;
}

int run_sample(const ParamArgs& pa, const std::string& model, std::int64_t count,
               std::optional<std::uint64_t> seed_flag, std::uint64_t stream,
               const std::string& out_path) {
  const ModelParams p = resolve_params(pa);
  const std::uint64_t seed = resolve_seed(seed_flag);
  if (count < 1) throw std::invalid_argument("count must be positive");
  PhiloxRng rng(seed, stream);
  Matrix stacked(p.K * count, p.N);
  if (parse_model(model) == ModelKind::algebraic) {
    AlgSampler s(p);
    for (std::int64_t i = 0; i < count; ++i) stacked.middleRows(i * p.K, p.K) = s.draw(rng);
  } else {
    GaussSampler s(p);
    for (std::int64_t i = 0; i < count; ++i) stacked.middleRows(i * p.K, p.K) = s.draw(rng);
  }
  if (out_path.empty())
    write_matrix_csv(std::cout, stacked);
  else
    write_matrix_csv(fs::path(out_path), stacked);
  json prov{{"count", count},
            {"model", model},
            {"stream", stream},
            {"layout", "draws stacked row-wise, K rows per draw"},
            {"out", out_path},
            {"params", params_config(p)}};
  std::cerr << provenance("sample", prov, seed).dump(2) << '\n';
  return 0;
}

int run_mc_verify(const ParamArgs& pa, const std::string& model, std::int64_t count,
                  std::optional<std::uint64_t> seed_flag, int threads, std::int64_t chunk,
                  const std::string& out_path) {
  const ModelParams p = resolve_params(pa);
  const ModelKind mk = parse_model(model);
  const std::uint64_t seed = resolve_seed(seed_flag);
  json rows = json::array();
  double worst = 0.0;
  std::uint64_t stream = 0;
  auto push = [&](const std::string& target, const MomentReport& closed, MomentOrder order) {
    if (!closed.exists) return;
    const McEstimate est =
        estimate_moment_mc(p, mk, order, Side::time, count, {seed, stream}, threads, chunk);
    stream += 1u << 20;  // separate stream block per target
    double z = 0.0;
    for (Eigen::Index i = 0; i < closed.matrix.rows(); ++i)
      for (Eigen::Index j = 0; j < closed.matrix.cols(); ++j) {
        const double se = est.std_error(i, j);
        const double diff = est.mean(i, j) - closed.matrix(i, j);
        if (se > 0.0)
          z = std::max(z, std::abs(diff) / se);
        else if (diff != 0.0)
          z = std::numeric_limits<double>::infinity();
      }
    worst = std::max(worst, z);
    rows.push_back(json{{"target", target},
                        {"closed", matrix_to_json(closed.matrix)},
                        {"estimate", matrix_to_json(est.mean)},
                        {"std_error", matrix_to_json(est.std_error)},
                        {"max_abs_z", z},
                        {"count", est.count},
                        {"seconds", est.seconds}});
  };
  push("first", first_moment(p, mk, Side::time), MomentOrder::first);
  push("second", second_moment(p, mk, Side::time), MomentOrder::second);
  push("variance", matrix_variance(p, mk, Side::time), MomentOrder::variance);
  const bool pass = worst <= 3.0;
  json out{{"pass", pass},
           {"max_abs_z", worst},
           {"targets", rows},
           {"provenance", provenance("mc-verify", params_config(p), seed)}};
  emit(out, out_path);
  return pass ? 0 : 3;
}

int run_estimate(const std::string& data_dir, double L, const std::string& out_path) {
  std::vector<fs::path> files;
  {
    std::error_code ec;
    fs::directory_iterator it(data_dir, ec), end;
    if (ec) throw IoError("cannot read directory: " + data_dir);
    for (; it != end; ++it)
      if (it->path().extension() == ".csv") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .csv batches in " + data_dir);
  std::vector<DataMatrix> batches;
  batches.reserve(files.size());
  for (const auto& f : files) batches.push_back(read_matrix_csv(f));
  const EstimationResult res = estimate_sigma_xi(batches, L);
  json out{{"sigma_hat", matrix_to_json(res.sigma_hat)},
           {"xi_hat", matrix_to_json(res.xi_hat)},
           {"L", res.L},
           {"M", res.M},
           {"gauge", res.gauge},
           {"n_batches", res.n_batches},
           {"sweeps", res.sweeps},
           {"residual", res.residual},
           {"provenance", provenance("estimate", json{{"data", data_dir}, {"L", L}})}};
  emit(out, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-sided correlated heavy-tailed random matrix toolkit"};
  app.require_subcommand(1);

  // density
  auto* density = app.add_subcommand("density", "evaluate a log density at X");
  ParamArgs d_pa;
  std::string d_model = "alg", d_x, d_out;
  add_param_options(density, d_pa);
  density->add_option("--model", d_model, "alg or gauss");
  density->add_option("--X", d_x, "CSV file with the K x N data matrix")->required();
  density->add_option("--out", d_out, "output JSON path (default stdout)");

  // moments
  auto* moments = app.add_subcommand("moments", "closed-form matrix moments");
  ParamArgs m_pa;
  std::string m_model = "alg", m_order = "first", m_side = "time", m_format = "json", m_out;
  add_param_options(moments, m_pa);
  moments->add_option("--model", m_model, "alg or gauss");
  moments->add_option("--order", m_order, "first, second or variance");
  moments->add_option("--side", m_side, "time or position");
  moments->add_option("--format", m_format, "json or csv");
  moments->add_option("--out", m_out, "output path (default stdout)");

  // special
  auto* special = app.add_subcommand("special", "special-function values (log scale)");
  ParamArgs s_pa;
  std::string s_which, s_r, s_out;
  double s_a = 1.0, s_b = 1.0, s_gamma = 0.5, s_q = 1.0;
  int s_n = 1, s_m = 0;
  special->add_option("which", s_which,
                      "psi_d|psi_p|psi_m|phi1|phi21|phi22|aomoto|laguerre|ingham_siegel")
      ->required();
  add_param_options(special, s_pa);
  special->add_option("--a", s_a, "first exponent");
  special->add_option("--b", s_b, "second exponent");
  special->add_option("--gamma", s_gamma, "interaction exponent");
  special->add_option("--dim", s_n, "number of integration variables");
  special->add_option("--m", s_m, "number of inserted coordinates");
  special->add_option("--q", s_q, "determinant exponent");
  special->add_option("--R", s_r, "CSV file with the SPD matrix in the exponent");
  special->add_option("--out", s_out, "output JSON path (default stdout)");

  // sample
  auto* sample = app.add_subcommand("sample", "draw from a model");
  ParamArgs sa_pa;
  std::string sa_model = "alg", sa_out;
  std::int64_t sa_count = 1;
  std::optional<std::uint64_t> sa_seed;
  std::uint64_t sa_stream = 0;
  add_param_options(sample, sa_pa);
  sample->add_option("--model", sa_model, "alg or gauss");
  sample->add_option("--count", sa_count, "number of draws");
  sample->add_option("--seed", [&sa_seed](const std::vector<std::string>& v) {
    sa_seed = std::stoull(v.front());
    return true;
  }, "RNG seed (default: HTW_SEED env, then 0)");
  sample->add_option("--stream", sa_stream, "RNG stream id");
  sample->add_option("--out", sa_out, "output CSV path (default stdout)");

  // mc-verify
  auto* mcv = app.add_subcommand("mc-verify", "Monte Carlo check of the closed-form moments");
  ParamArgs mc_pa;
  std::string mc_model = "alg", mc_out;
  std::int64_t mc_count = 100000, mc_chunk = 0;
  std::optional<std::uint64_t> mc_seed;
  int mc_threads = 1;
  add_param_options(mcv, mc_pa);
  mcv->add_option("--model", mc_model, "alg or gauss");
  mcv->add_option("--count", mc_count, "number of draws per target");
  mcv->add_option("--seed", [&mc_seed](const std::vector<std::string>& v) {
    mc_seed = std::stoull(v.front());
    return true;
  }, "RNG seed (default: HTW_SEED env, then 0)");
  mcv->add_option("--threads", mc_threads, "worker threads");
  mcv->add_option("--chunk", mc_chunk, "draws per chunk (fixed-chunk reproducibility protocol)");
  mcv->add_option("--out", mc_out, "output JSON path (default stdout)");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "fit sigma and xi from batched data");
  std::string e_data, e_out;
  double e_L = 0.0;
  estimate->add_option("--data", e_data, "directory of CSV batches (one K x N matrix each)")
      ->required();
  estimate->add_option("--L", e_L, "tail index used for the matched scale")->required();
  estimate->add_option("--out", e_out, "output JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (density->parsed()) return run_density(d_pa, d_model, d_x, d_out);
    if (moments->parsed()) return run_moments(m_pa, m_model, m_order, m_side, m_format, m_out);
    if (special->parsed())
      return run_special(s_which, s_pa, s_a, s_b, s_gamma, s_n, s_m, s_q, s_r, s_out);
    if (sample->parsed()) return run_sample(sa_pa, sa_model, sa_count, sa_seed, sa_stream, sa_out);
    if (mcv->parsed())
      return run_mc_verify(mc_pa, mc_model, mc_count, mc_seed, mc_threads, mc_chunk, mc_out);
    if (estimate->parsed()) return run_estimate(e_data, e_L, e_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
