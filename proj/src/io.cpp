#include "htw/io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace htw {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix_csv(std::ostream& os, const MatrixRef& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixRef& m) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  write_matrix_csv(f, m);
  f.flush();
  if (!f) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_csv(std::istream& is, const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      // strtod instead of stod: stod raises out_of_range on subnormal results
      // (glibc flags ERANGE), which would reject values the writer produces.
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      const char* tail = end;
      const char* stop = begin + cell.size();
      while (tail != stop && std::isspace(static_cast<unsigned char>(*tail))) ++tail;
      if (end == begin || tail != stop)
        throw IoError("non-numeric cell '" + cell + "' in " + what);
      row.push_back(v);
    }
    // getline never yields a field after a trailing delimiter, so catch the
    // dangling comma explicitly instead of silently narrowing the row.
    if (line.back() == ',') throw IoError("non-numeric cell '' in " + what);
    if (row.empty()) throw IoError("empty row in " + what);
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged rows in " + what);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("no data in " + what);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  return read_matrix_csv(f, path.string());
}

nlohmann::json matrix_to_json(const MatrixRef& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw IoError(what + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw IoError(what + " rows must be non-empty arrays");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw IoError(what + " has ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw IoError(what + " has a non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

ModelParams params_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ModelParams p;
  try {
    p.K = j.at("K").get<int>();
    p.N = j.at("N").get<int>();
    p.L = j.at("L").get<double>();
    p.M = j.at("M").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad parameter file: ") + e.what());
  }
  auto load_side = [&](const char* key, const char* path_key, int dim) -> Matrix {
    if (j.contains(key)) return matrix_from_json(j.at(key), key);
    if (j.contains(path_key)) {
      std::filesystem::path rel = j.at(path_key).get<std::string>();
      return read_matrix_csv(rel.is_absolute() ? rel : base_dir / rel);
    }
    return Matrix::Identity(dim, dim);
  };
  p.sigma = load_side("sigma", "sigma_path", p.K);
  p.xi = load_side("xi", "xi_path", p.N);
  return p;
}

ModelParams params_from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad JSON in " + path.string() + ": " + e.what());
  }
  return params_from_json(j, path.parent_path());
}

nlohmann::json params_to_json(const ModelParams& p) {
  return nlohmann::json{{"K", p.K},
                        {"N", p.N},
                        {"L", p.L},
                        {"M", p.M},
                        {"sigma", matrix_to_json(p.sigma)},
                        {"xi", matrix_to_json(p.xi)}};
}

}  // namespace htw
