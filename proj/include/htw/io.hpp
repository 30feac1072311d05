#pragma once

// CSV matrix serialization (17 significant digits, so doubles round-trip
// bit-exactly) and JSON (de)serialization of model parameters.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "htw/model.hpp"
#include "htw/types.hpp"

namespace htw {

// Raised for unreadable/unwritable files and malformed input content; the
// CLI maps it to its I/O exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_matrix_csv(std::ostream& os, const MatrixRef& m);
void write_matrix_csv(const std::filesystem::path& path, const MatrixRef& m);

Matrix read_matrix_csv(std::istream& is, const std::string& what = "stream");
Matrix read_matrix_csv(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const MatrixRef& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);

// Parses {"K":, "N":, "L":, "M":, "sigma": [[...]] | "sigma_path": "f.csv",
// "xi": ... | "xi_path": ...}. Relative paths resolve against base_dir.
ModelParams params_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ModelParams params_from_file(const std::filesystem::path& path);

nlohmann::json params_to_json(const ModelParams& p);

}  // namespace htw
