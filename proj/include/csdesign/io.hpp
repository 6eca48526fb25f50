#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "csdesign/design.hpp"
#include "csdesign/prior.hpp"

namespace csd {

/// Formats a double with 9 significant digits; round-trips through
/// parse_double to the value every emitted table is aggregated from.
std::string format9(double value);
double parse_double(const std::string& text);

/// Prior JSON: {"dim": n, "components": [{"weight": w, "cov": [n*n row-major]}]}
MixturePrior prior_from_json(const nlohmann::json& doc);
nlohmann::json prior_to_json(const MixturePrior& prior);

/// Problem JSON: {"n", "sigmaX": [row-major], "sigmaC": [row-major],
/// "m", "alphaSq", "iterations", "ridge"}; sigmaX/sigmaC may be replaced
/// by "priorX"/"priorC" prior documents, which are averaged.
DesignProblem problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const DesignProblem& problem);

/// Dense row-major float64 with a 16-byte header: 8-byte magic
/// "CSDMAT1\0", uint32 rows, uint32 cols (little endian).
void write_matrix_binary(const std::filesystem::path& path,
                         const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& matrix);

}  // namespace csd
