#include "csdesign/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "csdesign/errors.hpp"

namespace csd {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'D', 'M', 'A', 'T', '1', '\0'};

Eigen::MatrixXd square_from_row_major(const nlohmann::json& arr, int n,
                                      const std::string& name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != n * n) {
    throw InvalidInputError(name + ": expected " + std::to_string(n * n) +
                            " row-major entries");
  }
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = arr[static_cast<std::size_t>(i * n + j)].get<double>();
    }
  }
  return out;
}

nlohmann::json row_major(const Eigen::MatrixXd& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  }
  return arr;
}

}  // namespace

std::string format9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

double parse_double(const std::string& text) {
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw IoError("cannot parse number: '" + text + "'");
  }
}

MixturePrior prior_from_json(const nlohmann::json& doc) {
  if (!doc.contains("dim") || !doc.contains("components")) {
    throw InvalidInputError("prior JSON needs 'dim' and 'components'");
  }
  const int n = doc.at("dim").get<int>();
  std::vector<MixtureComponent> components;
  for (const auto& comp : doc.at("components")) {
    components.push_back(MixtureComponent{
        comp.at("weight").get<double>(),
        CovarianceMatrix(square_from_row_major(comp.at("cov"), n, "cov"))});
  }
  return MixturePrior(n, std::move(components));
}

nlohmann::json prior_to_json(const MixturePrior& prior) {
  nlohmann::json doc;
  doc["dim"] = prior.dim();
  doc["components"] = nlohmann::json::array();
  for (const auto& comp : prior.components()) {
    doc["components"].push_back(
        {{"weight", comp.weight}, {"cov", row_major(comp.cov.entries())}});
  }
  return doc;
}

DesignProblem problem_from_json(const nlohmann::json& doc) {
  if (!doc.contains("n")) throw InvalidInputError("problem JSON needs 'n'");
  const int n = doc.at("n").get<int>();

  auto covariance = [&](const char* matKey, const char* priorKey) {
    if (doc.contains(matKey)) {
      return CovarianceMatrix(square_from_row_major(doc.at(matKey), n, matKey));
    }
    if (doc.contains(priorKey)) {
      return average_covariance(prior_from_json(doc.at(priorKey)));
    }
    throw InvalidInputError(std::string("problem JSON needs '") + matKey +
                            "' or '" + priorKey + "'");
  };

  DesignProblem problem{covariance("sigmaX", "priorX"),
                        covariance("sigmaC", "priorC"),
                        doc.at("m").get<int>(),
                        doc.at("alphaSq").get<double>(),
                        doc.value("iterations", 30),
                        doc.value("ridge", 0.0)};
  problem.validate();
  return problem;
}

nlohmann::json problem_to_json(const DesignProblem& problem) {
  return nlohmann::json{{"n", problem.dim()},
                        {"sigmaX", row_major(problem.sigmaX.entries())},
                        {"sigmaC", row_major(problem.sigmaC.entries())},
                        {"m", problem.m},
                        {"alphaSq", problem.alphaSq},
                        {"iterations", problem.iterations},
                        {"ridge", problem.ridge}};
}

void write_matrix_binary(const std::filesystem::path& path,
                         const Eigen::MatrixXd& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 8);
  const std::uint32_t rows = static_cast<std::uint32_t>(matrix.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(matrix.cols());
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  for (int i = 0; i < matrix.rows(); ++i) {
    for (int j = 0; j < matrix.cols(); ++j) {
      const double v = matrix(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError(path.string() + ": not a matrix file (bad header)");
  }
  Eigen::MatrixXd out(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      out(i, j) = v;
    }
  }
  if (!in) throw IoError(path.string() + ": truncated matrix file");
  return out;
}

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::MatrixXd& matrix) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (int i = 0; i < matrix.rows(); ++i) {
    for (int j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ',';
      out << format9(matrix(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace csd
