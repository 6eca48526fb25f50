// Command-line front end: design a sensing matrix from a problem JSON,
// evaluate a stored matrix, run the full Monte-Carlo experiment, or
// regenerate plot data from per-trial output.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csdesign/errors.hpp"
#include "csdesign/experiment.hpp"
#include "csdesign/io.hpp"
#include "csdesign/lmmse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw csd::IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw csd::InvalidInputError(path.string() + ": " + e.what());
  }
  return doc;
}

int run_design(const std::string& configPath, const std::string& outDir,
               bool force) {
  const csd::DesignProblem problem =
      csd::problem_from_json(load_json(configPath));
  const csd::DesignResult result = csd::design_sensing_matrix(problem);

  const std::filesystem::path dir(outDir);
  std::filesystem::create_directories(dir);
  const auto binPath = dir / "designed.mat";
  if (!force && std::filesystem::exists(binPath)) {
    throw csd::IoError(binPath.string() + " exists; pass --force to overwrite");
  }
  csd::write_matrix_binary(binPath, result.matrix.entries);
  csd::write_matrix_csv(dir / "designed.csv", result.matrix.entries);

  std::cout << "design: m=" << result.matrix.rows()
            << " n=" << result.matrix.cols()
            << " frobSq=" << csd::format9(result.matrix.frobSq())
            << " objective="
            << csd::format9(csd::design_objective(result.matrix.entries,
                                                  problem.sigmaX,
                                                  problem.sigmaC))
            << " rounds=" << result.state.objectiveTrace.size() << '\n';
  std::cout << "wrote " << binPath.string() << '\n';
  return kExitOk;
}

int run_evaluate(const std::string& matrixPath, const std::string& configPath) {
  const csd::DesignProblem problem =
      csd::problem_from_json(load_json(configPath));
  csd::SensingMatrix matrix{csd::read_matrix_binary(matrixPath), "supplied"};
  if (matrix.cols() != problem.dim()) {
    throw csd::InvalidInputError("matrix columns do not match the problem");
  }
  const double objective =
      csd::design_objective(matrix.entries, problem.sigmaX, problem.sigmaC);
  const double mse = csd::lmmse_mse(matrix, problem.sigmaX, problem.sigmaC);
  std::cout << "evaluate: m=" << matrix.rows() << " n=" << matrix.cols()
            << " frobSq=" << csd::format9(matrix.frobSq()) << " budget="
            << csd::format9(problem.alphaSq) << '\n'
            << "objective=" << csd::format9(objective)
            << " lmmseMse=" << csd::format9(mse)
            << " trSigmaX=" << csd::format9(problem.sigmaX.trace()) << '\n';
  return kExitOk;
}

int run_experiment_cmd(const std::string& configPath, std::uint64_t seed,
                       bool seedSet, int threads, const std::string& outDir,
                       bool force, const std::vector<std::string>& strategies) {
  csd::ExperimentConfig config = csd::config_from_json(load_json(configPath));
  if (seedSet) config.masterSeed = seed;
  if (!outDir.empty()) config.outDir = outDir;
  const std::vector<std::string> selected =
      strategies.empty() ? csd::kAllStrategies
                         : csd::canonical_strategies(strategies);

  const csd::ExperimentResults results = csd::run_experiment(
      config, selected, threads, [](const csd::GridPointResult& point) {
        std::cout << "point m=" << point.m
                  << " alphaSq=" << csd::format9(point.alphaSq)
                  << " lambda=" << csd::format9(point.lambda)
                  << " failed=" << point.failedTrials << '\n';
      });
  csd::emit_outputs(results, config.outDir, force);
  std::cout << "wrote " << config.outDir << "/trials.csv, aggregate.csv, "
            << "matrices.csv and panel files" << '\n';
  return kExitOk;
}

int run_replot(const std::string& trialsPath, const std::string& outDir,
               bool force) {
  csd::replot(trialsPath, outDir, force);
  std::cout << "wrote " << outDir << "/aggregate.csv and panel files" << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-enhanced compressive sensing matrix design toolkit"};
  app.require_subcommand(1);

  std::string configPath;
  std::string matrixPath;
  std::string trialsPath;
  std::string outDir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool force = false;
  std::vector<std::string> strategies;

  auto* design = app.add_subcommand("design", "design a sensing matrix");
  design->add_option("--config", configPath, "problem JSON")->required();
  design->add_option("--out", outDir, "output directory")->default_val("design-out");
  design->add_flag("--force", force, "overwrite existing outputs");

  auto* evaluate =
      app.add_subcommand("evaluate", "objective/MSE of a stored matrix");
  evaluate->add_option("--matrix", matrixPath, "matrix binary")->required();
  evaluate->add_option("--config", configPath, "problem JSON")->required();

  auto* experiment =
      app.add_subcommand("experiment", "full Monte-Carlo comparison");
  experiment->add_option("--config", configPath, "experiment JSON")->required();
  auto* seedOpt = experiment->add_option("--seed", seed, "master seed override");
  experiment->add_option("--threads", threads, "worker threads")->default_val(1);
  experiment->add_option("--out", outDir, "output directory override");
  experiment->add_flag("--force", force, "overwrite existing outputs");
  experiment->add_option("--strategies", strategies,
                         "comma-separated strategy subset")
      ->delimiter(',');

  auto* replotCmd =
      app.add_subcommand("replot", "regenerate plot data from trials.csv");
  replotCmd->add_option("--trials", trialsPath, "per-trial CSV")->required();
  replotCmd->add_option("--out", outDir, "output directory")->required();
  replotCmd->add_flag("--force", force, "overwrite existing outputs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed()) return run_design(configPath, outDir, force);
    if (evaluate->parsed()) return run_evaluate(matrixPath, configPath);
    if (experiment->parsed()) {
      return run_experiment_cmd(configPath, seed, seedOpt->count() > 0, threads,
                                outDir, force, strategies);
    }
    if (replotCmd->parsed()) return run_replot(trialsPath, outDir, force);
  } catch (const csd::InvalidInputError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const csd::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const csd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
