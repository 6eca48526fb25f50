#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "csdesign/baselines.hpp"
#include "csdesign/design.hpp"
#include "csdesign/group_lasso.hpp"
#include "csdesign/prior.hpp"

namespace csd {

/// Canonical strategy order; outputs always follow it.
inline const std::vector<std::string> kAllStrategies = {
    "designed", "random", "lowrank-wiener", "clutter-as-signal"};

/// Validates, dedupes and reorders a requested strategy subset into
/// canonical order. Empty or unknown input is an error.
std::vector<std::string> canonical_strategies(
    std::span<const std::string> requested);

struct ExperimentConfig {
  int n = 40;
  int mx = 6;
  int mc = 6;
  int rank = 4;
  std::vector<int> mList = {8, 16, 24, 32};
  std::vector<double> alphaSqGrid = {4.0, 16.0, 64.0, 256.0, 1024.0};
  int trials = 200;
  std::uint64_t masterSeed = 20260801;
  int designIterations = 30;
  std::vector<double> lambdaGrid;  // empty: auto grid per grid point
  int calibrationTrials = 20;
  double ridge = 0.0;
  int solverMaxIter = 2000;
  double solverTol = 1e-6;
  bool commonNoise = false;
  double modelScale = 1.0;
  std::string outDir = "results";

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct SnrValue {
  double db = 0.0;
  bool saturated = false;
};

/// 20 log10(||x|| / ||x - xhat||), capped at +240 dB (saturated flag set)
/// when the error is below 1e-12 ||x||. x = 0 is invalid.
SnrValue reconstruction_snr(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& xhat);

struct StrategyOutcome {
  double snrDb = 0.0;
  bool saturated = false;
  double residualNorm = 0.0;  // ||y - Phi beta||
  bool converged = false;
  bool failed = true;
  std::string failReason;
  double solveMs = 0.0;  // in-memory diagnostic, never written to CSV
};

struct TrialRecord {
  int trial = 0;
  int modelIndexX = -1;
  int modelIndexC = -1;
  std::vector<StrategyOutcome> outcomes;  // parallel to the strategy list

  bool failed() const {
    for (const auto& o : outcomes) {
      if (o.failed) return true;
    }
    return false;
  }
};

/// Model set shared by every grid point of one experiment seed.
struct ModelSet {
  MixturePrior priorX;
  MixturePrior priorC;
  CovarianceMatrix sigmaX;
  CovarianceMatrix sigmaC;
  GroupDictionary dictionary;
};

ModelSet generate_models(const ExperimentConfig& config);

/// Immutable inputs for running trials at one (m, alphaSq) grid point.
struct PointSetup {
  const ExperimentConfig* config = nullptr;
  const ModelSet* models = nullptr;
  std::span<const std::string> strategies;
  std::span<const SensingMatrix> matrices;  // parallel to strategies
  std::vector<Eigen::MatrixXd> phis;        // A_s * D, parallel to strategies
  double lambda = 0.0;
  int mIndex = 0;
  int alphaIndex = 0;
  bool calibration = false;
};

PointSetup make_point_setup(const ExperimentConfig& config,
                            const ModelSet& models,
                            std::span<const std::string> strategies,
                            std::span<const SensingMatrix> matrices,
                            double lambda, int mIndex, int alphaIndex);

/// One Monte-Carlo draw: realization, per-strategy measurement, group
/// lasso recovery, SNR. Failures are captured in the outcome, never
/// thrown. Trial streams are derived by counter-based splitting, so the
/// result depends only on (config, setup, trialIndex).
TrialRecord run_single_trial(const PointSetup& setup, int trialIndex);

/// Serial reference driver.
std::vector<TrialRecord> run_trials_serial(const PointSetup& setup, int count);

/// OpenMP driver; produces records identical to the serial reference for
/// any thread count or schedule.
std::vector<TrialRecord> run_trials_parallel(const PointSetup& setup,
                                             int count, int threads);

/// Grid value maximizing mean calibration SNR (pooled over strategies);
/// ties go to the smallest lambda. The calibration trials use RNG
/// streams disjoint from evaluation trials.
double select_lambda(std::span<const double> grid, PointSetup& setup,
                     int threads);

/// Six log-spaced candidates on [1e-3, 1e1] times a lambda_max estimate
/// averaged over probe draws at this grid point.
std::vector<double> auto_lambda_grid(const PointSetup& setup);

struct GridPointResult {
  int m = 0;
  double alphaSq = 0.0;
  double lambda = 0.0;
  std::vector<SensingMatrix> matrices;
  std::vector<TrialRecord> trials;
  int failedTrials = 0;
};

struct ExperimentResults {
  ExperimentConfig config;
  std::vector<std::string> strategies;
  std::vector<GridPointResult> points;
};

/// Full grid run: builds the model set once, designs the selected
/// strategies' matrices per (m, alphaSq), calibrates lambda, runs the
/// trials (threads == 1 uses the serial reference driver) and audits the
/// energy budget of every emitted matrix. A grid point with more than
/// 10% failed trials aborts the experiment.
ExperimentResults run_experiment(
    const ExperimentConfig& config, std::span<const std::string> strategies,
    int threads,
    const std::function<void(const GridPointResult&)>& onPoint = {});

/// Writes trials.csv, aggregate.csv, matrices.csv and one plot-ready
/// panel_m<M>.csv per panel. Aggregates are computed from the formatted
/// per-trial values, so `replot` reproduces them byte-for-byte. Refuses
/// to overwrite existing outputs unless force is set.
void emit_outputs(const ExperimentResults& results,
                  const std::filesystem::path& directory, bool force);

/// Rebuilds aggregate.csv and the panel files from an existing
/// trials.csv.
void replot(const std::filesystem::path& trialsCsv,
            const std::filesystem::path& directory, bool force);

}  // namespace csd
