#include "csdesign/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "csdesign/errors.hpp"
#include "csdesign/io.hpp"
#include "csdesign/lmmse.hpp"
#include "csdesign/rng.hpp"

namespace csd {

namespace {

namespace tag {
constexpr std::uint64_t kModels = 1;
constexpr std::uint64_t kRandomDesign = 2;
constexpr std::uint64_t kTrial = 3;
constexpr std::uint64_t kCalibration = 4;
constexpr std::uint64_t kNoise = 5;
constexpr std::uint64_t kCalibNoise = 6;
constexpr std::uint64_t kLambdaProbe = 7;
constexpr std::uint64_t kLambdaProbeNoise = 8;
}  // namespace tag

constexpr double kSnrCapDb = 240.0;
constexpr double kBudgetAuditSlack = 1e-8;

const char* kTrialsHeader =
    "m,alphaSq,lambda,trial,modelX,modelC,strategy,snrDb,saturated,"
    "residualNorm,converged,failed";
const char* kAggregateHeader =
    "m,alphaSq,strategy,trials,meanSnrDb,medianSnrDb,stderrSnrDb";

int canonical_index(const std::string& strategy) {
  for (std::size_t i = 0; i < kAllStrategies.size(); ++i) {
    if (kAllStrategies[i] == strategy) return static_cast<int>(i);
  }
  throw InvalidInputError("unknown strategy '" + strategy + "'");
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::vector<std::string> canonical_strategies(
    std::span<const std::string> requested) {
  if (requested.empty()) {
    throw InvalidInputError("strategy list must not be empty");
  }
  std::vector<bool> selected(kAllStrategies.size(), false);
  for (const auto& name : requested) {
    selected[static_cast<std::size_t>(canonical_index(name))] = true;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kAllStrategies.size(); ++i) {
    if (selected[i]) out.push_back(kAllStrategies[i]);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (n < 1) throw InvalidInputError("config: n must be positive");
  if (mx < 1 || mc < 1) {
    throw InvalidInputError("config: mx and mc must be positive");
  }
  if (rank < 1 || rank > n) throw InvalidInputError("config: need 1 <= rank <= n");
  if (mList.empty()) throw InvalidInputError("config: mList must not be empty");
  for (int m : mList) {
    if (m < 1 || m > n) throw InvalidInputError("config: mList entries must lie in [1, n]");
  }
  if (alphaSqGrid.empty()) {
    throw InvalidInputError("config: alphaSqGrid must not be empty");
  }
  double prev = 0.0;
  for (double a : alphaSqGrid) {
    if (!(a > prev)) {
      throw InvalidInputError(
          "config: alphaSqGrid must be strictly increasing and positive");
    }
    prev = a;
  }
  if (trials < 1) throw InvalidInputError("config: trials must be >= 1");
  if (designIterations < 1) {
    throw InvalidInputError("config: designIterations must be >= 1");
  }
  for (double l : lambdaGrid) {
    if (l < 0.0 || !std::isfinite(l)) {
      throw InvalidInputError("config: lambdaGrid entries must be nonnegative");
    }
  }
  if (calibrationTrials < 0) {
    throw InvalidInputError("config: calibrationTrials must be >= 0");
  }
  if (solverMaxIter < 1) throw InvalidInputError("config: solverMaxIter must be >= 1");
  if (!(solverTol > 0.0)) throw InvalidInputError("config: solverTol must be positive");
  if (ridge < 0.0) throw InvalidInputError("config: ridge must be nonnegative");
  if (!(modelScale > 0.0)) {
    throw InvalidInputError("config: modelScale must be positive");
  }
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  static const std::vector<std::string> known = {
      "n",           "mx",
      "mc",          "rank",
      "mList",       "alphaSqGrid",
      "trials",      "masterSeed",
      "designIterations", "lambdaGrid",
      "calibrationTrials", "ridge",
      "solverMaxIter", "solverTol",
      "commonNoise", "modelScale",
      "outDir"};
  for (const auto& item : doc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw InvalidInputError("config: unknown key '" + item.key() + "'");
    }
  }
  ExperimentConfig cfg;
  cfg.n = doc.value("n", cfg.n);
  cfg.mx = doc.value("mx", cfg.mx);
  cfg.mc = doc.value("mc", cfg.mc);
  cfg.rank = doc.value("rank", cfg.rank);
  cfg.mList = doc.value("mList", cfg.mList);
  cfg.alphaSqGrid = doc.value("alphaSqGrid", cfg.alphaSqGrid);
  cfg.trials = doc.value("trials", cfg.trials);
  cfg.masterSeed = doc.value("masterSeed", cfg.masterSeed);
  cfg.designIterations = doc.value("designIterations", cfg.designIterations);
  cfg.lambdaGrid = doc.value("lambdaGrid", cfg.lambdaGrid);
  cfg.calibrationTrials = doc.value("calibrationTrials", cfg.calibrationTrials);
  cfg.ridge = doc.value("ridge", cfg.ridge);
  cfg.solverMaxIter = doc.value("solverMaxIter", cfg.solverMaxIter);
  cfg.solverTol = doc.value("solverTol", cfg.solverTol);
  cfg.commonNoise = doc.value("commonNoise", cfg.commonNoise);
  cfg.modelScale = doc.value("modelScale", cfg.modelScale);
  cfg.outDir = doc.value("outDir", cfg.outDir);
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  return nlohmann::json{{"n", config.n},
                        {"mx", config.mx},
                        {"mc", config.mc},
                        {"rank", config.rank},
                        {"mList", config.mList},
                        {"alphaSqGrid", config.alphaSqGrid},
                        {"trials", config.trials},
                        {"masterSeed", config.masterSeed},
                        {"designIterations", config.designIterations},
                        {"lambdaGrid", config.lambdaGrid},
                        {"calibrationTrials", config.calibrationTrials},
                        {"ridge", config.ridge},
                        {"solverMaxIter", config.solverMaxIter},
                        {"solverTol", config.solverTol},
                        {"commonNoise", config.commonNoise},
                        {"modelScale", config.modelScale},
                        {"outDir", config.outDir}};
}

SnrValue reconstruction_snr(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& xhat) {
  if (x.size() != xhat.size()) {
    throw InvalidInputError("reconstruction_snr: dimension mismatch");
  }
  const double xNorm = x.norm();
  if (xNorm == 0.0) {
    throw InvalidInputError("reconstruction_snr: x = 0, metric undefined");
  }
  const double errNorm = (x - xhat).norm();
  if (errNorm < 1e-12 * xNorm) return SnrValue{kSnrCapDb, true};
  return SnrValue{20.0 * std::log10(xNorm / errNorm), false};
}

ModelSet generate_models(const ExperimentConfig& config) {
  RngStream rng = RngStream::derived(config.masterSeed, {tag::kModels});
  std::vector<CovarianceMatrix> signalCovs;
  std::vector<CovarianceMatrix> clutterCovs;
  signalCovs.reserve(static_cast<std::size_t>(config.mx));
  clutterCovs.reserve(static_cast<std::size_t>(config.mc));
  for (int i = 0; i < config.mx; ++i) {
    signalCovs.push_back(
        random_rank_r_covariance(config.n, config.rank, config.modelScale, rng));
  }
  for (int i = 0; i < config.mc; ++i) {
    clutterCovs.push_back(
        random_rank_r_covariance(config.n, config.rank, config.modelScale, rng));
  }
  auto uniformPrior = [&](const std::vector<CovarianceMatrix>& covs) {
    std::vector<MixtureComponent> comps;
    comps.reserve(covs.size());
    for (const auto& cov : covs) {
      comps.push_back(MixtureComponent{1.0 / static_cast<double>(covs.size()), cov});
    }
    return MixturePrior(config.n, std::move(comps));
  };
  MixturePrior priorX = uniformPrior(signalCovs);
  MixturePrior priorC = uniformPrior(clutterCovs);
  CovarianceMatrix sigmaX = average_covariance(priorX);
  CovarianceMatrix sigmaC = average_covariance(priorC);
  GroupDictionary dict = build_dictionary(signalCovs, clutterCovs, config.rank);
  return ModelSet{std::move(priorX), std::move(priorC), std::move(sigmaX),
                  std::move(sigmaC), std::move(dict)};
}

PointSetup make_point_setup(const ExperimentConfig& config,
                            const ModelSet& models,
                            std::span<const std::string> strategies,
                            std::span<const SensingMatrix> matrices,
                            double lambda, int mIndex, int alphaIndex) {
  if (strategies.size() != matrices.size()) {
    throw InvalidInputError("point setup: strategy/matrix count mismatch");
  }
  PointSetup setup;
  setup.config = &config;
  setup.models = &models;
  setup.strategies = strategies;
  setup.matrices = matrices;
  setup.lambda = lambda;
  setup.mIndex = mIndex;
  setup.alphaIndex = alphaIndex;
  setup.phis.reserve(matrices.size());
  for (const auto& mat : matrices) {
    setup.phis.push_back(mat.entries * models.dictionary.D);
  }
  return setup;
}

TrialRecord run_single_trial(const PointSetup& setup, int trialIndex) {
  const ExperimentConfig& cfg = *setup.config;
  const ModelSet& models = *setup.models;
  const std::uint64_t mi = static_cast<std::uint64_t>(setup.mIndex);
  const std::uint64_t ai = static_cast<std::uint64_t>(setup.alphaIndex);
  const std::uint64_t t = static_cast<std::uint64_t>(trialIndex);
  const std::uint64_t trialTag = setup.calibration ? tag::kCalibration : tag::kTrial;
  const std::uint64_t noiseTag = setup.calibration ? tag::kCalibNoise : tag::kNoise;

  TrialRecord rec;
  rec.trial = trialIndex;
  rec.outcomes.resize(setup.strategies.size());
  try {
    RngStream stream = RngStream::derived(cfg.masterSeed, {trialTag, mi, ai, t});
    const Realization real =
        sample_realization(models.priorX, models.priorC, stream);
    rec.modelIndexX = real.modelIndexX;
    rec.modelIndexC = real.modelIndexC;

    for (std::size_t s = 0; s < setup.strategies.size(); ++s) {
      StrategyOutcome& out = rec.outcomes[s];
      try {
        const std::uint64_t noiseSlot =
            cfg.commonNoise
                ? 0
                : static_cast<std::uint64_t>(canonical_index(setup.strategies[s]));
        RngStream noise = RngStream::derived(
            cfg.masterSeed, {noiseTag, mi, ai, t, noiseSlot});
        const Measurement meas = measure(setup.matrices[s], real, noise);

        const double start = now_ms();
        const GroupLassoSolution sol =
            group_lasso(meas.y, setup.phis[s], models.dictionary, setup.lambda,
                        cfg.solverMaxIter, cfg.solverTol);
        out.solveMs = now_ms() - start;

        const Eigen::VectorXd xhat = extract_signal(sol, models.dictionary);
        const SnrValue snr = reconstruction_snr(real.x, xhat);
        out.snrDb = snr.db;
        out.saturated = snr.saturated;
        out.residualNorm = (meas.y - setup.phis[s] * sol.beta).norm();
        out.converged = sol.converged;
        out.failed = false;
      } catch (const std::exception& e) {
        out.failed = true;
        out.failReason = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& out : rec.outcomes) {
      out.failed = true;
      out.failReason = e.what();
    }
  }
  return rec;
}

std::vector<TrialRecord> run_trials_serial(const PointSetup& setup, int count) {
  std::vector<TrialRecord> records(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    records[static_cast<std::size_t>(t)] = run_single_trial(setup, t);
  }
  return records;
}

std::vector<TrialRecord> run_trials_parallel(const PointSetup& setup, int count,
                                             int threads) {
  if (threads < 1) throw InvalidInputError("run_trials_parallel: threads >= 1");
  std::vector<TrialRecord> records(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int t = 0; t < count; ++t) {
    records[static_cast<std::size_t>(t)] = run_single_trial(setup, t);
  }
  return records;
}

std::vector<double> auto_lambda_grid(const PointSetup& setup) {
  const ExperimentConfig& cfg = *setup.config;
  const ModelSet& models = *setup.models;
  const std::uint64_t mi = static_cast<std::uint64_t>(setup.mIndex);
  const std::uint64_t ai = static_cast<std::uint64_t>(setup.alphaIndex);
  const int probes = std::max(1, cfg.calibrationTrials);

  double sum = 0.0;
  int count = 0;
  for (int t = 0; t < probes; ++t) {
    RngStream stream = RngStream::derived(
        cfg.masterSeed, {tag::kLambdaProbe, mi, ai, static_cast<std::uint64_t>(t)});
    const Realization real =
        sample_realization(models.priorX, models.priorC, stream);
    for (std::size_t s = 0; s < setup.strategies.size(); ++s) {
      const std::uint64_t noiseSlot =
          cfg.commonNoise
              ? 0
              : static_cast<std::uint64_t>(canonical_index(setup.strategies[s]));
      RngStream noise = RngStream::derived(
          cfg.masterSeed,
          {tag::kLambdaProbeNoise, mi, ai, static_cast<std::uint64_t>(t), noiseSlot});
      const Measurement meas = measure(setup.matrices[s], real, noise);
      sum += lambda_max(meas.y, setup.phis[s], models.dictionary);
      ++count;
    }
  }
  const double estimate = count > 0 ? sum / count : 0.0;
  std::vector<double> grid;
  grid.reserve(6);
  for (int k = 0; k < 6; ++k) {
    // exponents -3, -2.2, ..., +1
    grid.push_back(estimate * std::pow(10.0, -3.0 + 0.8 * k));
  }
  return grid;
}

double select_lambda(std::span<const double> grid, PointSetup& setup,
                     int threads) {
  if (grid.empty()) throw InvalidInputError("select_lambda: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() == 1) return sorted.front();
  const ExperimentConfig& cfg = *setup.config;
  if (cfg.calibrationTrials < 1) {
    throw InvalidInputError(
        "select_lambda: calibrationTrials must be >= 1 to select from a grid");
  }

  const bool wasCalibration = setup.calibration;
  const double oldLambda = setup.lambda;
  setup.calibration = true;
  double bestLambda = sorted.front();
  double bestScore = -std::numeric_limits<double>::infinity();
  for (double candidate : sorted) {
    setup.lambda = candidate;
    const std::vector<TrialRecord> records =
        threads == 1 ? run_trials_serial(setup, cfg.calibrationTrials)
                     : run_trials_parallel(setup, cfg.calibrationTrials, threads);
    double sum = 0.0;
    int count = 0;
    for (const auto& rec : records) {
      for (const auto& out : rec.outcomes) {
        if (!out.failed) {
          sum += out.snrDb;
          ++count;
        }
      }
    }
    const double score =
        count > 0 ? sum / count : -std::numeric_limits<double>::infinity();
    if (score > bestScore) {
      bestScore = score;
      bestLambda = candidate;
    }
  }
  setup.calibration = wasCalibration;
  setup.lambda = oldLambda;
  return bestLambda;
}

ExperimentResults run_experiment(
    const ExperimentConfig& config, std::span<const std::string> strategies,
    int threads, const std::function<void(const GridPointResult&)>& onPoint) {
  config.validate();
  if (threads < 1) throw InvalidInputError("run_experiment: threads must be >= 1");
  const std::vector<std::string> selected = canonical_strategies(strategies);
  const ModelSet models = generate_models(config);

  ExperimentResults results{config, selected, {}};
  for (std::size_t mi = 0; mi < config.mList.size(); ++mi) {
    const int m = config.mList[mi];
    for (std::size_t ai = 0; ai < config.alphaSqGrid.size(); ++ai) {
      const double alphaSq = config.alphaSqGrid[ai];

      std::vector<SensingMatrix> matrices;
      matrices.reserve(selected.size());
      for (const auto& name : selected) {
        if (name == "designed") {
          DesignProblem problem{models.sigmaX, models.sigmaC, m, alphaSq,
                                config.designIterations, config.ridge};
          matrices.push_back(design_sensing_matrix(problem).matrix);
        } else if (name == "random") {
          RngStream rng = RngStream::derived(
              config.masterSeed,
              {tag::kRandomDesign, static_cast<std::uint64_t>(mi),
               static_cast<std::uint64_t>(ai)});
          matrices.push_back(random_design(m, config.n, alphaSq, rng));
        } else if (name == "lowrank-wiener") {
          matrices.push_back(lowrank_wiener_design(models.sigmaX, models.sigmaC,
                                                   m, alphaSq, config.ridge));
        } else {
          matrices.push_back(clutter_as_signal_design(
              models.sigmaX, models.sigmaC, m, alphaSq,
              config.designIterations, config.ridge));
        }
        // budget fairness audit
        const double frob = matrices.back().frobSq();
        if (frob > alphaSq * (1.0 + kBudgetAuditSlack)) {
          throw NumericalError("strategy '" + name + "' exceeds the budget: " +
                               format9(frob) + " > " + format9(alphaSq));
        }
      }

      PointSetup setup =
          make_point_setup(config, models, selected, matrices, 0.0,
                           static_cast<int>(mi), static_cast<int>(ai));
      double lambda;
      if (config.lambdaGrid.size() == 1) {
        lambda = config.lambdaGrid.front();
      } else if (!config.lambdaGrid.empty()) {
        lambda = select_lambda(config.lambdaGrid, setup, threads);
      } else {
        const std::vector<double> grid = auto_lambda_grid(setup);
        lambda = select_lambda(grid, setup, threads);
      }
      setup.lambda = lambda;

      std::vector<TrialRecord> trials =
          threads == 1 ? run_trials_serial(setup, config.trials)
                       : run_trials_parallel(setup, config.trials, threads);
      int failed = 0;
      for (const auto& rec : trials) {
        if (rec.failed()) ++failed;
      }
      if (failed * 10 > config.trials) {
        std::string firstReason;
        for (const auto& rec : trials) {
          for (const auto& out : rec.outcomes) {
            if (out.failed) {
              firstReason = out.failReason;
              break;
            }
          }
          if (!firstReason.empty()) break;
        }
        throw NumericalError(
            "grid point m=" + std::to_string(m) + " alphaSq=" + format9(alphaSq) +
            ": " + std::to_string(failed) + "/" + std::to_string(config.trials) +
            " trials failed (first: " + firstReason + ")");
      }

      GridPointResult point{m,       alphaSq, lambda, std::move(matrices),
                            std::move(trials), failed};
      if (onPoint) onPoint(point);
      results.points.push_back(std::move(point));
    }
  }
  return results;
}

namespace {

struct TrialRow {
  int m = 0;
  double alphaSq = 0.0;
  std::string strategy;
  double snrDb = 0.0;
  bool failed = false;
};

struct Stats {
  int count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double stderrMean = std::numeric_limits<double>::quiet_NaN();
};

Stats compute_stats(const std::vector<double>& values) {
  Stats out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / out.count;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  out.median = sorted.size() % 2 == 1
                   ? sorted[mid]
                   : 0.5 * (sorted[mid - 1] + sorted[mid]);
  if (out.count > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stderrMean = std::sqrt(sq / (out.count - 1)) / std::sqrt(double(out.count));
  } else {
    out.stderrMean = 0.0;
  }
  return out;
}

/// Writes aggregate.csv and the per-panel plot files from parsed trial
/// rows; shared by emit_outputs and replot so both produce identical
/// bytes from the same rows.
void write_aggregates(const std::vector<TrialRow>& rows,
                      const std::filesystem::path& directory, bool force) {
  // first-seen orders
  std::vector<int> mOrder;
  std::vector<std::pair<int, double>> pointOrder;
  std::vector<std::string> strategyOrder;
  for (const auto& row : rows) {
    if (std::find(mOrder.begin(), mOrder.end(), row.m) == mOrder.end()) {
      mOrder.push_back(row.m);
    }
    const std::pair<int, double> key{row.m, row.alphaSq};
    if (std::find(pointOrder.begin(), pointOrder.end(), key) ==
        pointOrder.end()) {
      pointOrder.push_back(key);
    }
    if (std::find(strategyOrder.begin(), strategyOrder.end(), row.strategy) ==
        strategyOrder.end()) {
      strategyOrder.push_back(row.strategy);
    }
  }

  auto values_for = [&](int m, double alphaSq, const std::string& strategy) {
    std::vector<double> values;
    for (const auto& row : rows) {
      if (row.m == m && row.alphaSq == alphaSq && row.strategy == strategy &&
          !row.failed) {
        values.push_back(row.snrDb);
      }
    }
    return values;
  };

  const std::filesystem::path aggPath = directory / "aggregate.csv";
  if (!force && std::filesystem::exists(aggPath)) {
    throw IoError(aggPath.string() + " exists; pass --force to overwrite");
  }
  std::ofstream agg(aggPath);
  if (!agg) throw IoError("cannot open " + aggPath.string());
  agg << kAggregateHeader << '\n';
  for (const auto& [m, alphaSq] : pointOrder) {
    for (const auto& strategy : strategyOrder) {
      const Stats st = compute_stats(values_for(m, alphaSq, strategy));
      agg << m << ',' << format9(alphaSq) << ',' << strategy << ','
          << st.count << ',' << format9(st.mean) << ',' << format9(st.median)
          << ',' << format9(st.stderrMean) << '\n';
    }
  }
  if (!agg) throw IoError("write failed: " + aggPath.string());

  for (int m : mOrder) {
    const std::filesystem::path panelPath =
        directory / ("panel_m" + std::to_string(m) + ".csv");
    if (!force && std::filesystem::exists(panelPath)) {
      throw IoError(panelPath.string() + " exists; pass --force to overwrite");
    }
    std::ofstream panel(panelPath);
    if (!panel) throw IoError("cannot open " + panelPath.string());
    panel << "alphaSq";
    for (const auto& strategy : strategyOrder) panel << ',' << strategy;
    panel << '\n';
    for (const auto& [pm, alphaSq] : pointOrder) {
      if (pm != m) continue;
      panel << format9(alphaSq);
      for (const auto& strategy : strategyOrder) {
        const Stats st = compute_stats(values_for(m, alphaSq, strategy));
        panel << ',' << format9(st.mean);
      }
      panel << '\n';
    }
    if (!panel) throw IoError("write failed: " + panelPath.string());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

void emit_outputs(const ExperimentResults& results,
                  const std::filesystem::path& directory, bool force) {
  if (results.strategies.empty()) {
    throw InvalidInputError("emit_outputs: empty strategy set");
  }
  if (results.points.empty()) {
    throw InvalidInputError("emit_outputs: no grid points to emit");
  }
  std::filesystem::create_directories(directory);
  const std::filesystem::path trialsPath = directory / "trials.csv";
  if (!force && std::filesystem::exists(trialsPath)) {
    throw IoError(trialsPath.string() + " exists; pass --force to overwrite");
  }

  {
    std::ofstream cfg(directory / "config.json");
    cfg << config_to_json(results.config).dump(2) << '\n';
    if (!cfg) throw IoError("write failed: config.json");
  }
  {
    std::ofstream mats(directory / "matrices.csv");
    mats << "m,alphaSq,strategy,frobSq,alphaSqBudget\n";
    for (const auto& point : results.points) {
      for (const auto& mat : point.matrices) {
        mats << point.m << ',' << format9(point.alphaSq) << ',' << mat.strategy
             << ',' << format9(mat.frobSq()) << ',' << format9(point.alphaSq)
             << '\n';
      }
    }
    if (!mats) throw IoError("write failed: matrices.csv");
  }

  std::vector<TrialRow> rows;
  std::ofstream trials(trialsPath);
  if (!trials) throw IoError("cannot open " + trialsPath.string());
  trials << kTrialsHeader << '\n';
  for (const auto& point : results.points) {
    for (const auto& rec : point.trials) {
      for (std::size_t s = 0; s < results.strategies.size(); ++s) {
        const StrategyOutcome& out = rec.outcomes[s];
        const double snr = out.failed
                               ? std::numeric_limits<double>::quiet_NaN()
                               : out.snrDb;
        const std::string snrText = format9(snr);
        trials << point.m << ',' << format9(point.alphaSq) << ','
               << format9(point.lambda) << ',' << rec.trial << ','
               << rec.modelIndexX << ',' << rec.modelIndexC << ','
               << results.strategies[s] << ',' << snrText << ','
               << (out.saturated ? 1 : 0) << ',' << format9(out.residualNorm)
               << ',' << (out.converged ? 1 : 0) << ',' << (out.failed ? 1 : 0)
               << '\n';
        // aggregate from the formatted values so replot reproduces it
        rows.push_back(TrialRow{point.m, parse_double(format9(point.alphaSq)),
                                results.strategies[s], parse_double(snrText),
                                out.failed});
      }
    }
  }
  if (!trials) throw IoError("write failed: " + trialsPath.string());

  write_aggregates(rows, directory, force);
}

void replot(const std::filesystem::path& trialsCsv,
            const std::filesystem::path& directory, bool force) {
  std::ifstream in(trialsCsv);
  if (!in) throw IoError("cannot open " + trialsCsv.string());
  std::string line;
  if (!std::getline(in, line) || line != kTrialsHeader) {
    throw IoError(trialsCsv.string() + ": unexpected header");
  }
  std::vector<TrialRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 12) {
      throw IoError(trialsCsv.string() + ": malformed row '" + line + "'");
    }
    TrialRow row;
    row.m = static_cast<int>(parse_double(f[0]));
    row.alphaSq = parse_double(f[1]);
    row.strategy = f[6];
    row.snrDb = parse_double(f[7]);
    row.failed = f[11] == "1";
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(trialsCsv.string() + ": no trial rows");
  std::filesystem::create_directories(directory);
  write_aggregates(rows, directory, force);
}

}  // namespace csd
