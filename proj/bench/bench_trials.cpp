// Compares the serial reference trial driver against the OpenMP driver
// on one grid point of a desk-scale experiment and reports speedups.

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "csdesign/experiment.hpp"

using csd::ExperimentConfig;
using csd::PointSetup;
using csd::TrialRecord;

namespace {

double time_ms(std::vector<TrialRecord> (*driver)(const PointSetup&, int, int),
               const PointSetup& setup, int count, int threads, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    volatile std::size_t sink = driver(setup, count, threads).size();
    (void)sink;
    const std::chrono::duration<double, std::milli> elapsed =
        std::chrono::steady_clock::now() - start;
    best = std::min(best, elapsed.count());
  }
  return best;
}

std::vector<TrialRecord> serial_adapter(const PointSetup& setup, int count,
                                        int /*threads*/) {
  return csd::run_trials_serial(setup, count);
}

std::vector<TrialRecord> parallel_adapter(const PointSetup& setup, int count,
                                          int threads) {
  return csd::run_trials_parallel(setup, count, threads);
}

}  // namespace

int main() {
  ExperimentConfig config;
  config.trials = 64;
  config.mList = {16};
  config.alphaSqGrid = {64.0};
  config.calibrationTrials = 4;

  const csd::ModelSet models = csd::generate_models(config);
  std::vector<csd::SensingMatrix> matrices;
  for (const auto& name : csd::kAllStrategies) {
    if (name == "designed") {
      csd::DesignProblem problem{models.sigmaX, models.sigmaC, 16, 64.0,
                                 config.designIterations, config.ridge};
      matrices.push_back(csd::design_sensing_matrix(problem).matrix);
    } else if (name == "random") {
      csd::RngStream rng(7);
      matrices.push_back(csd::random_design(16, config.n, 64.0, rng));
    } else if (name == "lowrank-wiener") {
      matrices.push_back(
          csd::lowrank_wiener_design(models.sigmaX, models.sigmaC, 16, 64.0));
    } else {
      matrices.push_back(csd::clutter_as_signal_design(
          models.sigmaX, models.sigmaC, 16, 64.0, config.designIterations));
    }
  }
  PointSetup setup = csd::make_point_setup(config, models, csd::kAllStrategies,
                                           matrices, 0.05, 0, 0);

  const int trials = config.trials;
  const int reps = 3;
  const double serialMs = time_ms(serial_adapter, setup, trials, 1, reps);
  std::printf("%-22s %10.1f ms\n", "serial reference", serialMs);
  for (int threads : {2, 4, 8}) {
    if (threads > omp_get_max_threads()) continue;
    const double parMs = time_ms(parallel_adapter, setup, trials, threads, reps);
    std::printf("openmp %2d threads      %10.1f ms   speedup %.2fx\n", threads,
                parMs, serialMs / parMs);
  }
  return 0;
}
