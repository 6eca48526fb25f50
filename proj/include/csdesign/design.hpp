#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csdesign/prior.hpp"

namespace csd {

/// One instance of the energy-constrained sensing design problem.
struct DesignProblem {
  CovarianceMatrix sigmaX;
  CovarianceMatrix sigmaC;
  int m = 0;             // measurement count, 1 <= m <= n
  double alphaSq = 0.0;  // Frobenius energy budget, > 0
  int iterations = 30;   // alternation rounds, >= 1
  double ridge = 0.0;    // added to sigmaX + sigmaC before whitening

  int dim() const { return sigmaX.dim(); }
  void validate() const;
};

/// m-by-n measurement operator together with the strategy that built it.
struct SensingMatrix {
  Eigen::MatrixXd entries;
  std::string strategy;

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
  double frobSq() const { return entries.squaredNorm(); }
};

/// Internal state of the alternating solver after the final round.
struct DesignState {
  Eigen::MatrixXd basis;            // n x m, orthonormal columns
  Eigen::VectorXd sigmas;           // m singular values, >= 0
  std::vector<double> objectiveTrace;  // one entry per completed round
};

struct DesignResult {
  SensingMatrix matrix;
  DesignState state;
};

/// tr{ Sx A' (A (Sx + Sc) A' + I)^{-1} A Sx }; in [0, tr(Sx)].
double design_objective(const Eigen::MatrixXd& A, const CovarianceMatrix& sigmaX,
                        const CovarianceMatrix& sigmaC);

struct WaterFillingResult {
  Eigen::VectorXd gammas;
  double waterLevel = 0.0;  // v*; 0 when every b_i is zero
  int bisectionIterations = 0;
};

/// Maximizes sum_i b_i g_i / (1 + g_i) subject to sum_i c_i g_i <= alphaSq,
/// g >= 0. The solution is g_i = (sqrt(b_i / (c_i v*)) - 1)^+ with the
/// budget active whenever some b_i > 0; v* is found by bisection.
WaterFillingResult solve_p0(std::span<const double> b,
                            std::span<const double> c, double alphaSq);

struct PairingResult {
  /// assignment[i] = index into eigvals paired with weight slot i.
  std::vector<int> assignment;
  double objective = 0.0;
};

/// Pairs the i-th largest eigenvalue with the i-th largest weight; the
/// top m of n eigenvalues are selected. Ties break toward lower index.
PairingResult solve_p1(std::span<const double> eigvals,
                       std::span<const double> weights);

/// Alternating maximization of the design objective: whiten, eigendecompose
/// Y' Sx^2 Y, then alternate the eigenvector pairing (P1) and the
/// water-filling allocation (P0). Output is A = (Y U diag(sigma))'.
DesignResult design_sensing_matrix(
    const DesignProblem& problem,
    std::optional<Eigen::VectorXd> initSigmas = std::nullopt);

}  // namespace csd
