#include "csdesign/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csdesign/errors.hpp"

namespace csd {

namespace {

constexpr double kBisectRelTol = 1e-12;   // on the water level v
constexpr double kBudgetRelTol = 1e-10;   // on sum c_i gamma_i vs alphaSq
constexpr int kMaxBisectIters = 200;
constexpr double kEarlyStopRelTol = 1e-10;

double waterfill_budget(std::span<const double> b, std::span<const double> c,
                        double v) {
  double spent = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double t = b[i] / (c[i] * v);
    if (t > 1.0) spent += c[i] * (std::sqrt(t) - 1.0);
  }
  return spent;
}

}  // namespace

void DesignProblem::validate() const {
  const int n = sigmaX.dim();
  if (sigmaC.dim() != n) {
    throw InvalidInputError("DesignProblem: covariance dimensions differ");
  }
  if (m < 1 || m > n) {
    throw InvalidInputError("DesignProblem: need 1 <= m <= n");
  }
  if (!(alphaSq > 0.0) || !std::isfinite(alphaSq)) {
    throw InvalidInputError("DesignProblem: alphaSq must be positive");
  }
  if (iterations < 1) {
    throw InvalidInputError("DesignProblem: iterations must be >= 1");
  }
  if (ridge < 0.0 || !std::isfinite(ridge)) {
    throw InvalidInputError("DesignProblem: ridge must be nonnegative");
  }
}

double design_objective(const Eigen::MatrixXd& A, const CovarianceMatrix& sigmaX,
                        const CovarianceMatrix& sigmaC) {
  const int n = sigmaX.dim();
  if (A.cols() != n || sigmaC.dim() != n || A.rows() < 1) {
    throw InvalidInputError("design_objective: dimension mismatch");
  }
  const int m = static_cast<int>(A.rows());
  Eigen::MatrixXd inner =
      A * (sigmaX.entries() + sigmaC.entries()) * A.transpose();
  inner += Eigen::MatrixXd::Identity(m, m);
  // inner = I + PSD, so the Cholesky factorization always exists
  const Eigen::LLT<Eigen::MatrixXd> llt(inner);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("design_objective: factorization failed");
  }
  const Eigen::MatrixXd asx = A * sigmaX.entries();
  return asx.cwiseProduct(llt.solve(asx)).sum();
}

WaterFillingResult solve_p0(std::span<const double> b,
                            std::span<const double> c, double alphaSq) {
  const std::size_t m = b.size();
  if (m == 0 || c.size() != m) {
    throw InvalidInputError("solve_p0: b and c must be non-empty, same size");
  }
  if (!(alphaSq > 0.0) || !std::isfinite(alphaSq)) {
    throw InvalidInputError("solve_p0: alphaSq must be positive");
  }
  double vHi = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(b[i]) || !std::isfinite(c[i])) {
      throw InvalidInputError("solve_p0: non-finite input");
    }
    if (b[i] < 0.0) throw InvalidInputError("solve_p0: b must be nonnegative");
    if (c[i] <= 0.0) {
      throw InvalidInputError("solve_p0: c must be strictly positive");
    }
    vHi = std::max(vHi, b[i] / c[i]);
  }

  WaterFillingResult out;
  out.gammas = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  if (vHi == 0.0) return out;  // all b zero: allocation defined as zero

  // At v = vHi every channel is shut; halve downward until the budget is
  // exceeded, then bisect. Keep the feasible (upper) endpoint as v*.
  double vLo = vHi;
  int halvings = 0;
  do {
    vLo /= 2.0;
    if (++halvings > 4000) {
      throw NumericalError("solve_p0: could not bracket the water level");
    }
  } while (waterfill_budget(b, c, vLo) <= alphaSq);

  int iters = 0;
  while (iters < kMaxBisectIters) {
    ++iters;
    const double vMid = 0.5 * (vLo + vHi);
    if (waterfill_budget(b, c, vMid) > alphaSq) {
      vLo = vMid;
    } else {
      vHi = vMid;
    }
    if (vHi - vLo <= kBisectRelTol * vHi &&
        std::abs(waterfill_budget(b, c, vHi) - alphaSq) <=
            kBudgetRelTol * alphaSq) {
      break;
    }
  }
  const double spent = waterfill_budget(b, c, vHi);
  if (std::abs(spent - alphaSq) > 1e-8 * alphaSq) {
    throw NumericalError("solve_p0: bisection stalled after " +
                         std::to_string(iters) + " iterations, budget " +
                         std::to_string(spent) + " vs " +
                         std::to_string(alphaSq));
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double t = b[i] / (c[i] * vHi);
    out.gammas(static_cast<Eigen::Index>(i)) =
        t > 1.0 ? std::sqrt(t) - 1.0 : 0.0;
  }
  out.waterLevel = vHi;
  out.bisectionIterations = iters;
  return out;
}

PairingResult solve_p1(std::span<const double> eigvals,
                       std::span<const double> weights) {
  const std::size_t n = eigvals.size();
  const std::size_t m = weights.size();
  if (m == 0 || m > n) {
    throw InvalidInputError("solve_p1: need 1 <= m <= n");
  }
  const double scale = std::max(std::abs(eigvals[0]), 1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (eigvals[i] < eigvals[i + 1] - 1e-9 * scale) {
      throw InvalidInputError("solve_p1: eigenvalues not sorted descending");
    }
  }
  for (double w : weights) {
    if (!(w >= 0.0) || w >= 1.0) {
      throw InvalidInputError("solve_p1: weights must lie in [0, 1)");
    }
  }
  // Pair sorted eigenvalues with sorted weights; stable sort keeps the
  // lowest slot index first on ties.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int bIdx) {
    return weights[static_cast<std::size_t>(a)] >
           weights[static_cast<std::size_t>(bIdx)];
  });
  PairingResult out;
  out.assignment.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.assignment[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
    out.objective += eigvals[k] * weights[static_cast<std::size_t>(order[k])];
  }
  return out;
}

DesignResult design_sensing_matrix(const DesignProblem& problem,
                                   std::optional<Eigen::VectorXd> initSigmas) {
  problem.validate();
  const int n = problem.dim();
  const int m = problem.m;

  const CovarianceMatrix sum(problem.sigmaX.entries() +
                             problem.sigmaC.entries());
  const Eigen::MatrixXd Y = whitening_factor(sum, problem.ridge).matrix;

  // G = Y' Sx^2 Y formed as P'P to keep it symmetric PSD
  const Eigen::MatrixXd p = problem.sigmaX.entries() * Y;
  const Eigen::MatrixXd g = p.transpose() * p;
  const Eigen::MatrixXd h = Y.transpose() * Y;
  const SymmetricEigen gEig = eigen_descending(g);
  const std::span<const double> eigvals(gEig.values.data(),
                                        static_cast<std::size_t>(n));

  Eigen::VectorXd sigmas;
  if (initSigmas.has_value()) {
    if (initSigmas->size() != m || (initSigmas->array() < 0.0).any()) {
      throw InvalidInputError(
          "design_sensing_matrix: init sigmas must be m nonnegative reals");
    }
    sigmas = *initSigmas;
  } else {
    sigmas = Eigen::VectorXd::Ones(m);
  }

  DesignState state;
  state.basis.resize(n, m);
  Eigen::VectorXd b(m);
  Eigen::VectorXd c(m);
  std::vector<double> weights(static_cast<std::size_t>(m));
  double prevObjective = -std::numeric_limits<double>::infinity();

  for (int round = 0; round < problem.iterations; ++round) {
    for (int i = 0; i < m; ++i) {
      const double s2 = sigmas(i) * sigmas(i);
      weights[static_cast<std::size_t>(i)] = s2 / (1.0 + s2);
    }
    const PairingResult pairing = solve_p1(eigvals, weights);
    for (int i = 0; i < m; ++i) {
      state.basis.col(i) = gEig.vectors.col(pairing.assignment[static_cast<std::size_t>(i)]);
    }

    b = (state.basis.cwiseProduct(g * state.basis)).colwise().sum();
    c = (state.basis.cwiseProduct(h * state.basis)).colwise().sum();
    b = b.cwiseMax(0.0);  // clamp eigensolver rounding

    const WaterFillingResult alloc = solve_p0(
        std::span<const double>(b.data(), static_cast<std::size_t>(m)),
        std::span<const double>(c.data(), static_cast<std::size_t>(m)),
        problem.alphaSq);
    sigmas = alloc.gammas.cwiseSqrt();

    double objective = 0.0;
    for (int i = 0; i < m; ++i) {
      objective += b(i) * alloc.gammas(i) / (1.0 + alloc.gammas(i));
    }
    state.objectiveTrace.push_back(objective);
    if (objective - prevObjective <
        kEarlyStopRelTol * std::max(std::abs(objective), 1e-300)) {
      break;
    }
    prevObjective = objective;
  }

  state.sigmas = sigmas;
  SensingMatrix matrix{
      sigmas.asDiagonal() * state.basis.transpose() * Y.transpose(),
      "designed"};
  return DesignResult{std::move(matrix), std::move(state)};
}

}  // namespace csd
