#include "csdesign/baselines.hpp"

#include <cmath>

#include "csdesign/errors.hpp"

namespace csd {

SensingMatrix random_design(int m, int n, double alphaSq, RngStream& rng) {
  if (m < 1 || n < 1) throw InvalidInputError("random_design: m, n >= 1");
  if (!(alphaSq > 0.0)) {
    throw InvalidInputError("random_design: alphaSq must be positive");
  }
  Eigen::MatrixXd c(m, n);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = stddev * rng.normal();
  }
  const double norm = c.norm();
  if (norm == 0.0) throw NumericalError("random_design: degenerate draw");
  return SensingMatrix{c * (std::sqrt(alphaSq) / norm), "random"};
}

SensingMatrix lowrank_wiener_design(const CovarianceMatrix& sigmaX,
                                    const CovarianceMatrix& sigmaC, int m,
                                    double alphaSq, double ridge) {
  const int n = sigmaX.dim();
  if (sigmaC.dim() != n) {
    throw InvalidInputError("lowrank_wiener_design: dimension mismatch");
  }
  if (m < 1 || m > n) throw InvalidInputError("lowrank_wiener_design: 1 <= m <= n");
  if (!(alphaSq > 0.0)) {
    throw InvalidInputError("lowrank_wiener_design: alphaSq must be positive");
  }
  Eigen::MatrixXd shifted = sigmaX.entries() + sigmaC.entries();
  shifted.diagonal().array() += ridge;
  const SymmetricEigen eig = eigen_descending(shifted);
  const double hi = eig.values(0);
  const double lo = eig.values(n - 1);
  if (!(lo > 1e-12 * hi) || hi <= 0.0) {
    throw SingularMatrixError(
        "lowrank_wiener_design: Sx + Sc singular, smallest eigenvalue " +
        std::to_string(lo));
  }
  // One shared eigendecomposition backs both inverse square roots.
  const Eigen::MatrixXd invSqrt = eig.vectors *
                                  eig.values.cwiseInverse().cwiseSqrt().asDiagonal() *
                                  eig.vectors.transpose();

  const Eigen::MatrixXd w = sigmaX.entries() * invSqrt;
  Eigen::JacobiSVD<Eigen::MatrixXd> svdW(
      w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd b = svdW.matrixU().leftCols(m) *
                            svdW.singularValues().head(m).asDiagonal() *
                            svdW.matrixV().leftCols(m).transpose();

  const Eigen::MatrixXd wLr = b * invSqrt;
  Eigen::JacobiSVD<Eigen::MatrixXd> svdLr(wLr, Eigen::ComputeThinV);
  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i) {
    a.row(i) = svdLr.singularValues()(i) * svdLr.matrixV().col(i).transpose();
  }
  const double norm = a.norm();
  if (norm == 0.0) {
    throw InvalidInputError(
        "lowrank_wiener_design: zero filter cannot meet the energy budget");
  }
  return SensingMatrix{a * (std::sqrt(alphaSq) / norm), "lowrank-wiener"};
}

SensingMatrix clutter_as_signal_design(const CovarianceMatrix& sigmaX,
                                       const CovarianceMatrix& sigmaC, int m,
                                       double alphaSq, int iterations,
                                       double ridge) {
  const int n = sigmaX.dim();
  DesignProblem modified{
      CovarianceMatrix(sigmaX.entries() + sigmaC.entries()),
      CovarianceMatrix(Eigen::MatrixXd::Zero(n, n)),
      m,
      alphaSq,
      iterations,
      ridge};
  SensingMatrix a = design_sensing_matrix(modified).matrix;
  a.strategy = "clutter-as-signal";
  return a;
}

}  // namespace csd
