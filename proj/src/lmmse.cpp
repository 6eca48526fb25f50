#include "csdesign/lmmse.hpp"

#include "csdesign/errors.hpp"

namespace csd {

Measurement measure(const SensingMatrix& A, const Realization& real,
                    RngStream& rng, bool noiseless) {
  if (real.x.size() != A.cols() || real.c.size() != A.cols()) {
    throw InvalidInputError("measure: realization dimension mismatch");
  }
  Eigen::VectorXd y = A.entries * (real.x + real.c);
  if (!noiseless) {
    for (int i = 0; i < y.size(); ++i) y(i) += rng.normal();
  }
  return Measurement{std::move(y)};
}

Eigen::VectorXd lmmse_estimate(const SensingMatrix& A,
                               const CovarianceMatrix& sigmaX,
                               const CovarianceMatrix& sigmaC,
                               const Eigen::VectorXd& y) {
  const int n = sigmaX.dim();
  if (A.cols() != n || sigmaC.dim() != n || y.size() != A.rows()) {
    throw InvalidInputError("lmmse_estimate: dimension mismatch");
  }
  Eigen::MatrixXd inner =
      A.entries * (sigmaX.entries() + sigmaC.entries()) * A.entries.transpose();
  inner += Eigen::MatrixXd::Identity(A.rows(), A.rows());
  const Eigen::LLT<Eigen::MatrixXd> llt(inner);
  return sigmaX.entries() * A.entries.transpose() * llt.solve(y);
}

double lmmse_mse(const SensingMatrix& A, const CovarianceMatrix& sigmaX,
                 const CovarianceMatrix& sigmaC) {
  return sigmaX.trace() - design_objective(A.entries, sigmaX, sigmaC);
}

}  // namespace csd
