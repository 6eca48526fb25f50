#pragma once

#include <Eigen/Dense>
#include <vector>

#include "csdesign/prior.hpp"

namespace csd {

struct DictionaryGroup {
  int startColumn = 0;
  int size = 0;              // columns in this block
  Eigen::VectorXd lambdas;   // the block's eigenvalues, strictly positive
  bool isSignal = false;
};

/// Concatenated eigenvector blocks [D_x D_c], one n-by-r block per model,
/// with per-group eigenvalue weights for the elliptic penalty.
struct GroupDictionary {
  Eigen::MatrixXd D;
  std::vector<DictionaryGroup> groups;
  int rank = 0;          // r, columns per block
  int signalModels = 0;  // leading groups that belong to the signal class

  int dim() const { return static_cast<int>(D.rows()); }
  int columns() const { return static_cast<int>(D.cols()); }
};

/// Block j = top-r eigenvectors of model j (descending, sign-canonical).
/// Every model must have at least r eigenvalues above 1e-10 relative.
GroupDictionary build_dictionary(
    const std::vector<CovarianceMatrix>& signalModels,
    const std::vector<CovarianceMatrix>& clutterModels, int r);

struct GroupLassoSolution {
  Eigen::VectorXd beta;
  std::vector<double> objectiveTrace;
  int iterations = 0;
  bool converged = false;
  double optimalityResidual = 0.0;
};

/// Minimizes ||y - Phi beta||^2 + lambda * sum_j sqrt(v_j' L_j^{-1} v_j)
/// by accelerated proximal gradient with function-value restart, after
/// the exact change of variables u_j = L_j^{-1/2} v_j that turns the
/// elliptic penalty into the plain group norm. Optimality is measured by
/// the group subgradient conditions; a run that exhausts maxIter reports
/// converged = false together with the residual it reached.
GroupLassoSolution group_lasso(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& Phi,
                               const GroupDictionary& dict, double lambda,
                               int maxIter, double tol);

/// Smallest lambda for which beta = 0 is optimal:
/// max_j ||2 L_j^{1/2} Phi_j' y||_2.
double lambda_max(const Eigen::VectorXd& y, const Eigen::MatrixXd& Phi,
                  const GroupDictionary& dict);

/// x_hat = [D_x 0] beta: clutter-group coefficients are discarded.
Eigen::VectorXd extract_signal(const GroupLassoSolution& solution,
                               const GroupDictionary& dict);

}  // namespace csd
