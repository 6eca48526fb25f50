#pragma once

#include <Eigen/Dense>
#include <vector>

#include "csdesign/rng.hpp"

namespace csd {

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// descending and each eigenvector's largest-magnitude entry made
/// positive, so the factorization is a canonical representative.
struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
};

SymmetricEigen eigen_descending(const Eigen::MatrixXd& sym);

/// Symmetric positive-semidefinite matrix, validated on construction:
/// max |S - S'| <= 1e-10 and lambda_min >= -1e-8 * lambda_max.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double trace() const { return entries_.trace(); }

 private:
  Eigen::MatrixXd entries_;
};

struct MixtureComponent {
  double weight;
  CovarianceMatrix cov;
};

/// Weighted collection of zero-mean covariance components. Weights must
/// be nonnegative and sum to 1 within 1e-10; all components share dim().
/// A square-root factor of each component is precomputed for sampling.
class MixturePrior {
 public:
  MixturePrior(int dim, std::vector<MixtureComponent> components);

  int dim() const { return dim_; }
  int count() const { return static_cast<int>(components_.size()); }
  const std::vector<MixtureComponent>& components() const {
    return components_;
  }
  std::span<const double> weights() const { return weights_; }

  /// S with S*S' = component covariance (eigendecomposition square root,
  /// negative rounding clamped to zero). Valid for rank-deficient inputs.
  const Eigen::MatrixXd& sqrt_factor(int component) const {
    return factors_[static_cast<std::size_t>(component)];
  }

 private:
  int dim_;
  std::vector<MixtureComponent> components_;
  std::vector<double> weights_;
  std::vector<Eigen::MatrixXd> factors_;
};

/// Full-rank Y with Y'(Sigma + ridge I)Y = I.
struct WhiteningFactor {
  Eigen::MatrixXd matrix;
};

struct Realization {
  Eigen::VectorXd x;
  Eigen::VectorXd c;
  int modelIndexX = -1;
  int modelIndexC = -1;
};

/// Sigma = sum_i pi_i Sigma_i.
CovarianceMatrix average_covariance(const MixturePrior& prior);

/// Y = U Lambda^{-1/2} from the eigendecomposition of (sigma + ridge I),
/// eigenvalues descending. Throws SingularMatrixError when the smallest
/// eigenvalue after the ridge is <= 1e-12 times the largest.
WhiteningFactor whitening_factor(const CovarianceMatrix& sigma, double ridge);

/// Q D Q' with Q an n-by-r orthonormal frame from a standard-normal draw
/// and D = diag of r values uniform on (0, scale].
CovarianceMatrix random_rank_r_covariance(int n, int r, double scale,
                                          RngStream& rng);

/// Picks one component of each prior by weight and draws a zero-mean
/// Gaussian vector with that component's covariance.
Realization sample_realization(const MixturePrior& priorX,
                               const MixturePrior& priorC, RngStream& rng);

}  // namespace csd
