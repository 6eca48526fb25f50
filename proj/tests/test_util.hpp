#pragma once

#include <Eigen/Dense>

#include "csdesign/prior.hpp"
#include "csdesign/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_gaussian(int rows, int cols, csd::RngStream& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) out(i, j) = rng.normal();
  }
  return out;
}

/// Well-conditioned random positive-definite covariance.
inline csd::CovarianceMatrix random_pd(int n, csd::RngStream& rng,
                                       double shift = 0.2) {
  const Eigen::MatrixXd a = random_gaussian(n, n, rng);
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(n);
  s.diagonal().array() += shift;
  return csd::CovarianceMatrix((s + s.transpose()) / 2.0);
}

inline Eigen::VectorXd random_vector(int n, csd::RngStream& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace testutil
