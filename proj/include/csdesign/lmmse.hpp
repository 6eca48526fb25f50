#pragma once

#include <Eigen/Dense>

#include "csdesign/design.hpp"
#include "csdesign/prior.hpp"
#include "csdesign/rng.hpp"

namespace csd {

/// y = A(x + c) + w with w iid standard normal.
struct Measurement {
  Eigen::VectorXd y;
};

/// Applies the sensing matrix to a realization and adds unit-variance
/// noise. `noiseless` skips the noise draw (test hook).
Measurement measure(const SensingMatrix& A, const Realization& real,
                    RngStream& rng, bool noiseless = false);

/// Wiener filter estimate: Sx A' (A (Sx + Sc) A' + I)^{-1} y.
Eigen::VectorXd lmmse_estimate(const SensingMatrix& A,
                               const CovarianceMatrix& sigmaX,
                               const CovarianceMatrix& sigmaC,
                               const Eigen::VectorXd& y);

/// Closed-form MSE of the estimator above:
/// tr(Sx) - tr{Sx A' (A (Sx + Sc) A' + I)^{-1} A Sx}.
double lmmse_mse(const SensingMatrix& A, const CovarianceMatrix& sigmaX,
                 const CovarianceMatrix& sigmaC);

}  // namespace csd
