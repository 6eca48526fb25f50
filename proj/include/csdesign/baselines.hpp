#pragma once

#include "csdesign/design.hpp"
#include "csdesign/prior.hpp"
#include "csdesign/rng.hpp"

namespace csd {

/// Scaled random projections: iid N(0, 1/m) entries, rescaled so the
/// energy budget is met exactly.
SensingMatrix random_design(int m, int n, double alphaSq, RngStream& rng);

/// First m rows of Sigma V' from the SVD of the rank-m Wiener filter
/// approximation W_lr = B (Sx + Sc)^{-1/2}, B the best rank-m
/// approximation of Sx (Sx + Sc)^{-1/2}; rescaled to the budget.
SensingMatrix lowrank_wiener_design(const CovarianceMatrix& sigmaX,
                                    const CovarianceMatrix& sigmaC, int m,
                                    double alphaSq, double ridge = 0.0);

/// The alternating design run on the modified problem where the clutter
/// models count as signal: signal covariance Sx + Sc, clutter zero.
SensingMatrix clutter_as_signal_design(const CovarianceMatrix& sigmaX,
                                       const CovarianceMatrix& sigmaC, int m,
                                       double alphaSq, int iterations,
                                       double ridge = 0.0);

}  // namespace csd
