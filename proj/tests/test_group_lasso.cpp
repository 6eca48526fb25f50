#include <doctest.h>

#include <cmath>
#include <vector>

#include "csdesign/errors.hpp"
#include "csdesign/group_lasso.hpp"
#include "test_util.hpp"

using csd::CovarianceMatrix;
using csd::GroupDictionary;
using csd::RngStream;

namespace {

/// Dictionary over random full-rank models; eigenvalues are O(1) so the
/// penalty weighting is well conditioned.
GroupDictionary random_dictionary(int n, int signalModels, int clutterModels,
                                  int r, RngStream& rng) {
  std::vector<CovarianceMatrix> xs;
  std::vector<CovarianceMatrix> cs;
  for (int i = 0; i < signalModels; ++i) xs.push_back(testutil::random_pd(n, rng));
  for (int i = 0; i < clutterModels; ++i) cs.push_back(testutil::random_pd(n, rng));
  return csd::build_dictionary(xs, cs, r);
}

/// Subgradient conditions checked on the original elliptic objective,
/// independent of the solver's transformed coordinates.
double original_subgradient_residual(const Eigen::VectorXd& y,
                                     const Eigen::MatrixXd& phi,
                                     const GroupDictionary& dict, double lambda,
                                     const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = phi * beta - y;
  double worst = 0.0;
  for (const auto& grp : dict.groups) {
    const Eigen::VectorXd v = beta.segment(grp.startColumn, grp.size);
    const Eigen::VectorXd corr =
        2.0 * phi.middleCols(grp.startColumn, grp.size).transpose() * r;
    if (v.norm() > 0.0) {
      const Eigen::VectorXd weighted = grp.lambdas.cwiseInverse().asDiagonal() * v;
      const double elliptic = std::sqrt(v.dot(weighted));
      worst = std::max(worst, (corr + lambda * weighted / elliptic).norm());
    } else {
      const double dual =
          (grp.lambdas.cwiseSqrt().asDiagonal() * corr).norm();
      worst = std::max(worst, lambda > 0.0
                                  ? std::max(0.0, (dual - lambda) / lambda)
                                  : dual);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("dictionary blocks are the top eigenvectors with their eigenvalues") {
  const int n = 4;
  RngStream rng(3);
  // orthonormal Q from a QR factorization
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(testutil::random_gaussian(n, n, rng));
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(n);
  d << 3.0, 2.0, 1.0, 0.0;
  const Eigen::MatrixXd model = q * d.asDiagonal() * q.transpose();
  const auto dict = csd::build_dictionary(
      {CovarianceMatrix((model + model.transpose()) / 2.0)}, {}, 2);

  REQUIRE(dict.groups.size() == 1);
  CHECK(dict.groups[0].lambdas(0) == doctest::Approx(3.0));
  CHECK(dict.groups[0].lambdas(1) == doctest::Approx(2.0));
  for (int j = 0; j < 2; ++j) {
    const double align = std::abs(dict.D.col(j).dot(q.col(j)));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-10));
  }
  // blocks are orthonormal
  const Eigen::MatrixXd gram =
      dict.D.leftCols(2).transpose() * dict.D.leftCols(2);
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("dictionary at the paper scale is 100 x 120") {
  RngStream rng(5);
  std::vector<CovarianceMatrix> xs;
  std::vector<CovarianceMatrix> cs;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(csd::random_rank_r_covariance(100, 6, 1.0, rng));
    cs.push_back(csd::random_rank_r_covariance(100, 6, 1.0, rng));
  }
  const auto dict = csd::build_dictionary(xs, cs, 6);
  CHECK(dict.dim() == 100);
  CHECK(dict.columns() == 120);
  CHECK(dict.signalModels == 10);
  CHECK(dict.groups.size() == 20);
  CHECK(dict.groups.back().startColumn == 114);
  for (const auto& grp : dict.groups) {
    CHECK(grp.lambdas.minCoeff() > 0.0);
  }
}

TEST_CASE("full-rank block spans the model column space") {
  const int n = 5;
  RngStream rng(7);
  const CovarianceMatrix model = testutil::random_pd(n, rng);
  const auto dict = csd::build_dictionary({model}, {}, n);
  const Eigen::MatrixXd block = dict.D.leftCols(n);
  CHECK((block * block.transpose() - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("dictionary rejects rank-deficient models by index") {
  const int n = 4;
  RngStream rng(9);
  std::vector<CovarianceMatrix> xs = {testutil::random_pd(n, rng),
                                      csd::random_rank_r_covariance(n, 1, 1.0, rng)};
  try {
    csd::build_dictionary(xs, {}, 3);
    FAIL("expected InvalidInputError");
  } catch (const csd::InvalidInputError& e) {
    CHECK(std::string(e.what()).find("model 1") != std::string::npos);
  }
}

TEST_CASE("lambda = 0 with a square system recovers least squares") {
  const int n = 6;
  RngStream rng(11);
  const auto dict = random_dictionary(n, 2, 1, 2, rng);  // p = 6
  const Eigen::MatrixXd phi = testutil::random_gaussian(6, 6, rng);
  const Eigen::VectorXd y = testutil::random_vector(6, rng);
  const auto sol = csd::group_lasso(y, phi, dict, 0.0, 50000, 1e-9);
  const Eigen::VectorXd ls = phi.fullPivLu().solve(y);
  CHECK((sol.beta - ls).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single-group soft threshold has the closed-form solution") {
  // Phi = I2, one group with unit eigenvalues, y = (1, 0), lambda = 0.5:
  // stationarity 2(beta - y) + lambda beta/||beta|| = 0 gives
  // beta = y (1 - lambda / (2 ||y||))+ = (0.75, 0)
  const CovarianceMatrix ident(Eigen::MatrixXd::Identity(2, 2));
  const auto dict = csd::build_dictionary({ident}, {}, 2);
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  const auto sol = csd::group_lasso(y, Eigen::MatrixXd::Identity(2, 2), dict,
                                    0.5, 20000, 1e-10);
  CHECK(sol.converged);
  CHECK(sol.beta(0) == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(std::abs(sol.beta(1)) < 1e-8);
}

TEST_CASE("lambda at or above lambda_max annihilates every group") {
  const int n = 8;
  RngStream rng(13);
  const auto dict = random_dictionary(n, 2, 2, 2, rng);
  const Eigen::MatrixXd phi = testutil::random_gaussian(5, dict.columns(), rng);
  const Eigen::VectorXd y = testutil::random_vector(5, rng);
  const double lmax = csd::lambda_max(y, phi, dict);
  const auto sol = csd::group_lasso(y, phi, dict, lmax * 1.000001, 1000, 1e-8);
  CHECK(sol.beta.norm() == 0.0);
  CHECK(sol.converged);

  const auto below = csd::group_lasso(y, phi, dict, lmax * 0.5, 50000, 1e-8);
  CHECK(below.beta.norm() > 0.0);
}

TEST_CASE("returned solutions satisfy the original subgradient conditions") {
  RngStream rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 4 + rng.uniform_int(3);
    const int groups = 2 + rng.uniform_int(2);
    const int r = 1 + rng.uniform_int(2);  // p <= 12
    const auto dict = random_dictionary(n, 1, groups - 1, r, rng);
    const int p = dict.columns();
    const int m = 2 + rng.uniform_int(7);  // m <= 8
    const Eigen::MatrixXd phi = testutil::random_gaussian(m, p, rng);
    const Eigen::VectorXd y = testutil::random_vector(m, rng);
    const double lmax = csd::lambda_max(y, phi, dict);
    const double lambda = lmax * (0.05 + 0.6 * rng.uniform());

    const auto sol = csd::group_lasso(y, phi, dict, lambda, 100000, 1e-8);
    CHECK(sol.converged);
    CHECK(original_subgradient_residual(y, phi, dict, lambda, sol.beta) <=
          1e-5);

    // objective trace never increases beyond slack
    for (std::size_t i = 1; i < sol.objectiveTrace.size(); ++i) {
      CHECK(sol.objectiveTrace[i] <= sol.objectiveTrace[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("groups are exactly zero iff strictly below the dual threshold") {
  RngStream rng(19);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 6;
    const auto dict = random_dictionary(n, 2, 2, 2, rng);
    const Eigen::MatrixXd phi =
        testutil::random_gaussian(6, dict.columns(), rng);
    const Eigen::VectorXd y = testutil::random_vector(6, rng);
    const double lambda = 0.4 * csd::lambda_max(y, phi, dict);
    const auto sol = csd::group_lasso(y, phi, dict, lambda, 100000, 1e-9);
    REQUIRE(sol.converged);

    const Eigen::VectorXd r = phi * sol.beta - y;
    for (const auto& grp : dict.groups) {
      const double norm = sol.beta.segment(grp.startColumn, grp.size).norm();
      const double dual =
          (grp.lambdas.cwiseSqrt().asDiagonal() *
           (2.0 * phi.middleCols(grp.startColumn, grp.size).transpose() * r))
              .norm();
      if (norm == 0.0) {
        CHECK(dual <= lambda * (1.0 + 1e-6));
      } else {
        // active groups sit on the threshold, not below it
        CHECK(dual >= lambda * (1.0 - 1e-4));
      }
      if (dual < lambda * (1.0 - 1e-4)) CHECK(norm == 0.0);
    }
  }
}

TEST_CASE("noiseless single-group instance is recovered as lambda -> 0") {
  const int n = 8;
  RngStream rng(23);
  const auto dict = random_dictionary(n, 2, 2, 2, rng);
  const int p = dict.columns();
  const Eigen::MatrixXd phi = testutil::random_gaussian(p + 4, p, rng);
  Eigen::VectorXd betaStar = Eigen::VectorXd::Zero(p);
  betaStar(0) = 1.2;
  betaStar(1) = -0.7;  // one active signal group
  const Eigen::VectorXd y = phi * betaStar;
  const auto sol = csd::group_lasso(y, phi, dict, 1e-6, 200000, 1e-8);
  CHECK((sol.beta - betaStar).norm() < 1e-3);
}

TEST_CASE("exhausted iteration budget reports non-convergence honestly") {
  const int n = 6;
  RngStream rng(29);
  const auto dict = random_dictionary(n, 2, 1, 2, rng);
  const Eigen::MatrixXd phi = testutil::random_gaussian(4, dict.columns(), rng);
  const Eigen::VectorXd y = testutil::random_vector(4, rng);
  const auto sol = csd::group_lasso(y, phi, dict, 1e-4, 2, 1e-12);
  CHECK(!sol.converged);
  CHECK(sol.iterations == 2);
  CHECK(sol.optimalityResidual > 0.0);
}

TEST_CASE("extract_signal drops clutter coefficients") {
  const int n = 6;
  RngStream rng(31);
  const auto dict = random_dictionary(n, 2, 2, 2, rng);
  csd::GroupLassoSolution sol;
  sol.beta = Eigen::VectorXd::Zero(dict.columns());
  CHECK(csd::extract_signal(sol, dict).norm() == 0.0);

  // support only on clutter groups
  sol.beta.setZero();
  sol.beta(dict.groups[2].startColumn) = 1.0;
  sol.beta(dict.groups[3].startColumn + 1) = -2.0;
  CHECK(csd::extract_signal(sol, dict).norm() == 0.0);

  // basis pick on the first signal coordinate
  sol.beta.setZero();
  sol.beta(0) = 1.0;
  CHECK((csd::extract_signal(sol, dict) - dict.D.col(0)).norm() < 1e-14);
}
