#include "csdesign/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "csdesign/errors.hpp"

namespace csd {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-8;
constexpr double kWeightSumTol = 1e-10;
constexpr double kSingularTol = 1e-12;

}  // namespace

SymmetricEigen eigen_descending(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen_descending: eigensolver failed");
  }
  const int n = static_cast<int>(sym.rows());
  // Eigen returns ascending order; re-sort descending with ties keeping
  // the solver's order, and fix signs.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return solver.eigenvalues()(a) > solver.eigenvalues()(b);
  });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(order[static_cast<std::size_t>(i)]);
    Eigen::VectorXd v =
        solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    int argmax = 0;
    v.cwiseAbs().maxCoeff(&argmax);
    if (v(argmax) < 0.0) v = -v;
    out.vectors.col(i) = v;
  }
  return out;
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw InvalidInputError("CovarianceMatrix: matrix must be square and "
                            "non-empty");
  }
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol) {
    throw InvalidInputError("CovarianceMatrix: asymmetry " +
                            std::to_string(asym) + " exceeds 1e-10");
  }
  entries_ = ((entries_ + entries_.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      entries_, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (lo < -kPsdTol * std::max(hi, 0.0)) {
    throw InvalidInputError("CovarianceMatrix: smallest eigenvalue " +
                            std::to_string(lo) + " is negative beyond tolerance");
  }
}

MixturePrior::MixturePrior(int dim, std::vector<MixtureComponent> components)
    : dim_(dim), components_(std::move(components)) {
  if (dim_ <= 0) throw InvalidInputError("MixturePrior: dim must be positive");
  if (components_.empty()) {
    throw InvalidInputError("MixturePrior: needs at least one component");
  }
  double sum = 0.0;
  for (const auto& comp : components_) {
    if (comp.cov.dim() != dim_) {
      throw InvalidInputError("MixturePrior: component dimension mismatch");
    }
    if (comp.weight < 0.0 || !std::isfinite(comp.weight)) {
      throw InvalidInputError("MixturePrior: weights must be nonnegative");
    }
    sum += comp.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw InvalidInputError("MixturePrior: weights sum to " +
                            std::to_string(sum) + ", expected 1");
  }
  weights_.reserve(components_.size());
  factors_.reserve(components_.size());
  for (const auto& comp : components_) {
    weights_.push_back(comp.weight);
    const SymmetricEigen eig = eigen_descending(comp.cov.entries());
    factors_.push_back(eig.vectors *
                       eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  }
}

CovarianceMatrix average_covariance(const MixturePrior& prior) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(prior.dim(), prior.dim());
  for (const auto& comp : prior.components()) {
    sum += comp.weight * comp.cov.entries();
  }
  return CovarianceMatrix(std::move(sum));
}

WhiteningFactor whitening_factor(const CovarianceMatrix& sigma, double ridge) {
  if (ridge < 0.0 || !std::isfinite(ridge)) {
    throw InvalidInputError("whitening_factor: ridge must be nonnegative");
  }
  Eigen::MatrixXd shifted = sigma.entries();
  shifted.diagonal().array() += ridge;
  const SymmetricEigen eig = eigen_descending(shifted);
  const double hi = eig.values(0);
  const double lo = eig.values(eig.values.size() - 1);
  if (!(lo > kSingularTol * hi) || hi <= 0.0) {
    throw SingularMatrixError(
        "whitening_factor: matrix singular, smallest eigenvalue " +
        std::to_string(lo));
  }
  return WhiteningFactor{eig.vectors *
                         eig.values.cwiseInverse().cwiseSqrt().asDiagonal()};
}

CovarianceMatrix random_rank_r_covariance(int n, int r, double scale,
                                          RngStream& rng) {
  if (n < 1 || r < 1 || r > n) {
    throw InvalidInputError("random_rank_r_covariance: need 1 <= r <= n");
  }
  if (!(scale > 0.0)) {
    throw InvalidInputError("random_rank_r_covariance: scale must be positive");
  }
  Eigen::MatrixXd gaussian(n, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < n; ++i) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  // Canonical frame: make diag(R) positive so Q does not depend on the
  // QR implementation's sign convention.
  const Eigen::MatrixXd rfac =
      qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j) {
    if (rfac(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  Eigen::VectorXd d(r);
  for (int j = 0; j < r; ++j) d(j) = scale * rng.uniform_pos();
  return CovarianceMatrix(q * d.asDiagonal() * q.transpose());
}

Realization sample_realization(const MixturePrior& priorX,
                               const MixturePrior& priorC, RngStream& rng) {
  Realization out;
  out.modelIndexX = rng.pick_weighted(priorX.weights());
  Eigen::VectorXd zx(priorX.dim());
  for (int i = 0; i < priorX.dim(); ++i) zx(i) = rng.normal();
  out.x = priorX.sqrt_factor(out.modelIndexX) * zx;

  out.modelIndexC = rng.pick_weighted(priorC.weights());
  Eigen::VectorXd zc(priorC.dim());
  for (int i = 0; i < priorC.dim(); ++i) zc(i) = rng.normal();
  out.c = priorC.sqrt_factor(out.modelIndexC) * zc;
  return out;
}

}  // namespace csd
