#include "csdesign/group_lasso.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "csdesign/errors.hpp"

namespace csd {

namespace {

constexpr double kRankRelTol = 1e-10;

/// Largest eigenvalue of a PSD Gram matrix by power iteration,
/// deterministic start, 1e-6 relative tolerance.
double largest_eigenvalue(const Eigen::MatrixXd& gram) {
  const int p = static_cast<int>(gram.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(p) / std::sqrt(double(p));
  double estimate = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd gv = gram * v;
    const double norm = gv.norm();
    if (norm <= 0.0) return 0.0;
    v = gv / norm;
    const double next = v.dot(gram * v);
    if (std::abs(next - estimate) <= 1e-6 * std::abs(next)) return next;
    estimate = next;
  }
  return estimate;
}

struct Workspace {
  Eigen::MatrixXd phiTilde;   // Phi with block columns scaled by L_j^{1/2}
  Eigen::MatrixXd gram;       // phiTilde' phiTilde
  Eigen::VectorXd phiTy;      // phiTilde' y
  double ySq = 0.0;
};

double objective(const Workspace& ws, const GroupDictionary& dict,
                 double lambda, const Eigen::VectorXd& u) {
  const double quad =
      std::max(0.0, ws.ySq - 2.0 * u.dot(ws.phiTy) + u.dot(ws.gram * u));
  double penalty = 0.0;
  for (const auto& grp : dict.groups) {
    penalty += u.segment(grp.startColumn, grp.size).norm();
  }
  return quad + lambda * penalty;
}

/// Block soft threshold of z with radius per group.
void prox_group(const GroupDictionary& dict, double radius,
                const Eigen::VectorXd& z, Eigen::VectorXd& out) {
  out = z;
  for (const auto& grp : dict.groups) {
    auto seg = out.segment(grp.startColumn, grp.size);
    const double norm = seg.norm();
    if (norm <= radius) {
      seg.setZero();
    } else {
      seg *= 1.0 - radius / norm;
    }
  }
}

/// Max group subgradient violation at u. Zero groups are measured
/// relative to lambda, active groups in absolute terms.
double optimality_residual(const Workspace& ws, const GroupDictionary& dict,
                           double lambda, const Eigen::VectorXd& u) {
  const Eigen::VectorXd grad = 2.0 * (ws.gram * u - ws.phiTy);
  double worst = 0.0;
  for (const auto& grp : dict.groups) {
    const auto uj = u.segment(grp.startColumn, grp.size);
    const auto gj = grad.segment(grp.startColumn, grp.size);
    const double ujNorm = uj.norm();
    double violation;
    if (ujNorm > 0.0) {
      violation = (gj + lambda * uj / ujNorm).norm();
    } else if (lambda > 0.0) {
      violation = std::max(0.0, (gj.norm() - lambda) / lambda);
    } else {
      violation = gj.norm();
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

}  // namespace

GroupDictionary build_dictionary(
    const std::vector<CovarianceMatrix>& signalModels,
    const std::vector<CovarianceMatrix>& clutterModels, int r) {
  if (signalModels.empty()) {
    throw InvalidInputError("build_dictionary: no signal models");
  }
  if (r < 1) throw InvalidInputError("build_dictionary: rank must be >= 1");
  const int n = signalModels.front().dim();
  const int total =
      static_cast<int>(signalModels.size() + clutterModels.size());

  GroupDictionary dict;
  dict.rank = r;
  dict.signalModels = static_cast<int>(signalModels.size());
  dict.D.resize(n, r * total);
  dict.groups.reserve(static_cast<std::size_t>(total));

  auto addBlock = [&](const CovarianceMatrix& model, int j, bool isSignal) {
    if (model.dim() != n) {
      throw InvalidInputError("build_dictionary: model dimension mismatch");
    }
    if (r > n) throw InvalidInputError("build_dictionary: rank exceeds dim");
    const SymmetricEigen eig = eigen_descending(model.entries());
    if (!(eig.values(r - 1) > kRankRelTol * eig.values(0))) {
      throw InvalidInputError(
          std::string(isSignal ? "signal" : "clutter") + " model " +
          std::to_string(j) + " has rank below " + std::to_string(r));
    }
    DictionaryGroup grp;
    grp.startColumn = static_cast<int>(dict.groups.size()) * r;
    grp.size = r;
    grp.lambdas = eig.values.head(r);
    grp.isSignal = isSignal;
    dict.D.middleCols(grp.startColumn, r) = eig.vectors.leftCols(r);
    dict.groups.push_back(std::move(grp));
  };

  for (std::size_t j = 0; j < signalModels.size(); ++j) {
    addBlock(signalModels[j], static_cast<int>(j), true);
  }
  for (std::size_t j = 0; j < clutterModels.size(); ++j) {
    addBlock(clutterModels[j], static_cast<int>(j), false);
  }
  return dict;
}

GroupLassoSolution group_lasso(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& Phi,
                               const GroupDictionary& dict, double lambda,
                               int maxIter, double tol) {
  const int p = dict.columns();
  if (Phi.cols() != p || Phi.rows() != y.size()) {
    throw InvalidInputError("group_lasso: dimension mismatch");
  }
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw InvalidInputError("group_lasso: lambda must be nonnegative");
  }
  if (maxIter < 1) throw InvalidInputError("group_lasso: maxIter must be >= 1");

  Workspace ws;
  ws.phiTilde = Phi;
  for (const auto& grp : dict.groups) {
    ws.phiTilde.middleCols(grp.startColumn, grp.size) *=
        grp.lambdas.cwiseSqrt().asDiagonal();
  }
  ws.gram = ws.phiTilde.transpose() * ws.phiTilde;
  ws.phiTy = ws.phiTilde.transpose() * y;
  ws.ySq = y.squaredNorm();

  GroupLassoSolution sol;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p);

  const double lipschitz = 2.0 * largest_eigenvalue(ws.gram) * 1.01;
  if (lipschitz <= 1e-300) {
    // Phi is (numerically) zero: u = 0 is the minimizer.
    sol.beta = u;
    sol.optimalityResidual = optimality_residual(ws, dict, lambda, u);
    sol.converged = sol.optimalityResidual <= tol;
    sol.objectiveTrace.push_back(objective(ws, dict, lambda, u));
    return sol;
  }
  const double step = 1.0 / lipschitz;

  Eigen::VectorXd momentumPoint = u;
  Eigen::VectorXd candidate(p);
  Eigen::VectorXd gradAt(p);
  double fCurrent = objective(ws, dict, lambda, u);
  double tMom = 1.0;
  sol.objectiveTrace.push_back(fCurrent);

  for (int k = 0; k < maxIter; ++k) {
    ++sol.iterations;
    gradAt = 2.0 * (ws.gram * momentumPoint - ws.phiTy);
    prox_group(dict, step * lambda, momentumPoint - step * gradAt, candidate);
    double fCandidate = objective(ws, dict, lambda, candidate);

    const double slack = 1e-12 * std::max(1.0, std::abs(fCurrent));
    if (fCandidate > fCurrent + slack) {
      // Momentum overshoot: restart with a plain descent step from u,
      // which cannot increase the objective for step <= 1/L.
      gradAt = 2.0 * (ws.gram * u - ws.phiTy);
      prox_group(dict, step * lambda, u - step * gradAt, candidate);
      fCandidate = objective(ws, dict, lambda, candidate);
      tMom = 1.0;
      momentumPoint = candidate;
    } else {
      const double tNext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tMom * tMom));
      momentumPoint = candidate + ((tMom - 1.0) / tNext) * (candidate - u);
      tMom = tNext;
    }
    u = candidate;
    fCurrent = fCandidate;
    sol.objectiveTrace.push_back(fCurrent);

    sol.optimalityResidual = optimality_residual(ws, dict, lambda, u);
    if (sol.optimalityResidual <= tol) {
      sol.converged = true;
      break;
    }
  }

  // back to original coordinates: v_j = L_j^{1/2} u_j
  sol.beta = u;
  for (const auto& grp : dict.groups) {
    sol.beta.segment(grp.startColumn, grp.size).array() *=
        grp.lambdas.array().sqrt();
  }
  return sol;
}

double lambda_max(const Eigen::VectorXd& y, const Eigen::MatrixXd& Phi,
                  const GroupDictionary& dict) {
  if (Phi.cols() != dict.columns() || Phi.rows() != y.size()) {
    throw InvalidInputError("lambda_max: dimension mismatch");
  }
  const Eigen::VectorXd corr = 2.0 * (Phi.transpose() * y);
  double worst = 0.0;
  for (const auto& grp : dict.groups) {
    worst = std::max(worst, (grp.lambdas.cwiseSqrt().asDiagonal() *
                             corr.segment(grp.startColumn, grp.size))
                                .norm());
  }
  return worst;
}

Eigen::VectorXd extract_signal(const GroupLassoSolution& solution,
                               const GroupDictionary& dict) {
  if (solution.beta.size() != dict.columns()) {
    throw InvalidInputError("extract_signal: dimension mismatch");
  }
  Eigen::VectorXd xhat = Eigen::VectorXd::Zero(dict.dim());
  for (const auto& grp : dict.groups) {
    if (!grp.isSignal) continue;
    xhat += dict.D.middleCols(grp.startColumn, grp.size) *
            solution.beta.segment(grp.startColumn, grp.size);
  }
  return xhat;
}

}  // namespace csd
