#include "medml/nuisance/selection.hpp"

#include "medml/core/errors.hpp"

#include <cmath>
#include <limits>

namespace medml {

std::vector<double> default_gcv_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 9; ++k) grid.push_back(std::pow(10.0, -6.0 + k));
  return grid;
}

namespace {

// `energy(i)` is the squared norm of the target in eigendirection i, so that
// |H target|^2 = sum_i d_i^2 energy(i) with d_i = n lambda / (e_i + n lambda).
GcvResult select(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& energy,
                 std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("gcv: empty penalty grid");
  const auto n = static_cast<double>(eigenvalues.size());
  GcvResult result;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double lambda : grid) {
    if (!(lambda > 0.0)) throw ArgumentError("gcv: penalties must be positive");
    const double nl = n * lambda;
    double trace = 0.0;
    double residual = 0.0;
    bool ok = true;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
      const double denom = eigenvalues(i) + nl;
      if (!(denom > 0.0)) {
        ok = false;
        break;
      }
      const double d = nl / denom;
      trace += d;
      residual += d * d * energy(i);
    }
    if (!ok || !(trace > 0.0)) {
      result.criteria.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double crit = residual / (trace * trace) / n;
    result.criteria.push_back(crit);
    const double tol = 1e-12 * std::abs(best);
    if (!found || crit < best - tol) {
      best = crit;
      result.lambda = lambda;
      found = true;
    } else if (crit <= best + tol && lambda > result.lambda) {
      best = std::min(best, crit);
      result.lambda = lambda;
    }
  }
  if (!found) throw NumericalError("gcv: every grid point was skipped (tr(H) <= 0)");
  return result;
}

}  // namespace

GcvResult gcv_select(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, std::span<const double> grid) {
  if (gram.rows() != gram.cols() || gram.rows() != y.size()) throw ArgumentError("gcv: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("gcv: eigendecomposition failed");
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * y;
  return select(eig.eigenvalues(), proj.array().square().matrix(), grid);
}

GcvResult gcv_select_embedding(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& target_gram,
                               std::span<const double> grid) {
  if (gram.rows() != gram.cols() || target_gram.rows() != gram.rows() || target_gram.cols() != gram.cols()) {
    throw ArgumentError("gcv: shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("gcv: eigendecomposition failed");
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::MatrixXd tq = target_gram * q;
  const Eigen::VectorXd energy = (q.array() * tq.array()).colwise().sum().transpose();
  return select(eig.eigenvalues(), energy, grid);
}

}  // namespace medml
