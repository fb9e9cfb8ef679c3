#include "medml/core/linalg.hpp"

#include "medml/core/errors.hpp"

#include <cmath>

namespace medml {

SpdFactor::SpdFactor(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ArgumentError("spd_solve: matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw ArgumentError("spd_solve: matrix is not symmetric");
  }
  llt_.compute(a);
  if (llt_.info() == Eigen::Success) return;

  const auto k = static_cast<double>(a.rows());
  jitter_ = 1e-10 * a.trace() / k;
  if (!(jitter_ > 0.0)) jitter_ = 1e-10;
  Eigen::MatrixXd shifted = a;
  shifted.diagonal().array() += jitter_;
  llt_.compute(shifted);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError(
        "Cholesky factorization failed: matrix is not positive definite; "
        "increase the ridge penalty");
  }
}

Eigen::MatrixXd SpdFactor::solve(const Eigen::MatrixXd& b) const { return llt_.solve(b); }

Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (b.rows() != a.rows()) throw ArgumentError("spd_solve: right-hand side has wrong row count");
  return SpdFactor(a).solve(b);
}

double LinearFit::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return intercept + row.dot(coefficients.transpose());
}

Eigen::VectorXd LinearFit::predict(const Eigen::MatrixXd& rows) const {
  return (rows * coefficients).array() + intercept;
}

LinearFit fit_ols(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& target, bool intercept) {
  const Eigen::Index n = regressors.rows();
  const Eigen::Index p = regressors.cols() + (intercept ? 1 : 0);
  if (target.size() != n) throw ArgumentError("fit_ols: target length differs from regressor rows");
  if (n < p) throw NumericalError("fit_ols: fewer rows than parameters");

  Eigen::MatrixXd design(n, p);
  if (intercept) {
    design.col(0).setOnes();
    design.rightCols(regressors.cols()) = regressors;
  } else {
    design = regressors;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw NumericalError("fit_ols: design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(target);

  LinearFit fit;
  fit.intercept = intercept ? beta(0) : 0.0;
  fit.coefficients = beta.tail(regressors.cols());
  fit.residuals = target - design * beta;
  return fit;
}

}  // namespace medml
