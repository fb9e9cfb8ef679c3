#pragma once

#include <Eigen/Dense>

namespace medml {

// Cholesky factorization of a symmetric positive-definite matrix. If the
// first attempt fails, jitter 1e-10 * trace(a) / k is added to the diagonal
// once; a second failure throws NumericalError.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(const Eigen::MatrixXd& a);

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::Index size() const { return llt_.rows(); }
  double jitter() const { return jitter_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

// Solves a x = b for symmetric positive-definite a.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Least squares fit with optional intercept column. Throws NumericalError
// when the design is rank deficient.
struct LinearFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& rows) const;
};

LinearFit fit_ols(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& target,
                  bool intercept = true);

}  // namespace medml
