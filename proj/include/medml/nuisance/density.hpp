#pragma once

#include "medml/core/linalg.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace medml {

enum class DensityKind { GaussianLinear, KernelConditional };

struct DensityValue {
  double value = 0.0;
  // Kernel model only: every regressor weight underflowed and the
  // unconditional kernel density was used instead.
  bool fallback = false;
};

// Conditional density f(v | q) of a scalar target given a regressor row q.
// Every evaluation is clipped below at floor() > 0.
class ConditionalDensityModel {
 public:
  static ConditionalDensityModel gaussian_linear(LinearFit mean, double residual_sd, double floor);
  static ConditionalDensityModel kernel_conditional(Eigen::VectorXd target, Eigen::MatrixXd regressors,
                                                    Eigen::VectorXd regressor_bandwidths,
                                                    double target_bandwidth, double floor);

  DensityKind kind() const { return kind_; }
  double floor() const { return floor_; }

  double density_at(const Eigen::Ref<const Eigen::RowVectorXd>& q, double v) const;
  DensityValue evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& q, double v) const;

  // out(i, j) = f(values[j] | rows.row(i)).
  Eigen::MatrixXd density_matrix(const Eigen::MatrixXd& rows, std::span<const double> values) const;
  // out(i) = f(v(i) | rows.row(i)).
  Eigen::VectorXd density_rowwise(const Eigen::MatrixXd& rows, const Eigen::VectorXd& v) const;

  // GaussianLinear accessors.
  const LinearFit& mean_model() const { return mean_; }
  double residual_sd() const { return sd_; }
  double conditional_mean(const Eigen::Ref<const Eigen::RowVectorXd>& q) const;

  // KernelConditional accessors.
  const Eigen::VectorXd& regressor_bandwidths() const { return reg_bw_; }
  double target_bandwidth() const { return target_bw_; }

 private:
  ConditionalDensityModel() = default;
  // Unnormalised product Gaussian weights of the training rows around q.
  Eigen::VectorXd kernel_weights(const Eigen::Ref<const Eigen::RowVectorXd>& q) const;
  double unconditional(double v) const;

  DensityKind kind_ = DensityKind::GaussianLinear;
  double floor_ = 1e-3;
  LinearFit mean_;
  double sd_ = 1.0;
  Eigen::VectorXd target_;
  Eigen::MatrixXd regressors_;
  Eigen::VectorXd reg_bw_;
  double target_bw_ = 1.0;
};

// OLS conditional mean and residual standard deviation; density is
// N(mean(q), sd) clipped at floor.
ConditionalDensityModel fit_gaussian_density(const Eigen::VectorXd& target,
                                             const Eigen::MatrixXd& regressors, double floor);

// Nadaraya-Watson conditional kernel density. Empty bandwidths select the
// Scott rule per regressor column and for the target.
ConditionalDensityModel fit_kernel_density(const Eigen::VectorXd& target,
                                           const Eigen::MatrixXd& regressors, double floor,
                                           const Eigen::VectorXd& regressor_bandwidths = {},
                                           double target_bandwidth = 0.0);

// f_{M|T,X}: independent Gaussian linear models per mediator coordinate,
// regressors (T, X), density = product over coordinates (clipped at floor).
class MediatorDensityModel {
 public:
  MediatorDensityModel(std::vector<ConditionalDensityModel> coordinates, double floor);

  // out(i) = f(m.row(i) | t, x.row(i)).
  Eigen::VectorXd density(const Eigen::MatrixXd& m, double t, const Eigen::MatrixXd& x) const;
  std::size_t dimension() const { return coords_.size(); }
  const std::vector<ConditionalDensityModel>& coordinates() const { return coords_; }

 private:
  std::vector<ConditionalDensityModel> coords_;
  double floor_;
};

MediatorDensityModel fit_mediator_density(const Eigen::MatrixXd& m, const Eigen::VectorXd& t,
                                          const Eigen::MatrixXd& x, double floor);

}  // namespace medml
