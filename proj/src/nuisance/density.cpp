#include "medml/nuisance/density.hpp"

#include "medml/core/errors.hpp"
#include "medml/smoothing/kernel.hpp"

#include <cmath>
#include <numbers>

namespace medml {
namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double sample_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

ConditionalDensityModel ConditionalDensityModel::gaussian_linear(LinearFit mean, double residual_sd,
                                                                 double floor) {
  if (!(residual_sd > 0.0)) throw ArgumentError("gaussian density: residual sd must be positive");
  if (!(floor > 0.0)) throw ArgumentError("density floor must be positive");
  ConditionalDensityModel model;
  model.kind_ = DensityKind::GaussianLinear;
  model.mean_ = std::move(mean);
  model.sd_ = residual_sd;
  model.floor_ = floor;
  return model;
}

ConditionalDensityModel ConditionalDensityModel::kernel_conditional(Eigen::VectorXd target,
                                                                    Eigen::MatrixXd regressors,
                                                                    Eigen::VectorXd regressor_bandwidths,
                                                                    double target_bandwidth,
                                                                    double floor) {
  if (target.size() < 1 || regressors.rows() != target.size()) {
    throw ArgumentError("kernel density: target and regressors disagree on the row count");
  }
  if (regressor_bandwidths.size() != regressors.cols() || (regressor_bandwidths.array() <= 0.0).any() ||
      !(target_bandwidth > 0.0)) {
    throw ArgumentError("kernel density: bandwidths must be positive, one per regressor column");
  }
  if (!(floor > 0.0)) throw ArgumentError("density floor must be positive");
  ConditionalDensityModel model;
  model.kind_ = DensityKind::KernelConditional;
  model.target_ = std::move(target);
  model.regressors_ = std::move(regressors);
  model.reg_bw_ = std::move(regressor_bandwidths);
  model.target_bw_ = target_bandwidth;
  model.floor_ = floor;
  return model;
}

double ConditionalDensityModel::conditional_mean(const Eigen::Ref<const Eigen::RowVectorXd>& q) const {
  return mean_.predict(q);
}

Eigen::VectorXd ConditionalDensityModel::kernel_weights(const Eigen::Ref<const Eigen::RowVectorXd>& q) const {
  const Eigen::Index n = regressors_.rows();
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < regressors_.cols(); ++d) {
      const double z = (regressors_(i, d) - q(d)) / reg_bw_(d);
      s += z * z;
    }
    w(i) = std::exp(-0.5 * s);
  }
  return w;
}

double ConditionalDensityModel::unconditional(double v) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < target_.size(); ++i) s += normal_pdf((target_(i) - v) / target_bw_);
  return s / (static_cast<double>(target_.size()) * target_bw_);
}

DensityValue ConditionalDensityModel::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& q, double v) const {
  if (kind_ == DensityKind::GaussianLinear) {
    const double z = (v - mean_.predict(q)) / sd_;
    return {std::max(floor_, normal_pdf(z) / sd_), false};
  }
  const Eigen::VectorXd w = kernel_weights(q);
  const double total = w.sum();
  if (!(total > 0.0)) return {std::max(floor_, unconditional(v)), true};
  double s = 0.0;
  for (Eigen::Index i = 0; i < target_.size(); ++i) s += w(i) * normal_pdf((target_(i) - v) / target_bw_);
  return {std::max(floor_, s / (total * target_bw_)), false};
}

double ConditionalDensityModel::density_at(const Eigen::Ref<const Eigen::RowVectorXd>& q, double v) const {
  return evaluate(q, v).value;
}

Eigen::MatrixXd ConditionalDensityModel::density_matrix(const Eigen::MatrixXd& rows,
                                                        std::span<const double> values) const {
  const Eigen::Index nq = rows.rows();
  const auto nv = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd out(nq, nv);
  if (kind_ == DensityKind::GaussianLinear) {
    const Eigen::VectorXd mean = mean_.predict(rows);
    for (Eigen::Index j = 0; j < nv; ++j) {
      for (Eigen::Index i = 0; i < nq; ++i) {
        out(i, j) = std::max(floor_, normal_pdf((values[j] - mean(i)) / sd_) / sd_);
      }
    }
    return out;
  }
  // Target kernel values are shared by every query row.
  const Eigen::Index n = target_.size();
  Eigen::MatrixXd target_kernel(n, nv);
  for (Eigen::Index j = 0; j < nv; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      target_kernel(i, j) = normal_pdf((target_(i) - values[j]) / target_bw_) / target_bw_;
    }
  }
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Eigen::VectorXd w = kernel_weights(rows.row(q));
    const double total = w.sum();
    if (total > 0.0) {
      const Eigen::RowVectorXd dens = (w.transpose() * target_kernel) / total;
      out.row(q) = dens.cwiseMax(floor_);
    } else {
      for (Eigen::Index j = 0; j < nv; ++j) out(q, j) = std::max(floor_, unconditional(values[j]));
    }
  }
  return out;
}

Eigen::VectorXd ConditionalDensityModel::density_rowwise(const Eigen::MatrixXd& rows,
                                                         const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i) = density_at(rows.row(i), v(i));
  return out;
}

ConditionalDensityModel fit_gaussian_density(const Eigen::VectorXd& target,
                                             const Eigen::MatrixXd& regressors, double floor) {
  if (target.size() < regressors.cols() + 2) {
    throw FitError("gaussian density", "need at least d + 2 rows");
  }
  LinearFit fit;
  try {
    fit = fit_ols(regressors, target, true);
  } catch (const NumericalError& e) {
    throw FitError("gaussian density", e.what());
  }
  const double sd = sample_sd(fit.residuals);
  if (!(sd > 1e-10 * std::max(1.0, sample_sd(target)))) {
    throw FitError("gaussian density", "degenerate fit: residual variance is zero");
  }
  return ConditionalDensityModel::gaussian_linear(std::move(fit), sd, floor);
}

ConditionalDensityModel fit_kernel_density(const Eigen::VectorXd& target,
                                           const Eigen::MatrixXd& regressors, double floor,
                                           const Eigen::VectorXd& regressor_bandwidths,
                                           double target_bandwidth) {
  const Eigen::Index n = target.size();
  Eigen::VectorXd reg_bw = regressor_bandwidths;
  double target_bw = target_bandwidth;
  try {
    if (reg_bw.size() == 0) {
      if (n < 10) throw FitError("kernel density", "need at least 10 rows for default bandwidths");
      reg_bw.resize(regressors.cols());
      for (Eigen::Index d = 0; d < regressors.cols(); ++d) {
        const Eigen::VectorXd col = regressors.col(d);
        reg_bw(d) = scott_bandwidth(std::span<const double>(col.data(), static_cast<std::size_t>(n))).value();
      }
    }
    if (!(target_bw > 0.0)) {
      target_bw = scott_bandwidth(std::span<const double>(target.data(), static_cast<std::size_t>(n))).value();
    }
  } catch (const FitError&) {
    throw;
  } catch (const Error& e) {
    throw FitError("kernel density", e.what());
  }
  return ConditionalDensityModel::kernel_conditional(target, regressors, std::move(reg_bw), target_bw, floor);
}

MediatorDensityModel::MediatorDensityModel(std::vector<ConditionalDensityModel> coordinates, double floor)
    : coords_(std::move(coordinates)), floor_(floor) {
  if (coords_.empty()) throw ArgumentError("mediator density needs at least one coordinate");
}

Eigen::VectorXd MediatorDensityModel::density(const Eigen::MatrixXd& m, double t, const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd regs(x.rows(), x.cols() + 1);
  regs.col(0).setConstant(t);
  regs.rightCols(x.cols()) = x;
  Eigen::VectorXd out = Eigen::VectorXd::Ones(m.rows());
  for (std::size_t j = 0; j < coords_.size(); ++j) {
    out.array() *= coords_[j].density_rowwise(regs, m.col(static_cast<Eigen::Index>(j))).array();
  }
  return out.cwiseMax(floor_);
}

MediatorDensityModel fit_mediator_density(const Eigen::MatrixXd& m, const Eigen::VectorXd& t,
                                          const Eigen::MatrixXd& x, double floor) {
  Eigen::MatrixXd regs(x.rows(), x.cols() + 1);
  regs << t, x;
  std::vector<ConditionalDensityModel> coords;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    try {
      coords.push_back(fit_gaussian_density(m.col(j), regs, floor));
    } catch (const FitError& e) {
      throw FitError("mediator density (coordinate " + std::to_string(j + 1) + ")", e.what());
    }
  }
  return MediatorDensityModel(std::move(coords), floor);
}

}  // namespace medml
