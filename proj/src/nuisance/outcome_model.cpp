#include "medml/nuisance/outcome_model.hpp"

#include "medml/core/errors.hpp"

namespace medml {
namespace {

class KmeEvaluator final : public OutcomeEvaluator {
 public:
  KmeEvaluator(const KmeOutcomeModel& model, const Eigen::MatrixXd& m, const Eigen::MatrixXd& x)
      : model_(model) {
    const auto& fit = model.first_stage();
    const auto& ls = fit.lengthscales();
    kx_ = gaussian_gram(fit.inputs()[2], x, ls[2]);
    mx_ = gaussian_gram(fit.inputs()[1], m, ls[1]).cwiseProduct(kx_);
  }

  Eigen::VectorXd mu(double t) const override { return mx_.transpose() * weighted_alpha(t); }

  Eigen::MatrixXd omega(std::span<const double> ts, double t_prime) const override {
    const auto& emb = model_.embedding();
    // Column q of `rhs` is k_T(t') .* k_X(x_q); propagating it through
    // K_MM G^{-1} gives the embedded mediator kernel at every training row.
    const Eigen::VectorXd kt = gaussian_gram(emb.t(), Eigen::MatrixXd::Constant(1, 1, t_prime), emb.lengthscale_t());
    Eigen::MatrixXd rhs = kx_;
    rhs.array().colwise() *= kt.array();
    Eigen::MatrixXd mediated(rhs.rows(), rhs.cols());
    mediated.noalias() = model_.propagator() * rhs;
    mediated.array() *= kx_.array();
    Eigen::MatrixXd out(kx_.cols(), static_cast<Eigen::Index>(ts.size()));
    for (std::size_t j = 0; j < ts.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) = mediated.transpose() * weighted_alpha(ts[j]);
    }
    return out;
  }

 private:
  Eigen::VectorXd weighted_alpha(double t) const {
    const auto& fit = model_.first_stage();
    const Eigen::VectorXd kt =
        gaussian_gram(fit.inputs()[0], Eigen::MatrixXd::Constant(1, 1, t), fit.lengthscales()[0]);
    return fit.alpha().cwiseProduct(kt);
  }

  const KmeOutcomeModel& model_;
  Eigen::MatrixXd kx_;  // k_X(train, query)
  Eigen::MatrixXd mx_;  // k_M(train, query) .* k_X(train, query)
};

class LinearEvaluator final : public OutcomeEvaluator {
 public:
  LinearEvaluator(const LinearOutcomeModel& model, const Eigen::MatrixXd& m, const Eigen::MatrixXd& x)
      : model_(model), m_(m), x_(x) {}

  Eigen::VectorXd mu(double t) const override { return predict(t, m_); }

  Eigen::MatrixXd omega(std::span<const double> ts, double t_prime) const override {
    const auto& meds = model_.mediators();
    Eigen::MatrixXd regs(x_.rows(), x_.cols() + 1);
    regs.col(0).setConstant(t_prime);
    regs.rightCols(x_.cols()) = x_;
    Eigen::MatrixXd expected_m(x_.rows(), static_cast<Eigen::Index>(meds.size()));
    for (std::size_t j = 0; j < meds.size(); ++j) expected_m.col(static_cast<Eigen::Index>(j)) = meds[j].predict(regs);
    Eigen::MatrixXd out(x_.rows(), static_cast<Eigen::Index>(ts.size()));
    for (std::size_t j = 0; j < ts.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = predict(ts[j], expected_m);
    return out;
  }

 private:
  Eigen::VectorXd predict(double t, const Eigen::MatrixXd& m) const {
    const auto& b = model_.outcome().coefficients;
    const Eigen::Index dm = m.cols();
    Eigen::VectorXd out = (m * b.segment(1, dm) + x_ * b.tail(x_.cols())).array() + (model_.outcome().intercept + b(0) * t);
    return out;
  }

  const LinearOutcomeModel& model_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd x_;
};

}  // namespace

KmeOutcomeModel::KmeOutcomeModel(KernelRidgeFit first_stage, MediatorEmbedding embedding)
    : mu_(std::move(first_stage)), embedding_(std::move(embedding)) {
  if (mu_.inputs().size() != 3) throw ArgumentError("KME outcome model: first stage needs blocks {T, M, X}");
  if (embedding_.t().size() != mu_.n()) throw ArgumentError("KME outcome model: stages trained on different rows");
  const Eigen::MatrixXd kmm = gaussian_gram(mu_.inputs()[1], mu_.inputs()[1], mu_.lengthscales()[1]);
  // G is symmetric, so (K_MM G^{-1})^T = G^{-1} K_MM.
  propagator_ = embedding_.factor().solve(kmm).transpose();
}

std::unique_ptr<OutcomeEvaluator> KmeOutcomeModel::evaluator(const Eigen::MatrixXd& m, const Eigen::MatrixXd& x) const {
  return std::make_unique<KmeEvaluator>(*this, m, x);
}

LinearOutcomeModel::LinearOutcomeModel(LinearFit outcome, std::vector<LinearFit> mediators)
    : outcome_(std::move(outcome)), mediators_(std::move(mediators)) {
  if (mediators_.empty()) throw ArgumentError("linear outcome model: no mediator models");
}

std::unique_ptr<OutcomeEvaluator> LinearOutcomeModel::evaluator(const Eigen::MatrixXd& m,
                                                                const Eigen::MatrixXd& x) const {
  return std::make_unique<LinearEvaluator>(*this, m, x);
}

}  // namespace medml
