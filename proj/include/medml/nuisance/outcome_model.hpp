#pragma once

#include "medml/core/linalg.hpp"
#include "medml/nuisance/kernel_ridge.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace medml {

// Outcome nuisances prepared for a fixed set of query rows (M_q, X_q).
class OutcomeEvaluator {
 public:
  virtual ~OutcomeEvaluator() = default;
  // mu(t, M_q, X_q) per query row.
  virtual Eigen::VectorXd mu(double t) const = 0;
  // Column j holds omega(ts[j], t_prime, X_q) per query row.
  virtual Eigen::MatrixXd omega(std::span<const double> ts, double t_prime) const = 0;
};

// Fitted conditional mean outcome mu_Y and cross conditional mean outcome
// omega_Y. Evaluators borrow the model; the model must outlive them.
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;
  virtual std::unique_ptr<OutcomeEvaluator> evaluator(const Eigen::MatrixXd& m,
                                                      const Eigen::MatrixXd& x) const = 0;
  virtual std::string name() const = 0;
};

// Kernel mean embedding stack: first-stage kernel ridge on (T, M, X) and
// the mediator embedding on (T, X).
class KmeOutcomeModel final : public OutcomeModel {
 public:
  KmeOutcomeModel(KernelRidgeFit first_stage, MediatorEmbedding embedding);

  std::unique_ptr<OutcomeEvaluator> evaluator(const Eigen::MatrixXd& m, const Eigen::MatrixXd& x) const override;
  std::string name() const override { return "kernel_ridge"; }

  const KernelRidgeFit& first_stage() const { return mu_; }
  const MediatorEmbedding& embedding() const { return embedding_; }
  // K_MM (K_TT .* K_XX + n lambda1 I)^{-1}, shared by every omega query.
  const Eigen::MatrixXd& propagator() const { return propagator_; }

 private:
  KernelRidgeFit mu_;
  MediatorEmbedding embedding_;
  Eigen::MatrixXd propagator_;
};

// Parametric scenario: mu linear in (T, M, X); each mediator coordinate
// linear in (T, X), so omega(t, t', x) = mu(t, E[M | t', x], x).
class LinearOutcomeModel final : public OutcomeModel {
 public:
  LinearOutcomeModel(LinearFit outcome, std::vector<LinearFit> mediators);

  std::unique_ptr<OutcomeEvaluator> evaluator(const Eigen::MatrixXd& m, const Eigen::MatrixXd& x) const override;
  std::string name() const override { return "linear"; }

  const LinearFit& outcome() const { return outcome_; }
  const std::vector<LinearFit>& mediators() const { return mediators_; }

 private:
  LinearFit outcome_;
  std::vector<LinearFit> mediators_;
};

}  // namespace medml
