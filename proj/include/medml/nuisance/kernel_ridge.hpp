#pragma once

#include "medml/core/linalg.hpp"

#include <Eigen/Dense>

#include <vector>

namespace medml {

// Input blocks of one design, e.g. {T, M, X}; every block has n rows.
using Blocks = std::vector<Eigen::MatrixXd>;

// Median of the pairwise Euclidean distances between rows. Inputs with more
// than 2000 rows are subsampled to 2000 rows with a fixed internal seed.
double median_heuristic(const Eigen::MatrixXd& rows);

// k(a_i, b_j) = exp(-|a_i - b_j|^2 / (2 l^2)).
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double lengthscale);
// Elementwise product of per-block Gaussian grams.
Eigen::MatrixXd product_gram(const Blocks& a, const Blocks& b, const std::vector<double>& lengthscales);

// Kernel ridge regression with a product exponentiated-quadratic kernel:
// alpha = (K + n lambda I)^{-1} y, prediction(q) = sum_i alpha_i k(w_i, q).
class KernelRidgeFit {
 public:
  KernelRidgeFit(Blocks inputs, const Eigen::VectorXd& y, double lambda, std::vector<double> lengthscales);
  // Reuses a precomputed training gram.
  KernelRidgeFit(Blocks inputs, const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda,
                 std::vector<double> lengthscales);

  Eigen::VectorXd predict(const Blocks& query) const;
  double predict_one(const std::vector<Eigen::RowVectorXd>& query) const;

  // n x q matrix of k(w_i, q_j).
  Eigen::MatrixXd cross_gram(const Blocks& query) const;

  const Blocks& inputs() const { return inputs_; }
  const std::vector<double>& lengthscales() const { return lengthscales_; }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const SpdFactor& factor() const { return factor_; }
  Eigen::Index n() const { return alpha_.size(); }

 private:
  void solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y);

  Blocks inputs_;
  std::vector<double> lengthscales_;
  double lambda_;
  SpdFactor factor_;
  Eigen::VectorXd alpha_;
};

KernelRidgeFit fit_kernel_ridge(Blocks inputs, const Eigen::VectorXd& y, double lambda,
                                std::vector<double> lengthscales);

// Second stage of the kernel mean embedding: ridge regression of the
// mediator feature map phi_M(M) on (T, X). weights(t', x) returns
// beta = (K_TT .* K_XX + n lambda1 I)^{-1} (k_T(t') .* k_X(x)), so that the
// embedding of M | T=t', X=x is sum_i beta_i phi_M(M_i).
class MediatorEmbedding {
 public:
  // lengthscales = {l_T, l_X}.
  MediatorEmbedding(Eigen::VectorXd t, Eigen::MatrixXd x, double lambda1, double lengthscale_t,
                    double lengthscale_x);
  MediatorEmbedding(Eigen::VectorXd t, Eigen::MatrixXd x, const Eigen::MatrixXd& gram, double lambda1,
                    double lengthscale_t, double lengthscale_x);

  Eigen::VectorXd weights(double t_prime, const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  // Column j holds the weights for query row x.row(j).
  Eigen::MatrixXd weights(double t_prime, const Eigen::MatrixXd& x) const;

  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::MatrixXd& x() const { return x_; }
  double lambda() const { return lambda_; }
  double lengthscale_t() const { return lt_; }
  double lengthscale_x() const { return lx_; }
  const SpdFactor& factor() const { return factor_; }

 private:
  Eigen::VectorXd t_;
  Eigen::MatrixXd x_;
  double lambda_;
  double lt_;
  double lx_;
  SpdFactor factor_;
};

// Conditional mean outcome mu(t, m, x) of a first stage fitted on blocks
// {T, M, X}.
double conditional_mean_outcome(const KernelRidgeFit& fit, double t,
                                const Eigen::Ref<const Eigen::RowVectorXd>& m,
                                const Eigen::Ref<const Eigen::RowVectorXd>& x);

// Cross conditional mean outcome by implicit integration:
// omega(t, t', x) = sum_i beta_i(t', x) mu(t, M_i, x), where M_i are the
// first-stage training mediators and beta comes from the embedding.
double cross_conditional_mean(const KernelRidgeFit& first_stage, const MediatorEmbedding& embedding,
                              double t, double t_prime, const Eigen::Ref<const Eigen::RowVectorXd>& x);
// Same, fitting the embedding with penalty lambda1 on the first stage's
// training rows and lengthscales.
double cross_conditional_mean(const KernelRidgeFit& first_stage, double t, double t_prime,
                              const Eigen::Ref<const Eigen::RowVectorXd>& x, double lambda1);

}  // namespace medml
