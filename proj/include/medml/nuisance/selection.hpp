#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace medml {

// 9 log-spaced penalties in [1e-6, 1e2].
std::vector<double> default_gcv_grid();

struct GcvResult {
  double lambda = 0.0;
  // Criterion per grid point; NaN where the point was skipped (tr(H) <= 0).
  std::vector<double> criteria;
};

// argmin over the grid of (1/n) |tr(H)^{-1} H y|^2 with
// H = I - K (K + n lambda I)^{-1}; ties go to the larger lambda.
GcvResult gcv_select(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, std::span<const double> grid);

// Same criterion with a feature-map target: |H Phi|_F^2 = tr(H K_target H),
// used for the mediator embedding stage.
GcvResult gcv_select_embedding(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& target_gram,
                               std::span<const double> grid);

}  // namespace medml
