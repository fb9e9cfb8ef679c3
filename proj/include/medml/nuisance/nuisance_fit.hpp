#pragma once

#include "medml/core/dataset.hpp"
#include "medml/nuisance/density.hpp"
#include "medml/nuisance/outcome_model.hpp"
#include "medml/nuisance/selection.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace medml {

enum class DensityModelKind { GaussianLinear, Kernel };
enum class OutcomeModelKind { KernelRidge, Linear };
// TP weights by treatment propensities, MD by mediator densities.
enum class DmlVariant { TreatmentPropensity, MediatorDensity };

DensityModelKind parse_density_model(const std::string& name);
OutcomeModelKind parse_outcome_model(const std::string& name);
DmlVariant parse_variant(const std::string& name);
std::string to_string(DensityModelKind kind);
std::string to_string(OutcomeModelKind kind);
std::string to_string(DmlVariant variant);

struct NuisanceConfig {
  DensityModelKind density_model = DensityModelKind::GaussianLinear;
  OutcomeModelKind outcome_model = OutcomeModelKind::KernelRidge;
  // Fixed ridge penalty for both stages; empty selects each by GCV.
  std::optional<double> ridge_lambda;
  std::vector<double> gcv_grid = default_gcv_grid();
  // Fixed lengthscale for every block; empty uses the median heuristic.
  std::optional<double> lengthscale;
  double density_floor = 1e-3;
  DmlVariant variant = DmlVariant::TreatmentPropensity;
};

// The nuisances fitted on one training set (a fold complement).
struct NuisanceFit {
  ConditionalDensityModel f_tx;   // T | X
  ConditionalDensityModel f_txm;  // T | X, M (regressors [X M])
  std::shared_ptr<const OutcomeModel> outcome;
  std::optional<MediatorDensityModel> f_mtx;  // only for the MD variant
  Index n_train = 0;
};

Index min_training_rows(Index d_x, Index d_m);

std::shared_ptr<const OutcomeModel> fit_outcome_model(const Dataset& train, const NuisanceConfig& config);
std::shared_ptr<const KmeOutcomeModel> fit_kme_outcome(const Dataset& train, const NuisanceConfig& config);

// Density model of the configured kind; failures become FitError(name).
ConditionalDensityModel fit_conditional_density(const NuisanceConfig& config, const Eigen::VectorXd& target,
                                                const Eigen::MatrixXd& regressors, const std::string& name);
NuisanceFit fit_nuisances(const Dataset& train, const NuisanceConfig& config);

}  // namespace medml
