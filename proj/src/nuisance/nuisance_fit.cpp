#include "medml/nuisance/nuisance_fit.hpp"

#include "medml/core/errors.hpp"
#include "medml/nuisance/selection.hpp"

#include <algorithm>

namespace medml {

DensityModelKind parse_density_model(const std::string& name) {
  if (name == "gaussian_linear") return DensityModelKind::GaussianLinear;
  if (name == "kernel") return DensityModelKind::Kernel;
  throw ConfigError("unknown density_model '" + name + "' (expected gaussian_linear|kernel)");
}

OutcomeModelKind parse_outcome_model(const std::string& name) {
  if (name == "kernel_ridge") return OutcomeModelKind::KernelRidge;
  if (name == "linear") return OutcomeModelKind::Linear;
  throw ConfigError("unknown outcome_model '" + name + "' (expected kernel_ridge|linear)");
}

DmlVariant parse_variant(const std::string& name) {
  if (name == "tp") return DmlVariant::TreatmentPropensity;
  if (name == "md") return DmlVariant::MediatorDensity;
  if (name == "ei-md") throw ConfigError("variant 'ei-md' (explicit integration) is not supported");
  throw ConfigError("unknown variant '" + name + "' (expected tp|md)");
}

std::string to_string(DensityModelKind kind) {
  return kind == DensityModelKind::GaussianLinear ? "gaussian_linear" : "kernel";
}
std::string to_string(OutcomeModelKind kind) {
  return kind == OutcomeModelKind::KernelRidge ? "kernel_ridge" : "linear";
}
std::string to_string(DmlVariant variant) { return variant == DmlVariant::TreatmentPropensity ? "tp" : "md"; }

Index min_training_rows(Index d_x, Index d_m) { return std::max<Index>(10, d_x + d_m + 2); }

namespace {

double block_lengthscale(const NuisanceConfig& config, const Eigen::MatrixXd& block, const char* name) {
  if (config.lengthscale) return *config.lengthscale;
  try {
    return median_heuristic(block);
  } catch (const Error& e) {
    throw FitError(std::string("lengthscale (") + name + ")", e.what());
  }
}

}  // namespace

std::shared_ptr<const KmeOutcomeModel> fit_kme_outcome(const Dataset& train, const NuisanceConfig& config) {
  const Eigen::MatrixXd t = train.t();
  const double lt = block_lengthscale(config, t, "T");
  const double lm = block_lengthscale(config, train.m(), "M");
  const double lx = block_lengthscale(config, train.x(), "X");

  const Eigen::MatrixXd ktt = gaussian_gram(t, t, lt);
  const Eigen::MatrixXd kmm = gaussian_gram(train.m(), train.m(), lm);
  const Eigen::MatrixXd kxx = gaussian_gram(train.x(), train.x(), lx);
  const Eigen::MatrixXd ktx = ktt.cwiseProduct(kxx);
  const Eigen::MatrixXd full = ktx.cwiseProduct(kmm);

  double lambda = 0.0;
  double lambda1 = 0.0;
  try {
    lambda = config.ridge_lambda ? *config.ridge_lambda : gcv_select(full, train.y(), config.gcv_grid).lambda;
  } catch (const Error& e) {
    throw FitError("conditional mean outcome", e.what());
  }
  try {
    lambda1 = config.ridge_lambda ? *config.ridge_lambda : gcv_select_embedding(ktx, kmm, config.gcv_grid).lambda;
  } catch (const Error& e) {
    throw FitError("cross conditional mean outcome", e.what());
  }

  try {
    KernelRidgeFit first(Blocks{t, train.m(), train.x()}, full, train.y(), lambda, {lt, lm, lx});
    MediatorEmbedding embedding(train.t(), train.x(), ktx, lambda1, lt, lx);
    return std::make_shared<KmeOutcomeModel>(std::move(first), std::move(embedding));
  } catch (const Error& e) {
    throw FitError("kernel mean embedding", e.what());
  }
}

std::shared_ptr<const OutcomeModel> fit_outcome_model(const Dataset& train, const NuisanceConfig& config) {
  if (config.outcome_model == OutcomeModelKind::KernelRidge) return fit_kme_outcome(train, config);
  try {
    Eigen::MatrixXd tmx(train.n(), 1 + train.d_m() + train.d_x());
    tmx << train.t(), train.m(), train.x();
    LinearFit outcome = fit_ols(tmx, train.y());
    Eigen::MatrixXd tx(train.n(), 1 + train.d_x());
    tx << train.t(), train.x();
    std::vector<LinearFit> mediators;
    for (Index j = 0; j < train.d_m(); ++j) mediators.push_back(fit_ols(tx, train.m().col(j)));
    return std::make_shared<LinearOutcomeModel>(std::move(outcome), std::move(mediators));
  } catch (const Error& e) {
    throw FitError("linear outcome model", e.what());
  }
}

ConditionalDensityModel fit_conditional_density(const NuisanceConfig& config, const Eigen::VectorXd& target,
                                                const Eigen::MatrixXd& regressors, const std::string& name) {
  try {
    if (config.density_model == DensityModelKind::GaussianLinear) {
      return fit_gaussian_density(target, regressors, config.density_floor);
    }
    return fit_kernel_density(target, regressors, config.density_floor);
  } catch (const Error& e) {
    throw FitError(name, e.what());
  }
}

NuisanceFit fit_nuisances(const Dataset& train, const NuisanceConfig& config) {
  const Index need = min_training_rows(train.d_x(), train.d_m());
  if (train.n() < need) {
    throw FitError("nuisance fit", "training set has " + std::to_string(train.n()) +
                                       " rows; at least " + std::to_string(need) + " are required");
  }
  NuisanceFit fit{
      fit_conditional_density(config, train.t(), train.x(), "f_{T|X}"),
      fit_conditional_density(config, train.t(), train.xm(), "f_{T|X,M}"),
      fit_outcome_model(train, config),
      std::nullopt,
      train.n(),
  };
  if (config.variant == DmlVariant::MediatorDensity) {
    fit.f_mtx = fit_mediator_density(train.m(), train.t(), train.x(), config.density_floor);
  }
  return fit;
}

}  // namespace medml
