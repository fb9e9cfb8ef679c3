#pragma once

#include "medml/core/folds.hpp"
#include "medml/estimators/types.hpp"

#include <span>
#include <vector>

namespace medml {

// Nuisance values entering one observation's score. The score is
//   K_h(T - t) * outcome_weight * (Y - mu)
// + K_h(T - t') * mediator_weight * (mu - omega) + omega.
struct ScoreTerms {
  double y = 0.0;
  double t_obs = 0.0;
  double mu = 0.0;
  double omega = 0.0;
  double outcome_weight = 0.0;
  double mediator_weight = 0.0;
};

// Treatment-propensity weights: f_{T|X,M}(t') / (f_{T|X,M}(t) f_{T|X}(t')) and 1 / f_{T|X}(t').
ScoreTerms tp_terms(double y, double t_obs, double mu, double omega, double f_tx_tprime, double f_txm_t,
                    double f_txm_tprime);
// Mediator-density weights: f_M(M|t', X) / (f_M(M|t, X) f_{T|X}(t)) and 1 / f_{T|X}(t').
ScoreTerms md_terms(double y, double t_obs, double mu, double omega, double f_tx_t, double f_tx_tprime,
                    double f_m_t, double f_m_tprime);

double kernel_score(const ScoreTerms& terms, TreatmentPair pair, Bandwidth h, KernelSpec kernel);

// Per-observation nuisance values for one pair, bandwidth-free so that the
// same cross-fit serves any h.
struct ScoreInputs {
  TreatmentPair pair;
  Eigen::VectorXd t_obs;
  Eigen::VectorXd y;
  Eigen::VectorXd mu;
  Eigen::VectorXd omega;
  Eigen::VectorXd outcome_weight;
  Eigen::VectorXd mediator_weight;

  ScoreTerms terms(Index i) const;
};

Eigen::VectorXd kernel_scores(const ScoreInputs& inputs, Bandwidth h, KernelSpec kernel);

struct CrossFit {
  FoldAssignment folds;
  std::vector<NuisanceFit> fits;  // fits[l] trained on the complement of fold l
};

// Fits the nuisances on every fold complement. L = 1 trains on the full
// sample and scores the same rows.
CrossFit cross_fit(const Dataset& data, const EstimatorConfig& config);

// Score inputs for every pair, one vector per requested variant (in the
// order given). The MD variant needs fits with a mediator density.
std::vector<std::vector<ScoreInputs>> score_inputs(const CrossFit& cf, const Dataset& data,
                                                   std::span<const TreatmentPair> pairs,
                                                   std::span<const DmlVariant> variants);

// Single-observation scores against a fitted NuisanceFit.
double dml_score(const Observation& row, const NuisanceFit& nf, TreatmentPair pair, Bandwidth h,
                 KernelSpec kernel);
double dml_score_md(const Observation& row, const NuisanceFit& nf, TreatmentPair pair, Bandwidth h,
                    KernelSpec kernel);

MediatedResponseEstimate estimate_from_inputs(const ScoreInputs& inputs, Bandwidth h, KernelSpec kernel,
                                              EstimatorId id, int folds);

// Scores at the configured bandwidth (Scott, fixed, or AMSE per pair).
std::vector<MediatedResponseEstimate> estimates_from_inputs(const std::vector<ScoreInputs>& inputs,
                                                            const Dataset& data, const EstimatorConfig& config,
                                                            EstimatorId id);

// Algorithm: cross-fit the nuisances, score every observation on its held
// out fold, average. AMSE mode selects h per pair.
MediatedResponseEstimate dml_estimate(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair);
std::vector<MediatedResponseEstimate> dml_estimate(const Dataset& data, const EstimatorConfig& config,
                                                   std::span<const TreatmentPair> pairs);

}  // namespace medml
