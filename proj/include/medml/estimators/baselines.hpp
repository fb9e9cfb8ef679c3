#pragma once

#include "medml/estimators/effect_curve.hpp"
#include "medml/estimators/types.hpp"

#include <span>
#include <vector>

namespace medml {

// Generalized inverse probability weighting, densities fitted on the full
// sample: eta = mean K_h(T - t) Y f_{T|X,M}(t') / (f_{T|X}(t') f_{T|X,M}(t)).
MediatedResponseEstimate ipw_estimate(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair);
std::vector<MediatedResponseEstimate> ipw_estimate(const Dataset& data, const EstimatorConfig& config,
                                                   std::span<const TreatmentPair> pairs);

// G-computation through the mediation formula: eta = mean_i omega(t, t', X_i)
// with the outcome stack fitted on the full sample.
MediatedResponseEstimate gcomp_estimate(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair);
std::vector<MediatedResponseEstimate> gcomp_estimate(const Dataset& data, const EstimatorConfig& config,
                                                     std::span<const TreatmentPair> pairs);

// Coefficient product method. Y ~ T + M + X gives (b_T, b_M), each
// M_j ~ T + X gives a_{T,j}; direct(t) = b_T (t' - t),
// indirect(t) = sum_j a_{T,j} b_{M,j} (t' - t).
struct OlsCoefficients {
  double b_t = 0.0;
  Eigen::VectorXd b_m;
  Eigen::VectorXd a_t;
};
OlsCoefficients ols_coefficients(const Dataset& data);
EffectCurve ols_estimate(const Dataset& data, std::span<const double> grid, double t_prime_ref);

}  // namespace medml
