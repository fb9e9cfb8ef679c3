#pragma once

#include "medml/estimators/effect_curve.hpp"
#include "medml/estimators/types.hpp"

#include <map>
#include <span>
#include <vector>

namespace medml {

struct CurveResult {
  EffectCurve curve;
  std::vector<MediatedResponseEstimate> responses;  // empty for OLS
};

// Effect curves for several estimators on one dataset. With a single fold,
// DML (both variants), IPW and G-computation share one nuisance fit on the
// full sample; otherwise the baselines refit on the full sample.
std::map<EstimatorId, CurveResult> estimate_effect_curves(const Dataset& data, const EstimatorConfig& config,
                                                          std::span<const EstimatorId> estimators,
                                                          std::span<const double> grid, double t_prime_ref);

}  // namespace medml
