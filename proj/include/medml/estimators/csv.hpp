#pragma once

#include "medml/estimators/effect_curve.hpp"

#include <span>
#include <string>

namespace medml {

// estimator,t,t_prime,eta_hat,bandwidth,n,L,variant
std::string format_pair_results(std::span<const MediatedResponseEstimate> estimates);

// t,direct,indirect,total then ci_lo_<band>,ci_hi_<band> per band.
std::string format_effect_curve(const EffectCurve& curve);

// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace medml
