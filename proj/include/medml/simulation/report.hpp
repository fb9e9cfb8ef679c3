#pragma once

#include "medml/simulation/benchmark.hpp"

#include <optional>
#include <string>

namespace medml {

// Full report as JSON: convention, configuration echo, and per estimator x n
// the grid-averaged and per-grid bias/std/RMSE of each effect.
std::string format_report_json(const SimulationReport& report,
                               const std::optional<EstimatorConfig>& estimator = std::nullopt);

// estimator,n,effect,bias,std,rmse,successes,failures
std::string format_report_csv(const SimulationReport& report);

std::string format_coverage_json(const CoverageReport& report,
                                 const std::optional<EstimatorConfig>& estimator = std::nullopt);

}  // namespace medml
