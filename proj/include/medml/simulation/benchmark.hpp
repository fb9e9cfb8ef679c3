#pragma once

#include "medml/estimators/curves.hpp"
#include "medml/inference/inference.hpp"
#include "medml/simulation/dgp.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace medml {

// Produces one effect curve per requested estimator on a replication's
// dataset. An estimator missing from the result counts as failed.
using CurveProvider = std::function<std::map<EstimatorId, EffectCurve>(
    const Dataset& data, std::span<const EstimatorId> estimators, std::span<const double> grid, double t_prime_ref,
    std::uint64_t seed)>;

// estimate_effect_curves, falling back to one estimator at a time when the
// shared fit throws so that failures are attributed per estimator.
CurveProvider default_curve_provider(const EstimatorConfig& config);

struct BenchmarkConfig {
  std::vector<EstimatorId> estimators;
  std::vector<Index> sizes;
  int reps = 100;
  DgpConfig dgp;  // n, seed and stream are set per replication
  std::vector<double> grid;
  double t_prime_ref = 0.0;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EffectSummary {
  double bias = 0.0;  // grid average of |bias|
  double std = 0.0;   // grid average of std
  double rmse = 0.0;  // grid average of RMSE
  Eigen::VectorXd bias_by_grid;
  Eigen::VectorXd std_by_grid;
  Eigen::VectorXd rmse_by_grid;
};

struct BenchmarkCell {
  EstimatorId estimator = EstimatorId::DmlTp;
  Index n = 0;
  int successes = 0;
  int failures = 0;
  EffectSummary direct;
  EffectSummary indirect;
  EffectSummary total;
};

struct SimulationReport {
  BenchmarkConfig config;
  std::vector<BenchmarkCell> cells;  // sizes outer, estimators inner
};

// Per-grid-point statistics over replications: bias = mean(err),
// std = sqrt(mean((est - mean est)^2)) with divisor reps, RMSE = sqrt(mean(err^2)),
// so RMSE^2 = bias^2 + std^2.
inline constexpr const char* kSummaryConvention =
    "per grid point across successful replications: bias = mean(estimate - truth), std with divisor reps, "
    "rmse = sqrt(mean((estimate - truth)^2)); reported values average |bias|, std and rmse over the grid";

EffectSummary summarize(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& truth);

// Replication r of size n draws its dataset from RngStream(seed, r).derive(n).
// Replications run on `workers` threads and merge by index. More than 10%
// failures for any estimator throws NumericalError.
SimulationReport run_benchmark(const BenchmarkConfig& config, const CurveProvider& provider);
SimulationReport run_benchmark(const BenchmarkConfig& config, const EstimatorConfig& estimator);

RngStream replication_stream(std::uint64_t seed, std::uint64_t rep, Index n);

struct IntervalEstimate {
  double eta_hat = 0.0;
  double v_hat = 0.0;
  double h = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

using IntervalProvider =
    std::function<IntervalEstimate(const Dataset& data, TreatmentPair pair, std::uint64_t seed)>;

IntervalProvider default_interval_provider(const EstimatorConfig& config, const InferenceConfig& inference);

struct CoverageConfig {
  Index n = 1000;
  int reps = 100;
  TreatmentPair pair{1.0, 0.0};
  DgpConfig dgp;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct CoverageReport {
  CoverageConfig config;
  double truth = 0.0;
  double alpha_level = 0.05;
  int successes = 0;
  int failures = 0;
  int covered = 0;
  double coverage = 0.0;  // covered / successes
  double mean_width = 0.0;
  double mean_eta = 0.0;
};

// Fraction of replications whose interval contains oracle_mr(pair).
CoverageReport run_coverage(const CoverageConfig& config, double alpha_level, const IntervalProvider& provider);

}  // namespace medml
