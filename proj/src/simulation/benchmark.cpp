#include "medml/simulation/benchmark.hpp"

#include "medml/core/errors.hpp"
#include "medml/core/parallel.hpp"
#include "medml/simulation/oracle.hpp"

#include <cmath>
#include <optional>

namespace medml {

namespace {

constexpr std::uint64_t kEstimatorSeedPurpose = 0xE57;

void check_failures(int failures, int reps, const std::string& what) {
  if (failures * 10 > reps) {
    throw NumericalError(what + ": " + std::to_string(failures) + " of " + std::to_string(reps) +
                         " replications failed (limit 10%)");
  }
}

}  // namespace

RngStream replication_stream(std::uint64_t seed, std::uint64_t rep, Index n) {
  return RngStream(seed, rep).derive(static_cast<std::uint64_t>(n));
}

CurveProvider default_curve_provider(const EstimatorConfig& config) {
  return [config](const Dataset& data, std::span<const EstimatorId> estimators, std::span<const double> grid,
                  double t_prime_ref, std::uint64_t seed) {
    EstimatorConfig cfg = config;
    cfg.seed = seed;
    cfg.workers = 1;
    std::map<EstimatorId, EffectCurve> out;
    try {
      for (auto& [id, r] : estimate_effect_curves(data, cfg, estimators, grid, t_prime_ref)) out[id] = std::move(r.curve);
      return out;
    } catch (const Error&) {
    }
    for (EstimatorId id : estimators) {
      try {
        const EstimatorId one[] = {id};
        out[id] = std::move(estimate_effect_curves(data, cfg, one, grid, t_prime_ref).at(id).curve);
      } catch (const Error&) {
      }
    }
    return out;
  };
}

EffectSummary summarize(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& truth) {
  EffectSummary s;
  const Index g = truth.size();
  s.bias_by_grid = Eigen::VectorXd::Zero(g);
  s.std_by_grid = Eigen::VectorXd::Zero(g);
  s.rmse_by_grid = Eigen::VectorXd::Zero(g);
  if (estimates.empty() || g == 0) return s;
  const double r = static_cast<double>(estimates.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(g);
  for (const auto& e : estimates) mean += e;
  mean /= r;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(g);
  Eigen::VectorXd mse = Eigen::VectorXd::Zero(g);
  for (const auto& e : estimates) {
    var += (e - mean).cwiseAbs2();
    mse += (e - truth).cwiseAbs2();
  }
  s.bias_by_grid = mean - truth;
  s.std_by_grid = (var / r).cwiseSqrt();
  s.rmse_by_grid = (mse / r).cwiseSqrt();
  s.bias = s.bias_by_grid.cwiseAbs().mean();
  s.std = s.std_by_grid.mean();
  s.rmse = s.rmse_by_grid.mean();
  return s;
}

SimulationReport run_benchmark(const BenchmarkConfig& config, const CurveProvider& provider) {
  if (config.reps < 2) throw ConfigError("benchmark needs at least 2 replications");
  if (config.estimators.empty()) throw ConfigError("benchmark needs at least one estimator");
  if (config.sizes.empty()) throw ConfigError("benchmark needs at least one sample size");
  if (config.grid.empty()) throw ConfigError("benchmark grid is empty");

  SimulationReport report;
  report.config = config;
  const EffectCurve truth = oracle_curve(config.grid, config.t_prime_ref, config.dgp.alpha, config.dgp.beta);
  const auto reps = static_cast<std::size_t>(config.reps);

  for (Index n : config.sizes) {
    std::vector<std::map<EstimatorId, EffectCurve>> curves(reps);
    const auto errors = parallel_for(reps, config.workers, [&](std::size_t r) {
      DgpConfig dgp = config.dgp;
      dgp.n = n;
      RngStream stream = replication_stream(config.seed, r, n);
      const std::uint64_t estimator_seed = stream.derive(kEstimatorSeedPurpose)();
      const Dataset data = generate_dgp(dgp, stream);
      curves[r] = provider(data, config.estimators, config.grid, config.t_prime_ref, estimator_seed);
    });

    for (EstimatorId id : config.estimators) {
      BenchmarkCell cell;
      cell.estimator = id;
      cell.n = n;
      std::vector<Eigen::VectorXd> direct, indirect, total;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto it = curves[r].find(id);
        const bool ok = !errors[r] && it != curves[r].end() && it->second.direct.allFinite() &&
                        it->second.indirect.allFinite() && it->second.total.allFinite();
        if (!ok) {
          ++cell.failures;
          continue;
        }
        direct.push_back(it->second.direct);
        indirect.push_back(it->second.indirect);
        total.push_back(it->second.total);
      }
      check_failures(cell.failures, config.reps, to_string(id) + " at n = " + std::to_string(n));
      cell.successes = static_cast<int>(direct.size());
      cell.direct = summarize(direct, truth.direct);
      cell.indirect = summarize(indirect, truth.indirect);
      cell.total = summarize(total, truth.total);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

SimulationReport run_benchmark(const BenchmarkConfig& config, const EstimatorConfig& estimator) {
  return run_benchmark(config, default_curve_provider(estimator));
}

IntervalProvider default_interval_provider(const EstimatorConfig& config, const InferenceConfig& inference) {
  return [config, inference](const Dataset& data, TreatmentPair pair, std::uint64_t seed) {
    EstimatorConfig cfg = config;
    cfg.seed = seed;
    cfg.workers = 1;
    const InferenceResult r = dml_with_inference(data, cfg, pair, inference);
    return IntervalEstimate{r.eta_hat, r.v_hat, r.h_used.value(), r.ci_lower, r.ci_upper};
  };
}

CoverageReport run_coverage(const CoverageConfig& config, double alpha_level, const IntervalProvider& provider) {
  if (config.reps < 10) throw ConfigError("coverage needs at least 10 replications");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  CoverageReport report;
  report.config = config;
  report.alpha_level = alpha_level;
  report.truth = oracle_mr(config.pair.t, config.pair.t_prime, config.dgp.alpha, config.dgp.beta);

  const auto reps = static_cast<std::size_t>(config.reps);
  std::vector<std::optional<IntervalEstimate>> results(reps);
  const auto errors = parallel_for(reps, config.workers, [&](std::size_t r) {
    DgpConfig dgp = config.dgp;
    dgp.n = config.n;
    RngStream stream = replication_stream(config.seed, r, config.n);
    const std::uint64_t estimator_seed = stream.derive(kEstimatorSeedPurpose)();
    results[r] = provider(generate_dgp(dgp, stream), config.pair, estimator_seed);
  });

  double width = 0.0, eta = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (errors[r] || !results[r] || !std::isfinite(results[r]->lower) || !std::isfinite(results[r]->upper)) {
      ++report.failures;
      continue;
    }
    ++report.successes;
    const auto& iv = *results[r];
    if (iv.lower <= report.truth && report.truth <= iv.upper) ++report.covered;
    width += iv.upper - iv.lower;
    eta += iv.eta_hat;
  }
  check_failures(report.failures, config.reps, "coverage");
  report.coverage = static_cast<double>(report.covered) / report.successes;
  report.mean_width = width / report.successes;
  report.mean_eta = eta / report.successes;
  return report;
}

}  // namespace medml
