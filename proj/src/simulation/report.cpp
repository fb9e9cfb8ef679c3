#include "medml/simulation/report.hpp"

#include "medml/core/text_io.hpp"

#include <json.hpp>

namespace medml {

namespace {

using Json = nlohmann::ordered_json;

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json estimator_json(const EstimatorConfig& c) {
  Json j;
  j["density_model"] = to_string(c.nuisance.density_model);
  j["outcome_model"] = to_string(c.nuisance.outcome_model);
  j["variant"] = to_string(c.nuisance.variant);
  j["ridge_lambda"] = c.nuisance.ridge_lambda ? Json(*c.nuisance.ridge_lambda) : Json("gcv");
  j["lengthscale"] = c.nuisance.lengthscale ? Json(*c.nuisance.lengthscale) : Json("median");
  j["density_floor"] = c.nuisance.density_floor;
  j["kernel"] = to_string(c.kernel.family);
  switch (c.bandwidth.mode) {
    case BandwidthMode::Scott: j["bandwidth"] = "scott"; break;
    case BandwidthMode::Amse: j["bandwidth"] = "amse"; break;
    case BandwidthMode::Fixed: j["bandwidth"] = c.bandwidth.fixed; break;
  }
  j["scott_c"] = c.bandwidth.scott_c;
  j["epsilon"] = c.bandwidth.epsilon;
  j["folds"] = c.folds;
  return j;
}

Json dgp_json(const DgpConfig& d) {
  Json j;
  j["alpha"] = d.alpha;
  j["beta"] = d.beta;
  j["d_m"] = d.d_m;
  return j;
}

Json summary_json(const EffectSummary& s) {
  Json j;
  j["bias"] = s.bias;
  j["std"] = s.std;
  j["rmse"] = s.rmse;
  j["per_grid"] = {{"bias", vec(s.bias_by_grid)}, {"std", vec(s.std_by_grid)}, {"rmse", vec(s.rmse_by_grid)}};
  return j;
}

}  // namespace

std::string format_report_json(const SimulationReport& report, const std::optional<EstimatorConfig>& estimator) {
  const auto& c = report.config;
  Json j;
  j["convention"] = kSummaryConvention;
  Json cfg;
  Json ests = Json::array();
  for (EstimatorId id : c.estimators) ests.push_back(to_string(id));
  cfg["estimators"] = ests;
  cfg["sizes"] = c.sizes;
  cfg["reps"] = c.reps;
  cfg["seed"] = c.seed;
  cfg["dgp"] = dgp_json(c.dgp);
  cfg["grid"] = c.grid;
  cfg["t_prime_ref"] = c.t_prime_ref;
  if (estimator) cfg["estimator"] = estimator_json(*estimator);
  j["config"] = cfg;
  Json cells = Json::array();
  for (const auto& cell : report.cells) {
    Json e;
    e["estimator"] = to_string(cell.estimator);
    e["n"] = cell.n;
    e["successes"] = cell.successes;
    e["failures"] = cell.failures;
    e["direct"] = summary_json(cell.direct);
    e["indirect"] = summary_json(cell.indirect);
    e["total"] = summary_json(cell.total);
    cells.push_back(e);
  }
  j["results"] = cells;
  return j.dump(2) + "\n";
}

std::string format_report_csv(const SimulationReport& report) {
  std::string out = "estimator,n,effect,bias,std,rmse,successes,failures\n";
  for (const auto& cell : report.cells) {
    const std::pair<const char*, const EffectSummary*> effects[] = {
        {"direct", &cell.direct}, {"indirect", &cell.indirect}, {"total", &cell.total}};
    for (const auto& [name, s] : effects) {
      out += to_string(cell.estimator) + "," + std::to_string(cell.n) + "," + name + "," + format_real(s->bias) +
             "," + format_real(s->std) + "," + format_real(s->rmse) + "," + std::to_string(cell.successes) + "," +
             std::to_string(cell.failures) + "\n";
    }
  }
  return out;
}

std::string format_coverage_json(const CoverageReport& r, const std::optional<EstimatorConfig>& estimator) {
  Json j;
  j["n"] = r.config.n;
  j["reps"] = r.config.reps;
  j["seed"] = r.config.seed;
  j["pair"] = {{"t", r.config.pair.t}, {"t_prime", r.config.pair.t_prime}};
  j["dgp"] = dgp_json(r.config.dgp);
  if (estimator) j["estimator"] = estimator_json(*estimator);
  j["alpha"] = r.alpha_level;
  j["truth"] = r.truth;
  j["coverage"] = r.coverage;
  j["covered"] = r.covered;
  j["successes"] = r.successes;
  j["failures"] = r.failures;
  j["mean_width"] = r.mean_width;
  j["mean_eta"] = r.mean_eta;
  return j.dump(2) + "\n";
}

}  // namespace medml
