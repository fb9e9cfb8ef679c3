#include "medml/estimators/curves.hpp"

#include "medml/estimators/baselines.hpp"
#include "medml/estimators/dml.hpp"

#include <algorithm>

namespace medml {

namespace {

bool wants(std::span<const EstimatorId> ids, EstimatorId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

CurveResult from_responses(std::vector<MediatedResponseEstimate> responses, std::span<const double> grid,
                           double t_prime_ref) {
  CurveResult r;
  r.curve = effect_curve(response_table(responses), grid, t_prime_ref);
  r.responses = std::move(responses);
  return r;
}

}  // namespace

std::map<EstimatorId, CurveResult> estimate_effect_curves(const Dataset& data, const EstimatorConfig& config,
                                                          std::span<const EstimatorId> estimators,
                                                          std::span<const double> grid, double t_prime_ref) {
  const auto pairs = required_pairs(grid, t_prime_ref);
  std::map<EstimatorId, CurveResult> out;

  const bool tp = wants(estimators, EstimatorId::DmlTp);
  const bool md = wants(estimators, EstimatorId::DmlMd);
  const bool ipw = wants(estimators, EstimatorId::Ipw);
  const bool gcomp = wants(estimators, EstimatorId::Gcomp);
  // With one fold the DML nuisances are exactly the full-sample baseline fits.
  const bool shared = config.folds == 1;
  const bool share_ipw = shared && ipw;
  const bool share_gcomp = shared && gcomp;

  if (tp || md || share_ipw || share_gcomp) {
    EstimatorConfig cfg = config;
    if (md) cfg.nuisance.variant = DmlVariant::MediatorDensity;
    const CrossFit cf = cross_fit(data, cfg);
    std::vector<DmlVariant> variants;
    if (tp || share_ipw || share_gcomp) variants.push_back(DmlVariant::TreatmentPropensity);
    if (md) variants.push_back(DmlVariant::MediatorDensity);
    const auto inputs = score_inputs(cf, data, pairs, variants);
    const auto& tp_inputs = inputs.front();

    if (tp) out[EstimatorId::DmlTp] = from_responses(estimates_from_inputs(tp_inputs, data, config, EstimatorId::DmlTp),
                                                     grid, t_prime_ref);
    if (md) out[EstimatorId::DmlMd] = from_responses(
                estimates_from_inputs(inputs.back(), data, config, EstimatorId::DmlMd), grid, t_prime_ref);
    if (share_ipw) {
      BandwidthChoice choice = config.bandwidth;
      if (choice.mode == BandwidthMode::Amse) choice.mode = BandwidthMode::Scott;
      const Bandwidth h = global_bandwidth(data, choice);
      std::vector<MediatedResponseEstimate> responses;
      for (const auto& in : tp_inputs) {
        MediatedResponseEstimate est;
        est.pair = in.pair;
        est.scores.resize(in.y.size());
        for (Index i = 0; i < in.y.size(); ++i) {
          const double k = smooth_weight(config.kernel, h, in.t_obs(i) - in.pair.t);
          est.scores(i) = k == 0.0 ? 0.0 : k * in.y(i) * in.outcome_weight(i);
        }
        est.eta_hat = est.scores.mean();
        est.bandwidth = h;
        est.estimator = EstimatorId::Ipw;
        est.n = data.n();
        est.folds = 1;
        responses.push_back(std::move(est));
      }
      out[EstimatorId::Ipw] = from_responses(std::move(responses), grid, t_prime_ref);
    }
    if (share_gcomp) {
      std::vector<MediatedResponseEstimate> responses;
      for (const auto& in : tp_inputs) {
        MediatedResponseEstimate est;
        est.pair = in.pair;
        est.scores = in.omega;
        est.eta_hat = est.scores.mean();
        est.estimator = EstimatorId::Gcomp;
        est.n = data.n();
        est.folds = 1;
        responses.push_back(std::move(est));
      }
      out[EstimatorId::Gcomp] = from_responses(std::move(responses), grid, t_prime_ref);
    }
  }

  if (ipw && !share_ipw) out[EstimatorId::Ipw] = from_responses(ipw_estimate(data, config, pairs), grid, t_prime_ref);
  if (gcomp && !share_gcomp) {
    out[EstimatorId::Gcomp] = from_responses(gcomp_estimate(data, config, pairs), grid, t_prime_ref);
  }
  if (wants(estimators, EstimatorId::Ols)) out[EstimatorId::Ols] = CurveResult{ols_estimate(data, grid, t_prime_ref), {}};
  return out;
}

}  // namespace medml
