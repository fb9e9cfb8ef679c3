#include "medml/inference/inference.hpp"

#include "medml/core/errors.hpp"
#include "medml/core/text_io.hpp"
#include "medml/estimators/csv.hpp"
#include "medml/inference/bootstrap.hpp"
#include "medml/inference/normal.hpp"

#include <cmath>

namespace medml {

double variance_hat(const Eigen::VectorXd& scores, Bandwidth h, bool centered) {
  if (scores.size() == 0) throw ArgumentError("variance of an empty score vector");
  if (!centered) return h.value() * scores.squaredNorm() / static_cast<double>(scores.size());
  const double m = scores.mean();
  return h.value() * (scores.array() - m).square().sum() / static_cast<double>(scores.size());
}

double bias_hat(double eta_b, double eta_eps_b, Bandwidth b, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("epsilon must lie in (0, 1)");
  return (eta_b - eta_eps_b) / (b.value() * b.value() * (1.0 - eps * eps));
}

std::optional<Bandwidth> amse_bandwidth(double v_hat, double b_hat, Index n, double threshold) {
  if (n < 1) throw ArgumentError("sample size must be positive");
  if (!(v_hat > 0.0) || !std::isfinite(v_hat) || !std::isfinite(b_hat) || std::abs(b_hat) <= threshold) {
    return std::nullopt;
  }
  const double h = std::pow(v_hat / (4.0 * b_hat * b_hat), 0.2) * std::pow(static_cast<double>(n), -0.2);
  if (!(h > 0.0) || !std::isfinite(h)) return std::nullopt;
  return Bandwidth(h);
}

AmseSelection select_amse_bandwidth(const ScoreInputs& inputs, KernelSpec kernel, Bandwidth pilot, double eps,
                                    bool centered) {
  const Bandwidth small(eps * pilot.value());
  const Eigen::VectorXd at_b = kernel_scores(inputs, pilot, kernel);
  const double eta_eps = kernel_scores(inputs, small, kernel).mean();
  AmseSelection sel{pilot, variance_hat(at_b, pilot, centered), 0.0, pilot, false, {}};
  sel.b_hat = bias_hat(at_b.mean(), eta_eps, pilot, eps);
  if (const auto h = amse_bandwidth(sel.v_pilot, sel.b_hat, inputs.y.size())) {
    sel.h = *h;
  } else {
    sel.fallback = true;
    sel.warning = "AMSE bandwidth undefined (bias estimate ~ 0); using the Scott bandwidth";
  }
  return sel;
}

std::pair<double, double> asymptotic_ci(double eta_hat, double v_hat, Index n, Bandwidth h, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (v_hat < 0.0) throw ArgumentError("variance estimate must be non-negative");
  if (n < 1) throw ArgumentError("sample size must be positive");
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(v_hat / (static_cast<double>(n) * h.value()));
  return {eta_hat - half, eta_hat + half};
}

CiMethod parse_ci_method(const std::string& name) {
  if (name == "asymptotic") return CiMethod::Asymptotic;
  if (name == "bootstrap") return CiMethod::Bootstrap;
  throw ConfigError("unknown CI method '" + name + "' (expected asymptotic or bootstrap)");
}

std::string to_string(CiMethod method) { return method == CiMethod::Asymptotic ? "asymptotic" : "bootstrap"; }

PairInference infer_from_inputs(const ScoreInputs& inputs, const EstimatorConfig& config,
                                const InferenceConfig& inference, Bandwidth global, EstimatorId id) {
  PairInference out;
  Bandwidth h = global;
  if (config.bandwidth.mode == BandwidthMode::Amse) {
    const AmseSelection sel =
        select_amse_bandwidth(inputs, config.kernel, global, config.bandwidth.epsilon, inference.centered_variance);
    h = sel.h;
    out.inference.b_hat = sel.b_hat;
    out.inference.pilot = sel.pilot;
    if (sel.fallback) out.inference.warnings.push_back(sel.warning);
  }
  out.estimate = estimate_from_inputs(inputs, h, config.kernel, id, config.folds);
  out.estimate.warnings = out.inference.warnings;

  auto& r = out.inference;
  r.pair = inputs.pair;
  r.eta_hat = out.estimate.eta_hat;
  r.h_used = h;
  r.v_hat = variance_hat(out.estimate.scores, h, inference.centered_variance);
  r.method = CiMethod::Asymptotic;
  std::tie(r.ci_lower, r.ci_upper) = asymptotic_ci(r.eta_hat, r.v_hat, out.estimate.n, h, inference.alpha);
  return out;
}

std::vector<InferenceResult> dml_with_inference(const Dataset& data, const EstimatorConfig& config,
                                                std::span<const TreatmentPair> pairs,
                                                const InferenceConfig& inference) {
  const CrossFit cf = cross_fit(data, config);
  const DmlVariant variant[] = {config.nuisance.variant};
  const auto inputs = score_inputs(cf, data, pairs, variant).front();
  const EstimatorId id =
      config.nuisance.variant == DmlVariant::TreatmentPropensity ? EstimatorId::DmlTp : EstimatorId::DmlMd;
  BandwidthChoice choice = config.bandwidth;
  if (choice.mode == BandwidthMode::Amse) choice.mode = BandwidthMode::Scott;
  const Bandwidth global = global_bandwidth(data, choice);

  std::vector<InferenceResult> out;
  for (const auto& in : inputs) out.push_back(infer_from_inputs(in, config, inference, global, id).inference);

  if (inference.method == CiMethod::Bootstrap) {
    EstimatorConfig inner = config;
    inner.workers = 1;
    const std::vector<TreatmentPair> ps(pairs.begin(), pairs.end());
    const auto summary = bootstrap(
        [&](const Dataset& d) {
          const auto est = dml_estimate(d, inner, ps);
          Eigen::VectorXd v(static_cast<Index>(est.size()));
          for (std::size_t k = 0; k < est.size(); ++k) v(static_cast<Index>(k)) = est[k].eta_hat;
          return v;
        },
        data, inference.bootstrap_reps, inference.alpha, config.seed, config.workers);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k].method = CiMethod::Bootstrap;
      out[k].ci_lower = summary.lower(static_cast<Index>(k));
      out[k].ci_upper = summary.upper(static_cast<Index>(k));
      if (summary.failures > 0) {
        out[k].warnings.push_back(std::to_string(summary.failures) + " bootstrap replications failed");
      }
    }
  }
  return out;
}

std::string format_inference_results(std::span<const InferenceResult> results) {
  std::string out = "t,t_prime,eta_hat,v_hat,b_hat,h_used,ci_lower,ci_upper,ci_method,warnings\n";
  for (const auto& r : results) {
    std::string warnings;
    for (const auto& w : r.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    out += format_real(r.pair.t) + "," + format_real(r.pair.t_prime) + "," + format_real(r.eta_hat) + "," +
           format_real(r.v_hat) + "," + (r.b_hat ? format_real(*r.b_hat) : std::string()) + "," +
           format_real(r.h_used.value()) + "," + format_real(r.ci_lower) + "," + format_real(r.ci_upper) + "," +
           to_string(r.method) + "," + csv_field(warnings) + "\n";
  }
  return out;
}

InferenceResult dml_with_inference(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair,
                                   const InferenceConfig& inference) {
  const TreatmentPair pairs[] = {pair};
  return dml_with_inference(data, config, pairs, inference).front();
}

}  // namespace medml
