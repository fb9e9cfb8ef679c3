#pragma once

#include "medml/estimators/dml.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace medml {

// V = h * mean(psi^2); the centered flag subtracts the mean first.
double variance_hat(const Eigen::VectorXd& scores, Bandwidth h, bool centered = false);

// B = (eta_b - eta_{eps b}) / (b^2 (1 - eps^2)). Throws ArgumentError unless 0 < eps < 1.
double bias_hat(double eta_b, double eta_eps_b, Bandwidth b, double eps);

// h = (V / (4 B^2))^(1/5) n^(-1/5). Empty when |B| <= threshold or V <= 0:
// the caller should fall back to the Scott bandwidth.
std::optional<Bandwidth> amse_bandwidth(double v_hat, double b_hat, Index n, double threshold = 1e-8);

struct AmseSelection {
  Bandwidth pilot;
  double v_pilot = 0.0;  // V at the pilot
  double b_hat = 0.0;
  Bandwidth h;           // AMSE bandwidth, or the pilot on fallback
  bool fallback = false;
  std::string warning;
};

// Bias from the scores at the pilot b and at eps * b, variance at b.
AmseSelection select_amse_bandwidth(const ScoreInputs& inputs, KernelSpec kernel, Bandwidth pilot, double eps,
                                    bool centered = false);

// Symmetric interval eta +- z_{1 - alpha/2} sqrt(V / (n h)).
std::pair<double, double> asymptotic_ci(double eta_hat, double v_hat, Index n, Bandwidth h, double alpha);

enum class CiMethod { Asymptotic, Bootstrap };
CiMethod parse_ci_method(const std::string& name);
std::string to_string(CiMethod method);

struct InferenceResult {
  TreatmentPair pair;
  double eta_hat = 0.0;
  double v_hat = 0.0;
  std::optional<double> b_hat;
  Bandwidth h_used{1.0};
  std::optional<Bandwidth> pilot;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  CiMethod method = CiMethod::Asymptotic;
  std::vector<std::string> warnings;
};

struct InferenceConfig {
  double alpha = 0.05;
  CiMethod method = CiMethod::Asymptotic;
  bool centered_variance = false;
  int bootstrap_reps = 100;
  double amse_threshold = 1e-8;
};

// Scott, fixed or AMSE bandwidth; AMSE re-estimates at h and evaluates V
// there. Bootstrap intervals resample the full DML procedure.
std::vector<InferenceResult> dml_with_inference(const Dataset& data, const EstimatorConfig& config,
                                                std::span<const TreatmentPair> pairs,
                                                const InferenceConfig& inference);
InferenceResult dml_with_inference(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair,
                                   const InferenceConfig& inference);

// t,t_prime,eta_hat,v_hat,b_hat,h_used,ci_lower,ci_upper,ci_method,warnings
std::string format_inference_results(std::span<const InferenceResult> results);

// Bandwidth per pair: the chosen h with both score sets computed from one cross-fit.
struct PairInference {
  MediatedResponseEstimate estimate;
  InferenceResult inference;
};
PairInference infer_from_inputs(const ScoreInputs& inputs, const EstimatorConfig& config,
                                const InferenceConfig& inference, Bandwidth global, EstimatorId id);

}  // namespace medml
