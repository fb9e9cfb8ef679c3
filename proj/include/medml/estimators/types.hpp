#pragma once

#include "medml/core/dataset.hpp"
#include "medml/nuisance/nuisance_fit.hpp"
#include "medml/smoothing/kernel.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace medml {

// (t, t'): outcome evaluated under treatment t with the mediator drawn under t'.
struct TreatmentPair {
  double t = 0.0;
  double t_prime = 0.0;

  auto operator<=>(const TreatmentPair&) const = default;
};

enum class EstimatorId { DmlTp, DmlMd, Ipw, Gcomp, Ols };

// Names: dml, dml-md, ipw, gcomp (alias kme), ols.
EstimatorId parse_estimator(const std::string& name);
std::string to_string(EstimatorId id);

enum class BandwidthMode { Scott, Amse, Fixed };

struct BandwidthChoice {
  BandwidthMode mode = BandwidthMode::Scott;
  double fixed = 0.0;     // used when mode == Fixed
  double scott_c = 1.06;  // Scott rule constant, also the AMSE pilot
  double epsilon = 0.5;   // AMSE pilot scaling, in (0, 1)
};

struct EstimatorConfig {
  NuisanceConfig nuisance;
  KernelSpec kernel;
  BandwidthChoice bandwidth;
  int folds = 1;
  std::uint64_t seed = 0;
  int workers = 1;  // threads for fold fitting
};

struct MediatedResponseEstimate {
  TreatmentPair pair;
  double eta_hat = 0.0;
  Eigen::VectorXd scores;             // per observation, in dataset row order
  std::optional<Bandwidth> bandwidth;  // absent for G-computation
  EstimatorId estimator = EstimatorId::DmlTp;
  Index n = 0;
  int folds = 1;
  std::vector<std::string> warnings;
};

// Scott or fixed bandwidth on the full-sample treatment. Throws ConfigError
// for AMSE, which is chosen per pair.
Bandwidth global_bandwidth(const Dataset& data, const BandwidthChoice& choice);

}  // namespace medml
