#pragma once

#include "medml/estimators/types.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace medml {

using ResponseTable = std::map<TreatmentPair, double>;

struct ConfidenceBand {
  std::string name;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Effects over a treatment grid against the reference t':
//   direct(t)   = eta(t', t) - eta(t, t)
//   indirect(t) = eta(t', t') - eta(t', t)
//   total(t)    = direct(t) + indirect(t)
struct EffectCurve {
  std::vector<double> grid;
  double t_prime_ref = 0.0;
  Eigen::VectorXd mr_tt;     // eta(t, t)
  Eigen::VectorXd mr_cross;  // eta(t', t)
  double mr_ref = 0.0;       // eta(t', t')
  Eigen::VectorXd direct;
  Eigen::VectorXd indirect;
  Eigen::VectorXd total;
  std::vector<ConfidenceBand> bands;
};

// Inclusive grid lo, lo + step, ..., hi; hi is included when (hi - lo) / step
// is integral within 1e-9. Points are computed as lo + k * step and rounded
// to 12 decimals.
std::vector<double> make_grid(double lo, double hi, double step);

// Pairs (t, t), (t', t) for each grid t, then (t', t'); duplicates removed.
std::vector<TreatmentPair> required_pairs(std::span<const double> grid, double t_prime_ref);

// Throws ArgumentError naming the first missing pair.
EffectCurve effect_curve(const ResponseTable& mr, std::span<const double> grid, double t_prime_ref);

ResponseTable response_table(std::span<const MediatedResponseEstimate> estimates);

}  // namespace medml
