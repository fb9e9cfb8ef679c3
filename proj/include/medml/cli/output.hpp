#pragma once

#include "medml/cli/run_config.hpp"
#include "medml/estimators/dml.hpp"
#include "medml/estimators/effect_curve.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace medml::cli {

// Positivity diagnostic: counts of observed treatments in bins of width
// `step` centred on the grid points; the last row counts values outside.
struct HistogramBin {
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Index count = 0;
};
std::vector<HistogramBin> treatment_histogram(const Eigen::VectorXd& t, const GridSpec& grid);
// t,bin_lo,bin_hi,count with a trailing "outside" row.
std::string format_histogram(const std::vector<HistogramBin>& bins, Index n_total);

struct BandwidthRow {
  TreatmentPair pair;
  double h_scott = 0.0;
  double b_hat = 0.0;
  double v_hat = 0.0;
  std::optional<double> h_amse;  // empty on fallback
};
std::vector<BandwidthRow> bandwidth_diagnostics(std::span<const ScoreInputs> inputs, KernelSpec kernel,
                                                Bandwidth scott, double eps, bool centered);
// t,t_prime,h_scott,b_hat,v_hat,h_amse,fallback_flag
std::string format_bandwidth_csv(const std::vector<BandwidthRow>& rows);

// Fixed-width table with 4 decimals for the terminal.
std::string summary_table(const std::string& title, const EffectCurve& curve);

}  // namespace medml::cli
