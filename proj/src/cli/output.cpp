#include "medml/cli/output.hpp"

#include "medml/core/text_io.hpp"
#include "medml/inference/inference.hpp"

#include <cmath>
#include <cstdio>

namespace medml::cli {

std::vector<HistogramBin> treatment_histogram(const Eigen::VectorXd& t, const GridSpec& grid) {
  const auto centers = grid.values();
  std::vector<HistogramBin> bins;
  bins.reserve(centers.size());
  for (double c : centers) bins.push_back({c, c - grid.step / 2, c + grid.step / 2, 0});
  for (Index i = 0; i < t.size(); ++i) {
    const double k = std::floor((t(i) - bins.front().lower) / grid.step);
    if (k >= 0 && k < static_cast<double>(bins.size())) ++bins[static_cast<std::size_t>(k)].count;
  }
  return bins;
}

std::string format_histogram(const std::vector<HistogramBin>& bins, Index n_total) {
  std::string out = "t,bin_lo,bin_hi,count\n";
  Index inside = 0;
  for (const auto& b : bins) {
    out += format_real(b.center) + "," + format_real(b.lower) + "," + format_real(b.upper) + "," +
           std::to_string(b.count) + "\n";
    inside += b.count;
  }
  out += "outside,,," + std::to_string(n_total - inside) + "\n";
  return out;
}

std::vector<BandwidthRow> bandwidth_diagnostics(std::span<const ScoreInputs> inputs, KernelSpec kernel,
                                                Bandwidth scott, double eps, bool centered) {
  std::vector<BandwidthRow> rows;
  for (const auto& in : inputs) {
    const AmseSelection sel = select_amse_bandwidth(in, kernel, scott, eps, centered);
    BandwidthRow r;
    r.pair = in.pair;
    r.h_scott = scott.value();
    r.b_hat = sel.b_hat;
    r.v_hat = sel.v_pilot;
    if (!sel.fallback) r.h_amse = sel.h.value();
    rows.push_back(r);
  }
  return rows;
}

std::string format_bandwidth_csv(const std::vector<BandwidthRow>& rows) {
  std::string out = "t,t_prime,h_scott,b_hat,v_hat,h_amse,fallback_flag\n";
  for (const auto& r : rows) {
    out += format_real(r.pair.t) + "," + format_real(r.pair.t_prime) + "," + format_real(r.h_scott) + "," +
           format_real(r.b_hat) + "," + format_real(r.v_hat) + "," + (r.h_amse ? format_real(*r.h_amse) : "") + "," +
           (r.h_amse ? "0" : "1") + "\n";
  }
  return out;
}

std::string summary_table(const std::string& title, const EffectCurve& c) {
  std::string out = title + "\n";
  char line[128];
  std::snprintf(line, sizeof line, "%8s %10s %10s %10s\n", "t", "direct", "indirect", "total");
  out += line;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const auto i = static_cast<Index>(k);
    std::snprintf(line, sizeof line, "%8.4f %10.4f %10.4f %10.4f\n", c.grid[k], c.direct(i), c.indirect(i),
                  c.total(i));
    out += line;
  }
  return out;
}

}  // namespace medml::cli
