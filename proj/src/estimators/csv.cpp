#include "medml/estimators/csv.hpp"

#include "medml/core/text_io.hpp"

namespace medml {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string format_pair_results(std::span<const MediatedResponseEstimate> estimates) {
  std::string out = "estimator,t,t_prime,eta_hat,bandwidth,n,L,variant\n";
  for (const auto& e : estimates) {
    const char* variant = e.estimator == EstimatorId::DmlTp ? "tp" : e.estimator == EstimatorId::DmlMd ? "md" : "";
    out += to_string(e.estimator) + "," + format_real(e.pair.t) + "," + format_real(e.pair.t_prime) + "," +
           format_real(e.eta_hat) + "," + (e.bandwidth ? format_real(e.bandwidth->value()) : std::string()) + "," +
           std::to_string(e.n) + "," + std::to_string(e.folds) + "," + variant + "\n";
  }
  return out;
}

std::string format_effect_curve(const EffectCurve& c) {
  std::string out = "t,direct,indirect,total";
  for (const auto& b : c.bands) out += ",ci_lo_" + b.name + ",ci_hi_" + b.name;
  out += "\n";
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const auto i = static_cast<Index>(k);
    out += format_real(c.grid[k]) + "," + format_real(c.direct(i)) + "," + format_real(c.indirect(i)) + "," +
           format_real(c.total(i));
    for (const auto& b : c.bands) out += "," + format_real(b.lower(i)) + "," + format_real(b.upper(i));
    out += "\n";
  }
  return out;
}

}  // namespace medml
