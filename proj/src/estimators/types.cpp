#include "medml/estimators/types.hpp"

#include "medml/core/errors.hpp"

namespace medml {

EstimatorId parse_estimator(const std::string& name) {
  if (name == "dml" || name == "dml-tp") return EstimatorId::DmlTp;
  if (name == "dml-md" || name == "ii-md") return EstimatorId::DmlMd;
  if (name == "ipw") return EstimatorId::Ipw;
  if (name == "gcomp" || name == "kme") return EstimatorId::Gcomp;
  if (name == "ols") return EstimatorId::Ols;
  throw ConfigError("unknown estimator '" + name + "' (expected dml, dml-md, ipw, gcomp, ols)");
}

std::string to_string(EstimatorId id) {
  switch (id) {
    case EstimatorId::DmlTp: return "dml";
    case EstimatorId::DmlMd: return "dml-md";
    case EstimatorId::Ipw: return "ipw";
    case EstimatorId::Gcomp: return "gcomp";
    case EstimatorId::Ols: return "ols";
  }
  return "unknown";
}

Bandwidth global_bandwidth(const Dataset& data, const BandwidthChoice& choice) {
  switch (choice.mode) {
    case BandwidthMode::Fixed: return Bandwidth(choice.fixed);
    case BandwidthMode::Scott: {
      const Eigen::VectorXd& t = data.t();
      return scott_bandwidth(std::span<const double>(t.data(), static_cast<std::size_t>(t.size())),
                             choice.scott_c);
    }
    case BandwidthMode::Amse: break;
  }
  throw ConfigError("AMSE bandwidths are selected per treatment pair");
}

}  // namespace medml
