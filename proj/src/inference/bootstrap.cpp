#include "medml/inference/bootstrap.hpp"

#include "medml/core/errors.hpp"
#include "medml/core/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace medml {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("percentile level must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (pos - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

std::vector<Index> resample_indices(Index n, RngStream& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  return idx;
}

BootstrapSummary bootstrap(const VectorStatistic& statistic, const Dataset& data, int reps, double alpha,
                           std::uint64_t master_seed, int workers) {
  if (reps < 2) throw ArgumentError("bootstrap needs at least 2 replications");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");

  std::vector<std::optional<Eigen::VectorXd>> draws(static_cast<std::size_t>(reps));
  const auto errors = parallel_for(draws.size(), workers, [&](std::size_t r) {
    RngStream rng(master_seed, r);
    const auto idx = resample_indices(data.n(), rng);
    draws[r] = statistic(data.rows(idx));
  });

  BootstrapSummary s;
  s.reps = reps;
  Index dim = -1;
  std::vector<const Eigen::VectorXd*> ok;
  for (std::size_t r = 0; r < draws.size(); ++r) {
    if (errors[r] || !draws[r] || !draws[r]->allFinite()) {
      ++s.failures;
      continue;
    }
    if (dim < 0) dim = draws[r]->size();
    if (draws[r]->size() != dim) throw ArgumentError("bootstrap statistic changed dimension between replications");
    ok.push_back(&*draws[r]);
  }
  if (s.failures > 0.2 * reps || ok.empty()) {
    throw NumericalError("bootstrap failed on " + std::to_string(s.failures) + " of " + std::to_string(reps) +
                         " replications (limit 20%)");
  }

  s.draws.resize(static_cast<Index>(ok.size()), dim);
  for (std::size_t r = 0; r < ok.size(); ++r) s.draws.row(static_cast<Index>(r)) = ok[r]->transpose();
  s.lower.resize(dim);
  s.upper.resize(dim);
  for (Index k = 0; k < dim; ++k) {
    const Eigen::VectorXd col = s.draws.col(k);
    const std::span<const double> v(col.data(), static_cast<std::size_t>(col.size()));
    s.lower(k) = percentile(v, alpha / 2.0);
    s.upper(k) = percentile(v, 1.0 - alpha / 2.0);
  }
  return s;
}

std::pair<double, double> bootstrap_ci(const ScalarStatistic& statistic, const Dataset& data, int reps,
                                       double alpha, std::uint64_t master_seed, int workers) {
  const auto s = bootstrap(
      [&](const Dataset& d) { return Eigen::VectorXd::Constant(1, statistic(d)); }, data, reps, alpha,
      master_seed, workers);
  return {s.lower(0), s.upper(0)};
}

}  // namespace medml
