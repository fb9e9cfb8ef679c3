#include "medml/estimators/effect_curve.hpp"

#include "medml/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace medml {

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) throw ArgumentError("grid bounds must be finite");
  if (step <= 0.0) throw ArgumentError("grid step must be positive");
  if (hi < lo) throw ArgumentError("grid upper bound is below the lower bound");
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count + 1));
  for (long long k = 0; k <= count; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    grid.push_back(std::round(v * 1e12) / 1e12);
  }
  return grid;
}

std::vector<TreatmentPair> required_pairs(std::span<const double> grid, double t_prime_ref) {
  std::vector<TreatmentPair> pairs;
  auto add = [&](TreatmentPair p) {
    if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
  };
  for (double t : grid) {
    add({t, t});
    add({t_prime_ref, t});
  }
  add({t_prime_ref, t_prime_ref});
  return pairs;
}

namespace {

double lookup(const ResponseTable& mr, TreatmentPair p) {
  const auto it = mr.find(p);
  if (it == mr.end()) {
    std::ostringstream os;
    os.precision(17);
    os << "missing mediated response for pair (t=" << p.t << ", t'=" << p.t_prime << ")";
    throw ArgumentError(os.str());
  }
  return it->second;
}

}  // namespace

EffectCurve effect_curve(const ResponseTable& mr, std::span<const double> grid, double t_prime_ref) {
  EffectCurve c;
  c.grid.assign(grid.begin(), grid.end());
  c.t_prime_ref = t_prime_ref;
  const Index g = static_cast<Index>(grid.size());
  c.mr_tt.resize(g);
  c.mr_cross.resize(g);
  c.direct.resize(g);
  c.indirect.resize(g);
  c.total.resize(g);
  c.mr_ref = lookup(mr, {t_prime_ref, t_prime_ref});
  for (Index k = 0; k < g; ++k) {
    const double t = grid[static_cast<std::size_t>(k)];
    c.mr_tt(k) = lookup(mr, {t, t});
    c.mr_cross(k) = lookup(mr, {t_prime_ref, t});
    c.direct(k) = c.mr_cross(k) - c.mr_tt(k);
    c.indirect(k) = c.mr_ref - c.mr_cross(k);
    c.total(k) = c.direct(k) + c.indirect(k);
  }
  return c;
}

ResponseTable response_table(std::span<const MediatedResponseEstimate> estimates) {
  ResponseTable mr;
  for (const auto& e : estimates) mr[e.pair] = e.eta_hat;
  return mr;
}

}  // namespace medml
