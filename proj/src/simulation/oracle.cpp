#include "medml/simulation/oracle.hpp"

#include "medml/core/errors.hpp"

#include <cmath>

namespace medml {

double oracle_mr(double t, double t_prime, double alpha, double beta) {
  return 0.3 * t + 0.09 * t_prime + 0.3 * alpha * t * t_prime + beta * t * t * t;
}

MonteCarloValue mc_oracle_mr(double t, double t_prime, double alpha, double beta, Index n_draws, RngStream& rng) {
  if (n_draws < 1) throw ArgumentError("Monte Carlo oracle needs at least one draw");
  // Welford running moments.
  double mean = 0.0, m2 = 0.0;
  for (Index k = 0; k < n_draws; ++k) {
    const double x = rng.uniform(-1.5, 1.5);
    const double v = rng.uniform(-2.0, 2.0);
    const double w = rng.uniform(-2.0, 2.0);
    const double m = 0.3 * t_prime + 0.3 * x + v;
    const double y = 0.3 * t + 0.3 * m + alpha * t * m + 0.3 * x + beta * t * t * t + w;
    const double d = y - mean;
    mean += d / static_cast<double>(k + 1);
    m2 += d * (y - mean);
  }
  const double var = n_draws > 1 ? m2 / static_cast<double>(n_draws - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n_draws))};
}

Effects oracle_effects(double t, double t_prime, double alpha, double beta) {
  const double tt = oracle_mr(t, t, alpha, beta);
  const double cross = oracle_mr(t_prime, t, alpha, beta);
  const double ref = oracle_mr(t_prime, t_prime, alpha, beta);
  Effects e;
  e.direct = cross - tt;
  e.indirect = ref - cross;
  e.total = e.direct + e.indirect;
  return e;
}

EffectCurve oracle_curve(std::span<const double> grid, double t_prime_ref, double alpha, double beta) {
  ResponseTable mr;
  for (const auto& p : required_pairs(grid, t_prime_ref)) mr[p] = oracle_mr(p.t, p.t_prime, alpha, beta);
  return effect_curve(mr, grid, t_prime_ref);
}

}  // namespace medml
