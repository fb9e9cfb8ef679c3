#pragma once

#include "medml/core/dataset.hpp"
#include "medml/core/rng.hpp"
#include "medml/estimators/effect_curve.hpp"

#include <span>

namespace medml {

// True mediated response of the synthetic design:
// eta(t, t') = 0.3 t + 0.09 t' + 0.3 alpha t t' + beta t^3.
double oracle_mr(double t, double t_prime, double alpha, double beta);

struct MonteCarloValue {
  double mean = 0.0;
  double std_error = 0.0;
};

// Brute-force E[Y(t, M(t'))] over n_draws fresh (X, V, W).
MonteCarloValue mc_oracle_mr(double t, double t_prime, double alpha, double beta, Index n_draws, RngStream& rng);

struct Effects {
  double direct = 0.0;
  double indirect = 0.0;
  double total = 0.0;
};

// direct = eta(t', t) - eta(t, t), indirect = eta(t', t') - eta(t', t).
Effects oracle_effects(double t, double t_prime, double alpha, double beta);

EffectCurve oracle_curve(std::span<const double> grid, double t_prime_ref, double alpha, double beta);

}  // namespace medml
