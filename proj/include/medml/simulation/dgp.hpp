#pragma once

#include "medml/core/dataset.hpp"
#include "medml/core/rng.hpp"

#include <cstdint>

namespace medml {

// X ~ U(-1.5, 1.5); U, V, W ~ U(-2, 2)
// T = 0.3 X + U
// M_j = 0.3 T + 0.3 X + V_j            (j = 1..d_m, independent V_j)
// Y = 0.3 T + 0.3 Mbar + alpha T Mbar + 0.3 X + beta T^3 + W
// where Mbar is the coordinate average, so the mediated responses do not
// depend on d_m.
struct DgpConfig {
  Index n = 1000;
  double alpha = 0.25;
  double beta = 0.5;
  Index d_m = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

void validate(const DgpConfig& cfg);

// Draws from RngStream(cfg.seed, cfg.stream).
Dataset generate_dgp(const DgpConfig& cfg);
// Per unit, in order: X, U, V_1..V_d, W.
Dataset generate_dgp(const DgpConfig& cfg, RngStream rng);

}  // namespace medml
