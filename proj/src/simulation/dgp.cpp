#include "medml/simulation/dgp.hpp"

#include "medml/core/errors.hpp"

#include <cmath>

namespace medml {

void validate(const DgpConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("simulated sample size must be at least 1");
  if (cfg.d_m < 1) throw ConfigError("mediator dimension must be at least 1");
  if (!std::isfinite(cfg.alpha) || !std::isfinite(cfg.beta)) throw ConfigError("DGP coefficients must be finite");
}

Dataset generate_dgp(const DgpConfig& cfg) { return generate_dgp(cfg, RngStream(cfg.seed, cfg.stream)); }

Dataset generate_dgp(const DgpConfig& cfg, RngStream rng) {
  validate(cfg);
  Eigen::VectorXd y(cfg.n), t(cfg.n);
  Eigen::MatrixXd m(cfg.n, cfg.d_m), x(cfg.n, 1);
  for (Index i = 0; i < cfg.n; ++i) {
    const double xi = rng.uniform(-1.5, 1.5);
    const double ti = 0.3 * xi + rng.uniform(-2.0, 2.0);
    double mbar = 0.0;
    for (Index j = 0; j < cfg.d_m; ++j) {
      m(i, j) = 0.3 * ti + 0.3 * xi + rng.uniform(-2.0, 2.0);
      mbar += m(i, j);
    }
    mbar /= static_cast<double>(cfg.d_m);
    const double w = rng.uniform(-2.0, 2.0);
    x(i, 0) = xi;
    t(i) = ti;
    y(i) = 0.3 * ti + 0.3 * mbar + cfg.alpha * ti * mbar + 0.3 * xi + cfg.beta * ti * ti * ti + w;
  }
  return Dataset(std::move(y), std::move(t), std::move(m), std::move(x));
}

}  // namespace medml
