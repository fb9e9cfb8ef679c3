#pragma once

namespace medml {

// Standard normal inverse CDF (Wichura AS241, about 1e-16 relative).
// Throws ArgumentError unless 0 < p < 1.
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace medml
