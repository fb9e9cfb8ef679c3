// Slow: three cross-fits at n = 5000 (several minutes each on one core).
#include "medml/estimators/dml.hpp"
#include "medml/estimators/effect_curve.hpp"
#include "medml/simulation/dgp.hpp"
#include "medml/simulation/oracle.hpp"

#include <doctest.h>

#include <cstdio>

using namespace medml;

TEST_CASE("dml smoothing bias shrinks as the bandwidth halves") {
  // One cross-fit per seed, rescored at 2h, h and h/2 around the Scott
  // bandwidth. The grid-averaged absolute error of the direct effect must
  // fall at each halving for a majority of seeds.
  const auto grid = make_grid(-1.5, 1.5, 0.1);
  const auto pairs = required_pairs(grid, 0.0);
  const auto truth = oracle_curve(grid, 0.0, 0.25, 0.5);
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    DgpConfig dc;
    dc.n = 5000;
    dc.seed = seed;
    const auto data = generate_dgp(dc);
    const EstimatorConfig cfg;
    const auto cf = cross_fit(data, cfg);
    const DmlVariant variant[] = {DmlVariant::TreatmentPropensity};
    const auto inputs = score_inputs(cf, data, pairs, variant)[0];
    const double h = global_bandwidth(data, cfg.bandwidth).value();
    std::vector<double> err;
    for (double factor : {2.0, 1.0, 0.5}) {
      ResponseTable mr;
      for (const auto& in : inputs) mr[in.pair] = kernel_scores(in, Bandwidth(factor * h), cfg.kernel).mean();
      err.push_back((effect_curve(mr, grid, 0.0).direct - truth.direct).cwiseAbs().mean());
    }
    std::printf("seed %llu: |error| at 2h %.4f, h %.4f, h/2 %.4f\n", static_cast<unsigned long long>(seed), err[0],
                err[1], err[2]);
    if (err[0] > err[1] && err[1] > err[2]) ++monotone;
  }
  CHECK(monotone >= 2);
}
