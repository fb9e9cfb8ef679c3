#include "medml/core/errors.hpp"
#include "medml/estimators/dml.hpp"
#include "medml/inference/bootstrap.hpp"
#include "medml/inference/inference.hpp"
#include "medml/inference/normal.hpp"
#include "medml/simulation/dgp.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace medml;

namespace {

Dataset dgp(Index n, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  return generate_dgp(cfg);
}

// Type-7 quantile written out from its definition.
double type7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("variance examples") {
  const Bandwidth h(0.5);
  CHECK(variance_hat(Eigen::VectorXd::Zero(5), h) == 0.0);
  Eigen::VectorXd s(2);
  s << 2, -2;
  CHECK(variance_hat(s, h) == 2.0);
  // Centered: mean is zero here, so both agree; shift changes only the raw moment.
  CHECK(variance_hat(s, h, true) == 2.0);
  Eigen::VectorXd shifted = s.array() + 1.0;
  CHECK(variance_hat(shifted, h, true) == 2.0);
  CHECK(variance_hat(shifted, h) == doctest::Approx(0.5 * (9.0 + 1.0) / 2.0));
}

TEST_CASE("variance is linear in the bandwidth") {
  RngStream r(2, 0);
  Eigen::VectorXd s(257);
  for (auto& v : s) v = r.normal() * 3.0;
  for (double h : {0.1, 0.37, 1.3}) {
    CHECK(variance_hat(s, Bandwidth(2 * h)) == 2.0 * variance_hat(s, Bandwidth(h)));
  }
}

TEST_CASE("bias examples and antisymmetry") {
  CHECK(bias_hat(0.7, 0.7, Bandwidth(0.3), 0.5) == 0.0);
  CHECK(bias_hat(1.0, 0.0, Bandwidth(1.0), 0.5) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(bias_hat(0.2, 0.9, Bandwidth(0.4), 0.3) == -bias_hat(0.9, 0.2, Bandwidth(0.4), 0.3));
  CHECK_THROWS_AS(bias_hat(1, 0, Bandwidth(1), 0.0), ArgumentError);
  CHECK_THROWS_AS(bias_hat(1, 0, Bandwidth(1), 1.0), ArgumentError);
  CHECK_THROWS_AS(bias_hat(1, 0, Bandwidth(1), -0.5), ArgumentError);
}

TEST_CASE("bias recovers a constructed quadratic term") {
  for (double eta : {-0.4, 0.8}) {
    for (double b_true : {-2.0, 0.35, 5.0}) {
      for (double b : {0.1, 0.45}) {
        for (double eps : {0.25, 0.5, 0.8}) {
          const double at_b = eta + b_true * b * b;
          const double at_eb = eta + b_true * (eps * b) * (eps * b);
          CHECK(std::abs(bias_hat(at_b, at_eb, Bandwidth(b), eps) - b_true) <= 1e-12 * std::max(1.0, std::abs(b_true)) * 1e2);
        }
      }
    }
  }
}

TEST_CASE("amse bandwidth arithmetic") {
  const auto h = amse_bandwidth(4.0, 1.0, 32);
  REQUIRE(h.has_value());
  CHECK(h->value() == doctest::Approx(0.5).epsilon(1e-15));
  const auto base = amse_bandwidth(0.7, -0.3, 1000);
  const auto scaled = amse_bandwidth(0.7 * 32, -0.3, 1000);
  REQUIRE(base.has_value());
  REQUIRE(scaled.has_value());
  CHECK(scaled->value() == doctest::Approx(2.0 * base->value()).epsilon(1e-14));
  CHECK_FALSE(amse_bandwidth(4.0, 0.0, 32).has_value());
  CHECK_FALSE(amse_bandwidth(4.0, 1e-9, 32).has_value());
  CHECK_FALSE(amse_bandwidth(0.0, 1.0, 32).has_value());
}

TEST_CASE("normal quantile") {
  CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) <= 1e-12);
  CHECK(std::abs(normal_quantile(0.995) - 2.5758293035489004) <= 1e-12);
  CHECK(std::abs(normal_quantile(1e-8) + 5.612001244174789) <= 1e-9);
  CHECK(normal_quantile(0.5) == 0.0);
  for (double p : {1e-8, 1e-5, 0.01, 0.2, 0.5, 0.77, 0.99, 1 - 1e-6, 1 - 1e-8}) {
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) <= 1e-9 * std::max(1e-3, std::min(p, 1 - p)) * 1e3);
    // 1 - q is exact for q >= 0.5, so compare against the rounded complement
    const double q = 1 - p;
    if (q >= 0.5) CHECK(normal_quantile(q) == doctest::Approx(-normal_quantile(1 - q)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), ArgumentError);
  CHECK_THROWS_AS(normal_quantile(1.0), ArgumentError);
}

TEST_CASE("asymptotic interval arithmetic") {
  const auto [lo0, hi0] = asymptotic_ci(0.3, 0.0, 100, Bandwidth(0.2), 0.05);
  CHECK(lo0 == 0.3);
  CHECK(hi0 == 0.3);
  const auto [lo, hi] = asymptotic_ci(0.8, 2.0, 1000, Bandwidth(0.25), 0.05);
  CHECK(std::abs((hi - lo) / 2 - 0.17527) <= 1e-4);
  CHECK((hi + lo) / 2 == doctest::Approx(0.8));
  CHECK((hi - lo) / 2 / std::sqrt(2.0 / 250.0) == doctest::Approx(1.959964).epsilon(1e-6));
  const auto [lo4, hi4] = asymptotic_ci(0.8, 2.0, 4000, Bandwidth(0.25), 0.05);
  CHECK((hi4 - lo4) == doctest::Approx((hi - lo) / 2).epsilon(1e-14));
  const auto [lo5, hi5] = asymptotic_ci(0.8, 2.0, 1000, Bandwidth(1.0), 0.05);
  CHECK((hi5 - lo5) == doctest::Approx((hi - lo) / 2).epsilon(1e-14));
}

TEST_CASE("percentile examples") {
  const std::vector<double> two{3.0, 1.0};
  CHECK(percentile(two, 0.25) == 1.5);
  CHECK(percentile(two, 0.75) == 2.5);
  RngStream r(4, 0);
  std::vector<double> v(37);
  for (auto& x : v) x = r.normal();
  for (double q : {0.0, 0.025, 0.3, 0.5, 0.975, 1.0}) {
    CHECK(percentile(v, q) == doctest::Approx(type7(v, q)).epsilon(1e-15));
    std::vector<double> rev(v.rbegin(), v.rend());
    CHECK(percentile(rev, q) == percentile(v, q));
  }
}

TEST_CASE("bootstrap of a constant statistic") {
  const auto d = dgp(30, 1);
  const auto [lo, hi] = bootstrap_ci([](const Dataset&) { return 2.5; }, d, 20, 0.05, 9);
  CHECK(lo == 2.5);
  CHECK(hi == 2.5);
  CHECK_THROWS_AS(bootstrap_ci([](const Dataset&) { return 1.0; }, d, 1, 0.05, 9), ArgumentError);
}

TEST_CASE("bootstrap draws follow the replication streams") {
  const auto d = dgp(40, 2);
  const VectorStatistic mean_y = [](const Dataset& s) { return Eigen::VectorXd::Constant(1, s.y().mean()); };
  const auto a = bootstrap(mean_y, d, 30, 0.1, 77, 1);
  const auto b = bootstrap(mean_y, d, 30, 0.1, 77, 4);
  CHECK(a.draws == b.draws);
  CHECK(a.lower == b.lower);
  for (int r : {0, 13, 29}) {
    RngStream rng(77, static_cast<std::uint64_t>(r));
    const auto idx = resample_indices(40, rng);
    CHECK(a.draws(r, 0) == d.rows(idx).y().mean());
  }
  std::vector<double> draws(a.draws.data(), a.draws.data() + a.draws.rows());
  CHECK(a.lower(0) == percentile(draws, 0.05));
  CHECK(a.upper(0) == percentile(draws, 0.95));
}

TEST_CASE("bootstrap failure accounting") {
  const auto d = dgp(25, 3);
  int calls = 0;
  const VectorStatistic some = [&calls](const Dataset& s) {
    if (calls++ % 20 == 0) throw NumericalError("resample failure");
    return Eigen::VectorXd::Constant(1, s.y().mean());
  };
  const auto few = bootstrap(some, d, 40, 0.05, 5, 1);
  CHECK(few.reps == 40);
  CHECK(few.failures == 2);
  CHECK(few.draws.rows() == 38);
  const VectorStatistic always_nan = [](const Dataset&) {
    return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN());
  };
  CHECK_THROWS_AS(bootstrap(always_nan, d, 10, 0.05, 5), NumericalError);
  int k = 0;
  const VectorStatistic every_fourth = [&k](const Dataset& s) {
    if (s.y().sum() > 1e300 || (k++ % 4 == 0)) throw NumericalError("x");
    return Eigen::VectorXd::Constant(1, 0.0);
  };
  CHECK_THROWS_AS(bootstrap(every_fourth, d, 20, 0.05, 5, 1), NumericalError);  // 25% > 20%
}

TEST_CASE("scott bandwidth with asymptotic interval") {
  const auto d = dgp(300, 4);
  EstimatorConfig cfg;
  const auto res = dml_with_inference(d, cfg, {1.0, 0.0}, InferenceConfig{});
  const auto est = dml_estimate(d, cfg, {1.0, 0.0});
  CHECK(res.eta_hat == doctest::Approx(est.eta_hat).epsilon(1e-12));
  CHECK(res.h_used.value() == doctest::Approx(est.bandwidth->value()).epsilon(1e-12));
  CHECK(res.v_hat == doctest::Approx(variance_hat(est.scores, *est.bandwidth)).epsilon(1e-12));
  CHECK(res.v_hat >= 0.0);
  CHECK(res.ci_lower <= res.eta_hat);
  CHECK(res.eta_hat <= res.ci_upper);
  const auto [lo, hi] = asymptotic_ci(res.eta_hat, res.v_hat, 300, res.h_used, 0.05);
  CHECK(res.ci_lower == doctest::Approx(lo).epsilon(1e-12));
  CHECK(res.ci_upper == doctest::Approx(hi).epsilon(1e-12));
  CHECK(res.method == CiMethod::Asymptotic);
  CHECK_FALSE(res.b_hat.has_value());
}

TEST_CASE("amse mode on a moderate sample") {
  const auto d = dgp(500, 5);
  EstimatorConfig cfg;
  cfg.bandwidth.mode = BandwidthMode::Amse;
  const auto res = dml_with_inference(d, cfg, {1.0, 0.0}, InferenceConfig{});
  CHECK(std::isfinite(res.eta_hat));
  CHECK(std::isfinite(res.v_hat));
  REQUIRE(res.b_hat.has_value());
  CHECK(std::isfinite(*res.b_hat));
  CHECK(res.h_used.value() > 0.0);
  REQUIRE(res.pilot.has_value());

  // The pieces recomputed from one cross-fit.
  const auto cf = cross_fit(d, cfg);
  const TreatmentPair pairs[] = {{1.0, 0.0}};
  const DmlVariant tp[] = {DmlVariant::TreatmentPropensity};
  const auto inputs = score_inputs(cf, d, pairs, tp)[0][0];
  const Bandwidth pilot = *res.pilot;
  const double eta_b = kernel_scores(inputs, pilot, KernelSpec{}).mean();
  const double eta_eb = kernel_scores(inputs, Bandwidth(0.5 * pilot.value()), KernelSpec{}).mean();
  const double b = bias_hat(eta_b, eta_eb, pilot, 0.5);
  CHECK(*res.b_hat == doctest::Approx(b).epsilon(1e-10));
  const double v_pilot = variance_hat(kernel_scores(inputs, pilot, KernelSpec{}), pilot);
  const auto h = amse_bandwidth(v_pilot, b, 500);
  REQUIRE(h.has_value());
  CHECK(res.h_used.value() == doctest::Approx(h->value()).epsilon(1e-10));
  const auto at_h = kernel_scores(inputs, *h, KernelSpec{});
  CHECK(res.eta_hat == doctest::Approx(at_h.mean()).epsilon(1e-10));
  CHECK(res.v_hat == doctest::Approx(variance_hat(at_h, *h)).epsilon(1e-10));
}

TEST_CASE("amse falls back to the pilot when the bias vanishes") {
  ScoreInputs in;
  in.pair = {0.0, 0.0};
  const Index n = 50;
  in.t_obs = Eigen::VectorXd::LinSpaced(n, -2, 2);
  in.y = Eigen::VectorXd::Constant(n, 1.0);
  in.mu = in.y;
  in.omega = in.y;
  in.outcome_weight = Eigen::VectorXd::Ones(n);
  in.mediator_weight = Eigen::VectorXd::Ones(n);
  const auto sel = select_amse_bandwidth(in, KernelSpec{}, Bandwidth(0.4), 0.5);
  CHECK(sel.fallback);
  CHECK(sel.h.value() == 0.4);
  CHECK_FALSE(sel.warning.empty());
}

TEST_CASE("pilot variance is stable and the amse bandwidth stays near the scott rule") {
  const int reps = 100;
  std::vector<double> v;
  int inside = 0;
  for (int r = 0; r < reps; ++r) {
    DgpConfig dc;
    dc.n = 1000;
    dc.seed = 2024;
    dc.stream = static_cast<std::uint64_t>(r);
    const auto d = generate_dgp(dc);
    EstimatorConfig cfg;
    const auto cf = cross_fit(d, cfg);
    const TreatmentPair pairs[] = {{1.0, 0.0}};
    const DmlVariant tp[] = {DmlVariant::TreatmentPropensity};
    const auto inputs = score_inputs(cf, d, pairs, tp)[0][0];
    const Bandwidth scott = global_bandwidth(d, cfg.bandwidth);
    const auto sel = select_amse_bandwidth(inputs, KernelSpec{}, scott, 0.5);
    if (r < 20) v.push_back(sel.v_pilot);
    if (!sel.fallback && sel.h.value() >= 0.2 * scott.value() && sel.h.value() <= 5 * scott.value()) ++inside;
  }
  double mean = 0.0, ss = 0.0;
  for (double x : v) mean += x / 20.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double cv = std::sqrt(ss / 19.0) / mean;
  CHECK(mean > 0.0);
  CHECK(*std::min_element(v.begin(), v.end()) > 0.0);
  CHECK(cv <= 0.5);
  CHECK(inside >= 90);
}

TEST_CASE("bootstrap and asymptotic widths are comparable") {
  const auto d = dgp(1000, 6);
  EstimatorConfig cfg;
  InferenceConfig asym;
  InferenceConfig boot;
  boot.method = CiMethod::Bootstrap;
  boot.bootstrap_reps = 50;
  const auto a = dml_with_inference(d, cfg, {1.0, 0.0}, asym);
  const auto b = dml_with_inference(d, cfg, {1.0, 0.0}, boot);
  const double wa = a.ci_upper - a.ci_lower;
  const double wb = b.ci_upper - b.ci_lower;
  CHECK(b.method == CiMethod::Bootstrap);
  CHECK(b.eta_hat == a.eta_hat);
  CHECK(wb > 0.0);
  CHECK(wa / wb <= 2.0);
  CHECK(wb / wa <= 2.0);
}

TEST_CASE("inference csv layout") {
  InferenceResult r;
  r.pair = {1.0, 0.0};
  r.eta_hat = 0.5;
  r.warnings = {"a", "b"};
  std::istringstream in(format_inference_results(std::vector<InferenceResult>{r}));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,t_prime,eta_hat,v_hat,b_hat,h_used,ci_lower,ci_upper,ci_method,warnings");
  std::getline(in, line);
  CHECK(line.rfind("1,0,0.5,0,,1,0,0,asymptotic,", 0) == 0);
  CHECK(parse_ci_method("bootstrap") == CiMethod::Bootstrap);
  CHECK_THROWS_AS(parse_ci_method("bca"), ConfigError);
}
