#include "medml/core/errors.hpp"
#include "medml/estimators/baselines.hpp"
#include "medml/estimators/csv.hpp"
#include "medml/estimators/curves.hpp"
#include "medml/estimators/dml.hpp"
#include "medml/estimators/effect_curve.hpp"
#include "medml/nuisance/kernel_ridge.hpp"
#include "medml/simulation/dgp.hpp"
#include "medml/simulation/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace medml;

namespace {

Dataset dgp(Index n, std::uint64_t seed, double alpha = 0.25, double beta = 0.5, Index d_m = 1) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.d_m = d_m;
  return generate_dgp(cfg);
}

double gauss_k(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2 * std::numbers::pi); }

double scott(const Dataset& d) {
  const double mean = d.t().mean();
  const double sd = std::sqrt((d.t().array() - mean).square().sum() / (d.n() - 1.0));
  return 1.06 * sd * std::pow(static_cast<double>(d.n()), -0.2);
}

Dataset permuted(const Dataset& d, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(d.n()));
  std::iota(perm.begin(), perm.end(), 0);
  RngStream r(seed, 99);
  std::shuffle(perm.begin(), perm.end(), r);
  return d.rows(perm);
}

const std::vector<double> kSmallGrid{-1.0, 0.0, 0.5, 1.0};

}  // namespace

TEST_CASE("hand-computed score with constant nuisances") {
  // f = 0.5 everywhere, mu = 1, omega = 2, Y = 3, T = t, h = 1.
  const TreatmentPair pair{0.5, -0.3};
  const auto terms = tp_terms(3.0, pair.t, 1.0, 2.0, 0.5, 0.5, 0.5);
  const double delta = pair.t - pair.t_prime;
  const double expected = (0.398942 / 0.5) * 2.0 + (0.398942 * std::exp(-delta * delta / 2) / 0.5) * (-1.0) + 2.0;
  CHECK(kernel_score(terms, pair, Bandwidth(1.0), KernelSpec{}) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(terms.outcome_weight == 2.0);
  CHECK(terms.mediator_weight == 2.0);
}

TEST_CASE("score collapses to omega when residuals or weights vanish") {
  const TreatmentPair pair{1.0, 0.0};
  const auto vanish = tp_terms(1.7, 0.9, 1.7, 1.7, 0.3, 0.2, 0.6);
  CHECK(kernel_score(vanish, pair, Bandwidth(0.4), KernelSpec{}) == 1.7);
  const auto far = tp_terms(5.0, 500.0, 1.0, -0.4, 0.3, 0.2, 0.6);
  CHECK(kernel_score(far, pair, Bandwidth(0.4), KernelSpec{}) == -0.4);
  const auto md = md_terms(2.0, 0.2, 2.0, 2.0, 0.3, 0.25, 0.7, 0.4);
  CHECK(kernel_score(md, pair, Bandwidth(0.4), KernelSpec{KernelFamily::Epanechnikov}) == 2.0);
}

TEST_CASE("row score matches a recomputation from the fitted nuisances") {
  const auto d = dgp(150, 3);
  NuisanceConfig cfg;
  cfg.variant = DmlVariant::MediatorDensity;
  const auto nf = fit_nuisances(d, cfg);
  const TreatmentPair pair{0.7, -0.2};
  const Bandwidth h(0.45);
  for (Index i : {0, 42, 149}) {
    const auto row = d.row(i);
    const Eigen::MatrixXd m = row.m, x = row.x;
    const auto ev = nf.outcome->evaluator(m, x);
    const double mu = ev->mu(pair.t)(0);
    const double ts[] = {pair.t};
    const double om = ev->omega(ts, pair.t_prime)(0, 0);
    const Eigen::RowVectorXd xm = d.xm().row(i);
    const double ftx_tp = nf.f_tx.density_at(row.x, pair.t_prime);
    const double ftx_t = nf.f_tx.density_at(row.x, pair.t);
    const double k1 = gauss_k((row.t - pair.t) / 0.45) / 0.45;
    const double k2 = gauss_k((row.t - pair.t_prime) / 0.45) / 0.45;
    const double tp_w = nf.f_txm.density_at(xm, pair.t_prime) / (nf.f_txm.density_at(xm, pair.t) * ftx_tp);
    const double tp = k1 * tp_w * (row.y - mu) + k2 / ftx_tp * (mu - om) + om;
    CHECK(dml_score(row, nf, pair, h, KernelSpec{}) == doctest::Approx(tp).epsilon(1e-12));
    const double fm_t = nf.f_mtx->density(m, pair.t, x)(0);
    const double fm_tp = nf.f_mtx->density(m, pair.t_prime, x)(0);
    const double md = k1 * fm_tp / (fm_t * ftx_t) * (row.y - mu) + k2 / ftx_tp * (mu - om) + om;
    CHECK(dml_score_md(row, nf, pair, h, KernelSpec{}) == doctest::Approx(md).epsilon(1e-12));
  }
}

TEST_CASE("variants coincide when t equals t'") {
  const auto d = dgp(50, 4, 0.25, 0.5, 2);
  NuisanceConfig cfg;
  cfg.variant = DmlVariant::MediatorDensity;
  const auto nf = fit_nuisances(d, cfg);
  for (Index i = 0; i < 50; ++i) {
    const auto row = d.row(i);
    const TreatmentPair pair{0.4, 0.4};
    const double a = dml_score(row, nf, pair, Bandwidth(0.5), KernelSpec{});
    const double b = dml_score_md(row, nf, pair, Bandwidth(0.5), KernelSpec{});
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("md score without a mediator density is a configuration error") {
  const auto d = dgp(40, 1);
  const auto nf = fit_nuisances(d, NuisanceConfig{});
  CHECK_THROWS_AS(dml_score_md(d.row(0), nf, {0, 1}, Bandwidth(0.5), KernelSpec{}), ConfigError);
}

TEST_CASE("single-fold estimate scores the full-sample fit") {
  const auto d = dgp(200, 5);
  EstimatorConfig cfg;
  const TreatmentPair pair{1.0, 0.0};
  const auto est = dml_estimate(d, cfg, pair);
  const auto nf = fit_nuisances(d, cfg.nuisance);
  const Bandwidth h(scott(d));
  REQUIRE(est.bandwidth.has_value());
  CHECK(est.bandwidth->value() == doctest::Approx(h.value()).epsilon(1e-12));
  for (Index i = 0; i < d.n(); i += 13) {
    CHECK(est.scores(i) == doctest::Approx(dml_score(d.row(i), nf, pair, h, KernelSpec{})).epsilon(1e-9));
  }
  CHECK(std::abs(est.eta_hat - est.scores.mean()) <= 1e-12);
  CHECK(est.n == 200);
  CHECK(est.folds == 1);
  CHECK(est.estimator == EstimatorId::DmlTp);
}

TEST_CASE("cross-fitting scores each fold with its complement fit") {
  const auto d = dgp(120, 6);
  EstimatorConfig cfg;
  cfg.folds = 3;
  cfg.seed = 17;
  const TreatmentPair pair{0.5, 0.0};
  const auto cf = cross_fit(d, cfg);
  REQUIRE(cf.fits.size() == 3);
  const auto est = dml_estimate(d, cfg, pair);
  CHECK(std::abs(est.eta_hat - est.scores.mean()) <= 1e-12);
  const Bandwidth h(scott(d));
  for (int l = 0; l < 3; ++l) {
    const auto train = d.rows(cf.folds.complement(l));
    const auto nf = fit_nuisances(train, cfg.nuisance);
    for (Index i : cf.folds.members(l)) {
      CHECK(est.scores(i) == doctest::Approx(dml_score(d.row(i), nf, pair, h, KernelSpec{})).epsilon(1e-9));
    }
  }
  cfg.workers = 3;
  CHECK(dml_estimate(d, cfg, pair).scores == est.scores);
}

TEST_CASE("folds too small for the nuisance fits") {
  // Five folds of 12 rows leave complements of 9 or 10 rows; 10 are needed.
  const auto d = dgp(12, 2);
  EstimatorConfig cfg;
  cfg.folds = 5;
  try {
    dml_estimate(d, cfg, {0, 0});
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("n >=") != std::string::npos);
  }
}

TEST_CASE("dml recovers the mediated response on the synthetic design") {
  const auto d = dgp(1000, 0);
  const auto est = dml_estimate(d, EstimatorConfig{}, {1.0, 0.0});
  CHECK(std::abs(est.eta_hat - oracle_mr(1.0, 0.0, 0.25, 0.5)) <= 0.15);
  CHECK(est.scores.allFinite());
}

TEST_CASE("bandwidth choices") {
  const auto d = dgp(100, 7);
  EstimatorConfig cfg;
  cfg.bandwidth.mode = BandwidthMode::Fixed;
  cfg.bandwidth.fixed = 0.3;
  CHECK(dml_estimate(d, cfg, {0, 0}).bandwidth->value() == 0.3);
  cfg.bandwidth.mode = BandwidthMode::Scott;
  cfg.bandwidth.scott_c = 2.12;
  CHECK(global_bandwidth(d, cfg.bandwidth).value() == doctest::Approx(2.0 * scott(d)).epsilon(1e-12));
  cfg.bandwidth.mode = BandwidthMode::Amse;
  CHECK_THROWS_AS(global_bandwidth(d, cfg.bandwidth), ConfigError);
  const auto amse = dml_estimate(d, cfg, {0.5, 0});
  REQUIRE(amse.bandwidth.has_value());
  CHECK(amse.bandwidth->value() > 0.0);
}

TEST_CASE("ipw is zero for a zero outcome") {
  const auto base = dgp(100, 8);
  const Dataset d(Eigen::VectorXd::Zero(100), base.t(), base.m(), base.x());
  for (const auto& e : ipw_estimate(d, EstimatorConfig{}, required_pairs(kSmallGrid, 0.0))) {
    CHECK(e.eta_hat == 0.0);
  }
}

TEST_CASE("ipw matches a direct reimplementation") {
  const auto d = dgp(20, 9);
  const auto f_tx = fit_gaussian_density(d.t(), d.x(), 1e-3);
  const auto f_txm = fit_gaussian_density(d.t(), d.xm(), 1e-3);
  const double h = scott(d);
  for (TreatmentPair p : {TreatmentPair{0.3, 0.3}, TreatmentPair{1.0, -0.5}}) {
    double sum = 0.0, plain = 0.0;
    for (Index i = 0; i < d.n(); ++i) {
      const Eigen::RowVectorXd x = d.x().row(i), xm = d.xm().row(i);
      const double k = gauss_k((d.t()(i) - p.t) / h) / h;
      sum += k * d.y()(i) * f_txm.density_at(xm, p.t_prime) / (f_tx.density_at(x, p.t_prime) * f_txm.density_at(xm, p.t));
      plain += k * d.y()(i) / f_tx.density_at(x, p.t);
    }
    const auto est = ipw_estimate(d, EstimatorConfig{}, p);
    CHECK(std::abs(est.eta_hat - sum / 20.0) <= 1e-12);
    CHECK(std::abs(est.eta_hat - est.scores.mean()) <= 1e-12);
    if (p.t == p.t_prime) CHECK(std::abs(est.eta_hat - plain / 20.0) <= 1e-12);
  }
}

TEST_CASE("g-computation recovers a constant outcome") {
  const auto base = dgp(500, 10);
  const Dataset d(Eigen::VectorXd::Constant(500, 1.25), base.t(), base.m(), base.x());
  EstimatorConfig cfg;
  cfg.nuisance.ridge_lambda = 1e-10;
  for (const auto& e : gcomp_estimate(d, cfg, std::vector<TreatmentPair>{{0, 0}, {0.5, -0.5}, {1, 0}})) {
    CHECK(std::abs(e.eta_hat - 1.25) <= 1e-3);
    CHECK_FALSE(e.bandwidth.has_value());
  }
}

TEST_CASE("g-computation on a diagonal pair averages the cross conditional mean") {
  const auto d = dgp(150, 11);
  EstimatorConfig cfg;
  const auto est = gcomp_estimate(d, cfg, {0.4, 0.4});
  const auto kme = fit_kme_outcome(d, cfg.nuisance);
  for (Index i = 0; i < d.n(); i += 7) {
    const double ref = cross_conditional_mean(kme->first_stage(), kme->embedding(), 0.4, 0.4, d.x().row(i));
    CHECK(std::abs(est.scores(i) - ref) <= 1e-9);
  }
  CHECK(std::abs(est.eta_hat - est.scores.mean()) <= 1e-12);
}

TEST_CASE("ols effects vanish at the reference") {
  const auto d = dgp(300, 12);
  const std::vector<double> grid{0.0, 0.5};
  const auto c = ols_estimate(d, grid, 0.5);
  CHECK(c.direct(1) == 0.0);
  CHECK(c.indirect(1) == 0.0);
  CHECK(c.total(1) == 0.0);
  const auto coef = ols_coefficients(d);
  CHECK(c.direct(0) == doctest::Approx(coef.b_t * 0.5));
  CHECK(c.indirect(0) == doctest::Approx(coef.a_t(0) * coef.b_m(0) * 0.5));
}

TEST_CASE("ols recovers the linear design") {
  const auto d = dgp(5000, 13, 0.0, 0.0);
  const std::vector<double> grid{0.0};
  const auto c = ols_estimate(d, grid, 1.0);
  CHECK(std::abs(c.direct(0) - 0.3) <= 0.03);
  CHECK(std::abs(c.indirect(0) - 0.09) <= 0.02);
}

TEST_CASE("ols rejects a rank-deficient design") {
  const auto base = dgp(50, 14);
  const Dataset d(base.y(), base.t(), base.x(), base.x());
  CHECK_THROWS_AS(ols_coefficients(d), FitError);
}

TEST_CASE("grid construction") {
  const auto g = make_grid(-1.5, 1.5, 0.1);
  REQUIRE(g.size() == 31);
  CHECK(g.front() == -1.5);
  CHECK(g.back() == 1.5);
  CHECK(g[15] == 0.0);
  CHECK(g[16] == 0.1);
  CHECK(make_grid(0, 1, 0.3).size() == 4);
  CHECK(make_grid(2, 2, 1).size() == 1);
  CHECK_THROWS_AS(make_grid(1, 0, 0.1), ArgumentError);
  CHECK_THROWS_AS(make_grid(0, 1, 0), ArgumentError);
  const auto pairs = required_pairs(g, 0.0);
  CHECK(pairs.size() == 61);  // (0, 0) is both a diagonal and a cross pair
}

TEST_CASE("effect curve assembly") {
  const auto grid = make_grid(-1.5, 1.5, 0.1);
  ResponseTable flat;
  for (auto p : required_pairs(grid, 0.0)) flat[p] = 0.37;
  const auto zero = effect_curve(flat, grid, 0.0);
  CHECK(zero.direct.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.indirect.cwiseAbs().maxCoeff() == 0.0);

  ResponseTable oracle;
  for (auto p : required_pairs(grid, 0.0)) oracle[p] = oracle_mr(p.t, p.t_prime, 0.25, 0.5);
  const auto c = effect_curve(oracle, grid, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto e = oracle_effects(grid[k], 0.0, 0.25, 0.5);
    CHECK(std::abs(c.direct(static_cast<Index>(k)) - e.direct) <= 1e-14);
    CHECK(std::abs(c.indirect(static_cast<Index>(k)) - e.indirect) <= 1e-14);
    CHECK(c.total(static_cast<Index>(k)) == c.direct(static_cast<Index>(k)) + c.indirect(static_cast<Index>(k)));
  }
  oracle.erase(TreatmentPair{0.0, 0.5});
  try {
    effect_curve(oracle, grid, 0.0);
    FAIL("expected a missing-pair error");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("shared-fit curves agree with the per-estimator routes") {
  const auto d = dgp(150, 15);
  EstimatorConfig cfg;
  const std::vector<EstimatorId> ids{EstimatorId::DmlTp, EstimatorId::DmlMd, EstimatorId::Ipw, EstimatorId::Gcomp,
                                     EstimatorId::Ols};
  const auto curves = estimate_effect_curves(d, cfg, ids, kSmallGrid, 0.0);
  REQUIRE(curves.size() == 5);
  const auto pairs = required_pairs(kSmallGrid, 0.0);
  const auto check_route = [&](EstimatorId id, const std::vector<MediatedResponseEstimate>& ref) {
    const auto& got = curves.at(id).responses;
    REQUIRE(got.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(got[k].pair == ref[k].pair);
      CHECK(got[k].eta_hat == doctest::Approx(ref[k].eta_hat).epsilon(1e-10));
    }
  };
  check_route(EstimatorId::DmlTp, dml_estimate(d, cfg, pairs));
  check_route(EstimatorId::Ipw, ipw_estimate(d, cfg, pairs));
  check_route(EstimatorId::Gcomp, gcomp_estimate(d, cfg, pairs));
  EstimatorConfig md = cfg;
  md.nuisance.variant = DmlVariant::MediatorDensity;
  check_route(EstimatorId::DmlMd, dml_estimate(d, md, pairs));
  for (const auto& [id, r] : curves) {
    CHECK((r.curve.total - r.curve.direct - r.curve.indirect).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.curve.direct.allFinite());
  }
}

TEST_CASE("estimates are invariant to row order") {
  const auto d = dgp(250, 16);
  const auto p = permuted(d, 16);
  EstimatorConfig cfg;
  const std::vector<EstimatorId> ids{EstimatorId::DmlTp, EstimatorId::Ipw, EstimatorId::Gcomp, EstimatorId::Ols};
  const auto a = estimate_effect_curves(d, cfg, ids, kSmallGrid, 0.0);
  const auto b = estimate_effect_curves(p, cfg, ids, kSmallGrid, 0.0);
  for (auto id : ids) {
    const auto& ca = a.at(id).curve;
    const auto& cb = b.at(id).curve;
    CHECK((ca.mr_tt - cb.mr_tt).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((ca.direct - cb.direct).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((ca.indirect - cb.indirect).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("variants agree when both density parametrisations are exact") {
  const Index n = 5000;
  RngStream r(31, 0);
  Eigen::VectorXd t(n), y(n);
  Eigen::MatrixXd x(n, 1), m(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = r.normal();
    t(i) = 0.5 * x(i, 0) + r.normal();
    m(i, 0) = 0.4 * t(i) - 0.3 * x(i, 0) + 0.8 * r.normal();
    y(i) = 0.5 * t(i) + 0.6 * m(i, 0) + 0.2 * x(i, 0) + r.normal();
  }
  const Dataset d(y, t, m, x);
  EstimatorConfig cfg;
  cfg.nuisance.outcome_model = OutcomeModelKind::Linear;
  const std::vector<EstimatorId> ids{EstimatorId::DmlTp, EstimatorId::DmlMd};
  const auto curves = estimate_effect_curves(d, cfg, ids, kSmallGrid, 0.0);
  const auto& tp = curves.at(EstimatorId::DmlTp).curve;
  const auto& md = curves.at(EstimatorId::DmlMd).curve;
  CHECK((tp.mr_tt - md.mr_tt).cwiseAbs().mean() <= 0.05);
  CHECK((tp.mr_cross - md.mr_cross).cwiseAbs().mean() <= 0.05);
}

TEST_CASE("estimator names") {
  CHECK(parse_estimator("dml") == EstimatorId::DmlTp);
  CHECK(parse_estimator("kme") == EstimatorId::Gcomp);
  CHECK(parse_estimator("ii-md") == EstimatorId::DmlMd);
  CHECK(to_string(EstimatorId::Ipw) == "ipw");
  CHECK_THROWS_AS(parse_estimator("tmle"), ConfigError);
}

TEST_CASE("result csv layouts") {
  const auto d = dgp(60, 17);
  const auto est = dml_estimate(d, EstimatorConfig{}, std::vector<TreatmentPair>{{0, 0}, {1, 0}});
  std::istringstream in(format_pair_results(est));
  std::string line;
  std::getline(in, line);
  CHECK(line == "estimator,t,t_prime,eta_hat,bandwidth,n,L,variant");
  std::getline(in, line);
  CHECK(line.rfind("dml,0,0,", 0) == 0);
  CHECK(line.substr(line.size() - 8) == ",60,1,tp");

  const auto grid = make_grid(-1, 1, 0.5);
  ResponseTable mr;
  for (auto p : required_pairs(grid, 0.0)) mr[p] = p.t;
  auto curve = effect_curve(mr, grid, 0.0);
  curve.bands.push_back({"direct", curve.direct.array() - 1, curve.direct.array() + 1});
  std::istringstream cin(format_effect_curve(curve));
  std::getline(cin, line);
  CHECK(line == "t,direct,indirect,total,ci_lo_direct,ci_hi_direct");
  int rows = 0;
  while (std::getline(cin, line)) ++rows;
  CHECK(rows == 5);
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("plain") == "plain");
}
