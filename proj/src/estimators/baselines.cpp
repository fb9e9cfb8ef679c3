#include "medml/estimators/baselines.hpp"

#include "medml/core/errors.hpp"
#include "medml/estimators/dml.hpp"

#include <algorithm>
#include <map>

namespace medml {

namespace {

// IPW uses the global bandwidth; in AMSE mode that is the Scott pilot.
Bandwidth ipw_bandwidth(const Dataset& data, const BandwidthChoice& choice) {
  if (choice.mode != BandwidthMode::Amse) return global_bandwidth(data, choice);
  BandwidthChoice scott = choice;
  scott.mode = BandwidthMode::Scott;
  return global_bandwidth(data, scott);
}

std::vector<double> sorted_values(std::span<const TreatmentPair> pairs) {
  std::vector<double> v;
  for (const auto& p : pairs) {
    v.push_back(p.t);
    v.push_back(p.t_prime);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Index position(const std::vector<double>& v, double x) {
  return static_cast<Index>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
}

}  // namespace

std::vector<MediatedResponseEstimate> ipw_estimate(const Dataset& data, const EstimatorConfig& config,
                                                   std::span<const TreatmentPair> pairs) {
  const ConditionalDensityModel f_tx = fit_conditional_density(config.nuisance, data.t(), data.x(), "f_{T|X}");
  const ConditionalDensityModel f_txm =
      fit_conditional_density(config.nuisance, data.t(), data.xm(), "f_{T|X,M}");
  const Bandwidth h = ipw_bandwidth(data, config.bandwidth);
  const auto values = sorted_values(pairs);
  const Eigen::MatrixXd d_tx = f_tx.density_matrix(data.x(), values);
  const Eigen::MatrixXd d_txm = f_txm.density_matrix(data.xm(), values);

  std::vector<MediatedResponseEstimate> out;
  for (const auto& p : pairs) {
    const Index jt = position(values, p.t);
    const Index jp = position(values, p.t_prime);
    MediatedResponseEstimate est;
    est.pair = p;
    est.scores.resize(data.n());
    for (Index i = 0; i < data.n(); ++i) {
      const double w = tp_terms(0, 0, 0, 0, d_tx(i, jp), d_txm(i, jt), d_txm(i, jp)).outcome_weight;
      const double k = smooth_weight(config.kernel, h, data.t()(i) - p.t);
      est.scores(i) = k == 0.0 ? 0.0 : k * data.y()(i) * w;
    }
    est.eta_hat = est.scores.mean();
    est.bandwidth = h;
    est.estimator = EstimatorId::Ipw;
    est.n = data.n();
    est.folds = 1;
    out.push_back(std::move(est));
  }
  return out;
}

MediatedResponseEstimate ipw_estimate(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair) {
  const TreatmentPair pairs[] = {pair};
  return ipw_estimate(data, config, pairs).front();
}

std::vector<MediatedResponseEstimate> gcomp_estimate(const Dataset& data, const EstimatorConfig& config,
                                                     std::span<const TreatmentPair> pairs) {
  const auto model = fit_outcome_model(data, config.nuisance);
  const auto ev = model->evaluator(data.m(), data.x());
  std::map<double, std::vector<double>> ts_by_tprime;
  for (const auto& p : pairs) ts_by_tprime[p.t_prime].push_back(p.t);

  std::map<TreatmentPair, Eigen::VectorXd> omega;
  for (auto& [tp, ts] : ts_by_tprime) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    const Eigen::MatrixXd om = ev->omega(ts, tp);
    for (std::size_t j = 0; j < ts.size(); ++j) omega.emplace(TreatmentPair{ts[j], tp}, om.col(static_cast<Index>(j)));
  }

  std::vector<MediatedResponseEstimate> out;
  for (const auto& p : pairs) {
    MediatedResponseEstimate est;
    est.pair = p;
    est.scores = omega.at(p);
    est.eta_hat = est.scores.mean();
    est.estimator = EstimatorId::Gcomp;
    est.n = data.n();
    est.folds = 1;
    out.push_back(std::move(est));
  }
  return out;
}

MediatedResponseEstimate gcomp_estimate(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair) {
  const TreatmentPair pairs[] = {pair};
  return gcomp_estimate(data, config, pairs).front();
}

OlsCoefficients ols_coefficients(const Dataset& data) {
  OlsCoefficients c;
  try {
    Eigen::MatrixXd tmx(data.n(), 1 + data.d_m() + data.d_x());
    tmx << data.t(), data.m(), data.x();
    const LinearFit outcome = fit_ols(tmx, data.y());
    c.b_t = outcome.coefficients(0);
    c.b_m = outcome.coefficients.segment(1, data.d_m());
    Eigen::MatrixXd tx(data.n(), 1 + data.d_x());
    tx << data.t(), data.x();
    c.a_t.resize(data.d_m());
    for (Index j = 0; j < data.d_m(); ++j) c.a_t(j) = fit_ols(tx, data.m().col(j)).coefficients(0);
  } catch (const NumericalError& e) {
    throw FitError("coefficient product", e.what());
  }
  return c;
}

EffectCurve ols_estimate(const Dataset& data, std::span<const double> grid, double t_prime_ref) {
  const OlsCoefficients c = ols_coefficients(data);
  const double product = c.a_t.dot(c.b_m);
  EffectCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.t_prime_ref = t_prime_ref;
  const Index g = static_cast<Index>(grid.size());
  curve.direct.resize(g);
  curve.indirect.resize(g);
  curve.total.resize(g);
  // Implied linear mediated responses, anchored at eta(t', t') = 0.
  curve.mr_ref = 0.0;
  curve.mr_tt.resize(g);
  curve.mr_cross.resize(g);
  for (Index k = 0; k < g; ++k) {
    const double delta = t_prime_ref - grid[static_cast<std::size_t>(k)];
    curve.direct(k) = c.b_t * delta;
    curve.indirect(k) = product * delta;
    curve.total(k) = curve.direct(k) + curve.indirect(k);
    curve.mr_cross(k) = -curve.indirect(k);
    curve.mr_tt(k) = curve.mr_cross(k) - curve.direct(k);
  }
  return curve;
}

}  // namespace medml
