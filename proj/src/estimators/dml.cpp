#include "medml/estimators/dml.hpp"

#include "medml/core/errors.hpp"
#include "medml/core/parallel.hpp"
#include "medml/inference/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace medml {

namespace {

constexpr std::uint64_t kFoldStream = 0xF01D;

std::vector<double> distinct_values(std::span<const TreatmentPair> pairs) {
  std::vector<double> v;
  v.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    v.push_back(p.t);
    v.push_back(p.t_prime);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t value_index(const std::vector<double>& values, double v) {
  return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
}

void check_pair(TreatmentPair p) {
  if (!std::isfinite(p.t) || !std::isfinite(p.t_prime)) throw ArgumentError("treatment pair must be finite");
}

}  // namespace

ScoreTerms tp_terms(double y, double t_obs, double mu, double omega, double f_tx_tprime, double f_txm_t,
                    double f_txm_tprime) {
  return {y, t_obs, mu, omega, f_txm_tprime / (f_txm_t * f_tx_tprime), 1.0 / f_tx_tprime};
}

ScoreTerms md_terms(double y, double t_obs, double mu, double omega, double f_tx_t, double f_tx_tprime,
                    double f_m_t, double f_m_tprime) {
  return {y, t_obs, mu, omega, f_m_tprime / (f_m_t * f_tx_t), 1.0 / f_tx_tprime};
}

double kernel_score(const ScoreTerms& s, TreatmentPair pair, Bandwidth h, KernelSpec kernel) {
  const double k_t = smooth_weight(kernel, h, s.t_obs - pair.t);
  const double k_tp = smooth_weight(kernel, h, s.t_obs - pair.t_prime);
  // Skip zero-weight products so an infinite residual cannot turn into NaN.
  double psi = s.omega;
  if (k_t != 0.0) psi += k_t * s.outcome_weight * (s.y - s.mu);
  if (k_tp != 0.0) psi += k_tp * s.mediator_weight * (s.mu - s.omega);
  return psi;
}

ScoreTerms ScoreInputs::terms(Index i) const {
  return {y(i), t_obs(i), mu(i), omega(i), outcome_weight(i), mediator_weight(i)};
}

Eigen::VectorXd kernel_scores(const ScoreInputs& in, Bandwidth h, KernelSpec kernel) {
  Eigen::VectorXd out(in.y.size());
  for (Index i = 0; i < out.size(); ++i) out(i) = kernel_score(in.terms(i), in.pair, h, kernel);
  return out;
}

CrossFit cross_fit(const Dataset& data, const EstimatorConfig& config) {
  if (config.folds < 1) throw ConfigError("fold count must be at least 1");
  const Index need = min_training_rows(data.d_x(), data.d_m());
  // Smallest n whose every fold complement still has `need` rows.
  const Index min_n = config.folds == 1 ? need : (need * config.folds + config.folds - 2) / (config.folds - 1);
  if (data.n() < std::max<Index>(min_n, config.folds)) {
    throw DataError("fold too small for nuisance fitting: " + std::to_string(config.folds) +
                    " folds need n >= " + std::to_string(std::max<Index>(min_n, config.folds)) + ", got n = " +
                    std::to_string(data.n()));
  }

  CrossFit cf;
  cf.folds = kfold_split(data.n(), config.folds, RngStream(config.seed, kFoldStream));
  std::vector<std::optional<NuisanceFit>> fits(static_cast<std::size_t>(config.folds));
  auto errors = parallel_for(fits.size(), config.workers, [&](std::size_t l) {
    const auto train_idx = cf.folds.complement(static_cast<int>(l));
    if (config.folds == 1) {
      fits[l].emplace(fit_nuisances(data, config.nuisance));
    } else {
      fits[l].emplace(fit_nuisances(data.rows(train_idx), config.nuisance));
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  cf.fits.reserve(fits.size());
  for (auto& f : fits) cf.fits.push_back(std::move(*f));
  return cf;
}

std::vector<std::vector<ScoreInputs>> score_inputs(const CrossFit& cf, const Dataset& data,
                                                   std::span<const TreatmentPair> pairs,
                                                   std::span<const DmlVariant> variants) {
  for (const auto& p : pairs) check_pair(p);
  const bool want_md =
      std::find(variants.begin(), variants.end(), DmlVariant::MediatorDensity) != variants.end();
  if (want_md) {
    for (const auto& f : cf.fits) {
      if (!f.f_mtx) throw ConfigError("the mediator-density score needs a fitted mediator density model");
    }
  }

  const Index n = data.n();
  const auto values = distinct_values(pairs);
  std::map<double, std::vector<double>> ts_by_tprime;
  for (const auto& p : pairs) ts_by_tprime[p.t_prime].push_back(p.t);
  for (auto& [tp, ts] : ts_by_tprime) {
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }

  std::vector<std::vector<ScoreInputs>> out(variants.size());
  for (auto& per_variant : out) {
    per_variant.resize(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto& in = per_variant[k];
      in.pair = pairs[k];
      in.t_obs = data.t();
      in.y = data.y();
      in.mu.resize(n);
      in.omega.resize(n);
      in.outcome_weight.resize(n);
      in.mediator_weight.resize(n);
    }
  }

  for (int l = 0; l < cf.folds.folds; ++l) {
    const auto idx = cf.folds.members(l);
    if (idx.empty()) continue;
    const Dataset held = data.rows(idx);
    const NuisanceFit& nf = cf.fits[static_cast<std::size_t>(l)];

    const Eigen::MatrixXd f_tx = nf.f_tx.density_matrix(held.x(), values);
    const Eigen::MatrixXd f_txm = nf.f_txm.density_matrix(held.xm(), values);
    Eigen::MatrixXd f_m;
    if (want_md) {
      f_m.resize(held.n(), static_cast<Index>(values.size()));
      for (std::size_t j = 0; j < values.size(); ++j) {
        f_m.col(static_cast<Index>(j)) = nf.f_mtx->density(held.m(), values[j], held.x());
      }
    }

    const auto ev = nf.outcome->evaluator(held.m(), held.x());
    std::map<double, Eigen::VectorXd> mu;
    for (const auto& p : pairs) {
      if (!mu.count(p.t)) mu.emplace(p.t, ev->mu(p.t));
    }
    std::map<TreatmentPair, Eigen::VectorXd> omega;
    for (const auto& [tp, ts] : ts_by_tprime) {
      const Eigen::MatrixXd om = ev->omega(ts, tp);
      for (std::size_t j = 0; j < ts.size(); ++j) omega.emplace(TreatmentPair{ts[j], tp}, om.col(static_cast<Index>(j)));
    }

    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& p = pairs[k];
      const Index jt = static_cast<Index>(value_index(values, p.t));
      const Index jp = static_cast<Index>(value_index(values, p.t_prime));
      const Eigen::VectorXd& mu_p = mu.at(p.t);
      const Eigen::VectorXd& om_p = omega.at(p);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        auto& in = out[v][k];
        for (std::size_t r = 0; r < idx.size(); ++r) {
          const Index i = idx[r];
          const Index ri = static_cast<Index>(r);
          const ScoreTerms s =
              variants[v] == DmlVariant::TreatmentPropensity
                  ? tp_terms(0, 0, 0, 0, f_tx(ri, jp), f_txm(ri, jt), f_txm(ri, jp))
                  : md_terms(0, 0, 0, 0, f_tx(ri, jt), f_tx(ri, jp), f_m(ri, jt), f_m(ri, jp));
          in.mu(i) = mu_p(ri);
          in.omega(i) = om_p(ri);
          in.outcome_weight(i) = s.outcome_weight;
          in.mediator_weight(i) = s.mediator_weight;
        }
      }
    }
  }
  return out;
}

namespace {

struct RowNuisances {
  double mu, omega;
};

RowNuisances row_outcome(const Observation& row, const NuisanceFit& nf, TreatmentPair pair) {
  const Eigen::MatrixXd m = row.m;
  const Eigen::MatrixXd x = row.x;
  const auto ev = nf.outcome->evaluator(m, x);
  const double ts[] = {pair.t};
  return {ev->mu(pair.t)(0), ev->omega(ts, pair.t_prime)(0, 0)};
}

Eigen::RowVectorXd xm_row(const Observation& row) {
  Eigen::RowVectorXd q(row.x.size() + row.m.size());
  q << row.x, row.m;
  return q;
}

}  // namespace

double dml_score(const Observation& row, const NuisanceFit& nf, TreatmentPair pair, Bandwidth h,
                 KernelSpec kernel) {
  check_pair(pair);
  const auto [mu, omega] = row_outcome(row, nf, pair);
  const Eigen::RowVectorXd q = xm_row(row);
  const ScoreTerms s = tp_terms(row.y, row.t, mu, omega, nf.f_tx.density_at(row.x, pair.t_prime),
                                nf.f_txm.density_at(q, pair.t), nf.f_txm.density_at(q, pair.t_prime));
  return kernel_score(s, pair, h, kernel);
}

double dml_score_md(const Observation& row, const NuisanceFit& nf, TreatmentPair pair, Bandwidth h,
                    KernelSpec kernel) {
  check_pair(pair);
  if (!nf.f_mtx) throw ConfigError("the mediator-density score needs a fitted mediator density model");
  const auto [mu, omega] = row_outcome(row, nf, pair);
  const Eigen::MatrixXd m = row.m;
  const Eigen::MatrixXd x = row.x;
  const ScoreTerms s = md_terms(row.y, row.t, mu, omega, nf.f_tx.density_at(row.x, pair.t),
                                nf.f_tx.density_at(row.x, pair.t_prime), nf.f_mtx->density(m, pair.t, x)(0),
                                nf.f_mtx->density(m, pair.t_prime, x)(0));
  return kernel_score(s, pair, h, kernel);
}

MediatedResponseEstimate estimate_from_inputs(const ScoreInputs& inputs, Bandwidth h, KernelSpec kernel,
                                              EstimatorId id, int folds) {
  MediatedResponseEstimate est;
  est.pair = inputs.pair;
  est.scores = kernel_scores(inputs, h, kernel);
  est.eta_hat = est.scores.mean();
  est.bandwidth = h;
  est.estimator = id;
  est.n = est.scores.size();
  est.folds = folds;
  return est;
}

std::vector<MediatedResponseEstimate> estimates_from_inputs(const std::vector<ScoreInputs>& inputs,
                                                            const Dataset& data, const EstimatorConfig& config,
                                                            EstimatorId id) {
  std::vector<MediatedResponseEstimate> out;
  out.reserve(inputs.size());
  if (config.bandwidth.mode == BandwidthMode::Amse) {
    BandwidthChoice scott = config.bandwidth;
    scott.mode = BandwidthMode::Scott;
    const Bandwidth pilot = global_bandwidth(data, scott);
    for (const auto& in : inputs) {
      const AmseSelection sel = select_amse_bandwidth(in, config.kernel, pilot, config.bandwidth.epsilon);
      auto est = estimate_from_inputs(in, sel.h, config.kernel, id, config.folds);
      if (sel.fallback) est.warnings.push_back(sel.warning);
      out.push_back(std::move(est));
    }
  } else {
    const Bandwidth h = global_bandwidth(data, config.bandwidth);
    for (const auto& in : inputs) out.push_back(estimate_from_inputs(in, h, config.kernel, id, config.folds));
  }
  return out;
}

std::vector<MediatedResponseEstimate> dml_estimate(const Dataset& data, const EstimatorConfig& config,
                                                   std::span<const TreatmentPair> pairs) {
  const CrossFit cf = cross_fit(data, config);
  const DmlVariant variant[] = {config.nuisance.variant};
  const auto inputs = score_inputs(cf, data, pairs, variant).front();
  const EstimatorId id =
      config.nuisance.variant == DmlVariant::TreatmentPropensity ? EstimatorId::DmlTp : EstimatorId::DmlMd;
  return estimates_from_inputs(inputs, data, config, id);
}

MediatedResponseEstimate dml_estimate(const Dataset& data, const EstimatorConfig& config, TreatmentPair pair) {
  const TreatmentPair pairs[] = {pair};
  return dml_estimate(data, config, pairs).front();
}

}  // namespace medml
