#include "medml/cli/commands.hpp"

#include "medml/cli/output.hpp"
#include "medml/core/errors.hpp"
#include "medml/core/parallel.hpp"
#include "medml/core/text_io.hpp"
#include "medml/estimators/csv.hpp"
#include "medml/estimators/curves.hpp"
#include "medml/inference/bootstrap.hpp"
#include "medml/simulation/benchmark.hpp"
#include "medml/simulation/oracle.hpp"
#include "medml/simulation/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>

namespace medml::cli {

namespace fs = std::filesystem;

namespace {

EstimatorConfig estimator_config(const RunConfig& cfg) {
  EstimatorConfig ec = cfg.estimator;
  ec.seed = cfg.seed;
  ec.workers = resolve_parallelism(cfg.parallelism);
  return ec;
}

bool is_dml(EstimatorId id) { return id == EstimatorId::DmlTp || id == EstimatorId::DmlMd; }

Bandwidth pilot_bandwidth(const Dataset& data, BandwidthChoice choice) {
  if (choice.mode == BandwidthMode::Amse) choice.mode = BandwidthMode::Scott;
  return global_bandwidth(data, choice);
}

struct DmlResults {
  std::map<EstimatorId, CurveResult> curves;
  std::map<EstimatorId, std::vector<InferenceResult>> inference;
};

DmlResults run_dml(const Dataset& data, const EstimatorConfig& ec, const InferenceConfig& ic,
                   const std::vector<EstimatorId>& ids, std::span<const double> grid, double t_ref) {
  const auto pairs = required_pairs(grid, t_ref);
  EstimatorConfig fit_cfg = ec;
  std::vector<DmlVariant> variants;
  for (EstimatorId id : ids) {
    variants.push_back(id == EstimatorId::DmlTp ? DmlVariant::TreatmentPropensity : DmlVariant::MediatorDensity);
    if (id == EstimatorId::DmlMd) fit_cfg.nuisance.variant = DmlVariant::MediatorDensity;
  }
  const CrossFit cf = cross_fit(data, fit_cfg);
  const auto inputs = score_inputs(cf, data, pairs, variants);
  const Bandwidth global = pilot_bandwidth(data, ec.bandwidth);

  DmlResults res;
  for (std::size_t v = 0; v < ids.size(); ++v) {
    CurveResult cr;
    std::vector<InferenceResult> inf;
    for (const auto& in : inputs[v]) {
      auto pi = infer_from_inputs(in, ec, ic, global, ids[v]);
      cr.responses.push_back(std::move(pi.estimate));
      inf.push_back(std::move(pi.inference));
    }
    cr.curve = effect_curve(response_table(cr.responses), grid, t_ref);
    res.curves[ids[v]] = std::move(cr);
    res.inference[ids[v]] = std::move(inf);
  }

  if (ic.method == CiMethod::Bootstrap) {
    // One resample loop yields intervals for every pair and every effect.
    EstimatorConfig inner = fit_cfg;
    inner.workers = 1;
    const Index g = static_cast<Index>(grid.size());
    const Index block = static_cast<Index>(pairs.size()) + 3 * g;
    const auto summary = bootstrap(
        [&](const Dataset& d) {
          const CrossFit bcf = cross_fit(d, inner);
          const auto bin = score_inputs(bcf, d, pairs, variants);
          Eigen::VectorXd stat(block * static_cast<Index>(ids.size()));
          for (std::size_t v = 0; v < ids.size(); ++v) {
            const auto est = estimates_from_inputs(bin[v], d, inner, ids[v]);
            const auto curve = effect_curve(response_table(est), grid, t_ref);
            const Index off = block * static_cast<Index>(v);
            for (std::size_t k = 0; k < est.size(); ++k) stat(off + static_cast<Index>(k)) = est[k].eta_hat;
            const Index e = off + static_cast<Index>(pairs.size());
            stat.segment(e, g) = curve.direct;
            stat.segment(e + g, g) = curve.indirect;
            stat.segment(e + 2 * g, g) = curve.total;
          }
          return stat;
        },
        data, ic.bootstrap_reps, ic.alpha, ec.seed, ec.workers);
    for (std::size_t v = 0; v < ids.size(); ++v) {
      const Index off = block * static_cast<Index>(v);
      auto& inf = res.inference[ids[v]];
      for (std::size_t k = 0; k < inf.size(); ++k) {
        inf[k].method = CiMethod::Bootstrap;
        inf[k].ci_lower = summary.lower(off + static_cast<Index>(k));
        inf[k].ci_upper = summary.upper(off + static_cast<Index>(k));
        if (summary.failures > 0) {
          inf[k].warnings.push_back(std::to_string(summary.failures) + " bootstrap replications failed");
        }
      }
      const Index e = off + static_cast<Index>(pairs.size());
      auto& bands = res.curves[ids[v]].curve.bands;
      bands.push_back({"direct", summary.lower.segment(e, g), summary.upper.segment(e, g)});
      bands.push_back({"indirect", summary.lower.segment(e + g, g), summary.upper.segment(e + g, g)});
      bands.push_back({"total", summary.lower.segment(e + 2 * g, g), summary.upper.segment(e + 2 * g, g)});
    }
  }
  return res;
}

fs::path output_dir(const RunConfig& cfg) { return cfg.output.empty() ? fs::path(".") : fs::path(cfg.output); }

fs::path output_file(const RunConfig& cfg, const char* fallback) {
  return cfg.output.empty() ? fs::path(fallback) : fs::path(cfg.output);
}

void ensure_parent(const fs::path& file) {
  const auto parent = file.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

Dataset load_input(const RunConfig& cfg) {
  if (!cfg.data_path) throw ConfigError("missing --data (path to a CSV file)");
  return load_dataset(*cfg.data_path, cfg.schema);
}

}  // namespace

void cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const Dataset data = load_input(cfg);
  const auto grid = cfg.grid.values();
  const EstimatorConfig ec = estimator_config(cfg);

  std::vector<EstimatorId> dml_ids, other_ids;
  for (EstimatorId id : cfg.estimators) (is_dml(id) ? dml_ids : other_ids).push_back(id);

  DmlResults dml;
  if (!dml_ids.empty()) dml = run_dml(data, ec, cfg.inference, dml_ids, grid, cfg.t_prime_ref);
  std::map<EstimatorId, CurveResult> curves = std::move(dml.curves);
  if (!other_ids.empty()) {
    for (auto& [id, r] : estimate_effect_curves(data, ec, other_ids, grid, cfg.t_prime_ref)) curves[id] = std::move(r);
  }

  // Everything is computed; now write.
  const fs::path dir = output_dir(cfg);
  fs::create_directories(dir);
  std::vector<MediatedResponseEstimate> all_pairs;
  for (EstimatorId id : cfg.estimators) {
    const auto& r = curves.at(id);
    write_text_atomic(dir / ("effects_" + to_string(id) + ".csv"), format_effect_curve(r.curve));
    all_pairs.insert(all_pairs.end(), r.responses.begin(), r.responses.end());
    if (dml.inference.count(id)) {
      write_text_atomic(dir / ("inference_" + to_string(id) + ".csv"), format_inference_results(dml.inference.at(id)));
    }
  }
  write_text_atomic(dir / "pairs.csv", format_pair_results(all_pairs));
  write_text_atomic(dir / "histogram.csv", format_histogram(treatment_histogram(data.t(), cfg.grid), data.n()));

  out << "n = " << data.n() << ", grid points = " << grid.size() << ", t' = " << cfg.t_prime_ref << "\n";
  for (EstimatorId id : cfg.estimators) out << summary_table("[" + to_string(id) + "]", curves.at(id).curve);
  out << "results written to " << dir.string() << "\n";
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  BenchmarkConfig bc;
  bc.estimators = cfg.estimators;
  bc.sizes = cfg.sizes;
  bc.reps = cfg.reps;
  bc.dgp = cfg.dgp;
  bc.grid = cfg.grid.values();
  bc.t_prime_ref = cfg.t_prime_ref;
  bc.seed = cfg.seed;
  bc.workers = resolve_parallelism(cfg.parallelism);
  const EstimatorConfig ec = estimator_config(cfg);

  CurveProvider provider = default_curve_provider(ec);
  if (cfg.stub == StubMode::Oracle) {
    provider = [&](const Dataset&, std::span<const EstimatorId> ids, std::span<const double> grid, double t_ref,
                   std::uint64_t) {
      std::map<EstimatorId, EffectCurve> m;
      for (EstimatorId id : ids) m[id] = oracle_curve(grid, t_ref, cfg.dgp.alpha, cfg.dgp.beta);
      return m;
    };
  }
  const auto start = std::chrono::steady_clock::now();
  const SimulationReport report = run_benchmark(bc, provider);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path json = output_file(cfg, "simulation.json");
  fs::path csv = json;
  csv.replace_extension(".csv");
  ensure_parent(json);
  write_text_atomic(json, format_report_json(report, ec));
  write_text_atomic(csv, format_report_csv(report));

  char line[160];
  std::snprintf(line, sizeof line, "%-8s %6s %-9s %8s %8s %8s %6s\n", "est", "n", "effect", "bias", "std", "rmse",
                "fail");
  out << line;
  for (const auto& c : report.cells) {
    const std::pair<const char*, const EffectSummary*> effects[] = {
        {"direct", &c.direct}, {"indirect", &c.indirect}, {"total", &c.total}};
    for (const auto& [name, s] : effects) {
      std::snprintf(line, sizeof line, "%-8s %6lld %-9s %8.4f %8.4f %8.4f %6d\n", to_string(c.estimator).c_str(),
                    static_cast<long long>(c.n), name, s->bias, s->std, s->rmse, c.failures);
      out << line;
    }
  }
  std::snprintf(line, sizeof line, "runtime %.1f s\n", seconds);
  out << line << "report written to " << json.string() << " and " << csv.string() << "\n";
}

void cmd_coverage(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  CoverageConfig cc;
  cc.n = cfg.sizes.front();
  cc.reps = cfg.reps;
  cc.pair = cfg.pair;
  cc.dgp = cfg.dgp;
  cc.seed = cfg.seed;
  cc.workers = resolve_parallelism(cfg.parallelism);
  const EstimatorConfig ec = estimator_config(cfg);

  IntervalProvider provider = default_interval_provider(ec, cfg.inference);
  if (cfg.stub == StubMode::Oracle) {
    const double truth = oracle_mr(cfg.pair.t, cfg.pair.t_prime, cfg.dgp.alpha, cfg.dgp.beta);
    provider = [truth](const Dataset&, TreatmentPair, std::uint64_t) {
      return IntervalEstimate{truth, 1e12, 1.0, truth - 1e6, truth + 1e6};
    };
  }
  const CoverageReport report = run_coverage(cc, cfg.inference.alpha, provider);
  const fs::path file = output_file(cfg, "coverage.json");
  ensure_parent(file);
  write_text_atomic(file, format_coverage_json(report, ec));

  char line[160];
  std::snprintf(line, sizeof line, "coverage %.4f (%d of %d), failures %d, truth %.4f, mean width %.4f\n",
                report.coverage, report.covered, report.successes, report.failures, report.truth, report.mean_width);
  out << line << "report written to " << file.string() << "\n";
}

void cmd_bandwidth(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  Dataset data = [&] {
    if (cfg.data_path) return load_input(cfg);
    DgpConfig d = cfg.dgp;
    d.n = cfg.sizes.front();
    d.seed = cfg.seed;
    return generate_dgp(d);
  }();
  const auto grid = cfg.grid.values();
  std::vector<TreatmentPair> pairs;
  for (double t : grid) pairs.push_back({t, cfg.t_prime_ref});
  const EstimatorConfig ec = estimator_config(cfg);
  const Bandwidth scott = pilot_bandwidth(data, BandwidthChoice{BandwidthMode::Scott, 0.0, ec.bandwidth.scott_c,
                                                                ec.bandwidth.epsilon});

  std::vector<ScoreInputs> inputs;
  if (cfg.stub == StubMode::Constant) {
    // Every nuisance and outcome equal to one constant: the estimate does not
    // depend on h, so the bias estimate vanishes.
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(data.n());
    for (const auto& p : pairs) inputs.push_back({p, data.t(), one, one, one, one, one});
  } else {
    const CrossFit cf = cross_fit(data, ec);
    const DmlVariant variant[] = {ec.nuisance.variant};
    inputs = score_inputs(cf, data, pairs, variant).front();
  }
  const auto rows =
      bandwidth_diagnostics(inputs, ec.kernel, scott, ec.bandwidth.epsilon, cfg.inference.centered_variance);
  const fs::path file = output_file(cfg, "bandwidth.csv");
  ensure_parent(file);
  write_text_atomic(file, format_bandwidth_csv(rows));

  std::size_t fallbacks = 0;
  for (const auto& r : rows) fallbacks += r.h_amse ? 0 : 1;
  out << "h_scott = " << format_real(scott.value()) << ", " << rows.size() << " grid points, " << fallbacks
      << " fallbacks\nwritten to " << file.string() << "\n";
}

namespace {

// Flags are collected as strings so that every value goes through the same
// validation as the config file, and only flags actually given override it.
struct Flags {
  std::map<std::string, std::string> values;
  bool centered = false;
};

void add_common(CLI::App& app, Flags& f, const std::string& command) {
  auto opt = [&](const std::string& names, const std::string& key, const std::string& help) {
    app.add_option(names, f.values[key], help);
  };
  opt("--config", "config", "JSON config file (overrides the preset; flags override it)");
  opt("--preset", "preset", "built-in preset: paper-table2, paper-table3, real-data");
  opt("--seed", "seed", "master seed (default 0)");
  opt("--parallelism", "parallelism", "worker threads (default MEDML_THREADS or 1)");
  opt("--out", "out", command == "estimate" ? "output directory (default .)" : "output file");
  opt("--estimator,--estimators", "estimators", "comma list of dml, dml-md, ipw, gcomp, ols");
  opt("--density-model", "density_model", "gaussian_linear | kernel");
  opt("--outcome-model", "outcome_model", "kernel_ridge | linear");
  opt("--variant", "variant", "DML score: tp | md");
  opt("--ridge-lambda", "ridge_lambda", "fixed ridge penalty (default: GCV)");
  opt("--lengthscale", "lengthscale", "fixed kernel lengthscale (default: median heuristic)");
  opt("--density-floor", "density_floor", "lower clip for density values (default 1e-3)");
  opt("--kernel", "kernel", "smoothing kernel: gaussian | epanechnikov");
  opt("--bandwidth", "bandwidth", "scott | amse | <positive number>");
  opt("--scott-c", "scott_c", "Scott rule constant (default 1.06)");
  opt("--epsilon", "epsilon", "AMSE pilot scaling in (0,1) (default 0.5)");
  opt("--folds,-L", "folds", "cross-fitting folds (default 1)");
  opt("--grid", "grid", "treatment grid min:max:step (default -1.5:1.5:0.1)");
  opt("--tprime", "t_prime", "reference treatment t' (default 0)");
  opt("--ci", "ci", "asymptotic | bootstrap");
  opt("--alpha", "alpha", "confidence level parameter, CI at 1-alpha (default 0.05)");
  opt("--bootstrap-reps", "bootstrap_reps", "bootstrap replications (default 100)");
  app.add_flag("--centered-variance", f.centered, "center the scores in the variance estimate");
  if (command == "estimate" || command == "bandwidth") {
    opt("--data", "data", "input CSV with columns y, t, m_*, x_*");
    opt("--y", "col_y", "outcome column (default y)");
    opt("--t", "col_t", "treatment column (default t)");
    opt("--m", "col_m", "comma list of mediator columns (default m_*)");
    opt("--x", "col_x", "comma list of covariate columns (default x_*)");
  }
  if (command != "estimate") {
    opt("--n,--sizes", "sizes", "sample size(s), comma list for simulate");
    opt("--dgp-alpha", "dgp_alpha", "DGP interaction coefficient (default 0.25)");
    opt("--dgp-beta", "dgp_beta", "DGP cubic coefficient (default 0.5)");
    opt("--dm", "d_m", "DGP mediator dimension (default 1)");
  }
  if (command == "simulate" || command == "coverage") opt("--reps", "reps", "replications (default 100)");
  if (command == "coverage") opt("--pair", "pair", "treatment pair t,t' (default 1,0)");
  if (command != "estimate") {
    opt("--stub", "stub",
        command == "bandwidth" ? "constant: constant-estimate stub" : "oracle: report the true values");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

RunConfig build_config(const CLI::App& sub, const Flags& f) {
  auto given = [&](const std::string& key) {
    const auto it = f.values.find(key);
    return it != f.values.end() && !it->second.empty();
  };
  auto value = [&](const std::string& key) { return f.values.at(key); };
  (void)sub;

  RunConfig cfg;
  if (given("preset")) apply_preset(cfg, value("preset"));
  if (given("config")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(value("config")));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (j.contains("preset")) {
      apply_preset(cfg, j.at("preset").get<std::string>());
      j.erase("preset");
    }
    apply_json(cfg, j);
  }

  auto& nc = cfg.estimator.nuisance;
  if (given("seed")) cfg.seed = static_cast<std::uint64_t>(parse_integer(value("seed"), "--seed"));
  if (given("parallelism")) cfg.parallelism = static_cast<int>(parse_integer(value("parallelism"), "--parallelism"));
  if (given("out")) cfg.output = value("out");
  if (given("estimators")) cfg.estimators = parse_estimators(value("estimators"));
  if (given("density_model")) nc.density_model = parse_density_model(value("density_model"));
  if (given("outcome_model")) nc.outcome_model = parse_outcome_model(value("outcome_model"));
  if (given("variant")) nc.variant = parse_variant(value("variant"));
  if (given("ridge_lambda")) nc.ridge_lambda = parse_number(value("ridge_lambda"), "--ridge-lambda");
  if (given("lengthscale")) nc.lengthscale = parse_number(value("lengthscale"), "--lengthscale");
  if (given("density_floor")) nc.density_floor = parse_number(value("density_floor"), "--density-floor");
  if (given("kernel")) cfg.estimator.kernel.family = parse_kernel_family(value("kernel"));
  if (given("bandwidth")) cfg.estimator.bandwidth = parse_bandwidth(value("bandwidth"), cfg.estimator.bandwidth);
  if (given("scott_c")) cfg.estimator.bandwidth.scott_c = parse_number(value("scott_c"), "--scott-c");
  if (given("epsilon")) cfg.estimator.bandwidth.epsilon = parse_number(value("epsilon"), "--epsilon");
  if (given("folds")) cfg.estimator.folds = static_cast<int>(parse_integer(value("folds"), "--folds"));
  if (given("grid")) cfg.grid = parse_grid_spec(value("grid"));
  if (given("t_prime")) cfg.t_prime_ref = parse_number(value("t_prime"), "--tprime");
  if (given("ci")) cfg.inference.method = parse_ci_method(value("ci"));
  if (given("alpha")) cfg.inference.alpha = parse_number(value("alpha"), "--alpha");
  if (given("bootstrap_reps")) {
    cfg.inference.bootstrap_reps = static_cast<int>(parse_integer(value("bootstrap_reps"), "--bootstrap-reps"));
  }
  if (f.centered) cfg.inference.centered_variance = true;
  if (given("data")) cfg.data_path = value("data");
  if (given("col_y")) cfg.schema.y = value("col_y");
  if (given("col_t")) cfg.schema.t = value("col_t");
  if (given("col_m")) cfg.schema.m = split_list(value("col_m"));
  if (given("col_x")) cfg.schema.x = split_list(value("col_x"));
  if (given("sizes")) cfg.sizes = parse_sizes(value("sizes"));
  if (given("dgp_alpha")) cfg.dgp.alpha = parse_number(value("dgp_alpha"), "--dgp-alpha");
  if (given("dgp_beta")) cfg.dgp.beta = parse_number(value("dgp_beta"), "--dgp-beta");
  if (given("d_m")) cfg.dgp.d_m = static_cast<Index>(parse_integer(value("d_m"), "--dm"));
  if (given("reps")) cfg.reps = static_cast<int>(parse_integer(value("reps"), "--reps"));
  if (given("pair")) {
    const auto parts = split_list(value("pair"));
    if (parts.size() != 2) throw ConfigError("--pair must be t,t'");
    cfg.pair = {parse_number(parts[0], "--pair t"), parse_number(parts[1], "--pair t'")};
  }
  if (given("stub")) cfg.stub = parse_stub(value("stub"));
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Double machine learning for causal mediation with continuous treatments", "medml"};
  app.require_subcommand(1);
  struct Command {
    const char* name;
    const char* help;
    std::function<void(const RunConfig&, std::ostream&)> body;
    Flags flags;
    CLI::App* app = nullptr;
  };
  std::vector<Command> commands;
  commands.reserve(4);
  commands.push_back({"estimate", "estimate effect curves on a dataset", cmd_estimate, {}});
  commands.push_back({"simulate", "benchmark estimators on the synthetic design", cmd_simulate, {}});
  commands.push_back({"coverage", "coverage of asymptotic intervals on the synthetic design", cmd_coverage, {}});
  commands.push_back({"bandwidth", "Scott and AMSE bandwidth diagnostics per grid point", cmd_bandwidth, {}});
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, c.help);
    add_common(*c.app, c.flags, c.name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    for (const auto& c : commands) {
      if (c.app->parsed()) {
        err << c.app->help();
        return 2;
      }
    }
    err << app.help();
    return 2;
  }

  for (auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      const RunConfig cfg = build_config(*c.app, c.flags);
      c.body(cfg, out);
      return 0;
    } catch (const ConfigError& e) {
      err << "configuration error: " << e.what() << "\n" << c.app->help();
      return 2;
    } catch (const ArgumentError& e) {
      err << "configuration error: " << e.what() << "\n";
      return 2;
    } catch (const DataError& e) {
      err << "data error: " << e.what() << "\n";
      return 3;
    } catch (const NumericalError& e) {
      err << "numerical error: " << e.what() << "\n";
      return 4;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::filesystem::filesystem_error& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace medml::cli
