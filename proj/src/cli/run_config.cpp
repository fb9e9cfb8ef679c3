#include "medml/cli/run_config.hpp"

#include "medml/core/errors.hpp"
#include "medml/estimators/effect_curve.hpp"
#include "medml/nuisance/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace medml::cli {

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const char* begin = s.data();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("invalid number '" + s + "' for " + what);
  }
  return v;
}

long long parse_integer(const std::string& s, const std::string& what) {
  long long v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid integer '" + s + "' for " + what);
  return v;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<double> GridSpec::values() const { return make_grid(min, max, step); }

GridSpec parse_grid_spec(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("grid must be min:max:step, got '" + text + "'");
  GridSpec g{parse_number(parts[0], "grid min"), parse_number(parts[1], "grid max"), parse_number(parts[2], "grid step")};
  if (!(g.step > 0.0)) throw ConfigError("grid step must be positive");
  if (g.min > g.max) throw ConfigError("grid min must not exceed grid max");
  return g;
}

BandwidthChoice parse_bandwidth(const std::string& text, BandwidthChoice base) {
  if (text == "scott") {
    base.mode = BandwidthMode::Scott;
  } else if (text == "amse") {
    base.mode = BandwidthMode::Amse;
  } else {
    base.mode = BandwidthMode::Fixed;
    base.fixed = parse_number(text, "bandwidth (scott, amse or a positive number)");
    if (!(base.fixed > 0.0)) throw ConfigError("fixed bandwidth must be positive");
  }
  return base;
}

std::vector<EstimatorId> parse_estimators(const std::string& text) {
  std::vector<EstimatorId> ids;
  for (const auto& name : split(text, ',')) {
    const EstimatorId id = parse_estimator(name);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  if (ids.empty()) throw ConfigError("no estimator given");
  return ids;
}

std::vector<Index> parse_sizes(const std::string& text) {
  std::vector<Index> sizes;
  for (const auto& s : split(text, ',')) {
    const double v = parse_number(s, "sample size");
    if (v < 1 || v != std::floor(v)) throw ConfigError("sample size must be a positive integer, got '" + s + "'");
    sizes.push_back(static_cast<Index>(v));
  }
  if (sizes.empty()) throw ConfigError("no sample size given");
  return sizes;
}

StubMode parse_stub(const std::string& text) {
  if (text.empty() || text == "none") return StubMode::None;
  if (text == "oracle") return StubMode::Oracle;
  if (text == "constant") return StubMode::Constant;
  throw ConfigError("unknown stub mode '" + text + "' (expected none, oracle, constant)");
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "paper-table2") {
    cfg.estimators = {EstimatorId::Ols, EstimatorId::Ipw, EstimatorId::Gcomp, EstimatorId::DmlTp};
    cfg.sizes = {500, 1000, 5000};
    cfg.reps = 100;
    cfg.grid = GridSpec{};
    cfg.t_prime_ref = 0.0;
    cfg.dgp.alpha = 0.25;
    cfg.dgp.beta = 0.5;
    cfg.dgp.d_m = 1;
    cfg.estimator.folds = 1;
    cfg.estimator.bandwidth.mode = BandwidthMode::Scott;
  } else if (name == "paper-table3") {
    cfg.estimators = {EstimatorId::DmlTp};
    cfg.sizes = {1000};
    cfg.reps = 100;
    cfg.pair = {1.0, 0.0};
    cfg.inference.alpha = 0.05;
    cfg.inference.method = CiMethod::Asymptotic;
    cfg.dgp.alpha = 0.25;
    cfg.dgp.beta = 0.5;
    cfg.estimator.folds = 1;
    cfg.estimator.bandwidth.mode = BandwidthMode::Scott;
  } else if (name == "real-data") {
    cfg.estimator.folds = 2;
    cfg.inference.method = CiMethod::Bootstrap;
    cfg.inference.bootstrap_reps = 100;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected paper-table2, paper-table3, real-data)");
  }
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::set<std::string> known = {
      "data",       "columns",      "estimators",   "density_model",   "outcome_model", "variant",
      "ridge_lambda", "lengthscale", "density_floor", "kernel",         "bandwidth",     "scott_c",
      "epsilon",    "folds",        "grid",         "t_prime",         "ci",            "alpha",
      "centered_variance", "bootstrap_reps", "reps", "sizes",          "dgp",           "pair",
      "seed",       "parallelism",  "output",       "gcv_grid"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  auto& nc = cfg.estimator.nuisance;
  if (j.contains("data")) cfg.data_path = get<std::string>(j, "data");
  if (j.contains("columns")) {
    const auto& c = j.at("columns");
    if (!c.is_object()) throw ConfigError("config key 'columns' must be an object");
    if (c.contains("y")) cfg.schema.y = get<std::string>(c, "y");
    if (c.contains("t")) cfg.schema.t = get<std::string>(c, "t");
    if (c.contains("m")) cfg.schema.m = get<std::vector<std::string>>(c, "m");
    if (c.contains("x")) cfg.schema.x = get<std::vector<std::string>>(c, "x");
  }
  if (j.contains("estimators")) {
    const auto& e = j.at("estimators");
    cfg.estimators = e.is_string() ? parse_estimators(e.get<std::string>())
                                   : parse_estimators([&] {
                                       std::string joined;
                                       for (const auto& s : get<std::vector<std::string>>(j, "estimators")) {
                                         joined += (joined.empty() ? "" : ",") + s;
                                       }
                                       return joined;
                                     }());
  }
  if (j.contains("density_model")) nc.density_model = parse_density_model(get<std::string>(j, "density_model"));
  if (j.contains("outcome_model")) nc.outcome_model = parse_outcome_model(get<std::string>(j, "outcome_model"));
  if (j.contains("variant")) nc.variant = parse_variant(get<std::string>(j, "variant"));
  if (j.contains("ridge_lambda")) {
    if (j.at("ridge_lambda").is_string()) {
      if (j.at("ridge_lambda").get<std::string>() != "gcv") throw ConfigError("ridge_lambda must be \"gcv\" or a number");
      nc.ridge_lambda.reset();
    } else {
      nc.ridge_lambda = get<double>(j, "ridge_lambda");
    }
  }
  if (j.contains("gcv_grid")) nc.gcv_grid = get<std::vector<double>>(j, "gcv_grid");
  if (j.contains("lengthscale")) {
    if (j.at("lengthscale").is_string()) {
      if (j.at("lengthscale").get<std::string>() != "median") {
        throw ConfigError("lengthscale must be \"median\" or a number");
      }
      nc.lengthscale.reset();
    } else {
      nc.lengthscale = get<double>(j, "lengthscale");
    }
  }
  if (j.contains("density_floor")) nc.density_floor = get<double>(j, "density_floor");
  if (j.contains("kernel")) cfg.estimator.kernel.family = parse_kernel_family(get<std::string>(j, "kernel"));
  if (j.contains("bandwidth")) {
    const auto& b = j.at("bandwidth");
    if (b.is_number()) {
      cfg.estimator.bandwidth.mode = BandwidthMode::Fixed;
      cfg.estimator.bandwidth.fixed = b.get<double>();
    } else {
      cfg.estimator.bandwidth = parse_bandwidth(get<std::string>(j, "bandwidth"), cfg.estimator.bandwidth);
    }
  }
  if (j.contains("scott_c")) cfg.estimator.bandwidth.scott_c = get<double>(j, "scott_c");
  if (j.contains("epsilon")) cfg.estimator.bandwidth.epsilon = get<double>(j, "epsilon");
  if (j.contains("folds")) cfg.estimator.folds = get<int>(j, "folds");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.is_string()) {
      cfg.grid = parse_grid_spec(g.get<std::string>());
    } else {
      cfg.grid = GridSpec{get<double>(g, "min"), get<double>(g, "max"), get<double>(g, "step")};
    }
  }
  if (j.contains("t_prime")) cfg.t_prime_ref = get<double>(j, "t_prime");
  if (j.contains("ci")) cfg.inference.method = parse_ci_method(get<std::string>(j, "ci"));
  if (j.contains("alpha")) cfg.inference.alpha = get<double>(j, "alpha");
  if (j.contains("centered_variance")) cfg.inference.centered_variance = get<bool>(j, "centered_variance");
  if (j.contains("bootstrap_reps")) cfg.inference.bootstrap_reps = get<int>(j, "bootstrap_reps");
  if (j.contains("reps")) cfg.reps = get<int>(j, "reps");
  if (j.contains("sizes")) {
    const auto& s = j.at("sizes");
    if (s.is_number()) {
      cfg.sizes = {s.get<Index>()};
    } else {
      cfg.sizes = get<std::vector<Index>>(j, "sizes");
    }
  }
  if (j.contains("dgp")) {
    const auto& d = j.at("dgp");
    if (!d.is_object()) throw ConfigError("config key 'dgp' must be an object");
    if (d.contains("alpha")) cfg.dgp.alpha = get<double>(d, "alpha");
    if (d.contains("beta")) cfg.dgp.beta = get<double>(d, "beta");
    if (d.contains("d_m")) cfg.dgp.d_m = get<Index>(d, "d_m");
  }
  if (j.contains("pair")) {
    const auto& p = j.at("pair");
    cfg.pair = {get<double>(p, "t"), get<double>(p, "t_prime")};
  }
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("parallelism")) cfg.parallelism = get<int>(j, "parallelism");
  if (j.contains("output")) cfg.output = get<std::string>(j, "output");
}

void validate(const RunConfig& cfg) {
  if (!(cfg.grid.step > 0.0)) throw ConfigError("grid step must be positive");
  if (cfg.grid.min > cfg.grid.max) throw ConfigError("grid min must not exceed grid max");
  if (!std::isfinite(cfg.t_prime_ref)) throw ConfigError("t_prime must be finite");
  if (cfg.estimators.empty()) throw ConfigError("no estimator selected");
  if (cfg.estimator.folds < 1) throw ConfigError("folds must be at least 1");
  if (!(cfg.inference.alpha > 0.0 && cfg.inference.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.inference.bootstrap_reps < 2) throw ConfigError("bootstrap_reps must be at least 2");
  if (!(cfg.estimator.bandwidth.epsilon > 0.0 && cfg.estimator.bandwidth.epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1)");
  }
  if (!(cfg.estimator.bandwidth.scott_c > 0.0)) throw ConfigError("scott_c must be positive");
  if (cfg.estimator.bandwidth.mode == BandwidthMode::Fixed && !(cfg.estimator.bandwidth.fixed > 0.0)) {
    throw ConfigError("fixed bandwidth must be positive");
  }
  const auto& nc = cfg.estimator.nuisance;
  if (!(nc.density_floor > 0.0)) throw ConfigError("density_floor must be positive");
  if (nc.ridge_lambda && !(*nc.ridge_lambda > 0.0)) throw ConfigError("ridge_lambda must be positive");
  if (nc.lengthscale && !(*nc.lengthscale > 0.0)) throw ConfigError("lengthscale must be positive");
  if (nc.gcv_grid.empty()) throw ConfigError("gcv_grid must not be empty");
  for (double l : nc.gcv_grid) {
    if (!(l > 0.0)) throw ConfigError("gcv_grid values must be positive");
  }
  for (Index n : cfg.sizes) {
    if (n < 1) throw ConfigError("sample sizes must be positive");
  }
  if (cfg.dgp.d_m < 1) throw ConfigError("dgp.d_m must be at least 1");
  if (cfg.parallelism < 0) throw ConfigError("parallelism must be non-negative");
}

}  // namespace medml::cli
