#pragma once

#include "medml/core/dataset.hpp"
#include "medml/estimators/types.hpp"
#include "medml/inference/inference.hpp"
#include "medml/simulation/dgp.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace medml::cli {

struct GridSpec {
  double min = -1.5;
  double max = 1.5;
  double step = 0.1;

  std::vector<double> values() const;
};

// "min:max:step"; ConfigError on malformed input.
GridSpec parse_grid_spec(const std::string& text);

enum class StubMode { None, Oracle, Constant };

// Everything a subcommand needs. Values come from a preset, then a JSON
// config file, then command-line flags, each overriding the previous.
struct RunConfig {
  std::optional<std::string> data_path;
  ColumnSchema schema;
  std::vector<EstimatorId> estimators{EstimatorId::DmlTp};
  EstimatorConfig estimator;
  GridSpec grid;
  double t_prime_ref = 0.0;
  InferenceConfig inference;
  int reps = 100;
  std::vector<Index> sizes{1000};
  DgpConfig dgp;
  TreatmentPair pair{1.0, 0.0};
  std::uint64_t seed = 0;
  int parallelism = 0;  // 0: MEDML_THREADS, else 1
  std::string output;   // file (simulate, coverage, bandwidth) or directory (estimate)
  StubMode stub = StubMode::None;
};

// Known presets: paper-table2, paper-table3, real-data.
void apply_preset(RunConfig& cfg, const std::string& name);

// Applies the keys present in `j`; unknown keys and wrong types are ConfigError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

// Checks the invariants shared by all commands.
void validate(const RunConfig& cfg);

// Finite decimal / integer; ConfigError naming `what` otherwise.
double parse_number(const std::string& text, const std::string& what);
long long parse_integer(const std::string& text, const std::string& what);

BandwidthChoice parse_bandwidth(const std::string& text, BandwidthChoice base);
std::vector<EstimatorId> parse_estimators(const std::string& text);
std::vector<Index> parse_sizes(const std::string& text);
StubMode parse_stub(const std::string& text);

}  // namespace medml::cli
