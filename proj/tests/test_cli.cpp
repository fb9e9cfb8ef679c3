#include "medml/cli/commands.hpp"
#include "medml/cli/output.hpp"
#include "medml/cli/run_config.hpp"
#include "medml/core/dataset.hpp"
#include "medml/core/errors.hpp"
#include "medml/core/text_io.hpp"
#include "medml/simulation/dgp.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

using namespace medml;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "medml");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("medml_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_dgp_csv(const fs::path& dir, Index n, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  const auto path = dir / "data.csv";
  save_dataset(path, generate_dgp(cfg));
  return path;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("help exits zero and lists the flags") {
  CHECK(invoke({"--help"}).code == 0);
  for (const char* cmd : {"estimate", "simulate", "coverage", "bandwidth"}) {
    const auto r = invoke({cmd, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--seed") != std::string::npos);
    CHECK(r.out.find("--grid") != std::string::npos);
  }
  CHECK(invoke({"estimate", "--help"}).out.find("--data") != std::string::npos);
  CHECK(invoke({"coverage", "--help"}).out.find("--pair") != std::string::npos);
}

TEST_CASE("usage errors exit two") {
  const auto none = invoke({});
  CHECK(none.code == 2);
  const auto missing = invoke({"estimate"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--data") != std::string::npos);
  CHECK(missing.err.find("Usage") != std::string::npos);
  CHECK(invoke({"simulate", "--reps", "0", "--stub", "oracle"}).code == 2);
  CHECK(invoke({"coverage", "--alpha", "1.5", "--stub", "oracle"}).code == 2);
  CHECK(invoke({"simulate", "--estimators", "tmle", "--stub", "oracle"}).code == 2);
  CHECK(invoke({"simulate", "--grid", "1:0:0.1", "--stub", "oracle"}).code == 2);
  CHECK(invoke({"simulate", "--bogus"}).code == 2);
  CHECK(invoke({"bandwidth", "--bandwidth", "-1", "--stub", "constant"}).code == 2);
}

TEST_CASE("data problems exit three") {
  const auto dir = scratch("data_errors");
  CHECK(invoke({"estimate", "--data", (dir / "absent.csv").string(), "--out", (dir / "o").string()}).code == 3);
  const auto bad = dir / "bad.csv";
  write_text_atomic(bad, "y,t,m_1,x_1\n1,2,3,4\n1,oops,3,4\n");
  const auto r = invoke({"estimate", "--data", bad.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("row 2") != std::string::npos);
  const auto schema = invoke({"estimate", "--data", bad.string(), "--x", "age", "--out", (dir / "o").string()});
  CHECK(schema.code == 3);
  CHECK(schema.err.find("age") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o"));
}

TEST_CASE("estimate writes the result files") {
  const auto dir = scratch("estimate");
  const auto data = write_dgp_csv(dir, 300, 1);
  const auto r = invoke({"estimate", "--data", data.string(), "--grid", "-1.5:1.5:0.1", "--tprime", "0",
                         "--estimator", "dml", "--bandwidth", "scott", "--ci", "asymptotic", "--out",
                         (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto effects = lines_of(dir / "out" / "effects_dml.csv");
  REQUIRE(effects.size() == 32);
  CHECK(effects[0] == "t,direct,indirect,total");
  const auto inference = lines_of(dir / "out" / "inference_dml.csv");
  CHECK(inference[0] == "t,t_prime,eta_hat,v_hat,b_hat,h_used,ci_lower,ci_upper,ci_method,warnings");
  CHECK(inference.size() == 62);
  const auto pairs = lines_of(dir / "out" / "pairs.csv");
  CHECK(pairs.size() == 62);
  const auto hist = lines_of(dir / "out" / "histogram.csv");
  CHECK(hist[0] == "t,bin_lo,bin_hi,count");
  CHECK(hist.size() == 33);  // header, 31 bins, outside
  Index total = 0;
  for (std::size_t k = 1; k < hist.size(); ++k) total += std::stoll(split(hist[k]).back());
  CHECK(total == 300);
  CHECK(r.out.find("direct") != std::string::npos);
}

TEST_CASE("estimate with baselines and bootstrap bands") {
  const auto dir = scratch("estimate_all");
  const auto data = write_dgp_csv(dir, 150, 2);
  const auto r = invoke({"estimate", "--data", data.string(), "--grid", "-1:1:0.5", "--estimators",
                         "dml,dml-md,ipw,gcomp,ols", "--ci", "bootstrap", "--bootstrap-reps", "10", "-L", "2",
                         "--seed", "3", "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  for (const char* id : {"dml", "dml-md", "ipw", "gcomp", "ols"}) {
    const auto lines = lines_of(dir / "out" / (std::string("effects_") + id + ".csv"));
    CHECK(lines.size() == 6);
  }
  const auto dml = lines_of(dir / "out" / "effects_dml.csv");
  CHECK(dml[0] == "t,direct,indirect,total,ci_lo_direct,ci_hi_direct,ci_lo_indirect,ci_hi_indirect,ci_lo_total,"
                  "ci_hi_total");
  for (std::size_t k = 1; k < dml.size(); ++k) {
    const auto f = split(dml[k]);
    CHECK(std::stod(f[4]) <= std::stod(f[5]));
  }
  const auto inf = lines_of(dir / "out" / "inference_dml.csv");
  CHECK(split(inf[1])[8] == "bootstrap");
}

TEST_CASE("estimate is byte-identical across runs and worker counts") {
  const auto dir = scratch("determinism");
  const auto data = write_dgp_csv(dir, 200, 4);
  const std::vector<std::string> base{"estimate", "--data", data.string(), "--grid", "-1:1:0.25", "--estimators",
                                      "dml,ipw", "-L", "3", "--seed", "7", "--ci", "bootstrap", "--bootstrap-reps", "6"};
  auto with = [&](const std::string& out, const std::string& par) {
    auto args = base;
    args.insert(args.end(), {"--out", (dir / out).string(), "--parallelism", par});
    return invoke(args).code;
  };
  REQUIRE(with("a", "1") == 0);
  REQUIRE(with("b", "1") == 0);
  REQUIRE(with("c", "4") == 0);
  for (const char* f : {"effects_dml.csv", "effects_ipw.csv", "inference_dml.csv", "pairs.csv", "histogram.csv"}) {
    const auto a = read_text(dir / "a" / f);
    CHECK(a == read_text(dir / "b" / f));
    CHECK(a == read_text(dir / "c" / f));
  }
}

TEST_CASE("simulate with the oracle stub and the table preset") {
  const auto dir = scratch("simulate_preset");
  const auto out = dir / "sim.json";
  const auto r = invoke({"simulate", "--preset", "paper-table2", "--reps", "10", "--seed", "1", "--stub", "oracle",
                         "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(read_text(out));
  CHECK(j["results"].size() == 12);
  CHECK(j["config"]["sizes"] == nlohmann::json({500, 1000, 5000}));
  CHECK(j["config"]["grid"].size() == 31);
  for (const auto& cell : j["results"]) {
    CHECK(cell["direct"]["bias"].get<double>() <= 1e-15);
    CHECK(cell.contains("indirect"));
    CHECK(cell.contains("total"));
  }
  const auto csv = lines_of(dir / "sim.csv");
  CHECK(csv.size() == 1 + 4 * 3 * 3);
  CHECK(r.out.find("runtime") != std::string::npos);
}

TEST_CASE("a small real simulation finishes quickly") {
  const auto dir = scratch("simulate_small");
  const auto start = std::chrono::steady_clock::now();
  const auto r = invoke({"simulate", "--estimators", "dml", "--n", "500", "--reps", "2", "--out",
                         (dir / "s.json").string()});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  REQUIRE(r.code == 0);
  CHECK(seconds < 300.0);
  const auto j = nlohmann::json::parse(read_text(dir / "s.json"));
  REQUIRE(j["results"].size() == 1);
  CHECK(j["results"][0]["successes"] == 2);
  CHECK(std::isfinite(j["results"][0]["direct"]["rmse"].get<double>()));
}

TEST_CASE("simulate output does not depend on parallelism") {
  const auto dir = scratch("simulate_par");
  for (const char* p : {"1", "3"}) {
    REQUIRE(invoke({"simulate", "--estimators", "dml,ols", "--n", "120", "--reps", "3", "--grid", "-1:1:0.5",
                    "--seed", "9", "--parallelism", p, "--out", (dir / (std::string(p) + ".json")).string()})
                .code == 0);
  }
  CHECK(read_text(dir / "1.json") == read_text(dir / "3.json"));
  CHECK(read_text(dir / "1.csv") == read_text(dir / "3.csv"));
}

TEST_CASE("coverage with the oracle stub") {
  const auto dir = scratch("coverage");
  const auto r = invoke({"coverage", "--stub", "oracle", "--n", "100", "--reps", "10", "--out",
                         (dir / "c.json").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(read_text(dir / "c.json"));
  CHECK(j["coverage"] == 1.0);
  CHECK(j["n"] == 100);
  CHECK(j["reps"] == 10);
  CHECK(j["alpha"] == 0.05);
}

TEST_CASE("bandwidth diagnostics") {
  const auto dir = scratch("bandwidth");
  const auto stub = invoke({"bandwidth", "--stub", "constant", "--n", "200", "--out", (dir / "b.csv").string()});
  REQUIRE(stub.code == 0);
  const auto rows = lines_of(dir / "b.csv");
  REQUIRE(rows.size() == 32);
  CHECK(rows[0] == "t,t_prime,h_scott,b_hat,v_hat,h_amse,fallback_flag");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto f = split(rows[k]);
    CHECK(std::stod(f[3]) == 0.0);
    CHECK(f[5].empty());
    CHECK(f[6] == "1");
  }
  REQUIRE(invoke({"bandwidth", "--n", "1000", "--seed", "2", "--out", (dir / "real.csv").string()}).code == 0);
  const auto real = lines_of(dir / "real.csv");
  REQUIRE(real.size() == 32);
  for (std::size_t k = 1; k < real.size(); ++k) {
    const auto f = split(real[k]);
    if (f[6] == "0") {
      CHECK(std::stod(f[5]) > 0.0);
      CHECK(std::isfinite(std::stod(f[5])));
    }
  }
}

TEST_CASE("config file sits between preset and flags") {
  const auto dir = scratch("config");
  const auto cfg = dir / "cfg.json";
  write_text_atomic(cfg, R"({"preset": "paper-table2", "reps": 3, "sizes": [100], "estimators": ["ols"]})");
  REQUIRE(invoke({"simulate", "--config", cfg.string(), "--reps", "2", "--stub", "oracle", "--out",
                  (dir / "s.json").string()})
              .code == 0);
  const auto j = nlohmann::json::parse(read_text(dir / "s.json"));
  CHECK(j["config"]["reps"] == 2);
  CHECK(j["config"]["sizes"] == nlohmann::json({100}));
  CHECK(j["config"]["estimators"] == nlohmann::json({"ols"}));
  CHECK(j["config"]["grid"].size() == 31);

  write_text_atomic(cfg, R"({"reps": 3, "typo_key": 1})");
  const auto bad = invoke({"simulate", "--config", cfg.string(), "--stub", "oracle"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("typo_key") != std::string::npos);
  write_text_atomic(cfg, "{not json");
  CHECK(invoke({"simulate", "--config", cfg.string(), "--stub", "oracle"}).code == 2);
}

TEST_CASE("config values") {
  cli::RunConfig cfg;
  cli::apply_json(cfg, nlohmann::json::parse(R"({"ridge_lambda": "gcv", "lengthscale": 0.7, "bandwidth": 0.3,
                                                  "density_model": "kernel", "variant": "md", "folds": 2})"));
  CHECK_FALSE(cfg.estimator.nuisance.ridge_lambda.has_value());
  CHECK(*cfg.estimator.nuisance.lengthscale == 0.7);
  CHECK(cfg.estimator.bandwidth.mode == BandwidthMode::Fixed);
  CHECK(cfg.estimator.bandwidth.fixed == 0.3);
  CHECK(cfg.estimator.nuisance.density_model == DensityModelKind::Kernel);
  CHECK(cfg.estimator.folds == 2);
  CHECK_THROWS_AS(cli::apply_json(cfg, nlohmann::json::parse(R"({"folds": "two"})")), ConfigError);
  const auto g = cli::parse_grid_spec("-1.5:1.5:0.1");
  CHECK(g.values().size() == 31);
  CHECK_THROWS_AS(cli::parse_grid_spec("0:1"), ConfigError);
  CHECK_THROWS_AS(cli::parse_grid_spec("0:1:-0.1"), ConfigError);
  CHECK(cli::parse_sizes("500,1000,5000") == std::vector<Index>{500, 1000, 5000});
  CHECK_THROWS_AS(cli::parse_integer("3.5", "x"), ConfigError);
  CHECK_THROWS_AS(cli::parse_number("nan", "x"), ConfigError);
  CHECK_THROWS_AS(cli::apply_preset(cfg, "table9"), ConfigError);
  cli::RunConfig rd;
  cli::apply_preset(rd, "real-data");
  CHECK(rd.estimator.folds == 2);
}

TEST_CASE("histogram bins") {
  Eigen::VectorXd t(6);
  t << -1.04, -0.96, 0.0, 0.04, 0.99, 5.0;
  const auto bins = cli::treatment_histogram(t, cli::GridSpec{-1.0, 1.0, 1.0});
  REQUIRE(bins.size() == 3);
  CHECK(bins[0].count == 2);
  CHECK(bins[1].count == 2);
  CHECK(bins[2].count == 1);
  CHECK(bins[0].lower == doctest::Approx(-1.5));
  const auto csv = cli::format_histogram(bins, 6);
  CHECK(csv.find("outside") != std::string::npos);
}

#ifdef MEDML_TOOL_PATH
TEST_CASE("the installed tool reports exit codes") {
  const std::string tool = MEDML_TOOL_PATH;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(tool + " --help") == 0);
  CHECK(status(tool + " estimate") == 2);
  CHECK(status(tool + " estimate --data /nonexistent/file.csv") == 3);
}
#endif
