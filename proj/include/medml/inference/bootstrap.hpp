#pragma once

#include "medml/core/dataset.hpp"
#include "medml/core/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace medml {

// Linear-interpolation (type 7) sample quantile; sorts a copy.
double percentile(std::span<const double> values, double q);

// Nonparametric resample of size n with replacement.
std::vector<Index> resample_indices(Index n, RngStream& rng);

struct BootstrapSummary {
  // draws(r, k): statistic k on replication r; failed replications are dropped.
  Eigen::MatrixXd draws;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int failures = 0;
  int reps = 0;
};

// Replication r draws its resample from the stream (master seed, r); with
// more than 20% failed replications throws NumericalError. Replications run
// on `workers` threads and are merged by index.
using VectorStatistic = std::function<Eigen::VectorXd(const Dataset&)>;
BootstrapSummary bootstrap(const VectorStatistic& statistic, const Dataset& data, int reps, double alpha,
                           std::uint64_t master_seed, int workers = 1);

using ScalarStatistic = std::function<double(const Dataset&)>;
std::pair<double, double> bootstrap_ci(const ScalarStatistic& statistic, const Dataset& data, int reps,
                                       double alpha, std::uint64_t master_seed, int workers = 1);

}  // namespace medml
