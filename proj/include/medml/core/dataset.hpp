#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace medml {

using Index = Eigen::Index;

// One observation (Y, T, M, X).
struct Observation {
  double y = 0.0;
  double t = 0.0;
  Eigen::RowVectorXd m;
  Eigen::RowVectorXd x;
};

// Observed sample with a scalar treatment. All containers share the row
// count, every entry is finite, and d_M, d_X >= 1.
class Dataset {
 public:
  Dataset() = default;
  // Validates the invariants; throws DataError on violation.
  Dataset(Eigen::VectorXd y, Eigen::VectorXd t, Eigen::MatrixXd m, Eigen::MatrixXd x);

  Index n() const { return y_.size(); }
  Index d_m() const { return m_.cols(); }
  Index d_x() const { return x_.cols(); }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::MatrixXd& m() const { return m_; }
  const Eigen::MatrixXd& x() const { return x_; }

  // [X M], the regressors of f_{T|X,M}.
  Eigen::MatrixXd xm() const;

  Observation row(Index i) const;
  Dataset rows(std::span<const Index> idx) const;

 private:
  Eigen::VectorXd y_;
  Eigen::VectorXd t_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd x_;
};

// Maps dataset roles to CSV column names. Empty m/x lists mean "all columns
// named m_1, m_2, ... (resp. x_1, ...)" in index order.
struct ColumnSchema {
  std::string y = "y";
  std::string t = "t";
  std::vector<std::string> m;
  std::vector<std::string> x;
};

Dataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema = {});
Dataset parse_dataset(const std::string& csv_text, const ColumnSchema& schema = {});

// Canonical header y,t,m_1..,x_1.. with 17 significant digits per cell.
std::string format_dataset(const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace medml
