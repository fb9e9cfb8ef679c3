#include "medml/core/dataset.hpp"

#include "medml/core/errors.hpp"
#include "medml/core/text_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace medml {

Dataset::Dataset(Eigen::VectorXd y, Eigen::VectorXd t, Eigen::MatrixXd m, Eigen::MatrixXd x)
    : y_(std::move(y)), t_(std::move(t)), m_(std::move(m)), x_(std::move(x)) {
  const Index n = y_.size();
  if (n < 1) throw EmptyDataError("dataset has no rows");
  if (t_.size() != n || m_.rows() != n || x_.rows() != n) {
    throw DataError("dataset containers disagree on the row count");
  }
  if (m_.cols() < 1) throw DataError("dataset needs at least one mediator column");
  if (x_.cols() < 1) throw DataError("dataset needs at least one covariate column");
  if (!y_.allFinite() || !t_.allFinite() || !m_.allFinite() || !x_.allFinite()) {
    throw DataError("dataset contains non-finite entries");
  }
}

Eigen::MatrixXd Dataset::xm() const {
  Eigen::MatrixXd out(n(), d_x() + d_m());
  out << x_, m_;
  return out;
}

Observation Dataset::row(Index i) const { return {y_(i), t_(i), m_.row(i), x_.row(i)}; }

Dataset Dataset::rows(std::span<const Index> idx) const {
  const auto k = static_cast<Index>(idx.size());
  Eigen::VectorXd y(k), t(k);
  Eigen::MatrixXd m(k, d_m()), x(k, d_x());
  for (Index r = 0; r < k; ++r) {
    const Index i = idx[static_cast<std::size_t>(r)];
    y(r) = y_(i);
    t(r) = t_(i);
    m.row(r) = m_.row(i);
    x.row(r) = x_.row(i);
  }
  return Dataset(std::move(y), std::move(t), std::move(m), std::move(x));
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Columns named prefix_1, prefix_2, ... sorted by their numeric suffix.
std::vector<std::string> canonical_columns(const std::vector<std::string>& header,
                                           const std::string& prefix) {
  std::vector<std::pair<long, std::string>> found;
  for (const auto& name : header) {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) continue;
    long idx = 0;
    const char* first = name.data() + prefix.size();
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec == std::errc() && ptr == last && idx >= 1) found.emplace_back(idx, name);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [idx, name] : found) out.push_back(name);
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  if (cell.empty()) throw ParseError(row, "missing value in column '" + column + "'");
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(row, "non-numeric value '" + cell + "' in column '" + column + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(row, "non-finite value '" + cell + "' in column '" + column + "'");
  }
  return value;
}

}  // namespace

Dataset parse_dataset(const std::string& csv_text, const ColumnSchema& schema) {
  std::istringstream in(csv_text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw EmptyDataError("empty file: no header row");
  if (!header.front().empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header.front().erase(0, 3);
  }

  std::map<std::string, std::size_t> position;
  for (std::size_t c = 0; c < header.size(); ++c) position.emplace(header[c], c);
  auto column_of = [&](const std::string& name) {
    auto it = position.find(name);
    if (it == position.end()) throw SchemaError(name);
    return it->second;
  };

  const auto m_names = schema.m.empty() ? canonical_columns(header, "m_") : schema.m;
  const auto x_names = schema.x.empty() ? canonical_columns(header, "x_") : schema.x;
  if (m_names.empty()) throw SchemaError("m_1");
  if (x_names.empty()) throw SchemaError("x_1");

  const std::size_t y_col = column_of(schema.y);
  const std::size_t t_col = column_of(schema.t);
  std::vector<std::size_t> m_cols, x_cols;
  for (const auto& name : m_names) m_cols.push_back(column_of(name));
  for (const auto& name : x_names) x_cols.push_back(column_of(name));

  std::vector<double> y, t, m, x;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, "expected " + std::to_string(header.size()) + " cells, found " +
                                std::to_string(cells.size()));
    }
    y.push_back(parse_cell(cells[y_col], row, schema.y));
    t.push_back(parse_cell(cells[t_col], row, schema.t));
    for (std::size_t j = 0; j < m_cols.size(); ++j) m.push_back(parse_cell(cells[m_cols[j]], row, m_names[j]));
    for (std::size_t j = 0; j < x_cols.size(); ++j) x.push_back(parse_cell(cells[x_cols[j]], row, x_names[j]));
  }
  if (row == 0) throw EmptyDataError("empty file: header but no data rows");

  const auto n = static_cast<Index>(row);
  const auto dm = static_cast<Index>(m_cols.size());
  const auto dx = static_cast<Index>(x_cols.size());
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Dataset(Eigen::Map<Eigen::VectorXd>(y.data(), n), Eigen::Map<Eigen::VectorXd>(t.data(), n),
                 Eigen::Map<RowMajor>(m.data(), n, dm), Eigen::Map<RowMajor>(x.data(), n, dx));
}

Dataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), schema);
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, ptr);
}

}  // namespace

std::string format_dataset(const Dataset& data) {
  std::string out = "y,t";
  for (Index j = 0; j < data.d_m(); ++j) out += ",m_" + std::to_string(j + 1);
  for (Index j = 0; j < data.d_x(); ++j) out += ",x_" + std::to_string(j + 1);
  out += '\n';
  for (Index i = 0; i < data.n(); ++i) {
    append_number(out, data.y()(i));
    out += ',';
    append_number(out, data.t()(i));
    for (Index j = 0; j < data.d_m(); ++j) {
      out += ',';
      append_number(out, data.m()(i, j));
    }
    for (Index j = 0; j < data.d_x(); ++j) {
      out += ',';
      append_number(out, data.x()(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_text_atomic(path, format_dataset(data));
}

}  // namespace medml
