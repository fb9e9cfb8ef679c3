#pragma once

#include <stdexcept>
#include <string>

namespace medml {

// Base of every error raised by the library. The CLI maps the subclasses to
// exit codes: ConfigError/ArgumentError -> 2, DataError -> 3,
// NumericalError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  explicit SchemaError(const std::string& column)
      : DataError("schema error: column '" + column + "' not found"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("parse error at data row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class EmptyDataError : public DataError {
 public:
  using DataError::DataError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// A nuisance sub-model failed; the message names the component.
class FitError : public NumericalError {
 public:
  FitError(std::string component, const std::string& what)
      : NumericalError(component + ": " + what), component_(std::move(component)) {}
  const std::string& component() const { return component_; }

 private:
  std::string component_;
};

}  // namespace medml
