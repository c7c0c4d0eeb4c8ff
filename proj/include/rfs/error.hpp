#pragma once

#include <stdexcept>
#include <string>

namespace rfs {

/// Process exit codes used by the command line front end.
enum class ExitCode : int {
  Success = 0,
  ConfigError = 2,
  DataError = 3,
  SolverFailure = 4,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const noexcept { return ExitCode::DataError; }
};

/// Invalid configuration or hyperparameters (exit 2).
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::ConfigError; }
};

/// A hyperparameter outside its validity domain, e.g. eta above eta_max.
class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed or inconsistent input data (exit 3).
class DataError : public Error {
 public:
  using Error::Error;
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(const std::string& column)
      : DataError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A metric whose defining rates or subgroup means do not exist.
class UndefinedMetric : public DataError {
 public:
  using DataError::DataError;
};

/// Conic solver did not reach an optimal certified solution (exit 4).
class SolverError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::SolverFailure; }
};

}  // namespace rfs
