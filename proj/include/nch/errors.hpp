#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fields or kernels defined on different grids were combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its domain (e.g. a non-zero-mean field
/// passed to the inverse Laplacian).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or scheme parameters.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& message, int line = 0)
      : Error(format(key, message, line)), key_(key), message_(message), line_(line) {}

  const std::string& key() const { return key_; }
  /// The message without the key/line prefix.
  const std::string& message() const { return message_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, const std::string& message, int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "'" + key + "': ";
    return out + message;
  }

  std::string key_;
  std::string message_;
  int line_ = 0;
};

/// A two-step scheme was advanced without the required history.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Step rejected because the solvability/stability check failed under the
/// enforce policy.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& message, double margin)
      : Error(message), margin_(margin) {}
  double margin() const { return margin_; }

 private:
  double margin_;
};

/// Nonlinear or linear solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, std::vector<double> residual_history)
      : Error(message), history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const { return history_; }
  double last_residual() const { return history_.empty() ? 0.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

/// Unreadable, truncated or malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nch
