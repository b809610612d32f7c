#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace spectrum {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

/// Raised while reading tabular or JSON input. Row is 1-based and counts
/// the header as row 1; column is the offending column name when known.
class LoadError : public Error {
 public:
  LoadError(const std::string& message, std::optional<std::size_t> row = std::nullopt,
            std::optional<std::string> column = std::nullopt)
      : Error("load", decorate(message, row, column)), row_(row), column_(std::move(column)) {}

  std::optional<std::size_t> row() const noexcept { return row_; }
  const std::optional<std::string>& column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& message, std::optional<std::size_t> row,
                              const std::optional<std::string>& column) {
    std::string out = message;
    if (row) out += " (row " + std::to_string(*row);
    if (column) out += std::string(row ? ", " : " (") + "column " + *column;
    if (row || column) out += ")";
    return out;
  }

  std::optional<std::size_t> row_;
  std::optional<std::string> column_;
};

class SingularError : public Error {
 public:
  SingularError(const std::string& message, double condition_estimate)
      : Error("singular", message), condition_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& message) : Error("insufficient_data", message) {}
};

class IdentificationError : public Error {
 public:
  explicit IdentificationError(const std::string& message) : Error("identification", message) {}
};

class DegenerateInstrumentError : public Error {
 public:
  explicit DegenerateInstrumentError(const std::string& message)
      : Error("degenerate_instrument", message) {}
};

class DegenerateModelError : public Error {
 public:
  explicit DegenerateModelError(const std::string& message) : Error("degenerate_model", message) {}
};

class InfeasibleTargetError : public Error {
 public:
  explicit InfeasibleTargetError(const std::string& message) : Error("infeasible_target", message) {}
};

}  // namespace spectrum
