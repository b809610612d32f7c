#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spectrum/linalg.hpp"

namespace spectrum {

/// Column-oriented numeric table addressed by variable name.
class Table {
 public:
  Table() = default;

  /// Adds a column. All columns must have the same length.
  void add_column(std::string name, linalg::Vector values);

  bool has(std::string_view name) const;
  const linalg::Vector& column(std::string_view name) const;
  linalg::Vector& column(std::string_view name);

  const std::vector<std::string>& names() const noexcept { return names_; }
  Eigen::Index rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  std::size_t cols() const noexcept { return columns_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<linalg::Vector> columns_;
};

}  // namespace spectrum
