#include "spectrum/table.hpp"

#include <algorithm>
#include <utility>

#include "spectrum/errors.hpp"

namespace spectrum {

void Table::add_column(std::string name, linalg::Vector values) {
  if (has(name)) throw ValidationError("duplicate column '" + name + "'");
  if (!columns_.empty() && values.size() != rows())
    throw ValidationError("column '" + name + "' has " + std::to_string(values.size()) +
                          " rows, expected " + std::to_string(rows()));
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

bool Table::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const linalg::Vector& Table::column(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("unknown variable '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

linalg::Vector& Table::column(std::string_view name) {
  return const_cast<linalg::Vector&>(std::as_const(*this).column(name));
}

}  // namespace spectrum
