#pragma once

// Static SVG rendering of model outputs. Output depends only on the
// input values, so identical inputs give byte-identical files.

#include <iosfwd>
#include <string>
#include <vector>

#include "spectrum/table.hpp"

namespace spectrum::chart {

enum class Kind { supply_demand, diffusion, mc_histogram };
Kind kind_from_string(const std::string& s);

/// Numeric CSV with a header row. Throws LoadError on an empty body or a
/// non-numeric cell.
Table read_series(std::istream& in);
Table read_series_file(const std::string& path);

/// Columns p, supply_base, supply_fee, demand (quantities at each price).
/// Draws both supply curves, the demand curve, and marks each crossing.
std::string render_supply_demand(const Table& series);

/// Columns t, q (p and g optional). One polyline per path.
std::string render_diffusion(const std::vector<Table>& paths, const std::vector<std::string>& labels);

/// Histogram of one column of a per-replication estimates file.
std::string render_histogram(const Table& series, const std::string& column, int bins = 20);

/// Crossing of two curves sampled on a common grid, by linear
/// interpolation of their difference. Returns false when they never cross.
bool find_crossing(const linalg::Vector& grid, const linalg::Vector& a, const linalg::Vector& b, double& at_grid,
                   double& at_value);

}  // namespace spectrum::chart
