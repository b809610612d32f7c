#pragma once

// Licensing-fee arithmetic, market concentration, and the cross-country
// estimation dataset with its descriptive statistics.
//
// Monetary amounts are plain doubles. Fee totals are carried in thousands
// of USD, matching the licensing tables they are transcribed from;
// per-subscriber values are formed by callers in whatever unit they pass.

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spectrum/linalg.hpp"
#include "spectrum/table.hpp"

namespace spectrum::market {

enum class LicensingMethod { administrative, smr_auction, sealed_bid_auction, beauty_contest };

std::string_view to_string(LicensingMethod m);
LicensingMethod licensing_method_from_string(std::string_view s);

struct LicenseRegime {
  std::string country;
  double initial_payment = 0.0;       // thousands of USD
  double recurring_annual_fee = 0.0;  // thousands of USD per year
  int horizon_years = 5;
  std::optional<std::int64_t> subscribers;
  LicensingMethod method = LicensingMethod::administrative;

  /// Throws ValidationError when an invariant is violated.
  void validate() const;

  double total_cost() const;
  /// Fee per subscriber in USD (total converted from thousands).
  std::optional<double> fee_per_subscriber_usd() const;
};

/// initial + years * recurring.
double total_cost_horizon(double initial, double recurring, int years);

double fee_per_subscriber(double total, double subscribers);

/// Level payment over `years` periods whose present value at `rate`
/// equals `upfront`.
double annuitize(double upfront, double rate, int years);

/// Herfindahl-Hirschman index in points (0..10000) of fractional shares.
double hhi(std::span<const double> shares);

// ---------------------------------------------------------------------------
// Estimation dataset

inline constexpr std::array<std::string_view, 9> kVariables = {
    "qS", "pW", "CL", "COMP", "POPD", "W", "pF", "INC", "TDF"};

/// Optional label column accepted by the CSV reader.
inline constexpr std::string_view kLabelColumn = "country";

struct MarketObservation {
  double qS = 0.0;    // penetration, subscribers per capita
  double pW = 0.0;    // wireless basket, per year
  double CL = 0.0;    // licence fee per subscriber
  double COMP = 0.0;  // HHI points
  double POPD = 0.0;  // persons per km^2
  double W = 0.0;     // wage-level index
  double pF = 0.0;    // fixed basket, per year
  double INC = 0.0;   // GDP per capita (PPP)
  double TDF = 0.0;   // fixed lines per 100 inhabitants

  double get(std::string_view name) const;
  void set(std::string_view name, double value);
};

/// strict enforces the observation range invariants; finite_only admits
/// synthetic rows (e.g. normal draws of a fee variable below zero) and
/// only rejects NaN/inf.
enum class DomainCheck { strict, finite_only };

/// Throws ValidationError naming the first offending variable.
void validate_observation(const MarketObservation& obs, DomainCheck check = DomainCheck::strict);

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<MarketObservation> observations, std::vector<std::string> labels = {},
          DomainCheck check = DomainCheck::strict);

  std::size_t size() const noexcept { return observations_.size(); }
  bool empty() const noexcept { return observations_.empty(); }
  const std::vector<MarketObservation>& observations() const noexcept { return observations_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool has_labels() const noexcept { return !labels_.empty(); }

  linalg::Vector column(std::string_view name) const;
  Table to_table() const;

 private:
  std::vector<MarketObservation> observations_;
  std::vector<std::string> labels_;
};

/// Reads the canonical CSV layout: one header row naming every variable
/// in kVariables (any order, optional `country` label column), then one
/// numeric row per observation. Errors name the row and column.
Dataset load_dataset(std::istream& in, DomainCheck check = DomainCheck::strict);
Dataset load_dataset_file(const std::string& path, DomainCheck check = DomainCheck::strict);

/// Writes the canonical CSV layout with round-trip precision.
void save_dataset(std::ostream& out, const Dataset& data);
void save_dataset_file(const std::string& path, const Dataset& data);

// ---------------------------------------------------------------------------
// Descriptive statistics

struct VariableSummary {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample (n-1) sd; empty when count < 2
  double min = 0.0;
  double max = 0.0;

  /// Sample sd, throwing InsufficientDataError when count < 2.
  double sd_or_throw() const;
};

using SummaryStats = std::vector<VariableSummary>;

VariableSummary summarize(std::string name, std::span<const double> values);
SummaryStats summary_stats(const Dataset& data);
SummaryStats summary_stats(const Table& table);

struct CorrelationMatrix {
  std::vector<std::string> names;
  linalg::Matrix values;  // NaN marks an undefined entry

  bool defined(Eigen::Index i, Eigen::Index j) const { return !std::isnan(values(i, j)); }
  double at(std::string_view a, std::string_view b) const;
};

/// Pearson correlations. Entries involving a constant column are NaN
/// (undefined) rather than 0, including the diagonal.
CorrelationMatrix correlation(const Table& table);
CorrelationMatrix correlation(const Dataset& data);

}  // namespace spectrum::market
