#include "spectrum/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "spectrum/errors.hpp"

namespace spectrum::market {

namespace {

constexpr double kShareTolerance = 1e-9;

void require_non_negative(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0)
    throw ValidationError(std::string(what) + " must be a finite non-negative number");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record. Double-quoted fields may contain commas; a
// doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string quote_label(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(LicensingMethod m) {
  switch (m) {
    case LicensingMethod::administrative: return "administrative";
    case LicensingMethod::smr_auction: return "smr_auction";
    case LicensingMethod::sealed_bid_auction: return "sealed_bid_auction";
    case LicensingMethod::beauty_contest: return "beauty_contest";
  }
  return "administrative";
}

LicensingMethod licensing_method_from_string(std::string_view s) {
  for (auto m : {LicensingMethod::administrative, LicensingMethod::smr_auction,
                 LicensingMethod::sealed_bid_auction, LicensingMethod::beauty_contest})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown licensing method '" + std::string(s) + "'");
}

void LicenseRegime::validate() const {
  require_non_negative(initial_payment, "initial payment");
  require_non_negative(recurring_annual_fee, "recurring annual fee");
  if (horizon_years < 1) throw ValidationError("horizon must be at least one year");
  if (subscribers && *subscribers <= 0) throw ValidationError("subscriber count must be positive");
}

double LicenseRegime::total_cost() const {
  return total_cost_horizon(initial_payment, recurring_annual_fee, horizon_years);
}

std::optional<double> LicenseRegime::fee_per_subscriber_usd() const {
  if (!subscribers) return std::nullopt;
  return fee_per_subscriber(total_cost() * 1000.0, static_cast<double>(*subscribers));
}

double total_cost_horizon(double initial, double recurring, int years) {
  require_non_negative(initial, "initial payment");
  require_non_negative(recurring, "recurring fee");
  if (years < 0) throw ValidationError("years must be non-negative");
  return initial + static_cast<double>(years) * recurring;
}

double fee_per_subscriber(double total, double subscribers) {
  require_non_negative(total, "total fee");
  if (!(subscribers > 0.0)) throw DomainError("subscriber count must be positive");
  return total / subscribers;
}

double annuitize(double upfront, double rate, int years) {
  require_non_negative(upfront, "upfront payment");
  require_non_negative(rate, "interest rate");
  if (years < 1) throw DomainError("annuity needs at least one payment period");
  const double t = static_cast<double>(years);
  if (rate == 0.0) return upfront / t;
  // -expm1(-T log1p(r)) = 1 - (1+r)^-T without cancellation for small r.
  return upfront * rate / -std::expm1(-t * std::log1p(rate));
}

double hhi(std::span<const double> shares) {
  if (shares.empty()) throw ValidationError("hhi: no market shares");
  double total = 0.0;
  double points = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("hhi: share outside [0, 1]");
    total += s;
    points += (100.0 * s) * (100.0 * s);
  }
  if (std::fabs(total - 1.0) > kShareTolerance)
    throw ValidationError("hhi: shares sum to " + std::to_string(total) + ", expected 1");
  return points;
}

// ---------------------------------------------------------------------------

double MarketObservation::get(std::string_view name) const {
  if (name == "qS") return qS;
  if (name == "pW") return pW;
  if (name == "CL") return CL;
  if (name == "COMP") return COMP;
  if (name == "POPD") return POPD;
  if (name == "W") return W;
  if (name == "pF") return pF;
  if (name == "INC") return INC;
  if (name == "TDF") return TDF;
  throw ValidationError("unknown variable '" + std::string(name) + "'");
}

void MarketObservation::set(std::string_view name, double value) {
  if (name == "qS") qS = value;
  else if (name == "pW") pW = value;
  else if (name == "CL") CL = value;
  else if (name == "COMP") COMP = value;
  else if (name == "POPD") POPD = value;
  else if (name == "W") W = value;
  else if (name == "pF") pF = value;
  else if (name == "INC") INC = value;
  else if (name == "TDF") TDF = value;
  else throw ValidationError("unknown variable '" + std::string(name) + "'");
}

void validate_observation(const MarketObservation& obs, DomainCheck check) {
  for (auto name : kVariables)
    if (!std::isfinite(obs.get(name)))
      throw ValidationError(std::string(name) + " is not finite");
  if (check == DomainCheck::finite_only) return;
  auto fail = [](std::string_view name, const char* rule) {
    throw ValidationError(std::string(name) + " " + rule);
  };
  if (!(obs.qS > 0.0 && obs.qS <= 1.0)) fail("qS", "must lie in (0, 1]");
  if (!(obs.CL >= 0.0)) fail("CL", "must be non-negative");
  if (!(obs.COMP > 0.0 && obs.COMP <= 10000.0)) fail("COMP", "must lie in (0, 10000]");
  if (!(obs.POPD > 0.0)) fail("POPD", "must be positive");
  if (!(obs.TDF > 0.0 && obs.TDF <= 100.0)) fail("TDF", "must lie in (0, 100]");
}

Dataset::Dataset(std::vector<MarketObservation> observations, std::vector<std::string> labels,
                 DomainCheck check)
    : observations_(std::move(observations)), labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != observations_.size())
    throw ValidationError("label count does not match observation count");
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    try {
      validate_observation(observations_[i], check);
    } catch (const ValidationError& e) {
      throw ValidationError("observation " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

linalg::Vector Dataset::column(std::string_view name) const {
  linalg::Vector v(static_cast<Eigen::Index>(observations_.size()));
  for (std::size_t i = 0; i < observations_.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = observations_[i].get(name);
  return v;
}

Table Dataset::to_table() const {
  Table t;
  for (auto name : kVariables) t.add_column(std::string(name), column(name));
  return t;
}

Dataset load_dataset(std::istream& in, DomainCheck check) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw LoadError("missing header row");

  // Map each CSV column to a variable, or to the label column.
  std::vector<int> slot(header.size(), -1);
  int label_slot = -1;
  std::vector<bool> seen(kVariables.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == kLabelColumn) {
      label_slot = static_cast<int>(c);
      continue;
    }
    const auto it = std::find(kVariables.begin(), kVariables.end(), header[c]);
    if (it == kVariables.end()) throw LoadError("unknown column", row, header[c]);
    const auto v = static_cast<std::size_t>(it - kVariables.begin());
    if (seen[v]) throw LoadError("duplicate column", row, header[c]);
    seen[v] = true;
    slot[c] = static_cast<int>(v);
  }
  for (std::size_t v = 0; v < kVariables.size(); ++v)
    if (!seen[v]) throw LoadError("missing column", row, std::string(kVariables[v]));

  std::vector<MarketObservation> obs;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw LoadError("expected " + std::to_string(header.size()) + " fields, found " +
                          std::to_string(cells.size()),
                      row);
    MarketObservation o;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == label_slot) {
        labels.push_back(cells[c]);
        continue;
      }
      const auto name = kVariables[static_cast<std::size_t>(slot[c])];
      const auto value = parse_number(cells[c]);
      if (!value) {
        throw LoadError(cells[c].empty() ? "missing value" : "non-numeric value '" + cells[c] + "'",
                        row, std::string(name));
      }
      o.set(name, *value);
    }
    try {
      validate_observation(o, check);
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      throw LoadError("validation failed: " + msg, row, msg.substr(0, msg.find(' ')));
    }
    obs.push_back(o);
  }
  if (obs.empty()) throw LoadError("no observations");
  return Dataset(std::move(obs), std::move(labels), check);
}

Dataset load_dataset_file(const std::string& path, DomainCheck check) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  return load_dataset(in, check);
}

void save_dataset(std::ostream& out, const Dataset& data) {
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (data.has_labels()) out << kLabelColumn << ',';
  for (std::size_t v = 0; v < kVariables.size(); ++v) out << (v ? "," : "") << kVariables[v];
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.has_labels()) out << quote_label(data.labels()[i]) << ',';
    const auto& o = data.observations()[i];
    for (std::size_t v = 0; v < kVariables.size(); ++v) out << (v ? "," : "") << o.get(kVariables[v]);
    out << '\n';
  }
  out.precision(old_precision);
}

void save_dataset_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write '" + path + "'");
  save_dataset(out, data);
}

// ---------------------------------------------------------------------------

double VariableSummary::sd_or_throw() const {
  if (!sd) throw InsufficientDataError("standard deviation of '" + name + "' needs at least 2 observations");
  return *sd;
}

VariableSummary summarize(std::string name, std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("no observations for '" + name + "'");
  VariableSummary s;
  s.name = std::move(name);
  s.count = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  // Rounding can push the mean of a near-constant column just outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  if (values.size() >= 2) {
    if (s.min == s.max) {
      s.sd = 0.0;
    } else {
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.sd = std::sqrt(ss / (n - 1.0));
    }
  }
  return s;
}

SummaryStats summary_stats(const Table& table) {
  SummaryStats out;
  for (const auto& name : table.names()) {
    const auto& col = table.column(name);
    out.push_back(summarize(name, std::span<const double>(col.data(), static_cast<std::size_t>(col.size()))));
  }
  return out;
}

SummaryStats summary_stats(const Dataset& data) { return summary_stats(data.to_table()); }

double CorrelationMatrix::at(std::string_view a, std::string_view b) const {
  const auto ia = std::find(names.begin(), names.end(), a);
  const auto ib = std::find(names.begin(), names.end(), b);
  if (ia == names.end() || ib == names.end())
    throw ValidationError("unknown variable in correlation lookup");
  return values(ia - names.begin(), ib - names.begin());
}

CorrelationMatrix correlation(const Table& table) {
  if (table.rows() < 3) throw InsufficientDataError("correlation needs at least 3 observations");
  const auto k = static_cast<Eigen::Index>(table.cols());
  const auto n = table.rows();
  linalg::Matrix centered(n, k);
  std::vector<bool> constant(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& col = table.column(table.names()[static_cast<std::size_t>(j)]);
    constant[static_cast<std::size_t>(j)] = col.maxCoeff() == col.minCoeff();
    centered.col(j) = col.array() - col.mean();
    const double nrm = centered.col(j).norm();
    if (nrm > 0.0) centered.col(j) /= nrm;
  }
  CorrelationMatrix out{table.names(), centered.transpose() * centered};
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (constant[static_cast<std::size_t>(i)] || constant[static_cast<std::size_t>(j)]) {
        out.values(i, j) = std::numeric_limits<double>::quiet_NaN();
      } else if (i == j) {
        out.values(i, j) = 1.0;
      } else {
        out.values(i, j) = std::clamp(out.values(i, j), -1.0, 1.0);
      }
    }
  }
  // Symmetrize exactly.
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) out.values(j, i) = out.values(i, j);
  return out;
}

CorrelationMatrix correlation(const Dataset& data) { return correlation(data.to_table()); }

}  // namespace spectrum::market
