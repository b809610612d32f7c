#pragma once

// JSON encodings of the configuration files and results exchanged by the
// command-line tool and the Python bindings.

#include <json.hpp>

#include <string>
#include <vector>

#include "spectrum/econometrics.hpp"
#include "spectrum/equilibrium.hpp"
#include "spectrum/market_data.hpp"
#include "spectrum/montecarlo.hpp"
#include "spectrum/smra_auction.hpp"

namespace spectrum::json_io {

using Json = nlohmann::json;

/// Parses a file, throwing LoadError with the file name and the parser's
/// byte position on malformed input.
Json read_file(const std::string& path);
void write_file(const std::string& path, const Json& j);

std::vector<market::LicenseRegime> regimes_from_json(const Json& j);
Json to_json(const market::LicenseRegime& r);

auction::AuctionConfig auction_config_from_json(const Json& j);
std::vector<auction::Bidder> bidders_from_json(const Json& j, std::size_t license_count);
Json to_json(const auction::AuctionOutcome& outcome, bool include_trace);

equilibrium::StructuralParameters parameters_from_json(const Json& j);
Json to_json(const equilibrium::StructuralParameters& p);
equilibrium::ExogenousProfile profile_from_json(const Json& j);
Json to_json(const equilibrium::ExogenousProfile& x);
Json to_json(const equilibrium::EquilibriumPoint& e);
Json to_json(const equilibrium::ReducedForm& rf);

econometrics::SystemSpec system_from_json(const Json& j);
Json to_json(const econometrics::SystemSpec& s);
Json to_json(const econometrics::EstimationResult& r);
Json to_json(const std::vector<econometrics::IdentificationStatus>& s);

montecarlo::MomentTarget targets_from_json(const Json& j);
Json to_json(const montecarlo::MomentTarget& t);
Json to_json(const montecarlo::ExperimentReport& r);
Json to_json(const montecarlo::HypothesisReport& h);

Json to_json(const market::SummaryStats& s);
Json to_json(const market::CorrelationMatrix& c);

}  // namespace spectrum::json_io
