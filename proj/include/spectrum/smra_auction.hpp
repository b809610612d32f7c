#pragma once

// Simultaneous multiple-round ascending auction. All licenses are open
// at once; in each round every active bidder sees the standing high bids
// from the previous round and submits new bids simultaneously. The
// auction closes at the first round in which nobody bids.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spectrum::auction {

struct AuctionConfig {
  std::vector<std::string> licenses;
  double opening_price = 0.0;
  double increment = 1.0;
  double activity_fraction = 1.0;  // in (0, 1]
  int max_rounds = 1000;

  void validate() const;
};

struct Bidder {
  std::string id;
  std::map<std::string, double> valuations;  // missing license = 0
  int eligibility = 1;                       // licenses the bidder may be active on
  int demand_cap = 1;                        // most licenses the bidder wants

  double valuation(const std::string& license) const;
};

struct StandingBid {
  double price = 0.0;
  std::optional<std::size_t> bidder;  // index into the bidder list
};

struct AuctionState {
  int round = 0;
  std::vector<StandingBid> standing;  // per license, config order
  std::vector<int> eligibility;       // per bidder
};

struct Bid {
  std::size_t license = 0;
  double amount = 0.0;
};

/// Price a bidder must offer on `license` to become standing high.
double required_price(const AuctionState& state, const AuctionConfig& config, std::size_t license);

/// Bidding policy: (revealed state, config, the bidder, its index) -> new bids.
using Strategy = std::function<std::vector<Bid>(const AuctionState&, const AuctionConfig&,
                                                const Bidder&, std::size_t)>;

/// Myopic best response. Bids the minimum acceptable price on the
/// licenses with the largest surplus (valuation - required price) where
/// the bidder is not already standing high, stopping at its demand cap
/// and eligibility (standing-high licenses count against both). A
/// license is bid on only if its valuation is positive and covers the
/// required price.
std::vector<Bid> straightforward_bid(const AuctionState& state, const AuctionConfig& config,
                                     const Bidder& bidder, std::size_t self);

struct RoundRecord {
  int round = 0;
  std::size_t new_bids = 0;
  std::vector<StandingBid> standing;  // after the round's bids are resolved
  std::vector<int> eligibility;       // after the activity rule
};

struct AuctionOutcome {
  std::vector<std::string> licenses;
  std::vector<std::optional<std::string>> winners;  // nullopt = unsold
  std::vector<double> prices;                       // 0 for unsold licenses
  int rounds_used = 0;
  double revenue = 0.0;
  bool quiescent = false;  // false: max_rounds reached with bids still arriving
  AuctionState final_state;
  std::vector<RoundRecord> trace;
};

/// Runs the auction to quiescence or `max_rounds`. Ties between equal
/// new high bids are broken by a uniform draw from a stream seeded with
/// `seed`, so identical inputs give identical outcomes.
AuctionOutcome run_auction(const AuctionConfig& config, const std::vector<Bidder>& bidders,
                           std::uint64_t seed, const Strategy& strategy = straightforward_bid,
                           bool record_trace = false);

}  // namespace spectrum::auction
