#include "spectrum/smra_auction.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spectrum/errors.hpp"
#include "spectrum/random.hpp"

namespace spectrum::auction {

void AuctionConfig::validate() const {
  if (licenses.empty()) throw ValidationError("auction needs at least one license");
  std::set<std::string> unique(licenses.begin(), licenses.end());
  if (unique.size() != licenses.size()) throw ValidationError("duplicate license identifier");
  if (!(std::isfinite(opening_price) && opening_price >= 0.0))
    throw ValidationError("opening price must be non-negative");
  if (!(std::isfinite(increment) && increment > 0.0)) throw ValidationError("increment must be positive");
  if (!(activity_fraction > 0.0 && activity_fraction <= 1.0))
    throw ValidationError("activity fraction must lie in (0, 1]");
  if (max_rounds < 1) throw ValidationError("max_rounds must be positive");
}

double Bidder::valuation(const std::string& license) const {
  const auto it = valuations.find(license);
  return it == valuations.end() ? 0.0 : it->second;
}

double required_price(const AuctionState& state, const AuctionConfig& config, std::size_t license) {
  const auto& s = state.standing.at(license);
  return s.bidder ? s.price + config.increment : config.opening_price;
}

std::vector<Bid> straightforward_bid(const AuctionState& state, const AuctionConfig& config,
                                     const Bidder& bidder, std::size_t self) {
  const int eligibility = state.eligibility.at(self);
  if (eligibility <= 0) return {};

  int standing_high = 0;
  struct Candidate {
    std::size_t license;
    double price;
    double surplus;
  };
  std::vector<Candidate> candidates;
  for (std::size_t j = 0; j < config.licenses.size(); ++j) {
    if (state.standing[j].bidder == self) {
      ++standing_high;
      continue;
    }
    const double value = bidder.valuation(config.licenses[j]);
    const double price = required_price(state, config, j);
    if (value > 0.0 && price <= value) candidates.push_back({j, price, value - price});
  }

  const int room = std::min(eligibility, bidder.demand_cap) - standing_high;
  if (room <= 0 || candidates.empty()) return {};
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.surplus > b.surplus; });
  std::vector<Bid> bids;
  for (std::size_t i = 0; i < candidates.size() && static_cast<int>(i) < room; ++i)
    bids.push_back({candidates[i].license, candidates[i].price});
  return bids;
}

AuctionOutcome run_auction(const AuctionConfig& config, const std::vector<Bidder>& bidders,
                           std::uint64_t seed, const Strategy& strategy, bool record_trace) {
  config.validate();
  if (bidders.empty()) throw ValidationError("auction needs at least one bidder");
  const auto n_licenses = config.licenses.size();
  std::set<std::string> ids;
  for (const auto& b : bidders) {
    if (!ids.insert(b.id).second) throw ValidationError("duplicate bidder id '" + b.id + "'");
    if (b.eligibility < 0 || b.eligibility > static_cast<int>(n_licenses))
      throw ValidationError("bidder '" + b.id + "' eligibility must lie in [0, number of licenses]");
    if (b.demand_cap < 1) throw ValidationError("bidder '" + b.id + "' demand cap must be at least 1");
    for (const auto& [license, value] : b.valuations) {
      if (std::find(config.licenses.begin(), config.licenses.end(), license) == config.licenses.end())
        throw ValidationError("bidder '" + b.id + "' values unknown license '" + license + "'");
      if (!(std::isfinite(value) && value >= 0.0))
        throw ValidationError("bidder '" + b.id + "' has a negative or non-finite valuation");
    }
  }

  rng::Stream tie_breaker(seed);
  AuctionState state;
  state.standing.assign(n_licenses, {config.opening_price, std::nullopt});
  for (const auto& b : bidders) state.eligibility.push_back(b.eligibility);

  AuctionOutcome out;
  out.licenses = config.licenses;
  for (int round = 1; round <= config.max_rounds; ++round) {
    // Everyone acts on the same revealed state.
    std::vector<std::vector<Bid>> submitted(bidders.size());
    std::size_t new_bids = 0;
    for (std::size_t i = 0; i < bidders.size(); ++i) {
      submitted[i] = strategy(state, config, bidders[i], i);
      new_bids += submitted[i].size();
    }
    out.rounds_used = round;
    if (new_bids == 0) {
      out.quiescent = true;
      state.round = round;
      if (record_trace) out.trace.push_back({round, 0, state.standing, state.eligibility});
      break;
    }

    // Activity: licenses a bidder is standing high on or bidding for.
    std::vector<std::set<std::size_t>> active(bidders.size());
    for (std::size_t j = 0; j < n_licenses; ++j)
      if (const auto& holder = state.standing[j].bidder) active[*holder].insert(j);
    for (std::size_t i = 0; i < bidders.size(); ++i) {
      for (const auto& bid : submitted[i]) {
        if (bid.license >= n_licenses) throw ValidationError("strategy bid on an unknown license");
        active[i].insert(bid.license);
      }
      if (!submitted[i].empty() && static_cast<int>(active[i].size()) > state.eligibility[i])
        throw ValidationError("bidder '" + bidders[i].id + "' bid beyond its eligibility");
    }

    std::vector<StandingBid> next = state.standing;
    for (std::size_t j = 0; j < n_licenses; ++j) {
      const double floor_price = required_price(state, config, j);
      double best = -1.0;
      std::vector<std::size_t> leaders;
      for (std::size_t i = 0; i < bidders.size(); ++i) {
        for (const auto& bid : submitted[i]) {
          if (bid.license != j || bid.amount < floor_price) continue;
          if (bid.amount > best) {
            best = bid.amount;
            leaders.assign(1, i);
          } else if (bid.amount == best) {
            leaders.push_back(i);
          }
        }
      }
      if (leaders.empty()) continue;
      const std::size_t pick = leaders.size() == 1 ? 0 : static_cast<std::size_t>(tie_breaker.below(leaders.size()));
      next[j] = {best, leaders[pick]};
    }

    state.standing = std::move(next);
    state.round = round;
    for (std::size_t i = 0; i < bidders.size(); ++i) {
      const int elig = state.eligibility[i];
      const auto activity = static_cast<double>(active[i].size());
      if (activity < config.activity_fraction * elig) {
        const int reduced = static_cast<int>(std::floor(activity / config.activity_fraction + 1e-9));
        state.eligibility[i] = std::min(elig, reduced);
      }
    }
    if (record_trace) out.trace.push_back({round, new_bids, state.standing, state.eligibility});
  }

  out.winners.resize(n_licenses);
  out.prices.assign(n_licenses, 0.0);
  for (std::size_t j = 0; j < n_licenses; ++j) {
    if (const auto& holder = state.standing[j].bidder) {
      out.winners[j] = bidders[*holder].id;
      out.prices[j] = state.standing[j].price;
      out.revenue += out.prices[j];
    }
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace spectrum::auction
