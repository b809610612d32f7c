#pragma once

// Synthetic cross-country datasets with prescribed exogenous moments,
// pushed through the structural model, and the recovery experiments that
// check the system estimator against known truth.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spectrum/econometrics.hpp"
#include "spectrum/equilibrium.hpp"
#include "spectrum/linalg.hpp"
#include "spectrum/market_data.hpp"

namespace spectrum::montecarlo {

/// Exogenous variables in moment-target order.
inline constexpr std::array<std::string_view, 7> kExogenous = {"CL", "COMP", "POPD", "W", "pF", "INC", "TDF"};

struct Marginal {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MomentTarget {
  std::array<Marginal, 7> marginals{};
  linalg::Matrix correlation = linalg::Matrix::Identity(7, 7);

  void validate() const;
  const Marginal& marginal(std::string_view name) const;
};

/// Means, standard deviations, ranges and exogenous correlations of the
/// 18-country licensing dataset.
MomentTarget reference_targets();

enum class OutcomePolicy {
  resample,  // redraw shocks when the equilibrium qS leaves (0, 1]
  keep,      // keep every draw; estimator assumptions hold exactly
};

struct GenerationOptions {
  bool truncate = false;  // truncation-resample exogenous draws into [min, max]
  OutcomePolicy outcomes = OutcomePolicy::resample;
  int max_row_tries = 100;
};

struct GeneratedData {
  market::Dataset data;
  std::size_t attempts = 0;          // equilibrium draws made
  std::size_t rejected = 0;          // draws discarded for out-of-domain qS
  std::size_t out_of_domain_rows = 0;  // kept rows failing the strict observation checks
  bool correlation_repaired = false;
};

/// Draws `n` rows: correlated exogenous normals (Cholesky factor of the
/// possibly repaired target correlation) scaled to the target marginals,
/// structural shocks from params.sigma, then (pW, qS) from the
/// closed-form equilibrium. Fully determined by `seed`.
GeneratedData generate(const MomentTarget& targets, const equilibrium::StructuralParameters& params, std::size_t n,
                       std::uint64_t seed, const GenerationOptions& options = {});

market::Dataset gen_data(const MomentTarget& targets, const equilibrium::StructuralParameters& params, std::size_t n,
                         std::uint64_t seed, const GenerationOptions& options = {});

/// One entry per coefficient of the market system, in estimation order.
struct TruthEntry {
  std::string equation;
  std::string regressor;
  double value = 0.0;
};
std::vector<TruthEntry> truth_vector(const equilibrium::StructuralParameters& params);

/// Structural parameters implied by a fit of the market system.
equilibrium::StructuralParameters parameters_from(const econometrics::EstimationResult& result);

struct CoefficientReport {
  std::string equation;
  std::string regressor;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double mean_abs_error = 0.0;
  double coverage = 0.0;        // share of nominal 95% intervals containing truth
  double sign_agreement = 0.0;  // share of estimates with the sign of truth
};

struct ReplicationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> estimates;
  std::vector<double> standard_errors;
};

struct ExperimentReport {
  std::size_t n = 0;
  std::size_t replications = 0;
  std::size_t failures = 0;
  std::uint64_t seed = 0;
  int seed_scheme = 0;
  std::vector<CoefficientReport> coefficients;
  std::vector<ReplicationRecord> records;

  const CoefficientReport& coefficient(std::string_view equation, std::string_view regressor) const;
};

struct ExperimentOptions {
  GenerationOptions generation{.truncate = false, .outcomes = OutcomePolicy::keep, .max_row_tries = 100};
  unsigned threads = 1;
};

/// Replication r draws its data with rng::sub_seed(seed, r), so the
/// report does not depend on thread count or execution order. Failed
/// estimations are counted, not fatal.
ExperimentReport recovery_experiment(const MomentTarget& targets, const equilibrium::StructuralParameters& truth,
                                     std::size_t n, std::size_t replications, std::uint64_t seed,
                                     const ExperimentOptions& options = {});

enum class Verdict { satisfied, violated, degenerate };
std::string_view to_string(Verdict v);

struct HypothesisReport {
  Verdict verdict = Verdict::degenerate;
  double dp_dCL = 0.0;
  double dq_dCL = 0.0;
  double z_supply_price = 0.0;
  double z_fee = 0.0;
  double z_demand_price = 0.0;
  std::string note;
};

/// Signs of the fee effects on price and quantity implied by a market
/// system fit. Satisfied means dp/dCL > 0 and dq/dCL < 0.
HypothesisReport hypothesis_report(const econometrics::EstimationResult& result);

}  // namespace spectrum::montecarlo
