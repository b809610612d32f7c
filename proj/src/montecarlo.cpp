#include "spectrum/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "spectrum/errors.hpp"
#include "spectrum/random.hpp"

namespace spectrum::montecarlo {

using linalg::Matrix;
using linalg::Vector;

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kMaxRejectionRate = 0.9;
constexpr int kShockTriesPerProfile = 10;

equilibrium::ExogenousProfile to_profile(const std::array<double, 7>& x) {
  return {.CL = x[0], .COMP = x[1], .POPD = x[2], .W = x[3], .INC = x[5], .pF = x[4], .TDF = x[6]};
}

// Lower factor of a 2x2 PSD covariance.
std::array<double, 3> shock_factor(const Eigen::Matrix2d& s) {
  const double a = std::sqrt(std::max(s(0, 0), 0.0));
  const double b = a > 0.0 ? s(1, 0) / a : 0.0;
  const double c = std::sqrt(std::max(s(1, 1) - b * b, 0.0));
  return {a, b, c};
}

}  // namespace

void MomentTarget::validate() const {
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    const auto& m = marginals[i];
    const std::string name(kExogenous[i]);
    if (!std::isfinite(m.mean) || !std::isfinite(m.sd) || !std::isfinite(m.min) || !std::isfinite(m.max))
      throw ValidationError("moment target for " + name + " must be finite");
    if (m.sd < 0.0) throw ValidationError("standard deviation for " + name + " must be non-negative");
    if (m.min > m.max) throw ValidationError("range for " + name + " is empty");
  }
  if (correlation.rows() != 7 || correlation.cols() != 7) throw ValidationError("correlation target must be 7x7");
  for (Eigen::Index i = 0; i < 7; ++i) {
    if (std::fabs(correlation(i, i) - 1.0) > 1e-12) throw ValidationError("correlation target needs a unit diagonal");
    for (Eigen::Index j = 0; j < 7; ++j) {
      if (!(std::fabs(correlation(i, j)) <= 1.0)) throw ValidationError("correlation entries must lie in [-1, 1]");
      if (std::fabs(correlation(i, j) - correlation(j, i)) > 1e-12)
        throw ValidationError("correlation target must be symmetric");
    }
  }
}

const Marginal& MomentTarget::marginal(std::string_view name) const {
  const auto it = std::find(kExogenous.begin(), kExogenous.end(), name);
  if (it == kExogenous.end()) throw ValidationError("no moment target for '" + std::string(name) + "'");
  return marginals[static_cast<std::size_t>(it - kExogenous.begin())];
}

MomentTarget reference_targets() {
  MomentTarget t;
  t.marginals = {{
      {55.54, 115.08, 0.0, 465.66},        // CL
      {4356.89, 1302.28, 604.0, 6084.0},   // COMP
      {136.56, 108.03, 14.0, 388.0},       // POPD
      {14.71, 5.13, 3.64, 24.0},           // W
      {337.88, 62.44, 239.69, 490.65},     // pF
      {25944.72, 8496.76, 11385.0, 44962.0},  // INC
      {58.35, 11.72, 42.1, 76.0},          // TDF
  }};
  // Lower triangle, rows/cols in kExogenous order.
  const double lower[7][7] = {
      {1.0},
      {-0.5103, 1.0},
      {-0.0836, -0.0470, 1.0},
      {-0.0470, 0.2276, 0.1355, 1.0},
      {0.0703, -0.0383, -0.0489, -0.6059, 1.0},
      {0.2224, -0.0087, -0.0050, 0.7618, -0.8000, 1.0},
      {0.1324, -0.1357, -0.0551, 0.5907, -0.8079, 0.8179, 1.0},
  };
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j <= i; ++j) t.correlation(i, j) = t.correlation(j, i) = lower[i][j];
  return t;
}

GeneratedData generate(const MomentTarget& targets, const equilibrium::StructuralParameters& params, std::size_t n,
                       std::uint64_t seed, const GenerationOptions& options) {
  targets.validate();
  params.validate();
  if (n < 2) throw ValidationError("gen_data needs n >= 2");
  if (options.max_row_tries < 1) throw ValidationError("max_row_tries must be positive");

  GeneratedData out;
  const Matrix repaired = linalg::repair_correlation(targets.correlation);
  out.correlation_repaired = !repaired.isApprox(targets.correlation, 0.0);
  Eigen::LLT<Matrix> llt(repaired);
  if (llt.info() != Eigen::Success) throw ValidationError("correlation target cannot be repaired to positive definite");
  const Matrix lower = llt.matrixL();
  const auto factor = shock_factor(params.sigma);

  rng::Stream stream(seed);
  auto draw_profile = [&]() {
    for (int attempt = 0; attempt < options.max_row_tries; ++attempt) {
      Vector z(7);
      for (Eigen::Index i = 0; i < 7; ++i) z(i) = stream.normal();
      const Vector c = lower * z;
      std::array<double, 7> x{};
      bool inside = true;
      for (std::size_t i = 0; i < 7; ++i) {
        const auto& m = targets.marginals[i];
        x[i] = m.mean + m.sd * c(static_cast<Eigen::Index>(i));
        inside = inside && x[i] >= m.min && x[i] <= m.max;
      }
      if (!options.truncate || inside) return x;
    }
    throw InfeasibleTargetError("exogenous draws fall outside the target ranges too often");
  };

  std::vector<market::MarketObservation> rows;
  rows.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto x = draw_profile();
    bool accepted = false;
    for (int attempt = 0; attempt < options.max_row_tries; ++attempt) {
      if (attempt > 0 && attempt % kShockTriesPerProfile == 0) x = draw_profile();
      const double u1 = stream.normal();
      const double u2 = stream.normal();
      const equilibrium::Shocks shocks{factor[0] * u1, factor[1] * u1 + factor[2] * u2};
      const auto eq = equilibrium::solve_equilibrium(params, to_profile(x), shocks);
      ++out.attempts;
      if (options.outcomes == OutcomePolicy::resample && !eq.in_domain()) {
        ++out.rejected;
        continue;
      }
      market::MarketObservation o;
      o.qS = eq.q;
      o.pW = eq.p;
      for (std::size_t i = 0; i < 7; ++i) o.set(kExogenous[i], x[i]);
      try {
        market::validate_observation(o, market::DomainCheck::strict);
      } catch (const ValidationError&) {
        ++out.out_of_domain_rows;
      }
      rows.push_back(o);
      accepted = true;
      break;
    }
    if (!accepted)
      throw InfeasibleTargetError("row " + std::to_string(r + 1) + ": no in-domain equilibrium after " +
                                  std::to_string(options.max_row_tries) + " draws");
  }
  if (static_cast<double>(out.rejected) > kMaxRejectionRate * static_cast<double>(out.attempts))
    throw InfeasibleTargetError("more than 90% of equilibrium draws fell outside (0, 1]");
  out.data = market::Dataset(std::move(rows), {}, market::DomainCheck::finite_only);
  return out;
}

market::Dataset gen_data(const MomentTarget& targets, const equilibrium::StructuralParameters& params, std::size_t n,
                         std::uint64_t seed, const GenerationOptions& options) {
  return generate(targets, params, n, seed, options).data;
}

std::vector<TruthEntry> truth_vector(const equilibrium::StructuralParameters& p) {
  return {
      {"supply", "pW", p.b(1)},   {"supply", "CL", p.b(2)},  {"supply", "COMP", p.b(3)},
      {"supply", "POPD", p.b(4)}, {"supply", "W", p.b(5)},   {"supply", "const", p.alpha0},
      {"demand", "pW", p.b(6)},   {"demand", "INC", p.b(7)}, {"demand", "pF", p.b(8)},
      {"demand", "TDF", p.b(9)},  {"demand", "const", p.alpha1},
  };
}

equilibrium::StructuralParameters parameters_from(const econometrics::EstimationResult& result) {
  const auto& s = result.equation("supply");
  const auto& d = result.equation("demand");
  equilibrium::StructuralParameters p;
  p.alpha0 = s.coefficient("const").estimate;
  p.alpha1 = d.coefficient("const").estimate;
  p.b(1) = s.coefficient("pW").estimate;
  p.b(2) = s.coefficient("CL").estimate;
  p.b(3) = s.coefficient("COMP").estimate;
  p.b(4) = s.coefficient("POPD").estimate;
  p.b(5) = s.coefficient("W").estimate;
  p.b(6) = d.coefficient("pW").estimate;
  p.b(7) = d.coefficient("INC").estimate;
  p.b(8) = d.coefficient("pF").estimate;
  p.b(9) = d.coefficient("TDF").estimate;
  if (result.sigma.rows() == 2 && result.sigma.cols() == 2) p.sigma = result.sigma;
  return p;
}

const CoefficientReport& ExperimentReport::coefficient(std::string_view equation, std::string_view regressor) const {
  for (const auto& c : coefficients)
    if (c.equation == equation && c.regressor == regressor) return c;
  throw ValidationError("report has no coefficient " + std::string(equation) + ":" + std::string(regressor));
}

ExperimentReport recovery_experiment(const MomentTarget& targets, const equilibrium::StructuralParameters& truth,
                                     std::size_t n, std::size_t replications, std::uint64_t seed,
                                     const ExperimentOptions& options) {
  if (replications < 1) throw ValidationError("recovery experiment needs at least one replication");
  targets.validate();
  truth.validate();
  const auto system = econometrics::market_system();
  const auto entries = truth_vector(truth);

  ExperimentReport report;
  report.n = n;
  report.replications = replications;
  report.seed = seed;
  report.seed_scheme = rng::kSubSeedVersion;
  report.records.resize(replications);

  auto run_one = [&](std::size_t r) {
    ReplicationRecord rec;
    rec.index = r;
    rec.seed = rng::sub_seed(seed, r);
    try {
      const auto data = gen_data(targets, truth, n, rec.seed, options.generation);
      const auto fit = econometrics::three_sls(system, data);
      for (const auto& e : entries) {
        const auto& c = fit.equation(e.equation).coefficient(e.regressor);
        rec.estimates.push_back(c.estimate);
        rec.standard_errors.push_back(c.se);
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    report.records[r] = std::move(rec);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(replications)));
  if (threads == 1) {
    for (std::size_t r = 0; r < replications; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < replications; r = next++) run_one(r);
      });
  }

  // Aggregate in replication order so the result is independent of scheduling.
  std::size_t ok = 0;
  report.coefficients.resize(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    report.coefficients[k].equation = entries[k].equation;
    report.coefficients[k].regressor = entries[k].regressor;
    report.coefficients[k].truth = entries[k].value;
  }
  for (const auto& rec : report.records) {
    if (!rec.ok) {
      ++report.failures;
      continue;
    }
    ++ok;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      auto& c = report.coefficients[k];
      const double est = rec.estimates[k];
      c.mean_estimate += est;
      c.mean_abs_error += std::fabs(est - c.truth);
      c.coverage += std::fabs(est - c.truth) <= kZ95 * rec.standard_errors[k] ? 1.0 : 0.0;
      const bool agree = (est > 0.0 && c.truth > 0.0) || (est < 0.0 && c.truth < 0.0) || (est == 0.0 && c.truth == 0.0);
      c.sign_agreement += agree ? 1.0 : 0.0;
    }
  }
  if (ok > 0) {
    for (auto& c : report.coefficients) {
      const double d = static_cast<double>(ok);
      c.mean_estimate /= d;
      c.mean_abs_error /= d;
      c.coverage /= d;
      c.sign_agreement /= d;
    }
  }
  return report;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::degenerate: return "degenerate";
  }
  return "degenerate";
}

HypothesisReport hypothesis_report(const econometrics::EstimationResult& result) {
  const auto& s = result.equation("supply");
  const auto& d = result.equation("demand");
  HypothesisReport h;
  h.z_supply_price = s.coefficient("pW").z;
  h.z_fee = s.coefficient("CL").z;
  h.z_demand_price = d.coefficient("pW").z;
  h.note =
      "implied derivatives use point estimates only; standard errors are per coefficient "
      "(a delta-method interval for dp/dCL is not computed)";
  equilibrium::StructuralParameters p;
  p.b(1) = s.coefficient("pW").estimate;
  p.b(2) = s.coefficient("CL").estimate;
  p.b(6) = d.coefficient("pW").estimate;
  try {
    const auto cs = equilibrium::comparative_statics(p);
    h.dp_dCL = cs.dp_dCL;
    h.dq_dCL = cs.dq_dCL;
    h.verdict = cs.fee_raises_price_lowers_quantity() ? Verdict::satisfied : Verdict::violated;
  } catch (const DegenerateModelError&) {
    h.verdict = Verdict::degenerate;
  }
  return h;
}

}  // namespace spectrum::montecarlo
