#pragma once

// Linear estimators for single equations and simultaneous systems:
// OLS, two-stage least squares and three-stage least squares, with
// classical (homoskedastic) covariance estimates.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectrum/linalg.hpp"
#include "spectrum/market_data.hpp"
#include "spectrum/table.hpp"

namespace spectrum::econometrics {

/// Regressor name standing for a column of ones.
inline constexpr std::string_view kIntercept = "const";

struct EquationSpec {
  std::string name;
  std::string dependent;
  std::vector<std::string> regressors;  // may include kIntercept
  std::vector<std::string> endogenous;  // subset of regressors

  void validate() const;
  bool is_endogenous(std::string_view regressor) const;
};

struct SystemSpec {
  std::vector<EquationSpec> equations;
  std::vector<std::string> instruments;  // every exogenous variable, plus kIntercept

  void validate() const;
};

/// Two-equation supply/demand system for penetration with the wireless
/// price treated as endogenous.
SystemSpec market_system();

enum class Method { ols, two_sls, three_sls };
std::string_view to_string(Method m);

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 0.0;  // two-sided normal
};

struct EquationResult {
  std::string name;
  std::string dependent;
  std::vector<CoefficientRow> coefficients;
  linalg::Matrix covariance;
  linalg::Vector residuals;  // structural: y - X b
  double ssr = 0.0;
  double r2 = 0.0;  // 1 - SSR/SST, centered; may be negative for IV fits
  double wald_chi2 = 0.0;
  int wald_df = 0;
  double wald_p = 1.0;

  const CoefficientRow& coefficient(std::string_view regressor) const;
  linalg::Vector estimates() const;
};

struct EstimationResult {
  Method method = Method::ols;
  std::size_t n = 0;
  std::vector<EquationResult> equations;
  linalg::Matrix sigma;  // cross-equation residual covariance, denominator n
  std::vector<std::string> warnings;

  const EquationResult& equation(std::string_view name) const;
};

/// Ordinary least squares of y on X. Names label the coefficients and
/// default to x1..xk; a column named kIntercept is left out of the Wald
/// test.
EquationResult ols(const linalg::Vector& y, const linalg::Matrix& x, std::vector<std::string> names = {});

/// Each equation by OLS, treating every regressor as exogenous.
EstimationResult ols(const SystemSpec& system, const Table& data);

/// Two-stage least squares of one equation on the given instruments.
EquationResult two_sls(const EquationSpec& eq, const std::vector<std::string>& instruments, const Table& data);
EstimationResult two_sls(const SystemSpec& system, const Table& data);

struct ThreeSlsOptions {
  /// Replaces the estimated residual covariance in the GLS step.
  std::optional<linalg::Matrix> sigma_override;
};

/// Three-stage least squares: per-equation 2SLS, residual covariance
/// with denominator n, then GLS on the stacked system with the
/// instrument projection. Falls back to 2SLS (with a warning) when the
/// residual covariance is singular.
EstimationResult three_sls(const SystemSpec& system, const Table& data, const ThreeSlsOptions& options = {});

EstimationResult ols(const SystemSpec& system, const market::Dataset& data);
EstimationResult two_sls(const SystemSpec& system, const market::Dataset& data);
EstimationResult three_sls(const SystemSpec& system, const market::Dataset& data,
                           const ThreeSlsOptions& options = {});

enum class Identification { under, just, over };
std::string_view to_string(Identification s);

struct IdentificationStatus {
  std::string equation;
  Identification status = Identification::under;
  int excluded_exogenous = 0;
  int included_endogenous = 0;
};

/// Order condition per equation.
std::vector<IdentificationStatus> identification_check(const SystemSpec& system);

/// Plain-text coefficient table: one block per equation with columns
/// Coefficient, Standard error, z, P>z and an R² / P(χ²) footer.
std::string format_table(const EstimationResult& result);

}  // namespace spectrum::econometrics
