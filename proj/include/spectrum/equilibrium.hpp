#pragma once

// Linear structural market model. Supply and demand for penetration q
// are linear in the wireless price p and in the exogenous profile:
//
//   supply:  q = alpha0 + b1 p + b2 CL + b3 COMP + b4 POPD + b5 W + e1
//   demand:  q = alpha1 + b6 p + b7 INC + b8 pF + b9 TDF + e2
//
// Market clearing gives a closed-form price; everything else in this
// module (reduced form, comparative statics, externality feedback,
// diffusion) is built on that solution.

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spectrum/errors.hpp"

namespace spectrum::equilibrium {

struct StructuralParameters {
  double alpha0 = 0.0;  // supply intercept
  double alpha1 = 0.0;  // demand intercept
  /// beta[0..4]: supply slopes on (pW, CL, COMP, POPD, W);
  /// beta[5..8]: demand slopes on (pW, INC, pF, TDF).
  std::array<double, 9> beta{};
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();  // cov of (e1, e2)

  /// 1-based access matching the conventional numbering b1..b9.
  double b(int k) const { return beta.at(static_cast<std::size_t>(k - 1)); }
  double& b(int k) { return beta.at(static_cast<std::size_t>(k - 1)); }

  /// b1 - b6, the denominator of every equilibrium expression.
  double slope_gap() const { return beta[0] - beta[5]; }

  /// Throws DegenerateModelError when supply and demand slopes coincide
  /// (|b1 - b6| <= 1e-12 (|b1| + |b6|)), ValidationError when sigma is
  /// not symmetric PSD or a value is non-finite.
  void validate() const;
};

/// Point estimates of the cross-country 3SLS fit used as the reference
/// truth throughout (supply: .0003566, -.0004917, .0000299, -.0005243,
/// .0126294, const -.0855854; demand: -.001698, .000013, .0016634,
/// -.0066927, const .2181322). Sigma is diagonal with variances
/// (1 - R^2) * sd(qS)^2 using R^2 = 0.6198 / 0.2156 and sd(qS) = 0.115.
StructuralParameters reference_parameters();

struct ExogenousProfile {
  double CL = 0.0;
  double COMP = 0.0;
  double POPD = 0.0;
  double W = 0.0;
  double INC = 0.0;
  double pF = 0.0;
  double TDF = 0.0;

  /// Range checks shared with the dataset observations.
  void validate() const;
};

/// Sample means of the 18-country dataset.
ExogenousProfile reference_means();

struct Shocks {
  double supply = 0.0;  // e1
  double demand = 0.0;  // e2
};

struct EquilibriumPoint {
  double p = 0.0;
  double q = 0.0;
  int iterations = 0;              // fixed-point iterations; 0 for the closed form
  std::optional<std::string> warning;  // set when q lies outside (0, 1]

  bool in_domain() const { return q > 0.0 && q <= 1.0; }
};

double supply_quantity(const StructuralParameters& params, const ExogenousProfile& x, double p,
                       double shock = 0.0);
double demand_quantity(const StructuralParameters& params, const ExogenousProfile& x, double p,
                       double shock = 0.0);

/// Market-clearing price and quantity. Out-of-domain quantities are
/// returned with a warning, not rejected.
EquilibriumPoint solve_equilibrium(const StructuralParameters& params, const ExogenousProfile& x,
                                   Shocks shocks = {});

struct ComparativeStatics {
  double dp_dCL = 0.0;
  double dq_dCL = 0.0;

  /// Fee raises price and lowers quantity.
  bool fee_raises_price_lowers_quantity() const { return dp_dCL > 0.0 && dq_dCL < 0.0; }
};

/// dp/dCL = -b2 / (b1 - b6), dq/dCL = b6 dp/dCL.
ComparativeStatics comparative_statics(const StructuralParameters& params);

/// Equilibrium price written in exogenous variables only. `coefficients`
/// holds the literal linear effects on (CL, COMP, POPD, W, INC, pF, TDF);
/// `xi` is the conventional presentation
///   p = gamma - xi1 CL - xi2 COMP - xi3 POPD - xi4 W + xi5 INC + xi6 pF + xi7 TDF + psi
/// so xi1..xi4 are the negated cost-side coefficients.
struct ReducedForm {
  double gamma = 0.0;
  std::array<double, 7> coefficients{};
  std::array<double, 7> xi{};
  double slope_gap = 0.0;

  double psi(Shocks shocks) const { return (shocks.demand - shocks.supply) / slope_gap; }
  double price(const ExogenousProfile& x, Shocks shocks = {}) const;
};

ReducedForm reduced_form(const StructuralParameters& params);

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, EquilibriumPoint last)
      : Error("non_convergence", message), last_(std::move(last)) {}

  const EquilibriumPoint& last_iterate() const noexcept { return last_; }

 private:
  EquilibriumPoint last_;
};

struct ExternalityOptions {
  double beta10 = 0.0;  // demand shift per unit of installed base
  double tol = 1e-12;
  int max_iter = 10000;
  double damping = 0.5;
};

/// Equilibrium with demand augmented by beta10 * q, found by damped
/// iteration from the no-feedback equilibrium. The undamped map has slope
/// beta10 * b1 / (b1 - b6); a slope of magnitude >= 1 is rejected up front.
EquilibriumPoint externality_fixed_point(const StructuralParameters& params, const ExogenousProfile& x,
                                         const ExternalityOptions& options);

enum class DiffusionScheme {
  euler,  // q' = q + r q (1 - q / qbar)
  exact,  // one period of the continuous logistic flow
};

struct DiffusionDynamics {
  double rate = 0.5;              // intrinsic adoption rate r
  double saturation0 = 1.0;       // qbar0
  double price_sensitivity = 0.0; // eta in qbar(p) = qbar0 exp(-eta p)
  double q0 = 0.02;
  DiffusionScheme scheme = DiffusionScheme::euler;

  double saturation(double price) const;
};

struct DiffusionStep {
  int t = 0;
  double q = 0.0;
  double p = 0.0;
  double g = 0.0;  // (q_{t+1} - q_t) / q_t
};

struct DiffusionPath {
  std::vector<DiffusionStep> steps;
  bool saturated_start = false;  // q0 >= qbar(p0): flat or shrinking path

  double mean_growth() const;
};

/// Logistic adoption toward a price-dependent ceiling, with the static
/// equilibrium price recomputed each period.
DiffusionPath simulate_diffusion(const StructuralParameters& params, const ExogenousProfile& x,
                                 const DiffusionDynamics& dynamics, int periods);

}  // namespace spectrum::equilibrium
