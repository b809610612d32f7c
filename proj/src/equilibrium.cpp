#include "spectrum/equilibrium.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace spectrum::equilibrium {

namespace {

constexpr double kSlopeTolerance = 1e-12;

void require_separated(const StructuralParameters& params) {
  const double b1 = params.b(1);
  const double b6 = params.b(6);
  const double gap = b1 - b6;
  if (gap == 0.0 || std::fabs(gap) <= kSlopeTolerance * (std::fabs(b1) + std::fabs(b6)))
    throw DegenerateModelError("supply and demand price slopes coincide (b1 = b6)");
}

// Everything in the demand-minus-supply intercept except the shocks.
double intercept_gap(const StructuralParameters& params, const ExogenousProfile& x) {
  return (params.alpha1 - params.alpha0) - params.b(2) * x.CL - params.b(3) * x.COMP -
         params.b(4) * x.POPD - params.b(5) * x.W + params.b(7) * x.INC + params.b(8) * x.pF +
         params.b(9) * x.TDF;
}

std::string domain_warning(double q) {
  std::ostringstream os;
  os << "equilibrium quantity " << q << " lies outside (0, 1]";
  return os.str();
}

}  // namespace

void StructuralParameters::validate() const {
  if (!std::isfinite(alpha0) || !std::isfinite(alpha1)) throw ValidationError("intercepts must be finite");
  for (double v : beta)
    if (!std::isfinite(v)) throw ValidationError("slope coefficients must be finite");
  if (!sigma.allFinite()) throw ValidationError("sigma must be finite");
  if (std::fabs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()))
    throw ValidationError("sigma must be symmetric");
  const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
  if (sigma(0, 0) < 0.0 || sigma(1, 1) < 0.0 || det < -1e-15)
    throw ValidationError("sigma must be positive semidefinite");
  require_separated(*this);
}

StructuralParameters reference_parameters() {
  StructuralParameters p;
  p.alpha0 = -0.0855854;
  p.alpha1 = 0.2181322;
  p.beta = {0.0003566, -0.0004917, 0.0000299, -0.0005243, 0.0126294,
            -0.001698, 0.000013,   0.0016634, -0.0066927};
  const double var_q = 0.115 * 0.115;
  p.sigma << (1.0 - 0.6198) * var_q, 0.0, 0.0, (1.0 - 0.2156) * var_q;
  return p;
}

void ExogenousProfile::validate() const {
  for (double v : {CL, COMP, POPD, W, INC, pF, TDF})
    if (!std::isfinite(v)) throw ValidationError("exogenous profile values must be finite");
  if (CL < 0.0) throw ValidationError("CL must be non-negative");
  if (!(COMP > 0.0 && COMP <= 10000.0)) throw ValidationError("COMP must lie in (0, 10000]");
  if (!(POPD > 0.0)) throw ValidationError("POPD must be positive");
  if (!(TDF > 0.0 && TDF <= 100.0)) throw ValidationError("TDF must lie in (0, 100]");
}

ExogenousProfile reference_means() {
  return {.CL = 55.54, .COMP = 4356.89, .POPD = 136.56, .W = 14.71, .INC = 25944.72, .pF = 337.88, .TDF = 58.35};
}

double supply_quantity(const StructuralParameters& params, const ExogenousProfile& x, double p,
                       double shock) {
  return params.alpha0 + params.b(1) * p + params.b(2) * x.CL + params.b(3) * x.COMP +
         params.b(4) * x.POPD + params.b(5) * x.W + shock;
}

double demand_quantity(const StructuralParameters& params, const ExogenousProfile& x, double p,
                       double shock) {
  return params.alpha1 + params.b(6) * p + params.b(7) * x.INC + params.b(8) * x.pF +
         params.b(9) * x.TDF + shock;
}

EquilibriumPoint solve_equilibrium(const StructuralParameters& params, const ExogenousProfile& x,
                                   Shocks shocks) {
  require_separated(params);
  EquilibriumPoint out;
  out.p = (intercept_gap(params, x) + (shocks.demand - shocks.supply)) / params.slope_gap();
  out.q = supply_quantity(params, x, out.p, shocks.supply);
  if (!out.in_domain()) out.warning = domain_warning(out.q);
  return out;
}

ComparativeStatics comparative_statics(const StructuralParameters& params) {
  require_separated(params);
  ComparativeStatics cs;
  cs.dp_dCL = -params.b(2) / params.slope_gap();
  cs.dq_dCL = params.b(6) * cs.dp_dCL;
  return cs;
}

double ReducedForm::price(const ExogenousProfile& x, Shocks shocks) const {
  const std::array<double, 7> values = {x.CL, x.COMP, x.POPD, x.W, x.INC, x.pF, x.TDF};
  double p = gamma;
  for (std::size_t i = 0; i < values.size(); ++i) p += coefficients[i] * values[i];
  return p + psi(shocks);
}

ReducedForm reduced_form(const StructuralParameters& params) {
  require_separated(params);
  ReducedForm rf;
  rf.slope_gap = params.slope_gap();
  rf.gamma = (params.alpha1 - params.alpha0) / rf.slope_gap;
  // Cost-side shifters enter negatively, demand-side shifters positively.
  const std::array<double, 7> numerators = {-params.b(2), -params.b(3), -params.b(4), -params.b(5),
                                            params.b(7),  params.b(8),  params.b(9)};
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    rf.coefficients[i] = numerators[i] / rf.slope_gap;
    rf.xi[i] = i < 4 ? -rf.coefficients[i] : rf.coefficients[i];
  }
  return rf;
}

EquilibriumPoint externality_fixed_point(const StructuralParameters& params, const ExogenousProfile& x,
                                         const ExternalityOptions& options) {
  require_separated(params);
  if (!(options.tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw ValidationError("damping must lie in (0, 1]");
  if (options.max_iter < 1) throw ValidationError("max_iter must be positive");

  const EquilibriumPoint base = solve_equilibrium(params, x);
  const double amplification = options.beta10 * params.b(1) / params.slope_gap();
  if (std::fabs(amplification) >= 1.0) {
    std::ostringstream os;
    os << "externality feedback is not a contraction (amplification factor " << amplification << ")";
    throw NonConvergenceError(os.str(), base);
  }

  auto shifted = [&](double installed) {
    StructuralParameters p = params;
    p.alpha1 += options.beta10 * installed;
    return solve_equilibrium(p, x);
  };

  double q_prev = base.q;
  for (int it = 1; it <= options.max_iter; ++it) {
    const double target = shifted(q_prev).q;
    const double q_next = q_prev + options.damping * (target - q_prev);
    if (std::fabs(q_next - q_prev) < options.tol) {
      EquilibriumPoint out = shifted(q_next);
      out.iterations = it;
      return out;
    }
    q_prev = q_next;
  }
  EquilibriumPoint last = shifted(q_prev);
  last.iterations = options.max_iter;
  throw NonConvergenceError("externality iteration did not converge within max_iter", last);
}

double DiffusionDynamics::saturation(double price) const {
  return saturation0 * std::exp(-price_sensitivity * price);
}

double DiffusionPath::mean_growth() const {
  if (steps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : steps) sum += s.g;
  return sum / static_cast<double>(steps.size());
}

DiffusionPath simulate_diffusion(const StructuralParameters& params, const ExogenousProfile& x,
                                 const DiffusionDynamics& dynamics, int periods) {
  if (periods < 1) throw ValidationError("diffusion needs at least one period");
  if (!(dynamics.rate > 0.0)) throw ValidationError("adoption rate must be positive");
  if (!(dynamics.q0 > 0.0 && dynamics.q0 <= 1.0)) throw ValidationError("q0 must lie in (0, 1]");
  if (!(dynamics.saturation0 > 0.0)) throw ValidationError("saturation level must be positive");

  DiffusionPath path;
  double q = dynamics.q0;
  for (int t = 0; t < periods; ++t) {
    const double p = solve_equilibrium(params, x).p;
    const double ceiling = dynamics.saturation(p);
    if (t == 0) path.saturated_start = q >= ceiling;
    double next = 0.0;
    if (dynamics.scheme == DiffusionScheme::euler) {
      next = q + dynamics.rate * q * (1.0 - q / ceiling);
    } else {
      const double growth = std::expm1(dynamics.rate);
      next = ceiling * q * (1.0 + growth) / (ceiling + q * growth);
    }
    path.steps.push_back({t, q, p, (next - q) / q});
    q = next;
  }
  return path;
}

}  // namespace spectrum::equilibrium
