#include "spectrum/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "spectrum/distributions.hpp"
#include "spectrum/errors.hpp"

namespace spectrum::econometrics {

using linalg::Matrix;
using linalg::Vector;

namespace {

constexpr double kWeakFirstStage = 1e-10;

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

Vector column_or_ones(const Table& data, std::string_view name) {
  if (name == kIntercept) return Vector::Ones(data.rows());
  return data.column(name);
}

Matrix design(const Table& data, const std::vector<std::string>& names) {
  Matrix x(data.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = column_or_ones(data, names[j]);
  return x;
}

void require_full_rank(const Matrix& x, const std::vector<std::string>& names, const char* what) {
  const auto dependent = linalg::dependent_columns(x);
  if (dependent.empty()) return;
  std::vector<std::string> offending;
  for (int j : dependent) offending.push_back(names[static_cast<std::size_t>(j)]);
  const double cond = linalg::condition_number(x);
  throw SingularError(std::string(what) + " is rank deficient; dependent columns: " + join(offending), cond);
}

// Inverse of a symmetric PD matrix after equilibrating its diagonal, so
// regressors measured in very different units do not trip the
// conditioning check.
Matrix scaled_spd_inverse(const Matrix& a) {
  Vector d = a.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? 1.0 / d(i) : 1.0;
  const Matrix scaled = d.asDiagonal() * a * d.asDiagonal();
  return d.asDiagonal() * linalg::spd_inverse(scaled) * d.asDiagonal();
}

double centered_r2(const Vector& y, double ssr) {
  const double sst = (y.array() - y.mean()).square().sum();
  if (sst <= 0.0) return 0.0;
  return 1.0 - ssr / sst;
}

std::vector<std::string> default_names(Eigen::Index k) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

// Fills coefficient rows, R² and the Wald test from estimates and covariance.
void finish_equation(EquationResult& eq, const std::vector<std::string>& names, const Vector& b,
                     const Matrix& cov, const Vector& y, const Vector& residuals) {
  eq.covariance = 0.5 * (cov + cov.transpose());
  eq.residuals = residuals;
  eq.ssr = residuals.squaredNorm();
  eq.r2 = centered_r2(y, eq.ssr);
  eq.coefficients.clear();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    CoefficientRow row;
    row.name = names[j];
    row.estimate = b(jj);
    row.se = std::sqrt(std::max(eq.covariance(jj, jj), 0.0));
    if (row.se > 0.0) {
      row.z = row.estimate / row.se;
      row.p = dist::two_sided_p(row.z);
    } else {
      // exact fit: no sampling variability left
      row.z = row.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), row.estimate);
      row.p = row.estimate == 0.0 ? 1.0 : 0.0;
    }
    eq.coefficients.push_back(row);
  }

  std::vector<Eigen::Index> slopes;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] != kIntercept) slopes.push_back(static_cast<Eigen::Index>(j));
  eq.wald_df = static_cast<int>(slopes.size());
  if (slopes.empty()) {
    eq.wald_chi2 = 0.0;
    eq.wald_p = 1.0;
    return;
  }
  Vector bs(static_cast<Eigen::Index>(slopes.size()));
  Matrix vs(bs.size(), bs.size());
  for (std::size_t a = 0; a < slopes.size(); ++a) {
    bs(static_cast<Eigen::Index>(a)) = b(slopes[a]);
    for (std::size_t c = 0; c < slopes.size(); ++c)
      vs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = eq.covariance(slopes[a], slopes[c]);
  }
  if (vs.cwiseAbs().maxCoeff() == 0.0) {
    const bool zero = bs.cwiseAbs().maxCoeff() == 0.0;
    eq.wald_chi2 = zero ? 0.0 : std::numeric_limits<double>::infinity();
    eq.wald_p = zero ? 1.0 : 0.0;
    return;
  }
  eq.wald_chi2 = bs.dot(scaled_spd_inverse(vs) * bs);
  eq.wald_p = dist::chi2_sf(eq.wald_chi2, static_cast<double>(eq.wald_df));
}

struct PreparedEquation {
  const EquationSpec* spec = nullptr;
  Vector y;
  Matrix x;
  Matrix x_hat;  // P_Z X
};

PreparedEquation prepare(const EquationSpec& eq, const Table& data, const linalg::Projector& projector) {
  PreparedEquation out;
  out.spec = &eq;
  out.y = data.column(eq.dependent);
  out.x = design(data, eq.regressors);
  require_full_rank(out.x, eq.regressors, ("design of equation '" + eq.name + "'").c_str());
  out.x_hat = projector.apply(out.x);

  for (std::size_t j = 0; j < eq.regressors.size(); ++j) {
    if (!eq.is_endogenous(eq.regressors[j])) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    const Vector& col = out.x.col(jj);
    const double sst = (col.array() - col.mean()).square().sum();
    if (sst <= 0.0) continue;
    const double r2 = 1.0 - (col - out.x_hat.col(jj)).squaredNorm() / sst;
    if (r2 < kWeakFirstStage)
      throw DegenerateInstrumentError("first stage for '" + eq.regressors[j] + "' in equation '" + eq.name +
                                      "' has no explanatory power");
  }
  if (!linalg::dependent_columns(out.x_hat).empty())
    throw IdentificationError("equation '" + eq.name + "' fails the rank condition: projected regressors are collinear");
  return out;
}

Matrix instrument_matrix(const std::vector<std::string>& instruments, const Table& data) {
  Matrix z = design(data, instruments);
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    if (z.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw DegenerateInstrumentError("instrument '" + instruments[static_cast<std::size_t>(j)] + "' is identically zero");
  const auto dependent = linalg::dependent_columns(z);
  if (!dependent.empty()) {
    std::vector<std::string> offending;
    for (int j : dependent) offending.push_back(instruments[static_cast<std::size_t>(j)]);
    throw DegenerateInstrumentError("instrument set is rank deficient; dependent: " + join(offending));
  }
  return z;
}

void require_identified(const EquationSpec& eq, const std::vector<std::string>& instruments) {
  SystemSpec single{{eq}, instruments};
  const auto status = identification_check(single).front();
  if (status.status == Identification::under)
    throw IdentificationError("equation '" + eq.name + "' is underidentified: " +
                              std::to_string(status.excluded_exogenous) + " excluded exogenous < " +
                              std::to_string(status.included_endogenous) + " endogenous");
}

EquationResult two_sls_prepared(const PreparedEquation& pe, Eigen::Index n) {
  const auto k = pe.x.cols();
  if (n <= k) throw InsufficientDataError("equation '" + pe.spec->name + "' needs more observations than parameters");
  const Vector b = linalg::least_squares(pe.x_hat, pe.y);
  const Vector u = pe.y - pe.x * b;
  const double s2 = u.squaredNorm() / static_cast<double>(n - k);
  EquationResult eq;
  eq.name = pe.spec->name;
  eq.dependent = pe.spec->dependent;
  finish_equation(eq, pe.spec->regressors, b, s2 * scaled_spd_inverse(pe.x_hat.transpose() * pe.x_hat), pe.y, u);
  return eq;
}

Matrix residual_covariance(const std::vector<EquationResult>& eqs, Eigen::Index n) {
  const auto m = static_cast<Eigen::Index>(eqs.size());
  Matrix s(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      s(i, j) = s(j, i) = eqs[static_cast<std::size_t>(i)].residuals.dot(eqs[static_cast<std::size_t>(j)].residuals) /
                          static_cast<double>(n);
  return s;
}

}  // namespace

void EquationSpec::validate() const {
  if (dependent.empty()) throw ValidationError("equation '" + name + "' has no dependent variable");
  if (regressors.empty()) throw ValidationError("equation '" + name + "' has no regressors");
  std::set<std::string> unique(regressors.begin(), regressors.end());
  if (unique.size() != regressors.size()) throw ValidationError("equation '" + name + "' repeats a regressor");
  if (unique.count(dependent)) throw ValidationError("equation '" + name + "' uses its dependent variable as a regressor");
  for (const auto& e : endogenous)
    if (!unique.count(e))
      throw ValidationError("endogenous variable '" + e + "' is not a regressor of equation '" + name + "'");
}

bool EquationSpec::is_endogenous(std::string_view regressor) const { return contains(endogenous, regressor); }

void SystemSpec::validate() const {
  if (equations.empty()) throw ValidationError("system has no equations");
  std::set<std::string> names;
  for (const auto& eq : equations) {
    eq.validate();
    if (!names.insert(eq.name).second) throw ValidationError("duplicate equation name '" + eq.name + "'");
    for (const auto& r : eq.regressors)
      if (!eq.is_endogenous(r) && !contains(instruments, r))
        throw ValidationError("exogenous regressor '" + r + "' of equation '" + eq.name + "' is not an instrument");
  }
  std::set<std::string> unique(instruments.begin(), instruments.end());
  if (unique.size() != instruments.size()) throw ValidationError("duplicate instrument");
}

SystemSpec market_system() {
  SystemSpec s;
  s.equations.push_back({"supply", "qS", {"pW", "CL", "COMP", "POPD", "W", std::string(kIntercept)}, {"pW"}});
  s.equations.push_back({"demand", "qS", {"pW", "INC", "pF", "TDF", std::string(kIntercept)}, {"pW"}});
  s.instruments = {"CL", "COMP", "POPD", "W", "INC", "pF", "TDF", std::string(kIntercept)};
  return s;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ols: return "OLS";
    case Method::two_sls: return "2SLS";
    case Method::three_sls: return "3SLS";
  }
  return "OLS";
}

std::string_view to_string(Identification s) {
  switch (s) {
    case Identification::under: return "underidentified";
    case Identification::just: return "just identified";
    case Identification::over: return "overidentified";
  }
  return "underidentified";
}

const CoefficientRow& EquationResult::coefficient(std::string_view regressor) const {
  for (const auto& c : coefficients)
    if (c.name == regressor) return c;
  throw ValidationError("equation '" + name + "' has no coefficient '" + std::string(regressor) + "'");
}

Vector EquationResult::estimates() const {
  Vector b(static_cast<Eigen::Index>(coefficients.size()));
  for (std::size_t j = 0; j < coefficients.size(); ++j) b(static_cast<Eigen::Index>(j)) = coefficients[j].estimate;
  return b;
}

const EquationResult& EstimationResult::equation(std::string_view name) const {
  for (const auto& e : equations)
    if (e.name == name) return e;
  throw ValidationError("no equation named '" + std::string(name) + "'");
}

EquationResult ols(const Vector& y, const Matrix& x, std::vector<std::string> names) {
  if (names.empty()) names = default_names(x.cols());
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) throw ValidationError("ols: one name per column required");
  if (y.size() != x.rows()) throw ValidationError("ols: y and X have different row counts");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("ols: non-finite data");
  const auto n = x.rows();
  const auto k = x.cols();
  if (n <= k) throw InsufficientDataError("ols: need more observations (" + std::to_string(n) +
                                          ") than parameters (" + std::to_string(k) + ")");
  require_full_rank(x, names, "design matrix");
  const Vector b = linalg::least_squares(x, y);
  const Vector u = y - x * b;
  const double s2 = u.squaredNorm() / static_cast<double>(n - k);
  EquationResult eq;
  eq.name = "ols";
  finish_equation(eq, names, b, s2 * scaled_spd_inverse(x.transpose() * x), y, u);
  return eq;
}

EstimationResult ols(const SystemSpec& system, const Table& data) {
  EstimationResult out;
  out.method = Method::ols;
  out.n = static_cast<std::size_t>(data.rows());
  for (const auto& spec : system.equations) {
    spec.validate();
    auto eq = ols(data.column(spec.dependent), design(data, spec.regressors), spec.regressors);
    eq.name = spec.name;
    eq.dependent = spec.dependent;
    out.equations.push_back(std::move(eq));
  }
  out.sigma = residual_covariance(out.equations, data.rows());
  return out;
}

EquationResult two_sls(const EquationSpec& spec, const std::vector<std::string>& instruments, const Table& data) {
  spec.validate();
  SystemSpec{{spec}, instruments}.validate();
  require_identified(spec, instruments);
  const Matrix z = instrument_matrix(instruments, data);
  const linalg::Projector projector(z);
  return two_sls_prepared(prepare(spec, data, projector), data.rows());
}

EstimationResult two_sls(const SystemSpec& system, const Table& data) {
  system.validate();
  for (const auto& eq : system.equations) require_identified(eq, system.instruments);
  const linalg::Projector projector(instrument_matrix(system.instruments, data));
  EstimationResult out;
  out.method = Method::two_sls;
  out.n = static_cast<std::size_t>(data.rows());
  for (const auto& spec : system.equations)
    out.equations.push_back(two_sls_prepared(prepare(spec, data, projector), data.rows()));
  out.sigma = residual_covariance(out.equations, data.rows());
  return out;
}

EstimationResult three_sls(const SystemSpec& system, const Table& data, const ThreeSlsOptions& options) {
  system.validate();
  for (const auto& eq : system.equations) require_identified(eq, system.instruments);
  const auto n = data.rows();
  for (const auto& eq : system.equations)
    if (n <= static_cast<Eigen::Index>(eq.regressors.size()))
      throw InsufficientDataError("3SLS: equation '" + eq.name + "' needs more observations than parameters");

  const linalg::Projector projector(instrument_matrix(system.instruments, data));
  std::vector<PreparedEquation> prepared;
  EstimationResult first;
  first.method = Method::two_sls;
  first.n = static_cast<std::size_t>(n);
  for (const auto& spec : system.equations) {
    prepared.push_back(prepare(spec, data, projector));
    first.equations.push_back(two_sls_prepared(prepared.back(), n));
  }
  first.sigma = residual_covariance(first.equations, n);

  const auto m = static_cast<Eigen::Index>(prepared.size());
  Matrix sigma = options.sigma_override ? *options.sigma_override : first.sigma;
  if (sigma.rows() != m || sigma.cols() != m) throw ValidationError("3SLS: sigma override has the wrong shape");

  Matrix sigma_inv;
  try {
    sigma_inv = linalg::spd_inverse(sigma);
  } catch (const SingularError& e) {
    first.warnings.push_back(std::string("residual covariance is singular (") + e.what() +
                             "); reporting equation-by-equation 2SLS");
    return first;
  }

  std::vector<Eigen::Index> offset(static_cast<std::size_t>(m) + 1, 0);
  for (Eigen::Index i = 0; i < m; ++i)
    offset[static_cast<std::size_t>(i) + 1] = offset[static_cast<std::size_t>(i)] + prepared[static_cast<std::size_t>(i)].x.cols();
  const Eigen::Index total = offset.back();

  Matrix a = Matrix::Zero(total, total);
  Vector c = Vector::Zero(total);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& pi = prepared[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& pj = prepared[static_cast<std::size_t>(j)];
      const double w = sigma_inv(i, j);
      a.block(offset[static_cast<std::size_t>(i)], offset[static_cast<std::size_t>(j)], pi.x.cols(), pj.x.cols()) =
          w * (pi.x_hat.transpose() * pj.x_hat);
      c.segment(offset[static_cast<std::size_t>(i)], pi.x.cols()) += w * (pi.x_hat.transpose() * pj.y);
    }
  }
  const Matrix cov = scaled_spd_inverse(0.5 * (a + a.transpose()));
  const Vector delta = cov * c;

  EstimationResult out;
  out.method = Method::three_sls;
  out.n = static_cast<std::size_t>(n);
  out.sigma = first.sigma;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& pi = prepared[static_cast<std::size_t>(i)];
    const auto off = offset[static_cast<std::size_t>(i)];
    const Vector b = delta.segment(off, pi.x.cols());
    EquationResult eq;
    eq.name = pi.spec->name;
    eq.dependent = pi.spec->dependent;
    finish_equation(eq, pi.spec->regressors, b, cov.block(off, off, pi.x.cols(), pi.x.cols()), pi.y, pi.y - pi.x * b);
    out.equations.push_back(std::move(eq));
  }
  return out;
}

EstimationResult ols(const SystemSpec& system, const market::Dataset& data) { return ols(system, data.to_table()); }

EstimationResult two_sls(const SystemSpec& system, const market::Dataset& data) {
  return two_sls(system, data.to_table());
}

EstimationResult three_sls(const SystemSpec& system, const market::Dataset& data, const ThreeSlsOptions& options) {
  return three_sls(system, data.to_table(), options);
}

std::vector<IdentificationStatus> identification_check(const SystemSpec& system) {
  std::vector<IdentificationStatus> out;
  for (const auto& eq : system.equations) {
    IdentificationStatus s;
    s.equation = eq.name;
    for (const auto& z : system.instruments)
      if (!contains(eq.regressors, z)) ++s.excluded_exogenous;
    s.included_endogenous = static_cast<int>(eq.endogenous.size());
    if (s.excluded_exogenous < s.included_endogenous) s.status = Identification::under;
    else if (s.excluded_exogenous == s.included_endogenous) s.status = Identification::just;
    else s.status = Identification::over;
    out.push_back(s);
  }
  return out;
}

std::string format_table(const EstimationResult& result) {
  std::ostringstream os;
  char buf[160];
  os << to_string(result.method) << " estimation results (n = " << result.n << ")\n";
  std::snprintf(buf, sizeof buf, "%-12s %14s %16s %9s %7s\n", "", "Coefficient", "Standard error", "z", "P>z");
  os << buf;
  for (const auto& eq : result.equations) {
    std::string title = eq.name;
    if (!title.empty()) title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
    os << title << '\n';
    for (const auto& row : eq.coefficients) {
      const std::string label = row.name == kIntercept ? "Constant" : row.name;
      std::snprintf(buf, sizeof buf, "  %-10s %14.7g %16.7g %9.3f %7.3f\n", label.c_str(), row.estimate, row.se,
                    row.z, row.p);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "  R² %.4f    P(χ²) %.4f\n", eq.r2, eq.wald_p);
    os << buf;
  }
  for (const auto& w : result.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace spectrum::econometrics
