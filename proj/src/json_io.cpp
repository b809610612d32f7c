#include "spectrum/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "spectrum/errors.hpp"

namespace spectrum::json_io {

namespace {

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw LoadError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw LoadError(std::string("key '") + key + "' has the wrong type");
  }
}

template <typename T>
T optional_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw LoadError(std::string("key '") + key + "' has the wrong type");
  }
}

// NaN/inf are not representable in JSON; emit null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json matrix_json(const linalg::Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Json read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw LoadError("malformed JSON in '" + path + "' at line " + std::to_string(line));
  }
}

void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::vector<market::LicenseRegime> regimes_from_json(const Json& j) {
  const Json& list = j.is_object() && j.contains("regimes") ? j.at("regimes") : j;
  if (!list.is_array()) throw LoadError("expected a list of licensing regimes");
  std::vector<market::LicenseRegime> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    market::LicenseRegime r;
    try {
      r.country = required<std::string>(e, "country");
      r.initial_payment = required<double>(e, "initial");
      r.recurring_annual_fee = optional_or<double>(e, "recurring", 0.0);
      r.horizon_years = optional_or<int>(e, "years", 5);
      if (e.contains("subscribers") && !e.at("subscribers").is_null())
        r.subscribers = required<std::int64_t>(e, "subscribers");
      r.method = market::licensing_method_from_string(optional_or<std::string>(e, "method", "administrative"));
      r.validate();
    } catch (const Error& err) {
      throw LoadError("regime " + std::to_string(i + 1) + ": " + err.what());
    }
    out.push_back(r);
  }
  return out;
}

Json to_json(const market::LicenseRegime& r) {
  Json j{{"country", r.country},
         {"initial", r.initial_payment},
         {"recurring", r.recurring_annual_fee},
         {"years", r.horizon_years},
         {"method", std::string(market::to_string(r.method))},
         {"total", r.total_cost()}};
  j["subscribers"] = r.subscribers ? Json(*r.subscribers) : Json(nullptr);
  const auto fee = r.fee_per_subscriber_usd();
  j["fee_per_subscriber_usd"] = fee ? Json(*fee) : Json(nullptr);
  return j;
}

auction::AuctionConfig auction_config_from_json(const Json& j) {
  auction::AuctionConfig c;
  c.licenses = required<std::vector<std::string>>(j, "licenses");
  c.opening_price = optional_or<double>(j, "opening", 0.0);
  c.increment = optional_or<double>(j, "increment", 1.0);
  c.activity_fraction = optional_or<double>(j, "activity", 1.0);
  c.max_rounds = optional_or<int>(j, "max_rounds", 1000);
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw LoadError(std::string("auction config: ") + e.what());
  }
  return c;
}

std::vector<auction::Bidder> bidders_from_json(const Json& j, std::size_t license_count) {
  const Json& list = j.is_object() && j.contains("bidders") ? j.at("bidders") : j;
  if (!list.is_array()) throw LoadError("expected a list of bidders");
  std::vector<auction::Bidder> out;
  for (const auto& e : list) {
    auction::Bidder b;
    b.id = required<std::string>(e, "id");
    b.valuations = required<std::map<std::string, double>>(e, "valuations");
    b.eligibility = optional_or<int>(e, "eligibility", static_cast<int>(license_count));
    b.demand_cap = optional_or<int>(e, "demand_cap", 1);
    out.push_back(std::move(b));
  }
  return out;
}

Json to_json(const auction::AuctionOutcome& o, bool include_trace) {
  Json licenses = Json::array();
  for (std::size_t j = 0; j < o.licenses.size(); ++j) {
    licenses.push_back({{"license", o.licenses[j]},
                        {"winner", o.winners[j] ? Json(*o.winners[j]) : Json(nullptr)},
                        {"price", o.prices[j]}});
  }
  Json out{{"licenses", licenses},
           {"revenue", o.revenue},
           {"rounds_used", o.rounds_used},
           {"quiescent", o.quiescent}};
  if (include_trace) {
    Json trace = Json::array();
    for (const auto& r : o.trace) {
      Json standing = Json::array();
      for (const auto& s : r.standing)
        standing.push_back({{"price", s.price}, {"bidder", s.bidder ? Json(*s.bidder) : Json(nullptr)}});
      trace.push_back({{"round", r.round}, {"new_bids", r.new_bids}, {"standing", standing}, {"eligibility", r.eligibility}});
    }
    out["trace"] = trace;
  }
  return out;
}

equilibrium::StructuralParameters parameters_from_json(const Json& j) {
  equilibrium::StructuralParameters p;
  p.alpha0 = required<double>(j, "alpha0");
  p.alpha1 = required<double>(j, "alpha1");
  const auto beta = required<std::vector<double>>(j, "beta");
  if (beta.size() != 9) throw LoadError("'beta' must hold 9 coefficients");
  std::copy(beta.begin(), beta.end(), p.beta.begin());
  if (j.contains("sigma")) {
    const auto s = required<std::vector<std::vector<double>>>(j, "sigma");
    if (s.size() != 2 || s[0].size() != 2 || s[1].size() != 2) throw LoadError("'sigma' must be 2x2");
    p.sigma << s[0][0], s[0][1], s[1][0], s[1][1];
  }
  return p;
}

Json to_json(const equilibrium::StructuralParameters& p) {
  return {{"alpha0", p.alpha0},
          {"alpha1", p.alpha1},
          {"beta", std::vector<double>(p.beta.begin(), p.beta.end())},
          {"sigma", {{p.sigma(0, 0), p.sigma(0, 1)}, {p.sigma(1, 0), p.sigma(1, 1)}}}};
}

equilibrium::ExogenousProfile profile_from_json(const Json& j) {
  return {.CL = required<double>(j, "CL"),
          .COMP = required<double>(j, "COMP"),
          .POPD = required<double>(j, "POPD"),
          .W = required<double>(j, "W"),
          .INC = required<double>(j, "INC"),
          .pF = required<double>(j, "pF"),
          .TDF = required<double>(j, "TDF")};
}

Json to_json(const equilibrium::ExogenousProfile& x) {
  return {{"CL", x.CL}, {"COMP", x.COMP}, {"POPD", x.POPD}, {"W", x.W}, {"INC", x.INC}, {"pF", x.pF}, {"TDF", x.TDF}};
}

Json to_json(const equilibrium::EquilibriumPoint& e) {
  Json j{{"p", number(e.p)}, {"q", number(e.q)}, {"in_domain", e.in_domain()}, {"iterations", e.iterations}};
  j["warning"] = e.warning ? Json(*e.warning) : Json(nullptr);
  return j;
}

Json to_json(const equilibrium::ReducedForm& rf) {
  static const char* names[] = {"CL", "COMP", "POPD", "W", "INC", "pF", "TDF"};
  Json coefficients = Json::object();
  Json xi = Json::array();
  for (std::size_t i = 0; i < 7; ++i) {
    coefficients[names[i]] = rf.coefficients[i];
    xi.push_back(rf.xi[i]);
  }
  return {{"gamma", rf.gamma}, {"coefficients", coefficients}, {"xi", xi}, {"slope_gap", rf.slope_gap}};
}

econometrics::SystemSpec system_from_json(const Json& j) {
  econometrics::SystemSpec s;
  const auto eqs = required<Json>(j, "equations");
  if (!eqs.is_array()) throw LoadError("'equations' must be a list");
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    econometrics::EquationSpec e;
    e.name = optional_or<std::string>(eqs[i], "name", "eq" + std::to_string(i + 1));
    e.dependent = required<std::string>(eqs[i], "dependent");
    e.regressors = required<std::vector<std::string>>(eqs[i], "regressors");
    e.endogenous = optional_or<std::vector<std::string>>(eqs[i], "endogenous", {});
    s.equations.push_back(std::move(e));
  }
  s.instruments = required<std::vector<std::string>>(j, "instruments");
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw LoadError(std::string("model specification: ") + e.what());
  }
  return s;
}

Json to_json(const econometrics::SystemSpec& s) {
  Json eqs = Json::array();
  for (const auto& e : s.equations)
    eqs.push_back({{"name", e.name}, {"dependent", e.dependent}, {"regressors", e.regressors}, {"endogenous", e.endogenous}});
  return {{"equations", eqs}, {"instruments", s.instruments}};
}

Json to_json(const econometrics::EstimationResult& r) {
  Json eqs = Json::array();
  for (const auto& e : r.equations) {
    Json rows = Json::array();
    for (const auto& c : e.coefficients)
      rows.push_back({{"name", c.name}, {"coefficient", number(c.estimate)}, {"se", number(c.se)},
                      {"z", number(c.z)}, {"p", number(c.p)}});
    eqs.push_back({{"name", e.name},
                   {"dependent", e.dependent},
                   {"coefficients", rows},
                   {"r2", number(e.r2)},
                   {"wald_chi2", number(e.wald_chi2)},
                   {"wald_df", e.wald_df},
                   {"wald_p", number(e.wald_p)}});
  }
  return {{"method", std::string(econometrics::to_string(r.method))},
          {"n", r.n},
          {"equations", eqs},
          {"sigma", matrix_json(r.sigma)},
          {"warnings", r.warnings}};
}

Json to_json(const std::vector<econometrics::IdentificationStatus>& s) {
  Json out = Json::array();
  for (const auto& e : s)
    out.push_back({{"equation", e.equation},
                   {"status", std::string(econometrics::to_string(e.status))},
                   {"excluded_exogenous", e.excluded_exogenous},
                   {"included_endogenous", e.included_endogenous}});
  return out;
}

montecarlo::MomentTarget targets_from_json(const Json& j) {
  montecarlo::MomentTarget t;
  const auto vars = required<Json>(j, "variables");
  for (std::size_t i = 0; i < montecarlo::kExogenous.size(); ++i) {
    const std::string name(montecarlo::kExogenous[i]);
    if (!vars.contains(name)) throw LoadError("moment target missing variable '" + name + "'");
    const auto& v = vars.at(name);
    t.marginals[i] = {required<double>(v, "mean"), required<double>(v, "sd"), required<double>(v, "min"),
                      required<double>(v, "max")};
  }
  const auto corr = required<Json>(j, "correlation");
  const auto order = required<std::vector<std::string>>(corr, "order");
  const auto matrix = required<std::vector<std::vector<double>>>(corr, "matrix");
  if (order.size() != 7 || matrix.size() != 7) throw LoadError("correlation target must be 7x7");
  std::vector<std::size_t> index;
  for (const auto& name : order) {
    const auto it = std::find(montecarlo::kExogenous.begin(), montecarlo::kExogenous.end(), name);
    if (it == montecarlo::kExogenous.end()) throw LoadError("unknown variable '" + name + "' in correlation order");
    index.push_back(static_cast<std::size_t>(it - montecarlo::kExogenous.begin()));
  }
  for (std::size_t a = 0; a < 7; ++a) {
    if (matrix[a].size() != 7) throw LoadError("correlation target must be 7x7");
    for (std::size_t b = 0; b < 7; ++b)
      t.correlation(static_cast<Eigen::Index>(index[a]), static_cast<Eigen::Index>(index[b])) = matrix[a][b];
  }
  try {
    t.validate();
  } catch (const ValidationError& e) {
    throw LoadError(std::string("moment target: ") + e.what());
  }
  return t;
}

Json to_json(const montecarlo::MomentTarget& t) {
  Json vars = Json::object();
  for (std::size_t i = 0; i < montecarlo::kExogenous.size(); ++i) {
    const auto& m = t.marginals[i];
    vars[std::string(montecarlo::kExogenous[i])] = {{"mean", m.mean}, {"sd", m.sd}, {"min", m.min}, {"max", m.max}};
  }
  std::vector<std::string> order(montecarlo::kExogenous.begin(), montecarlo::kExogenous.end());
  return {{"variables", vars}, {"correlation", {{"order", order}, {"matrix", matrix_json(t.correlation)}}}};
}

Json to_json(const montecarlo::ExperimentReport& r) {
  Json coefs = Json::array();
  for (const auto& c : r.coefficients)
    coefs.push_back({{"equation", c.equation},
                     {"regressor", c.regressor},
                     {"truth", c.truth},
                     {"mean_estimate", number(c.mean_estimate)},
                     {"mean_abs_error", number(c.mean_abs_error)},
                     {"coverage95", number(c.coverage)},
                     {"sign_agreement", number(c.sign_agreement)}});
  return {{"n", r.n},
          {"replications", r.replications},
          {"failures", r.failures},
          {"seed", r.seed},
          {"seed_scheme", r.seed_scheme},
          {"coefficients", coefs}};
}

Json to_json(const montecarlo::HypothesisReport& h) {
  return {{"hypothesis", "fee raises price (dp/dCL > 0) and lowers quantity (dq/dCL < 0)"},
          {"verdict", std::string(montecarlo::to_string(h.verdict))},
          {"dp_dCL", number(h.dp_dCL)},
          {"dq_dCL", number(h.dq_dCL)},
          {"z", {{"supply_pW", number(h.z_supply_price)}, {"supply_CL", number(h.z_fee)}, {"demand_pW", number(h.z_demand_price)}}},
          {"note", h.note}};
}

Json to_json(const market::SummaryStats& s) {
  Json out = Json::array();
  for (const auto& v : s) {
    out.push_back({{"variable", v.name},
                   {"observations", v.count},
                   {"mean", number(v.mean)},
                   {"sd", v.sd ? number(*v.sd) : Json(nullptr)},
                   {"min", number(v.min)},
                   {"max", number(v.max)}});
  }
  return out;
}

Json to_json(const market::CorrelationMatrix& c) {
  return {{"variables", c.names}, {"matrix", matrix_json(c.values)}};
}

}  // namespace spectrum::json_io
