#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spectrum/econometrics.hpp"
#include "spectrum/equilibrium.hpp"
#include "spectrum/errors.hpp"
#include "spectrum/json_io.hpp"
#include "spectrum/market_data.hpp"
#include "spectrum/montecarlo.hpp"
#include "spectrum/smra_auction.hpp"

namespace py = pybind11;
using namespace spectrum;

namespace {

// Structured results cross the boundary as JSON text; the Python side
// turns them into dicts.
std::string dumps(const json_io::Json& j) { return j.dump(); }

market::Dataset dataset_from_columns(const std::map<std::string, Eigen::VectorXd>& cols, bool lenient) {
  std::size_t n = 0;
  for (auto v : market::kVariables) {
    const auto it = cols.find(std::string(v));
    if (it == cols.end()) throw LoadError("missing column", std::nullopt, std::string(v));
    n = static_cast<std::size_t>(it->second.size());
  }
  std::vector<market::MarketObservation> rows(n);
  for (auto v : market::kVariables) {
    const auto& c = cols.at(std::string(v));
    if (static_cast<std::size_t>(c.size()) != n) throw ValidationError("columns differ in length");
    for (std::size_t i = 0; i < n; ++i) rows[i].set(v, c(static_cast<Eigen::Index>(i)));
  }
  return market::Dataset(std::move(rows), {}, lenient ? market::DomainCheck::finite_only : market::DomainCheck::strict);
}

std::map<std::string, Eigen::VectorXd> columns_of(const market::Dataset& d) {
  std::map<std::string, Eigen::VectorXd> out;
  for (auto v : market::kVariables) out[std::string(v)] = d.column(v);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectrum licensing market laboratory";

  static py::handle base = py::exception<Error>(m, "SpectrumError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), (std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  m.def("total_cost_horizon", &market::total_cost_horizon, py::arg("initial"), py::arg("recurring"), py::arg("years"));
  m.def("fee_per_subscriber", &market::fee_per_subscriber, py::arg("total"), py::arg("subscribers"));
  m.def("annuitize", &market::annuitize, py::arg("upfront"), py::arg("rate"), py::arg("years"));
  m.def("hhi", [](const std::vector<double>& s) { return market::hhi(s); }, py::arg("shares"));

  py::class_<equilibrium::StructuralParameters>(m, "StructuralParameters")
      .def(py::init<>())
      .def_readwrite("alpha0", &equilibrium::StructuralParameters::alpha0)
      .def_readwrite("alpha1", &equilibrium::StructuralParameters::alpha1)
      .def_readwrite("beta", &equilibrium::StructuralParameters::beta)
      .def_readwrite("sigma", &equilibrium::StructuralParameters::sigma)
      .def("validate", &equilibrium::StructuralParameters::validate);
  m.def("reference_parameters", &equilibrium::reference_parameters);

  py::class_<equilibrium::ExogenousProfile>(m, "ExogenousProfile")
      .def(py::init([](double CL, double COMP, double POPD, double W, double INC, double pF, double TDF) {
             return equilibrium::ExogenousProfile{CL, COMP, POPD, W, INC, pF, TDF};
           }),
           py::arg("CL") = 0.0, py::arg("COMP") = 0.0, py::arg("POPD") = 0.0, py::arg("W") = 0.0,
           py::arg("INC") = 0.0, py::arg("pF") = 0.0, py::arg("TDF") = 0.0)
      .def_readwrite("CL", &equilibrium::ExogenousProfile::CL)
      .def_readwrite("COMP", &equilibrium::ExogenousProfile::COMP)
      .def_readwrite("POPD", &equilibrium::ExogenousProfile::POPD)
      .def_readwrite("W", &equilibrium::ExogenousProfile::W)
      .def_readwrite("INC", &equilibrium::ExogenousProfile::INC)
      .def_readwrite("pF", &equilibrium::ExogenousProfile::pF)
      .def_readwrite("TDF", &equilibrium::ExogenousProfile::TDF);
  m.def("reference_means", &equilibrium::reference_means);

  py::class_<equilibrium::EquilibriumPoint>(m, "EquilibriumPoint")
      .def_readonly("p", &equilibrium::EquilibriumPoint::p)
      .def_readonly("q", &equilibrium::EquilibriumPoint::q)
      .def_readonly("iterations", &equilibrium::EquilibriumPoint::iterations)
      .def_readonly("warning", &equilibrium::EquilibriumPoint::warning)
      .def_property_readonly("in_domain", &equilibrium::EquilibriumPoint::in_domain);
  m.def(
      "solve_equilibrium",
      [](const equilibrium::StructuralParameters& p, const equilibrium::ExogenousProfile& x, double e1, double e2) {
        return equilibrium::solve_equilibrium(p, x, {e1, e2});
      },
      py::arg("params"), py::arg("profile"), py::arg("supply_shock") = 0.0, py::arg("demand_shock") = 0.0);
  m.def(
      "comparative_statics",
      [](const equilibrium::StructuralParameters& p) {
        const auto c = equilibrium::comparative_statics(p);
        return py::make_tuple(c.dp_dCL, c.dq_dCL);
      },
      py::arg("params"), "Returns (dp/dCL, dq/dCL).");
  m.def("_reduced_form", [](const equilibrium::StructuralParameters& p) { return dumps(json_io::to_json(equilibrium::reduced_form(p))); });
  m.def(
      "externality_fixed_point",
      [](const equilibrium::StructuralParameters& p, const equilibrium::ExogenousProfile& x, double beta10) {
        equilibrium::ExternalityOptions o;
        o.beta10 = beta10;
        return equilibrium::externality_fixed_point(p, x, o);
      },
      py::arg("params"), py::arg("profile"), py::arg("beta10"));

  m.def("_run_auction", [](const std::string& config, const std::string& bidders, std::uint64_t seed, bool trace) {
    const auto c = json_io::auction_config_from_json(json_io::Json::parse(config));
    const auto b = json_io::bidders_from_json(json_io::Json::parse(bidders), c.licenses.size());
    return dumps(json_io::to_json(auction::run_auction(c, b, seed, auction::straightforward_bid, trace), trace));
  });

  m.def("_ols", [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x, std::vector<std::string> names) {
    econometrics::EstimationResult r;
    r.method = econometrics::Method::ols;
    r.n = static_cast<std::size_t>(y.size());
    r.equations.push_back(econometrics::ols(y, x, std::move(names)));
    r.sigma = Eigen::MatrixXd::Constant(1, 1, r.equations[0].ssr / static_cast<double>(y.size()));
    return dumps(json_io::to_json(r));
  });
  m.def("_estimate", [](const std::string& method, const std::map<std::string, Eigen::VectorXd>& cols, bool lenient) {
    const auto data = dataset_from_columns(cols, lenient);
    const auto sys = econometrics::market_system();
    econometrics::EstimationResult r;
    if (method == "ols") r = econometrics::ols(sys, data);
    else if (method == "2sls") r = econometrics::two_sls(sys, data);
    else if (method == "3sls") r = econometrics::three_sls(sys, data);
    else throw ValidationError("unknown method '" + method + "'");
    json_io::Json j = json_io::to_json(r);
    j["hypothesis"] = json_io::to_json(montecarlo::hypothesis_report(r));
    return dumps(j);
  });

  m.def(
      "gen_data",
      [](std::size_t n, std::uint64_t seed, const equilibrium::StructuralParameters* params) {
        return columns_of(montecarlo::gen_data(montecarlo::reference_targets(),
                                               params ? *params : equilibrium::reference_parameters(), n, seed));
      },
      py::arg("n"), py::arg("seed"), py::arg("params") = nullptr,
      "Synthetic dataset with the reference moments; returns a dict of numpy columns.");

  m.def("_recovery_experiment", [](std::size_t n, std::size_t replications, std::uint64_t seed, unsigned threads) {
    montecarlo::ExperimentOptions o;
    o.threads = threads;
    py::gil_scoped_release release;
    return dumps(json_io::to_json(montecarlo::recovery_experiment(
        montecarlo::reference_targets(), equilibrium::reference_parameters(), n, replications, seed, o)));
  });
}
