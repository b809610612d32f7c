#include "spectrum/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "spectrum/chart.hpp"
#include "spectrum/econometrics.hpp"
#include "spectrum/equilibrium.hpp"
#include "spectrum/errors.hpp"
#include "spectrum/json_io.hpp"
#include "spectrum/market_data.hpp"
#include "spectrum/montecarlo.hpp"
#include "spectrum/smra_auction.hpp"

namespace spectrum::cli {

namespace {

using json_io::Json;

// Reads a JSON input and converts it, naming the file in any error.
template <class Reader>
auto from_file(const std::string& path, Reader reader) {
  const auto j = json_io::read_file(path);
  try {
    return reader(j);
  } catch (const Error& e) {
    throw LoadError(path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw LoadError("cannot write '" + out_path + "'");
  out << text;
}

void emit_json(const Json& j, const std::string& out_path) { emit(j.dump(2) + "\n", out_path); }

std::string precise(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

equilibrium::StructuralParameters load_parameters(const std::string& path) {
  return path.empty() ? equilibrium::reference_parameters() : from_file(path, json_io::parameters_from_json);
}

equilibrium::ExogenousProfile load_profile(const std::string& path) {
  return path.empty() ? equilibrium::reference_means() : from_file(path, json_io::profile_from_json);
}

montecarlo::MomentTarget load_targets(const std::string& path) {
  return path.empty() ? montecarlo::reference_targets() : from_file(path, json_io::targets_from_json);
}

econometrics::SystemSpec load_system(const std::string& path) {
  return path.empty() ? econometrics::market_system() : from_file(path, json_io::system_from_json);
}

market::DomainCheck domain(bool lenient) {
  return lenient ? market::DomainCheck::finite_only : market::DomainCheck::strict;
}

Json market_report(const equilibrium::StructuralParameters& params, const equilibrium::ExogenousProfile& x,
                   std::optional<double> beta10) {
  params.validate();
  Json out;
  out["profile"] = json_io::to_json(x);
  out["equilibrium"] = json_io::to_json(equilibrium::solve_equilibrium(params, x));
  if (beta10) {
    equilibrium::ExternalityOptions opts;
    opts.beta10 = *beta10;
    out["externality_equilibrium"] = json_io::to_json(equilibrium::externality_fixed_point(params, x, opts));
  }
  const auto cs = equilibrium::comparative_statics(params);
  out["comparative_statics"] = {{"dp_dCL", cs.dp_dCL},
                                {"dq_dCL", cs.dq_dCL},
                                {"fee_raises_price_lowers_quantity", cs.fee_raises_price_lowers_quantity()}};
  out["reduced_form"] = json_io::to_json(equilibrium::reduced_form(params));
  return out;
}

std::string curves_csv(const equilibrium::StructuralParameters& params, equilibrium::ExogenousProfile x,
                       double cl_base, double cl_fee, int points) {
  if (points < 2) throw ValidationError("curves need at least 2 points");
  auto base = x;
  base.CL = cl_base;
  auto fee = x;
  fee.CL = cl_fee;
  const double p_hi = 1.5 * std::max({equilibrium::solve_equilibrium(params, base).p,
                                      equilibrium::solve_equilibrium(params, fee).p, 1.0});
  std::ostringstream os;
  os << "p,supply_base,supply_fee,demand\n";
  for (int i = 0; i < points; ++i) {
    const double p = p_hi * i / (points - 1);
    os << precise(p) << ',' << precise(equilibrium::supply_quantity(params, base, p)) << ','
       << precise(equilibrium::supply_quantity(params, fee, p)) << ','
       << precise(equilibrium::demand_quantity(params, x, p)) << '\n';
  }
  return os.str();
}

std::string diffusion_csv(const equilibrium::DiffusionPath& path) {
  std::ostringstream os;
  os << "t,q,p,g\n";
  for (const auto& s : path.steps)
    os << s.t << ',' << precise(s.q) << ',' << precise(s.p) << ',' << precise(s.g) << '\n';
  return os.str();
}

std::string replications_csv(const montecarlo::ExperimentReport& report) {
  std::ostringstream os;
  os << "replication,seed,ok";
  for (const auto& c : report.coefficients) os << ',' << c.equation << ':' << c.regressor;
  for (const auto& c : report.coefficients) os << ",se_" << c.equation << ':' << c.regressor;
  os << '\n';
  for (const auto& r : report.records) {
    os << r.index << ',' << r.seed << ',' << (r.ok ? 1 : 0);
    for (std::size_t k = 0; k < report.coefficients.size(); ++k)
      os << ',' << (r.ok ? precise(r.estimates[k]) : "nan");
    for (std::size_t k = 0; k < report.coefficients.size(); ++k)
      os << ',' << (r.ok ? precise(r.standard_errors[k]) : "nan");
    os << '\n';
  }
  return os.str();
}

std::string stats_table(const market::SummaryStats& stats) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %12s %14s %14s %12s %12s\n", "Variable", "Observations", "Mean",
                "Std. dev.", "Minimum", "Maximum");
  os << buf;
  for (const auto& v : stats) {
    std::snprintf(buf, sizeof buf, "%-8s %12zu %14.6g %14s %12.6g %12.6g\n", v.name.c_str(), v.count, v.mean,
                  v.sd ? std::to_string(*v.sd).c_str() : "n/a", v.min, v.max);
    os << buf;
  }
  return os.str();
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Spectrum licensing market laboratory", "spectrum-lab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // auction
  std::string config_path, bidders_path, out_path;
  std::uint64_t seed = 0;
  bool trace = false;
  auto* auction_cmd = app.add_subcommand("auction", "Run a simultaneous multiple-round auction");
  auction_cmd->add_option("--config", config_path, "Auction configuration JSON")->required()->check(CLI::ExistingFile);
  auction_cmd->add_option("--bidders", bidders_path, "Bidder list JSON")->required()->check(CLI::ExistingFile);
  auction_cmd->add_option("--seed", seed, "Tie-breaking seed")->required();
  auction_cmd->add_option("--out", out_path, "Output JSON (default stdout)");
  auction_cmd->add_flag("--trace", trace, "Include the per-round trace");

  // market
  auto* market_cmd = app.add_subcommand("market", "Fee arithmetic, concentration and market equilibrium");
  market_cmd->require_subcommand(1);
  std::string regimes_path, params_path, profile_path;
  auto* fees_cmd = market_cmd->add_subcommand("fees", "Licence cost totals and per-subscriber fees");
  fees_cmd->add_option("--regimes", regimes_path, "Licensing regimes JSON")->required()->check(CLI::ExistingFile);
  fees_cmd->add_option("--out", out_path, "Output JSON");
  std::vector<double> shares;
  auto* hhi_cmd = market_cmd->add_subcommand("hhi", "Herfindahl-Hirschman index of market shares");
  hhi_cmd->add_option("--shares", shares, "Fractional shares")->required()->delimiter(',');
  double upfront = 0.0, rate = 0.0;
  int years = 5;
  auto* annuity_cmd = market_cmd->add_subcommand("annuity", "Convert an upfront fee into level annual payments");
  annuity_cmd->add_option("--upfront", upfront)->required();
  annuity_cmd->add_option("--rate", rate)->required();
  annuity_cmd->add_option("--years", years)->required();
  std::optional<double> cl_override, beta10;
  auto* eq_cmd = market_cmd->add_subcommand("equilibrium", "Equilibrium, reduced form and fee effects");
  eq_cmd->add_option("--params", params_path, "Structural parameters JSON (default: reference estimates)");
  eq_cmd->add_option("--profile", profile_path, "Exogenous profile JSON (default: reference means)");
  eq_cmd->add_option("--cl", cl_override, "Override the licence fee per subscriber");
  eq_cmd->add_option("--beta10", beta10, "Network-externality coefficient");
  eq_cmd->add_option("--out", out_path, "Output JSON");
  double cl_base = 0.0, cl_fee = 400.0;
  int points = 41;
  auto* curves_cmd = market_cmd->add_subcommand("curves", "Supply/demand series with and without a fee");
  curves_cmd->add_option("--params", params_path);
  curves_cmd->add_option("--profile", profile_path);
  curves_cmd->add_option("--cl-base", cl_base, "Fee for the baseline supply curve");
  curves_cmd->add_option("--cl-fee", cl_fee, "Fee for the shifted supply curve");
  curves_cmd->add_option("--points", points, "Price grid points");
  curves_cmd->add_option("--out", out_path, "Output CSV");

  // diffusion
  equilibrium::DiffusionDynamics dyn;
  dyn.price_sensitivity = 0.002;
  int periods = 40;
  std::string scheme = "euler";
  auto* diffusion_cmd = app.add_subcommand("diffusion", "Logistic adoption path under the equilibrium price");
  diffusion_cmd->add_option("--params", params_path);
  diffusion_cmd->add_option("--profile", profile_path);
  diffusion_cmd->add_option("--cl", cl_override, "Override the licence fee per subscriber");
  diffusion_cmd->add_option("--periods", periods);
  diffusion_cmd->add_option("--rate", dyn.rate, "Intrinsic adoption rate");
  diffusion_cmd->add_option("--q0", dyn.q0, "Initial penetration");
  diffusion_cmd->add_option("--qbar0", dyn.saturation0, "Saturation level at zero price");
  diffusion_cmd->add_option("--eta", dyn.price_sensitivity, "Price sensitivity of saturation");
  diffusion_cmd->add_option("--scheme", scheme, "euler or exact")->check(CLI::IsMember({"euler", "exact"}));
  diffusion_cmd->add_option("--out", out_path, "Output CSV");

  // gen-data
  std::string targets_path;
  std::size_t n = 18;
  bool truncate = false, keep_outcomes = false;
  auto* gen_cmd = app.add_subcommand("gen-data", "Synthetic dataset with target exogenous moments");
  gen_cmd->add_option("--targets", targets_path, "Moment targets JSON (default: reference moments)");
  gen_cmd->add_option("--params", params_path, "Structural parameters JSON (default: reference estimates)");
  gen_cmd->add_option("--n", n, "Observations");
  gen_cmd->add_option("--seed", seed)->required();
  gen_cmd->add_flag("--truncate", truncate, "Resample exogenous draws into the target ranges");
  gen_cmd->add_flag("--keep-out-of-domain", keep_outcomes, "Keep rows whose qS falls outside (0, 1]");
  gen_cmd->add_option("--out", out_path, "Output CSV");

  // estimate
  std::string method, data_path, spec_path, format = "json";
  bool lenient = false;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate a linear system by OLS, 2SLS or 3SLS");
  est_cmd->add_option("method", method, "ols, 2sls or 3sls")->required()->check(CLI::IsMember({"ols", "2sls", "3sls"}));
  est_cmd->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  est_cmd->add_option("--spec", spec_path, "Model specification JSON (default: supply/demand system)");
  est_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));
  est_cmd->add_flag("--lenient", lenient, "Only require finite values (synthetic data)");
  est_cmd->add_option("--out", out_path);

  // montecarlo
  std::size_t replications = 100;
  unsigned threads = 1;
  std::string csv_path;
  bool resample_outcomes = false;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Parameter-recovery experiment for the 3SLS estimator");
  mc_cmd->add_option("--targets", targets_path);
  mc_cmd->add_option("--params", params_path, "Truth (default: reference estimates)");
  mc_cmd->add_option("--n", n);
  mc_cmd->add_option("--replications", replications);
  mc_cmd->add_option("--seed", seed)->required();
  mc_cmd->add_option("--threads", threads);
  mc_cmd->add_flag("--resample-outcomes", resample_outcomes, "Redraw shocks for out-of-domain qS");
  mc_cmd->add_option("--out", out_path, "Report JSON");
  mc_cmd->add_option("--csv", csv_path, "Per-replication estimates CSV");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Summary statistics and correlations of a dataset");
  stats_cmd->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));
  stats_cmd->add_flag("--lenient", lenient);
  stats_cmd->add_option("--out", out_path);

  // replicate
  auto* rep_cmd = app.add_subcommand("replicate", "Synthetic data -> 3SLS -> fee hypothesis report");
  rep_cmd->add_option("--seed", seed)->required();
  rep_cmd->add_option("--out", out_path, "Output directory")->required();
  rep_cmd->add_option("--n", n);
  rep_cmd->add_option("--targets", targets_path);
  rep_cmd->add_option("--params", params_path);

  // chart
  std::vector<std::string> series;
  std::string kind, column = "supply:CL";
  auto* chart_cmd = app.add_subcommand("chart", "Render a series file as SVG");
  chart_cmd->add_option("--series", series, "Series CSV (repeat for several diffusion paths)")->required();
  chart_cmd->add_option("--kind", kind)->required()->check(CLI::IsMember({"supply-demand", "diffusion", "mc-histogram"}));
  chart_cmd->add_option("--column", column, "Column for mc-histogram");
  chart_cmd->add_option("--out", out_path, "Output SVG")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*auction_cmd) {
      const auto config = from_file(config_path, json_io::auction_config_from_json);
      const auto bidders = from_file(bidders_path, [&](const Json& j) { return json_io::bidders_from_json(j, config.licenses.size()); });
      const auto outcome = auction::run_auction(config, bidders, seed, auction::straightforward_bid, trace);
      emit_json(json_io::to_json(outcome, trace), out_path);
      if (!outcome.quiescent) std::cerr << "warning: max_rounds reached before quiescence\n";
    } else if (*fees_cmd) {
      Json out = Json::array();
      for (const auto& r : from_file(regimes_path, json_io::regimes_from_json)) out.push_back(json_io::to_json(r));
      emit_json(out, out_path);
    } else if (*hhi_cmd) {
      std::cout << precise(market::hhi(shares)) << '\n';
    } else if (*annuity_cmd) {
      std::cout << precise(market::annuitize(upfront, rate, years)) << '\n';
    } else if (*eq_cmd) {
      auto x = load_profile(profile_path);
      if (cl_override) x.CL = *cl_override;
      emit_json(market_report(load_parameters(params_path), x, beta10), out_path);
    } else if (*curves_cmd) {
      const auto params = load_parameters(params_path);
      params.validate();
      emit(curves_csv(params, load_profile(profile_path), cl_base, cl_fee, points), out_path);
    } else if (*diffusion_cmd) {
      const auto params = load_parameters(params_path);
      params.validate();
      auto x = load_profile(profile_path);
      if (cl_override) x.CL = *cl_override;
      dyn.scheme = scheme == "exact" ? equilibrium::DiffusionScheme::exact : equilibrium::DiffusionScheme::euler;
      const auto path = equilibrium::simulate_diffusion(params, x, dyn, periods);
      if (path.saturated_start) std::cerr << "warning: q0 is at or above saturation; growth is not positive\n";
      emit(diffusion_csv(path), out_path);
    } else if (*gen_cmd) {
      montecarlo::GenerationOptions opts;
      opts.truncate = truncate;
      opts.outcomes = keep_outcomes ? montecarlo::OutcomePolicy::keep : montecarlo::OutcomePolicy::resample;
      const auto gen = montecarlo::generate(load_targets(targets_path), load_parameters(params_path), n, seed, opts);
      std::ostringstream os;
      market::save_dataset(os, gen.data);
      emit(os.str(), out_path);
      if (gen.out_of_domain_rows > 0)
        std::cerr << "warning: " << gen.out_of_domain_rows
                  << " rows fall outside the observation ranges; read them back with --lenient\n";
    } else if (*est_cmd) {
      const auto data = market::load_dataset_file(data_path, domain(lenient));
      const auto system = load_system(spec_path);
      econometrics::EstimationResult result;
      if (method == "ols") result = econometrics::ols(system, data);
      else if (method == "2sls") result = econometrics::two_sls(system, data);
      else result = econometrics::three_sls(system, data);
      if (format == "table") emit(econometrics::format_table(result), out_path);
      else {
        Json j = json_io::to_json(result);
        j["identification"] = json_io::to_json(econometrics::identification_check(system));
        emit_json(j, out_path);
      }
    } else if (*mc_cmd) {
      montecarlo::ExperimentOptions opts;
      opts.threads = threads;
      if (resample_outcomes) opts.generation.outcomes = montecarlo::OutcomePolicy::resample;
      const auto report = montecarlo::recovery_experiment(load_targets(targets_path), load_parameters(params_path), n,
                                                          replications, seed, opts);
      emit_json(json_io::to_json(report), out_path);
      if (!csv_path.empty()) emit(replications_csv(report), csv_path);
    } else if (*stats_cmd) {
      const auto data = market::load_dataset_file(data_path, domain(lenient));
      const auto stats = market::summary_stats(data);
      if (format == "table") {
        emit(stats_table(stats), out_path);
      } else {
        Json j{{"summary", json_io::to_json(stats)}};
        if (data.size() >= 3) j["correlation"] = json_io::to_json(market::correlation(data));
        emit_json(j, out_path);
      }
    } else if (*rep_cmd) {
      namespace fs = std::filesystem;
      fs::create_directories(out_path);
      const auto targets = load_targets(targets_path);
      const auto truth = load_parameters(params_path);
      const auto system = econometrics::market_system();
      const auto data = montecarlo::gen_data(targets, truth, n, seed);
      market::save_dataset_file((fs::path(out_path) / "dataset.csv").string(), data);
      const auto fit = econometrics::three_sls(system, data);
      Json estimates = json_io::to_json(fit);
      estimates["identification"] = json_io::to_json(econometrics::identification_check(system));
      json_io::write_file((fs::path(out_path) / "estimates.json").string(), estimates);
      emit(econometrics::format_table(fit), (fs::path(out_path) / "table.txt").string());
      Json hyp = json_io::to_json(montecarlo::hypothesis_report(fit));
      hyp["seed"] = seed;
      hyp["n"] = n;
      json_io::write_file((fs::path(out_path) / "hypothesis.json").string(), hyp);
    } else if (*chart_cmd) {
      std::vector<Table> tables;
      for (const auto& s : series) tables.push_back(chart::read_series_file(s));
      std::string svg;
      switch (chart::kind_from_string(kind)) {
        case chart::Kind::supply_demand: svg = chart::render_supply_demand(tables.front()); break;
        case chart::Kind::diffusion: {
          std::vector<std::string> labels;
          for (const auto& s : series) labels.push_back(std::filesystem::path(s).stem().string());
          svg = chart::render_diffusion(tables, labels);
          break;
        }
        case chart::Kind::mc_histogram: svg = chart::render_histogram(tables.front(), column); break;
      }
      emit(svg, out_path);
    }
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitError;
  }
  return kExitOk;
}

}  // namespace spectrum::cli
