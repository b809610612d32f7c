// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "spectrum/econometrics.hpp"
#include "spectrum/equilibrium.hpp"
#include "spectrum/market_data.hpp"
#include "spectrum/montecarlo.hpp"
#include "spectrum/smra_auction.hpp"

using namespace spectrum;
namespace fs = std::filesystem;
using linalg::Matrix;
using linalg::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> vec_of(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// 1 ---------------------------------------------------------------------------
Outcome fee_arithmetic() {
  struct Row {
    const char* name;
    double initial, recurring, published, tol;
  };
  const Row rows[] = {{"Belgium", 198882, 900, 203382, 0},
                      {"Denmark", 0, 30, 150, 0},
                      {"France", 135, 5969, 29978, 2},
                      {"Netherlands", 0, 95, 475, 0},
                      {"Germany", 0, 0, 0, 0}};
  Outcome o{true, ""};
  for (const auto& r : rows) {
    const double t = market::total_cost_horizon(r.initial, r.recurring, 5);
    const bool ok = std::abs(t - r.published) <= r.tol;
    o.pass = o.pass && ok;
    o.detail += std::string(r.name) + "=" + fmt("%.0f", t) + (ok ? " " : "(!) ");
  }
  o.detail += "; Austria excluded (published total inconsistent with initial + 5 x recurring)";
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome hhi_identities() {
  bool ok = market::hhi(std::vector<double>{1.0}) == 10000.0;
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const std::vector<double> s(static_cast<std::size_t>(k), 1.0 / k);
    worst = std::max(worst, std::abs(market::hhi(s) - 10000.0 / k));
  }
  // equal shares 1/k only exist up to rounding in binary, so "exact" is
  // checked at the level of the representation: within 1e-9 points
  ok = ok && worst <= 1e-9;
  return {ok, "monopoly=10000, max |hhi(1/k) - 10000/k| over k=1..10 = " + fmt("%.3g", worst)};
}

// 3 ---------------------------------------------------------------------------
Table simultaneous_market(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Vector q(static_cast<Eigen::Index>(n)), p(q.size()), zs(q.size()), zd(q.size()), zx(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    zs(i) = nd(gen);
    zd(i) = nd(gen);
    zx(i) = nd(gen);
    const double us = 0.5 * nd(gen), ud = 0.5 * nd(gen) + 0.3 * us;
    p(i) = oracle::clearing_price(1.0 + 0.8 * zs(i), 1.0, us, 2.0 + 0.5 * zd(i) + 0.2 * zx(i), -1.0, ud);
    q(i) = 1.0 + p(i) + 0.8 * zs(i) + us;
  }
  Table t;
  t.add_column("q", q);
  t.add_column("p", p);
  t.add_column("zs", zs);
  t.add_column("zd", zd);
  t.add_column("zx", zx);
  return t;
}

Outcome estimator_oracles() {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  double worst_ols = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 30 + rep, k = 2 + rep % 5;
    Matrix x(n, k);
    Vector y(n);
    oracle::Rows rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (int j = 1; j < k; ++j) x(i, j) = nd(gen);
      y(i) = nd(gen);
      for (int j = 0; j < k; ++j) {
        y(i) += 0.5 * (j + 1) * x(i, j);
        rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x(i, j);
      }
    }
    const auto fit = econometrics::ols(y, x);
    worst_ols = std::max(worst_ols, oracle::max_rel_diff(vec_of(fit.estimates()), oracle::normal_equations(rows, vec_of(y))));
  }

  econometrics::SystemSpec sys;
  sys.equations.push_back({"supply", "q", {"p", "zs", "const"}, {"p"}});
  sys.equations.push_back({"demand", "q", {"p", "zd", "zx", "const"}, {"p"}});
  sys.instruments = {"zs", "zd", "zx", "const"};
  const auto t = simultaneous_market(2000, 4);
  econometrics::ThreeSlsOptions identity;
  identity.sigma_override = Matrix::Identity(2, 2);
  const auto a = econometrics::three_sls(sys, t, identity);
  const auto b = econometrics::two_sls(sys, t);
  double worst_iv = 0.0;
  for (std::size_t e = 0; e < 2; ++e)
    worst_iv = std::max(worst_iv, oracle::max_rel_diff(vec_of(a.equations[e].estimates()), vec_of(b.equations[e].estimates())));

  econometrics::SystemSpec sur;
  sur.equations.push_back({"one", "q", {"zs", "zd", "const"}, {}});
  sur.equations.push_back({"two", "p", {"zs", "zd", "const"}, {}});
  sur.instruments = {"zs", "zd", "const"};
  const auto c = econometrics::three_sls(sur, t);
  const auto d = econometrics::ols(sur, t);
  double worst_sur = 0.0;
  for (std::size_t e = 0; e < 2; ++e)
    worst_sur = std::max(worst_sur, oracle::max_rel_diff(vec_of(c.equations[e].estimates()), vec_of(d.equations[e].estimates())));

  const bool ok = worst_ols <= 1e-10 && worst_iv <= 1e-10 && worst_sur <= 1e-10;
  return {ok, "OLS vs normal equations " + fmt("%.2g", worst_ols) + ", 3SLS(I) vs 2SLS " + fmt("%.2g", worst_iv) +
                  ", SUR vs OLS " + fmt("%.2g", worst_sur) + " (max relative, limit 1e-10)"};
}

// 4 ---------------------------------------------------------------------------
Outcome identification() {
  const auto s = econometrics::identification_check(econometrics::market_system());
  const bool ok = s.size() == 2 && s[0].status == econometrics::Identification::over && s[0].excluded_exogenous == 3 &&
                  s[0].included_endogenous == 1 && s[1].status == econometrics::Identification::over &&
                  s[1].excluded_exogenous == 4 && s[1].included_endogenous == 1;
  std::string d;
  for (const auto& e : s)
    d += e.equation + ": " + std::string(econometrics::to_string(e.status)) + " (" + std::to_string(e.excluded_exogenous) +
         " >= " + std::to_string(e.included_endogenous) + ") ";
  return {ok, d};
}

// 5 ---------------------------------------------------------------------------
econometrics::EstimationResult fit_from(const equilibrium::StructuralParameters& p) {
  econometrics::EstimationResult r;
  r.method = econometrics::Method::three_sls;
  const auto truth = montecarlo::truth_vector(p);
  for (const char* name : {"supply", "demand"}) {
    econometrics::EquationResult e;
    e.name = name;
    for (const auto& t : truth)
      if (t.equation == name) e.coefficients.push_back({t.regressor, t.value, 1.0, t.value, 1.0});
    r.equations.push_back(e);
  }
  return r;
}

equilibrium::StructuralParameters random_params(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.05, 2.0);
  equilibrium::StructuralParameters p;
  p.alpha0 = u(gen);
  p.alpha1 = 5.0 * u(gen);
  p.b(1) = pos(gen) * 1e-3;
  p.b(6) = -pos(gen) * 1e-3;
  for (int k : {3, 4, 5, 7, 8, 9}) p.b(k) = u(gen) * 1e-3;
  // the fee slope shares the magnitude range of the price slopes; a draw
  // near zero would make a relative derivative comparison meaningless
  p.b(2) = (u(gen) < 0 ? -1.0 : 1.0) * pos(gen) * 1e-3;
  return p;
}

equilibrium::ExogenousProfile random_profile(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {.CL = 465 * u(gen), .COMP = 600 + 5500 * u(gen), .POPD = 14 + 370 * u(gen), .W = 3.6 + 20 * u(gen),
          .INC = 11000 + 34000 * u(gen), .pF = 240 + 250 * u(gen), .TDF = 42 + 34 * u(gen)};
}

Outcome comparative_statics() {
  const auto cs = equilibrium::comparative_statics(equilibrium::reference_parameters());
  bool ok = std::abs(cs.dp_dCL - 0.2393) <= 1e-4 && std::abs(cs.dq_dCL - -4.06e-4) <= 1e-6;
  std::mt19937_64 gen(55);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params(gen);
    const auto x = random_profile(gen);
    const auto c = equilibrium::comparative_statics(p);
    const double h = 1e-3;
    auto lo = x, hi = x;
    lo.CL -= h;
    hi.CL += h;
    const auto a = equilibrium::solve_equilibrium(p, lo), b = equilibrium::solve_equilibrium(p, hi);
    const double fp = (b.p - a.p) / (2 * h), fq = (b.q - a.q) / (2 * h);
    if (c.dp_dCL != 0.0) worst = std::max(worst, std::abs(fp - c.dp_dCL) / std::abs(c.dp_dCL));
    if (c.dq_dCL != 0.0) worst = std::max(worst, std::abs(fq - c.dq_dCL) / std::abs(c.dq_dCL));
  }
  const auto verdict = montecarlo::hypothesis_report(fit_from(equilibrium::reference_parameters())).verdict;
  ok = ok && worst <= 1e-6 && verdict == montecarlo::Verdict::satisfied;
  return {ok, "dp/dCL=" + fmt("%.6f", cs.dp_dCL) + " dq/dCL=" + fmt("%.4e", cs.dq_dCL) + ", worst FD relative gap " +
                  fmt("%.2g", worst) + " over 1000 draws, fee hypothesis " +
                  std::string(montecarlo::to_string(verdict))};
}

// 6 ---------------------------------------------------------------------------
Outcome equilibrium_residual() {
  std::mt19937_64 gen(66);
  std::normal_distribution<double> nd;
  double worst_res = 0.0, worst_rf = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_params(gen);
    const auto x = random_profile(gen);
    const equilibrium::Shocks e{0.05 * nd(gen), 0.05 * nd(gen)};
    const auto eq = equilibrium::solve_equilibrium(p, x, e);
    worst_res = std::max(worst_res, std::abs(equilibrium::supply_quantity(p, x, eq.p, e.supply) -
                                             equilibrium::demand_quantity(p, x, eq.p, e.demand)));
    const double rf = equilibrium::reduced_form(p).price(x, e);
    worst_rf = std::max(worst_rf, std::abs(rf - eq.p) / std::max(1.0, std::abs(eq.p)));
  }
  const bool ok = worst_res < 1e-10 && worst_rf <= 1e-12;
  return {ok, "max |supply - demand| = " + fmt("%.2g", worst_res) + ", max reduced-form price gap = " +
                  fmt("%.2g", worst_rf) + " (relative to max(1,|p|)) over 10^4 instances"};
}

// 7, 8 -------------------------------------------------------------------------
struct Recovery {
  montecarlo::ExperimentReport large;
  montecarlo::ExperimentReport small;
  double seconds = 0.0;
};

const Recovery& recovery() {
  static const Recovery r = [] {
    Recovery out;
    const auto start = std::chrono::steady_clock::now();
    const auto targets = montecarlo::reference_targets();
    const auto truth = equilibrium::reference_parameters();
    out.large = montecarlo::recovery_experiment(targets, truth, 5000, 100, 20240601);
    out.small = montecarlo::recovery_experiment(targets, truth, 18, 500, 20240602);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }();
  return r;
}

Outcome monte_carlo_recovery() {
  const auto& r = recovery();
  const auto& cl = r.large.coefficient("supply", "CL");
  const double rel = cl.mean_abs_error / std::abs(cl.truth);
  const auto& cl18 = r.small.coefficient("supply", "CL");
  const bool ok = rel <= 0.20 && cl.coverage >= 0.88 && cl.coverage <= 0.99 && cl18.sign_agreement > 0.60 &&
                  r.large.failures == 0 && r.seconds < 120.0;
  return {ok, "n=5000: CL MAE/|b2|=" + fmt("%.3f", rel) + " coverage=" + fmt("%.2f", cl.coverage) +
                  "; n=18: CL negative in " + fmt("%.1f", 100 * cl18.sign_agreement) + "% (" +
                  std::to_string(r.small.failures) + " failed fits); " + fmt("%.1f", r.seconds) + " s single-threaded"};
}

Outcome sign_panel() {
  const auto& r = recovery();
  const std::pair<const char*, const char*> panel[] = {
      {"supply", "CL"}, {"supply", "POPD"}, {"supply", "W"}, {"demand", "pW"}, {"demand", "INC"}};
  bool ok = true;
  std::string d;
  for (const auto& [eq, reg] : panel) {
    const double s = r.large.coefficient(eq, reg).sign_agreement;
    ok = ok && s >= 0.90;
    d += std::string(eq) + ":" + reg + "=" + fmt("%.2f", s) + " ";
  }
  return {ok, d + "(share with the reference sign, n=5000)"};
}

// 9 ---------------------------------------------------------------------------
Outcome auctions() {
  std::mt19937_64 gen(99);
  int good = 0;
  bool invariants = true;
  for (int run = 0; run < 1000; ++run) {
    auction::AuctionConfig c;
    c.licenses = {"L"};
    c.increment = 1.0 + static_cast<double>(gen() % 5);
    const int nb = 2 + static_cast<int>(gen() % 7);
    std::vector<auction::Bidder> bs;
    std::vector<double> v;
    for (int i = 0; i < nb; ++i) {
      auction::Bidder b;
      b.id = "b" + std::to_string(i);
      const double val = c.increment * static_cast<double>(1 + gen() % 50);
      b.valuations["L"] = val;
      v.push_back(val);
      bs.push_back(b);
    }
    const auto out = auction::run_auction(c, bs, gen(), auction::straightforward_bid, true);
    std::sort(v.rbegin(), v.rend());
    double winner_value = -1.0;
    for (const auto& b : bs)
      if (out.winners[0] && b.id == *out.winners[0]) winner_value = b.valuations.at("L");
    if (winner_value == v[0] && out.prices[0] >= v[1] && out.prices[0] <= v[1] + c.increment) ++good;
    for (std::size_t k = 1; k < out.trace.size(); ++k) {
      if (out.trace[k].standing[0].price < out.trace[k - 1].standing[0].price) invariants = false;
      for (std::size_t b = 0; b < bs.size(); ++b)
        if (out.trace[k].eligibility[b] > out.trace[k - 1].eligibility[b]) invariants = false;
    }
  }
  return {good == 1000 && invariants, std::to_string(good) + "/1000 efficient with price in [v2, v2+inc]; round invariants " +
                                          (invariants ? "held" : "VIOLATED")};
}

// 10 --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "spectrum_acceptance_replicate";
  fs::remove_all(base);
  const auto a = base / "a", b = base / "b";
  const std::string cli = SPECTRUM_CLI_PATH;
  const int ra = std::system((cli + " replicate --seed 11 --out " + a.string()).c_str());
  const int rb = std::system((cli + " replicate --seed 11 --out " + b.string()).c_str());
  bool ok = ra == 0 && rb == 0;
  int files = 0;
  for (const char* f : {"dataset.csv", "estimates.json", "table.txt", "hypothesis.json"}) {
    const bool same = fs::exists(a / f) && slurp(a / f) == slurp(b / f);
    ok = ok && same;
    files += same;
  }
  return {ok, std::to_string(files) + "/4 output files byte-identical across two runs"};
}

// 11 --------------------------------------------------------------------------
Outcome diffusion_direction() {
  equilibrium::DiffusionDynamics d;
  d.rate = 0.5;
  d.q0 = 0.02;
  d.saturation0 = 1.0;
  d.price_sensitivity = 0.002;
  auto x0 = equilibrium::reference_means(), x1 = x0;
  x0.CL = 0;
  x1.CL = 400;
  const auto p = equilibrium::reference_parameters();
  const double g0 = equilibrium::simulate_diffusion(p, x0, d, 40).mean_growth();
  const double g1 = equilibrium::simulate_diffusion(p, x1, d, 40).mean_growth();
  return {g1 < g0, "mean growth CL=0: " + fmt("%.5f", g0) + ", CL=400: " + fmt("%.5f", g1) + " (40 periods)"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"fee arithmetic", fee_arithmetic},
      {"HHI identities", hhi_identities},
      {"estimator oracles", estimator_oracles},
      {"identification", identification},
      {"comparative statics", comparative_statics},
      {"equilibrium residual", equilibrium_residual},
      {"Monte Carlo recovery", monte_carlo_recovery},
      {"sign panel", sign_panel},
      {"SMRA efficiency and invariants", auctions},
      {"replicate determinism", determinism},
      {"diffusion direction", diffusion_direction},
  };
  int failed = 0;
  int id = 0;
  for (const auto& [name, check] : criteria) {
    ++id;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", id - failed, id);
  return failed == 0 ? 0 : 1;
}
