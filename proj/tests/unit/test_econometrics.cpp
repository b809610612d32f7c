#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "spectrum/distributions.hpp"
#include "spectrum/econometrics.hpp"
#include "spectrum/errors.hpp"
#include "spectrum/montecarlo.hpp"

using namespace spectrum;
using namespace spectrum::econometrics;
using linalg::Matrix;
using linalg::Vector;

namespace {

oracle::Rows rows_of(const Matrix& x) {
  oracle::Rows r(static_cast<std::size_t>(x.rows()), std::vector<double>(static_cast<std::size_t>(x.cols())));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x(i, j);
  return r;
}

std::vector<double> vec_of(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Simultaneous toy market:
//   supply  q = 1 + p + 0.8 zs + us
//   demand  q = 2 - p + 0.5 zd + ud
// with correlated shocks, so p is correlated with both errors.
Table toy_market(std::size_t n, std::uint64_t seed, double b6 = -1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Vector q(static_cast<Eigen::Index>(n)), p(q.size()), zs(q.size()), zd(q.size()), zx(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    zs(i) = nd(gen);
    zd(i) = nd(gen);
    zx(i) = nd(gen);
    const double us = 0.5 * nd(gen);
    const double ud = 0.5 * nd(gen) + 0.3 * us;
    p(i) = oracle::clearing_price(1.0 + 0.8 * zs(i), 1.0, us, 2.0 + 0.5 * zd(i) + 0.2 * zx(i), b6, ud);
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

SystemSpec toy_system() {
  SystemSpec s;
  s.equations.push_back({"supply", "q", {"p", "zs", "const"}, {"p"}});
  s.equations.push_back({"demand", "q", {"p", "zd", "zx", "const"}, {"p"}});
  s.instruments = {"zs", "zd", "zx", "const"};
  return s;
}

double normal_tail_simpson(double z) {
  z = std::abs(z);
  const int m = 20000;
  const double h = z / m;
  auto f = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = f(0) + f(z);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

TEST_CASE("ols exact fit") {
  Matrix x(3, 2);
  x << 0, 1, 1, 1, 2, 1;
  Vector y(3);
  y << 1, 3, 5;
  const auto r = ols(y, x, {"x", "const"});
  CHECK(r.coefficient("x").estimate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.coefficient("const").estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));

  Matrix two(2, 2);
  two << 0, 1, 1, 1;
  Vector y2(2);
  y2 << 1, 3;
  CHECK_THROWS_AS(ols(y2, two), InsufficientDataError);
}

TEST_CASE("ols on a constant response") {
  Matrix x(5, 2);
  x << 1, 1, 2, 1, 4, 1, 7, 1, 9, 1;
  const Vector y = Vector::Constant(5, 3.0);
  const auto r = ols(y, x, {"x", "const"});
  CHECK(std::abs(r.coefficient("x").estimate) < 1e-12);
  CHECK(r.r2 == 0.0);
}

TEST_CASE("ols rank deficiency names the columns") {
  Matrix x(6, 3);
  for (int i = 0; i < 6; ++i) x.row(i) << i, 2.0 * i, 1.0;
  Vector y = Vector::LinSpaced(6, 0, 1);
  CHECK_THROWS_WITH_AS(ols(y, x, {"a", "b", "const"}), doctest::Contains("b"), SingularError);
}

TEST_CASE("ols matches the normal-equations oracle") {
  std::mt19937_64 gen(100);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 50, k = 3;
    Matrix x(n, k);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (int j = 1; j < k; ++j) x(i, j) = nd(gen);
      y(i) = 0.5 - x(i, 1) + 2.0 * x(i, 2) + nd(gen);
    }
    const auto r = ols(y, x);
    const auto want = oracle::normal_equations(rows_of(x), vec_of(y));
    CHECK(oracle::max_rel_diff(vec_of(r.estimates()), want) <= 1e-10);
    const Vector u = y - x * r.estimates();
    CHECK((x.transpose() * u).cwiseAbs().maxCoeff() <= 1e-8);
    for (const auto& c : r.coefficients) {
      CHECK(c.z == c.estimate / c.se);
      CHECK(c.p == doctest::Approx(normal_tail_simpson(c.z)).epsilon(1e-9));
      CHECK(c.p >= 0.0);
      CHECK(c.p <= 1.0);
    }
  }
}

TEST_CASE("wald statistic of one slope is z squared") {
  std::mt19937_64 gen(101);
  std::normal_distribution<double> nd;
  Matrix x(40, 2);
  Vector y(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = nd(gen);
    x(i, 1) = 1.0;
    y(i) = 0.3 * x(i, 0) + nd(gen);
  }
  const auto r = ols(y, x, {"x", "const"});
  const double z = r.coefficient("x").z;
  CHECK(r.wald_df == 1);
  CHECK(r.wald_chi2 == doctest::Approx(z * z).epsilon(1e-10));
  CHECK(r.wald_p == doctest::Approx(r.coefficient("x").p).epsilon(1e-10));
  CHECK(dist::chi2_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
}

TEST_CASE("2SLS with every regressor exogenous equals OLS") {
  auto t = toy_market(300, 5);
  EquationSpec eq{"e", "q", {"zs", "zd", "const"}, {}};
  const auto a = two_sls(eq, {"zs", "zd", "zx", "const"}, t);
  Matrix x(t.rows(), 3);
  x << t.column("zs"), t.column("zd"), Vector::Ones(t.rows());
  const auto b = ols(t.column("q"), x, {"zs", "zd", "const"});
  CHECK(oracle::max_rel_diff(vec_of(a.estimates()), vec_of(b.estimates())) <= 1e-10);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.coefficients[j].se == doctest::Approx(b.coefficients[j].se).epsilon(1e-10));
}

TEST_CASE("2SLS removes simultaneity bias that OLS keeps") {
  const auto t = toy_market(10000, 6);
  const auto sys = toy_system();
  const auto iv = two_sls(sys.equations[1], sys.instruments, t);
  const auto& b6 = iv.coefficient("p");
  CHECK(std::abs(b6.estimate - -1.0) <= 3.0 * b6.se);
  const auto ls = ols(sys, t).equation("demand").coefficient("p");
  CHECK(std::abs(ls.estimate - -1.0) > 10.0 * ls.se);
}

TEST_CASE("2SLS instrument orthogonality when just identified") {
  const auto t = toy_market(500, 7);
  EquationSpec eq{"supply", "q", {"p", "zs", "const"}, {"p"}};
  const std::vector<std::string> inst{"zs", "zd", "const"};
  const auto r = two_sls(eq, inst, t);
  Matrix z(t.rows(), 3);
  z << t.column("zs"), t.column("zd"), Vector::Ones(t.rows());
  CHECK((z.transpose() * r.residuals).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("instrument and identification failures") {
  auto t = toy_market(200, 8);
  t.add_column("zero", Vector::Zero(t.rows()));
  EquationSpec eq{"supply", "q", {"p", "zs", "const"}, {"p"}};
  CHECK_THROWS_AS(two_sls(eq, {"zs", "zero", "const"}, t), DegenerateInstrumentError);

  EquationSpec every{"all", "q", {"p", "zs", "zd", "zx", "const"}, {"p"}};
  CHECK_THROWS_AS(two_sls(every, {"zs", "zd", "zx", "const"}, t), IdentificationError);

  // x repeats in pairs while c alternates, so x has no projection on c
  Table v;
  const Eigen::Index n = 40;
  Vector x(n), c(n), y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = static_cast<double>(i / 2);
    c(i) = i % 2 ? 1.0 : -1.0;
    w(i) = 2.0 * c(i);
    y(i) = 0.5 * x(i) + 0.1 * c(i);
  }
  v.add_column("y", y);
  v.add_column("x", x);
  v.add_column("c", c);
  v.add_column("w", w);
  EquationSpec weak{"weak", "y", {"x", "const"}, {"x"}};
  CHECK_THROWS_AS(two_sls(weak, {"c", "const"}, v), DegenerateInstrumentError);
  CHECK_THROWS_AS(two_sls(weak, {"c", "w", "const"}, v), DegenerateInstrumentError);
}

TEST_CASE("identification of the market system") {
  const auto s = identification_check(market_system());
  REQUIRE(s.size() == 2);
  CHECK(s[0].status == Identification::over);
  CHECK(s[0].excluded_exogenous == 3);
  CHECK(s[0].included_endogenous == 1);
  CHECK(s[1].status == Identification::over);
  CHECK(s[1].excluded_exogenous == 4);
  CHECK(s[1].included_endogenous == 1);

  SystemSpec just{{{"e", "q", {"p", "zs", "const"}, {"p"}}}, {"zs", "zd", "const"}};
  CHECK(identification_check(just)[0].status == Identification::just);
  SystemSpec under{{{"e", "q", {"p", "zs", "zd", "const"}, {"p"}}}, {"zs", "zd", "const"}};
  CHECK(identification_check(under)[0].status == Identification::under);
}

TEST_CASE("3SLS with identity sigma equals 2SLS") {
  const auto t = toy_market(1000, 9);
  const auto sys = toy_system();
  ThreeSlsOptions opts;
  opts.sigma_override = Matrix::Identity(2, 2);
  const auto a = three_sls(sys, t, opts);
  const auto b = two_sls(sys, t);
  for (std::size_t e = 0; e < 2; ++e)
    CHECK(oracle::max_rel_diff(vec_of(a.equations[e].estimates()), vec_of(b.equations[e].estimates())) <= 1e-10);
}

TEST_CASE("3SLS with identical exogenous regressors collapses to OLS") {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> nd;
  const Eigen::Index n = 400;
  Vector x1(n), x2(n), y1(n), y2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x1(i) = nd(gen);
    x2(i) = nd(gen);
    const double e1 = nd(gen), e2 = 0.6 * e1 + nd(gen);
    y1(i) = 1 + 2 * x1(i) - x2(i) + e1;
    y2(i) = -1 + 0.5 * x1(i) + 3 * x2(i) + e2;
  }
  Table t;
  t.add_column("y1", y1);
  t.add_column("y2", y2);
  t.add_column("x1", x1);
  t.add_column("x2", x2);
  SystemSpec s;
  s.equations.push_back({"one", "y1", {"x1", "x2", "const"}, {}});
  s.equations.push_back({"two", "y2", {"x1", "x2", "const"}, {}});
  s.instruments = {"x1", "x2", "const"};
  const auto a = three_sls(s, t);
  const auto b = ols(s, t);
  CHECK(a.warnings.empty());
  for (std::size_t e = 0; e < 2; ++e)
    CHECK(oracle::max_rel_diff(vec_of(a.equations[e].estimates()), vec_of(b.equations[e].estimates())) <= 1e-10);
}

TEST_CASE("3SLS falls back to 2SLS on a singular residual covariance") {
  const auto t = toy_market(300, 11);
  SystemSpec s = toy_system();
  s.equations[1] = {"copy", "q", {"p", "zs", "const"}, {"p"}};
  const auto r = three_sls(s, t);
  CHECK(r.method == Method::two_sls);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("column rescaling changes only that coefficient") {
  const auto t = toy_market(800, 12);
  Table s = t;
  s.column("zs") *= -4.0;
  const auto sys = toy_system();
  for (int m = 0; m < 3; ++m) {
    const auto a = m == 0 ? ols(sys, t) : m == 1 ? two_sls(sys, t) : three_sls(sys, t);
    const auto b = m == 0 ? ols(sys, s) : m == 1 ? two_sls(sys, s) : three_sls(sys, s);
    const auto& ea = a.equation("supply");
    const auto& eb = b.equation("supply");
    CHECK(eb.coefficient("zs").estimate == doctest::Approx(ea.coefficient("zs").estimate / -4.0).epsilon(1e-9));
    CHECK(eb.coefficient("p").estimate == doctest::Approx(ea.coefficient("p").estimate).epsilon(1e-9));
    CHECK((eb.residuals - ea.residuals).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(eb.r2 == doctest::Approx(ea.r2).epsilon(1e-9));
    CHECK(eb.wald_chi2 == doctest::Approx(ea.wald_chi2).epsilon(1e-8));
  }
}

TEST_CASE("3SLS sigma is symmetric PSD") {
  const auto r = three_sls(toy_system(), toy_market(300, 13));
  CHECK((r.sigma - r.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.sigma);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("3SLS error shrinks as n grows") {
  const auto sys = toy_system();
  const std::vector<double> truth_supply{1.0, 0.8, 1.0}, truth_demand{-1.0, 0.5, 0.2, 2.0};
  std::vector<std::vector<double>> mae(3, std::vector<double>(7, 0.0));
  const std::size_t grid[] = {100, 1000, 10000};
  const int seeds = 100;
  for (int g = 0; g < 3; ++g)
    for (int s = 0; s < seeds; ++s) {
      const auto r = three_sls(sys, toy_market(grid[g], 1000 + static_cast<std::uint64_t>(s)));
      const auto bs = r.equation("supply").estimates(), bd = r.equation("demand").estimates();
      for (int j = 0; j < 3; ++j) mae[g][j] += std::abs(bs(j) - truth_supply[j]) / seeds;
      for (int j = 0; j < 4; ++j) mae[g][3 + j] += std::abs(bd(j) - truth_demand[j]) / seeds;
    }
  for (int j = 0; j < 7; ++j) {
    CHECK(mae[1][j] < mae[0][j]);
    CHECK(mae[2][j] < mae[1][j]);
  }
}

TEST_CASE("reference-shaped fits on 18 synthetic observations") {
  const auto targets = montecarlo::reference_targets();
  const auto truth = equilibrium::reference_parameters();
  int strong = 0, strong_negative = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto data = montecarlo::gen_data(targets, truth, 18, seed);
    const auto r = three_sls(market_system(), data);
    CHECK(r.equation("supply").coefficients.size() == 6);
    CHECK(r.equation("demand").coefficients.size() == 5);
    const auto& cl = r.equation("supply").coefficient("CL");
    if (std::abs(cl.z) > 2) {
      ++strong;
      if (cl.estimate < 0) ++strong_negative;
    }
    if (seed == 0) {
      const auto text = format_table(r);
      for (const char* h : {"Coefficient", "Standard error", "z", "P>z", "R²", "P(χ²)", "Constant"})
        CHECK(text.find(h) != std::string::npos);
    }
  }
  REQUIRE(strong > 0);
  CHECK(2 * strong_negative > strong);
}
