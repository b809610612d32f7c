#pragma once
// Reference computations for the tests. Deliberately naive and free of
// Eigen so they can serve as independent checks on the library.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Rows a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("oracle: singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// (X'X)^{-1} X'y from the normal equations. X is row-major.
inline std::vector<double> normal_equations(const Rows& x, const std::vector<double>& y) {
  const std::size_t k = x.front().size();
  Rows xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
    }
  return gauss_solve(xtx, xty);
}

/// Market-clearing price of q = a0 + b1 p + s and q = a1 + b6 p + d.
inline double clearing_price(double a0, double b1, double s, double a1, double b6, double d) {
  return (a1 + d - a0 - s) / (b1 - b6);
}

/// Logistic solution q(t) = K / (1 + (K/q0 - 1) e^{-rt}).
inline double logistic(double q0, double k, double r, double t) {
  return k / (1.0 + (k / q0 - 1.0) * std::exp(-r * t));
}

/// Present value of `years` level payments at `rate`, first one a period out.
inline double present_value(double payment, double rate, int years) {
  double pv = 0.0;
  double disc = 1.0;
  for (int t = 1; t <= years; ++t) {
    disc /= 1.0 + rate;
    pv += payment * disc;
  }
  return pv;
}

/// Sample mean and (n-1) standard deviation, two-pass.
inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  return worst;
}

}  // namespace oracle
