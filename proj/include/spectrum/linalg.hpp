#pragma once

// Dense linear-algebra helpers shared by the estimators. Storage and
// factorizations come from Eigen; this layer adds the conditioning
// checks and error reporting the estimators rely on.

#include <Eigen/Dense>

#include <vector>

namespace spectrum::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Systems whose estimated 2-norm condition number exceeds this are
/// rejected as singular.
inline constexpr double kMaxCondition = 1e12;

/// Condition number estimate from singular values (exact for small matrices).
double condition_number(const Matrix& a);

/// Solves A x = b. Symmetric positive-definite inputs take a Cholesky
/// path, everything else a column-pivoted QR. Throws SingularError with
/// the condition estimate when A is singular or ill-conditioned.
Vector linear_solve(const Matrix& a, const Vector& b);

/// Inverse of a symmetric positive-definite matrix via Cholesky.
Matrix spd_inverse(const Matrix& a);

/// Least-squares solution of min ||X b - y|| via Householder QR.
Vector least_squares(const Matrix& x, const Vector& y);

/// Indices of columns that are (numerically) linear combinations of
/// earlier columns. Empty when X has full column rank.
std::vector<int> dependent_columns(const Matrix& x);

/// Orthogonal projector onto the column space of Z, applied without
/// forming the n x n matrix.
class Projector {
 public:
  explicit Projector(const Matrix& z);

  /// P_Z * m
  Matrix apply(const Matrix& m) const;
  Vector apply(const Vector& v) const;

  int rank() const noexcept { return static_cast<int>(basis_.cols()); }

 private:
  Matrix basis_;  // n x r orthonormal basis of col(Z)
};

/// Nearest correlation-like matrix: clips eigenvalues below `floor`
/// then rescales to a unit diagonal. Returns the input unchanged when
/// it is already positive definite above the floor.
Matrix repair_correlation(const Matrix& r, double floor = 1e-8);

}  // namespace spectrum::linalg
