#include "spectrum/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spectrum/errors.hpp"

namespace spectrum::linalg {

namespace {

bool all_finite(const Matrix& a) { return a.allFinite(); }

std::string describe_condition(double cond) {
  std::ostringstream os;
  os << "matrix is singular or ill-conditioned (condition estimate " << cond << ")";
  return os.str();
}

}  // namespace

double condition_number(const Matrix& a) {
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0 || !std::isfinite(smin)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Vector linear_solve(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw ValidationError("linear_solve: dimension mismatch");
  if (!all_finite(a) || !b.allFinite()) throw ValidationError("linear_solve: non-finite input");

  const double cond = condition_number(a);
  if (!(cond < kMaxCondition)) throw SingularError(describe_condition(cond), cond);

  if (a.isApprox(a.transpose(), 1e-14)) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) return llt.solve(b);
  }
  return a.colPivHouseholderQr().solve(b);
}

Matrix spd_inverse(const Matrix& a) {
  const double cond = condition_number(a);
  if (!(cond < kMaxCondition)) throw SingularError(describe_condition(cond), cond);
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw SingularError("matrix is not positive definite", cond);
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

Vector least_squares(const Matrix& x, const Vector& y) {
  return x.householderQr().solve(y);
}

std::vector<int> dependent_columns(const Matrix& x) {
  std::vector<int> out;
  if (x.cols() == 0) return out;
  // Scale columns to unit norm so the test is insensitive to units.
  Matrix scaled = x;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double nrm = scaled.col(j).norm();
    if (nrm > 0.0) scaled.col(j) /= nrm;
  }
  const double tol = std::sqrt(1.0 / kMaxCondition);
  // Greedy Gram-Schmidt over columns in order: a column is dependent if
  // its residual against the accepted basis is tiny.
  Matrix basis(scaled.rows(), 0);
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    Vector v = scaled.col(j);
    if (v.norm() == 0.0) {
      out.push_back(static_cast<int>(j));
      continue;
    }
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
    const double r = v.norm();
    if (r < tol) {
      out.push_back(static_cast<int>(j));
    } else {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v / r;
    }
  }
  return out;
}

Projector::Projector(const Matrix& z) {
  Eigen::ColPivHouseholderQR<Matrix> qr(z);
  qr.setThreshold(1e-12);
  const auto r = qr.rank();
  basis_ = qr.householderQ() * Matrix::Identity(z.rows(), r);
}

Matrix Projector::apply(const Matrix& m) const { return basis_ * (basis_.transpose() * m); }

Vector Projector::apply(const Vector& v) const { return basis_ * (basis_.transpose() * v); }

Matrix repair_correlation(const Matrix& r, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.transpose()));
  if (es.info() != Eigen::Success) throw ValidationError("correlation matrix eigen-decomposition failed");
  if (es.eigenvalues().minCoeff() >= floor) return r;
  Vector lambda = es.eigenvalues().cwiseMax(floor);
  Matrix fixed = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
  Vector d = fixed.diagonal().cwiseSqrt().cwiseInverse();
  fixed = d.asDiagonal() * fixed * d.asDiagonal();
  fixed.diagonal().setOnes();
  return fixed;
}

}  // namespace spectrum::linalg
