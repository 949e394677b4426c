#pragma once

// Independent reference solvers used only by the tests.

#include <Eigen/Dense>

#include <cmath>

#include "specmap/tensor.hpp"

namespace specmap::test {

inline double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

/// FISTA on ||y - D x||^2 + lambda ||x||_1 for one right-hand side.
inline Vector lasso_fista(const Vector& y, const Matrix& d, double lambda, int iters) {
  const Matrix g = d.transpose() * d;
  const Vector dy = d.transpose() * y;
  const double lip = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lip, 1e-300);
  Vector x = Vector::Zero(d.cols()), z = x, prev = x;
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const Vector grad = 2.0 * (g * z - dy);
    prev = x;
    x = z - step * grad;
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = soft(x(i), step * lambda);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = x + ((t - 1.0) / tn) * (x - prev);
    t = tn;
  }
  return x;
}

inline double lasso_value(const Vector& y, const Matrix& d, const Vector& x, double lambda) {
  return (y - d * x).squaredNorm() + lambda * x.lpNorm<1>();
}

/// First-difference operator, (T-1) x T.
inline Matrix first_difference(Eigen::Index t) {
  Matrix l = Matrix::Zero(std::max<Eigen::Index>(t - 1, 0), t);
  for (Eigen::Index i = 0; i + 1 < t; ++i) {
    l(i, i) = -1.0;
    l(i, i + 1) = 1.0;
  }
  return l;
}

/// Solves the vectorized normal equations of ||Y3 - C D^T||^2 + lambda ||L C||^2.
inline Matrix smoothed_ls_kron(const Matrix& y3, const Matrix& d, double lambda) {
  const Eigen::Index t = y3.rows(), r = d.cols();
  const Matrix l = first_difference(t);
  const Matrix g = d.transpose() * d;
  const Matrix ltl = l.transpose() * l;
  Matrix big = Matrix::Zero(t * r, t * r);
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < r; ++b) {
      big.block(a * t, b * t, t, t) = g(a, b) * Matrix::Identity(t, t);
      if (a == b) big.block(a * t, b * t, t, t) += lambda * ltl;
    }
  const Matrix rhs = y3 * d;
  const Vector x = big.fullPivLu().solve(Eigen::Map<const Vector>(rhs.data(), rhs.size()));
  return Eigen::Map<const Matrix>(x.data(), t, r);
}

/// Conjugate gradients on (X X^T + lambda I) g = X e for each row of E.
inline Matrix ridge_cg(const Matrix& e1, const Matrix& x1, double lambda) {
  const Matrix a = x1 * x1.transpose() + lambda * Matrix::Identity(x1.rows(), x1.rows());
  Matrix out(e1.rows(), x1.rows());
  for (Eigen::Index n = 0; n < e1.rows(); ++n) {
    const Vector b = x1 * e1.row(n).transpose();
    Vector x = Vector::Zero(b.size()), r = b, p = r;
    double rs = r.squaredNorm();
    for (int it = 0; it < 10 * b.size() && rs > 1e-40 * (1.0 + b.squaredNorm()); ++it) {
      const Vector ap = a * p;
      const double alpha = rs / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      const double rs_new = r.squaredNorm();
      p = r + (rs_new / rs) * p;
      rs = rs_new;
    }
    out.row(n) = x.transpose();
  }
  return out;
}

/// Best single-column least-squares fit by trying every column.
struct ExhaustiveFit {
  Eigen::Index index = 0;
  double coefficient = 0.0;
  bool found = false;
};

inline ExhaustiveFit exhaustive_1sparse(const Vector& u, const Matrix& d) {
  ExhaustiveFit best;
  double best_res = u.squaredNorm();
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const double nn = d.col(j).squaredNorm();
    if (nn == 0.0) continue;
    const double c = u.dot(d.col(j)) / nn;
    const double res = (u - c * d.col(j)).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best = {j, c, true};
    }
  }
  return best;
}

}  // namespace specmap::test
