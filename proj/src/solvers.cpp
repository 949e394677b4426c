#include "specmap/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specmap {

void SolverTolerances::validate() const {
  if (max_inner_iters < 1) throw std::invalid_argument("max_inner_iters must be positive");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(abs_zero >= 0.0)) throw std::invalid_argument("abs_zero must be non-negative");
}

double pinv_cutoff(double sigma_max, Eigen::Index rows, Eigen::Index cols) {
  return sigma_max * static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

Matrix pseudo_inverse(const Matrix& m) {
  if (m.size() == 0) throw std::invalid_argument("pseudo_inverse: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = pinv_cutoff(s.size() ? s(0) : 0.0, m.rows(), m.cols());
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

OmpResult omp_1sparse(const Eigen::Ref<const Vector>& u, const Matrix& dictionary) {
  if (u.size() != dictionary.rows()) {
    throw std::invalid_argument("omp_1sparse: vector length must equal dictionary rows");
  }
  OmpResult res;
  res.coefficients = Vector::Zero(dictionary.cols());
  double best_score = 0.0;
  double best_inner = 0.0;
  double best_norm_sq = 0.0;
  for (Eigen::Index j = 0; j < dictionary.cols(); ++j) {
    const double norm_sq = dictionary.col(j).squaredNorm();
    if (norm_sq == 0.0) continue;
    const double inner = dictionary.col(j).dot(u);
    const double score = std::abs(inner) / std::sqrt(norm_sq);
    // Scores equal up to rounding count as ties and keep the earlier column.
    if (score > best_score * (1.0 + 1e-13)) {
      best_score = score;
      best_inner = inner;
      best_norm_sq = norm_sq;
      res.support = j;
    }
  }
  if (best_score > 0.0) {
    res.detected = true;
    res.coefficients(res.support) = best_inner / best_norm_sq;
  } else {
    res.support = 0;
  }
  return res;
}

namespace {

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

LassoResult lasso_gram(const Matrix& gram, const Matrix& cross, double y_sq, double lambda,
                       const SolverTolerances& tol, const Matrix& warm) {
  tol.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lasso: lambda must be finite and non-negative");
  }
  const Eigen::Index r = gram.rows();
  const Eigen::Index k = cross.cols();
  if (gram.cols() != r || cross.rows() != r) throw std::invalid_argument("lasso: shape mismatch");

  LassoResult res;
  // Coordinates are stored transposed (R x K) so each problem is a column.
  Matrix bt = Matrix::Zero(r, k);
  if (warm.size() != 0) {
    if (warm.rows() != k || warm.cols() != r) throw std::invalid_argument("lasso: warm start shape");
    bt = warm.transpose();
  }

  const double half_lambda = 0.5 * lambda;
  auto total_objective = [&]() {
    // ||y||^2 - 2 b.h + b^T G b + lambda |b|_1, summed over problems.
    const double quad = (bt.transpose() * gram).cwiseProduct(bt.transpose()).sum();
    return y_sq - 2.0 * bt.cwiseProduct(cross).sum() + quad + lambda * bt.cwiseAbs().sum();
  };

  std::vector<bool> active(static_cast<std::size_t>(k), true);
  Eigen::Index remaining = k;
  int sweep = 0;
  while (remaining > 0 && sweep < tol.max_inner_iters) {
    ++sweep;
    for (Eigen::Index col = 0; col < k; ++col) {
      if (!active[static_cast<std::size_t>(col)]) continue;
      double max_change = 0.0;
      bool small = true;
      for (Eigen::Index j = 0; j < r; ++j) {
        const double g = gram(j, j);
        const double old = bt(j, col);
        double updated = 0.0;
        if (g > 0.0) {
          const double rho = cross(j, col) - gram.col(j).dot(bt.col(col)) + g * old;
          updated = soft_threshold(rho, half_lambda) / g;
        }
        bt(j, col) = updated;
        const double change = std::abs(updated - old);
        max_change = std::max(max_change, change);
        if (change >= tol.rel_tol * (1.0 + std::abs(updated))) small = false;
      }
      if (small) {
        active[static_cast<std::size_t>(col)] = false;
        --remaining;
      }
    }
    res.sweep_objective.push_back(total_objective());
  }
  res.iterations = sweep;
  res.converged = remaining == 0;

  if (tol.abs_zero > 0.0) {
    bt = bt.unaryExpr([&](double v) { return std::abs(v) < tol.abs_zero ? 0.0 : v; });
  }
  res.B = bt.transpose();
  return res;
}

LassoResult lasso(const Matrix& yt, const Matrix& dictionary, double lambda,
                  const SolverTolerances& tol, const Matrix& warm) {
  if (yt.rows() != dictionary.rows()) {
    throw std::invalid_argument("lasso: Yt and dictionary row counts differ");
  }
  const Matrix gram = dictionary.transpose() * dictionary;
  const Matrix cross = dictionary.transpose() * yt;
  return lasso_gram(gram, cross, yt.squaredNorm(), lambda, tol, warm);
}

double lasso_objective(const Matrix& yt, const Matrix& dictionary, const Matrix& b, double lambda) {
  return (yt - dictionary * b.transpose()).squaredNorm() + lambda * b.cwiseAbs().sum();
}

double temporal_roughness(const Matrix& c) {
  if (c.rows() < 2) return 0.0;
  return (c.bottomRows(c.rows() - 1) - c.topRows(c.rows() - 1)).squaredNorm();
}

namespace {

// Solves (s I + lambda L^T L) x = rhs, where L^T L is the path-graph
// Laplacian: diagonal (1, 2, ..., 2, 1), off-diagonals -1.
Vector solve_smoothing_system(double s, double lambda, const Vector& rhs) {
  const Eigen::Index n = rhs.size();
  if (n == 1 || lambda == 0.0) return rhs / s;
  Vector diag(n), upper(n - 1), x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lap = (i == 0 || i == n - 1) ? 1.0 : 2.0;
    diag(i) = s + lambda * lap;
  }
  upper.setConstant(-lambda);
  // Thomas algorithm; the matrix is symmetric positive definite for s > 0.
  Vector c_prime(n - 1), d_prime(n);
  c_prime(0) = upper(0) / diag(0);
  d_prime(0) = rhs(0) / diag(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double denom = diag(i) - upper(i - 1) * c_prime(i - 1);
    if (i < n - 1) c_prime(i) = upper(i) / denom;
    d_prime(i) = (rhs(i) - upper(i - 1) * d_prime(i - 1)) / denom;
  }
  x(n - 1) = d_prime(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d_prime(i) - c_prime(i) * x(i + 1);
  return x;
}

}  // namespace

Matrix smoothed_ls_gram(const Matrix& gram, const Matrix& rhs, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("smoothed_ls: lambda must be finite and non-negative");
  }
  const Eigen::Index r = gram.rows();
  if (gram.cols() != r || rhs.cols() != r) throw std::invalid_argument("smoothed_ls: shape mismatch");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& s = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();
  const double s_max = s.size() ? std::max(s.maxCoeff(), 0.0) : 0.0;
  // Eigenvalues of the Gram matrix are only accurate to about s_max * eps;
  // directions below that are treated as null (minimum-norm solution).
  const double s_cut = s_max * static_cast<double>(std::max<Eigen::Index>(r, 1)) *
                       std::numeric_limits<double>::epsilon();

  const Matrix rotated = rhs * v;
  Matrix rotated_c = Matrix::Zero(rhs.rows(), r);
  for (Eigen::Index j = 0; j < r; ++j) {
    if (s(j) <= s_cut) continue;
    rotated_c.col(j) = solve_smoothing_system(s(j), lambda, rotated.col(j));
  }
  return rotated_c * v.transpose();
}

Matrix smoothed_ls(const Matrix& y3, const Matrix& dictionary, double lambda) {
  if (y3.cols() != dictionary.rows()) {
    throw std::invalid_argument("smoothed_ls: Y3 columns must equal dictionary rows");
  }
  return smoothed_ls_gram(dictionary.transpose() * dictionary, y3 * dictionary, lambda);
}

Matrix rls_gamma_gram(const Matrix& e1_x1t, const Matrix& x1_x1t, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("rls_gamma: lambda must be positive");
  }
  const Eigen::Index p = x1_x1t.rows();
  if (x1_x1t.cols() != p || e1_x1t.cols() != p) throw std::invalid_argument("rls_gamma: shape mismatch");
  Matrix g = x1_x1t;
  g.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw std::runtime_error("rls_gamma: factorization failed");
  // G is symmetric, so Gamma = E X^T G^{-1} is the transpose of G^{-1} X E^T.
  return llt.solve(e1_x1t.transpose()).transpose();
}

Matrix rls_gamma(const Matrix& e1, const Matrix& x1, double lambda) {
  if (e1.cols() != x1.cols()) throw std::invalid_argument("rls_gamma: E1 and X1 column counts differ");
  return rls_gamma_gram(e1 * x1.transpose(), x1 * x1.transpose(), lambda);
}

}  // namespace specmap
