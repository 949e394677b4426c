#pragma once

// Least-squares building blocks for the alternating decomposition: a
// pseudo-inverse, 1-sparse matching pursuit, column-wise LASSO, temporally
// smoothed least squares and the ridge update of the perturbation matrix.

#include <vector>

#include "specmap/tensor.hpp"

namespace specmap {

struct SolverTolerances {
  int max_inner_iters = 1000;
  double rel_tol = 1e-10;
  double abs_zero = 0.0;

  void validate() const;
};

/// Relative singular-value cutoff used by every pseudo-inverse here.
double pinv_cutoff(double sigma_max, Eigen::Index rows, Eigen::Index cols);

/// Moore-Penrose pseudo-inverse via SVD.
Matrix pseudo_inverse(const Matrix& m);

struct OmpResult {
  Vector coefficients;      // length P, at most one nonzero
  Eigen::Index support = 0; // selected column; 0 when nothing was detected
  bool detected = false;
};

/// Best single-column least-squares fit of u. Columns are ranked by
/// |<u, d_j>| / ||d_j||; zero columns are skipped and ties go to the lowest
/// index.
OmpResult omp_1sparse(const Eigen::Ref<const Vector>& u, const Matrix& dictionary);

struct LassoResult {
  Matrix B;                        // K x R, one row per column of Yt
  bool converged = true;
  int iterations = 0;              // largest sweep count over columns
  std::vector<double> sweep_objective;  // total objective after each sweep
};

/// Minimizes ||Yt - D B^T||_F^2 + lambda * sum |B| by cyclic coordinate
/// descent with soft thresholding. `warm` seeds the iterate when non-empty.
LassoResult lasso(const Matrix& yt, const Matrix& dictionary, double lambda,
                  const SolverTolerances& tol, const Matrix& warm = Matrix());

/// Same problem in Gram form: gram = D^T D, cross = D^T Yt, y_sq = ||Yt||^2.
LassoResult lasso_gram(const Matrix& gram, const Matrix& cross, double y_sq, double lambda,
                       const SolverTolerances& tol, const Matrix& warm = Matrix());

/// Exact minimizer of ||Y3 - C D^T||_F^2 + lambda * ||L C||_F^2 with L the
/// first-difference operator over rows of C.
Matrix smoothed_ls(const Matrix& y3, const Matrix& dictionary, double lambda);

/// Gram form: gram = D^T D (R x R), rhs = Y3 D (T x R).
Matrix smoothed_ls_gram(const Matrix& gram, const Matrix& rhs, double lambda);

/// Ridge solution E1 X1^T (X1 X1^T + lambda I)^{-1}.
Matrix rls_gamma(const Matrix& e1, const Matrix& x1, double lambda);

/// Gram form: e1_x1t = E1 X1^T (N x P), x1_x1t = X1 X1^T (P x P).
Matrix rls_gamma_gram(const Matrix& e1_x1t, const Matrix& x1_x1t, double lambda);

/// ||Yt - D B^T||_F^2 + lambda * sum |B|.
double lasso_objective(const Matrix& yt, const Matrix& dictionary, const Matrix& b, double lambda);

/// Sum over columns of squared first differences down the rows.
double temporal_roughness(const Matrix& c);

}  // namespace specmap
