#pragma once

// Joint structured CP decomposition with channel-perturbation estimation,
// its unconstrained CP-ALS initializer, and per-slice baselines.
//
// Model: Y ~ X x_1 (Gamma_M + Gamma_p), X = sum_r a_r o b_r o c_r with every
// a_r 1-sparse over the candidate grid. Each sweep updates A (matching
// pursuit on U = Y_(1) ((C kr B)^T)^+), B (LASSO), C (smoothed LS) and
// Gamma_p (ridge), in that order. The CP gauge is re-fixed right after the
// A step so the penalized blocks always see unit-amplitude location columns.

#include <functional>
#include <optional>
#include <vector>

#include "specmap/solvers.hpp"
#include "specmap/tensor.hpp"

namespace specmap {

struct RegWeights {
  double lambda_p = 1.0;
  double lambda_b = 0.0;
  double lambda_c = 0.0;

  void validate() const;
};

struct StoppingOptions {
  double rel_tol = 1e-4;
  int max_sweeps = 100;
  int init_iters = 50;  // CP-ALS sweeps used for a cold start
  SolverTolerances inner{500, 1e-10, 0.0};
  // Re-estimate the selected A entries jointly against the full objective
  // instead of keeping the per-column matching-pursuit coefficients.
  bool refit_a_coefficients = false;

  void validate() const;
};

/// Objective value after each block update within one sweep.
struct BlockObjectives {
  double after_a = 0.0;
  double after_b = 0.0;
  double after_c = 0.0;
  double after_gamma = 0.0;
};

struct DecompositionResult {
  FactorSet factors;  // A is P x R with at most one nonzero per column
  Matrix gamma_p;     // N x P
  std::vector<double> objective_trace;  // one entry per sweep
  std::vector<BlockObjectives> block_trace;
  std::vector<std::vector<Eigen::Index>> support_trace;  // A support per sweep
  std::vector<bool> detected;  // per component; false means a_r == 0
  bool converged = false;
  int sweeps = 0;

  /// Grid index of each detected component, in component order.
  std::vector<Eigen::Index> support() const;
};

/// Starting point for a warm-started run. C is re-fitted, so its length may
/// differ from the new tensor's third dimension.
struct WarmStart {
  FactorSet factors;
  Matrix gamma_p;
};

/// ||Y - X x_1 (Gamma_M + Gamma_p)||^2 + lambda_p ||Gamma_p||^2
///   + lambda_b sum|B| + lambda_c sum_r sum_t (c_tr - c_{t-1,r})^2
double objective(const Tensor3& y, const FactorSet& f, const Matrix& gamma_m, const Matrix& gamma_p,
                 const RegWeights& w);

struct CpAlsResult {
  FactorSet factors;               // A lives in the first mode of Y
  std::vector<double> error_trace; // relative reconstruction error per sweep
};

/// Plain CP-ALS from leading singular vectors of the unfoldings.
CpAlsResult cp_als_init(const Tensor3& y, int rank, int iters);

DecompositionResult structured_als(const Tensor3& y, const Matrix& gamma_m, int rank,
                                   const RegWeights& w, const StoppingOptions& opts,
                                   const WarmStart* warm = nullptr);

/// Fixes the CP gauge in place: each a_r's nonzero becomes 1, each b_r gets
/// unit 2-norm with its largest-magnitude entry positive, c_r absorbs the
/// scale and sign.
void normalize_gauge(FactorSet& f);

// ---- Baselines -------------------------------------------------------------

using SliceSolver = std::function<Tensor3(const Tensor3&)>;

/// x(t,f) = Gamma^+ y(t,f) for every fiber.
Tensor3 baseline_slice_ls(const Tensor3& y, const Matrix& gamma);

/// Per-fiber LASSO with dictionary Gamma.
Tensor3 baseline_slice_lasso(const Tensor3& y, const Matrix& gamma, double lambda,
                             const SolverTolerances& tol = {5000, 1e-9, 0.0});

/// Trailing moving average of `window` frontal slices (fewer at the start),
/// followed by the slice solver.
Tensor3 moving_average(const Tensor3& y, int window);
Tensor3 baseline_moving_avg(const Tensor3& y, int window, const SliceSolver& solver);

/// How CP-ALS sensor-domain factors are mapped onto the grid.
enum class GridMapping { least_squares, matching_pursuit };

/// Unconstrained CP-ALS on Y followed by mapping A~ onto the grid through
/// Gamma_M: either A = Gamma_M^+ A~ or a 1-sparse fit per column.
FactorSet baseline_cp_factors(const Tensor3& y, const Matrix& gamma_m, int rank, int iters,
                              GridMapping mapping);

}  // namespace specmap
