#include "specmap/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "specmap/kernels.hpp"

namespace specmap {

void RegWeights::validate() const {
  if (!std::isfinite(lambda_p) || !(lambda_p > 0.0)) {
    throw std::invalid_argument("lambda_p must be finite and positive");
  }
  if (!std::isfinite(lambda_b) || lambda_b < 0.0) {
    throw std::invalid_argument("lambda_b must be finite and non-negative");
  }
  if (!std::isfinite(lambda_c) || lambda_c < 0.0) {
    throw std::invalid_argument("lambda_c must be finite and non-negative");
  }
}

void StoppingOptions::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be at least 1");
  if (init_iters < 1) throw std::invalid_argument("init_iters must be at least 1");
  inner.validate();
}

std::vector<Eigen::Index> DecompositionResult::support() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index r = 0; r < factors.A.cols(); ++r) {
    if (!detected.empty() && !detected[static_cast<std::size_t>(r)]) continue;
    Eigen::Index idx = 0;
    if (factors.A.col(r).cwiseAbs().maxCoeff(&idx) > 0.0) out.push_back(idx);
  }
  return out;
}

namespace {

Eigen::Index as_index(std::size_t v) { return static_cast<Eigen::Index>(v); }

void check_model_shapes(const Tensor3& y, const Matrix& gamma_m) {
  if (static_cast<std::size_t>(gamma_m.rows()) != y.dims().d1) {
    throw std::invalid_argument("Gamma_M row count must equal the sensor dimension of Y");
  }
}

double residual_sq(const Tensor3& y, const FactorSet& sensor_factors) {
  return squared_frob_distance(y, cp_reconstruct(sensor_factors));
}

// Leading `rank` eigenvectors of m m^T, padded with fixed pseudo-random
// columns when the mode is smaller than the rank.
Matrix leading_left_vectors(const Matrix& m, int rank) {
  const Eigen::Index rows = m.rows();
  Matrix out(rows, rank);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose());
  const Eigen::Index have = std::min<Eigen::Index>(rows, rank);
  for (Eigen::Index r = 0; r < have; ++r) out.col(r) = eig.eigenvectors().col(rows - 1 - r);
  if (have < rank) {
    std::mt19937_64 gen(0x5eedULL + static_cast<unsigned long long>(rows));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index r = have; r < rank; ++r)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, r) = dist(gen);
  }
  return out;
}

// Algebraic start for CP-ALS: project Y onto the leading R-dimensional
// subspaces of its unfoldings, then diagonalize two random mixtures of the
// R x R x R core's frontal slices. Exact for noiseless rank-R data with
// non-degenerate factors; a rough but well-spread start otherwise.
std::optional<FactorSet> gevd_start(const Matrix& y1, const Matrix& u1, const Matrix& u2,
                                    const Matrix& u3) {
  const Eigen::Index rank = u1.cols();
  Eigen::MatrixXd kron(u3.rows() * u2.rows(), rank * rank);
  for (Eigen::Index k = 0; k < rank; ++k)
    for (Eigen::Index j = 0; j < rank; ++j)
      for (Eigen::Index t = 0; t < u3.rows(); ++t)
        kron.col(k * rank + j).segment(t * u2.rows(), u2.rows()) = u3(t, k) * u2.col(j);
  const Matrix core = u1.transpose() * y1 * kron;  // R x R^2, slice k = columns [kR, kR+R)

  std::mt19937_64 gen(0x9e3779b9ULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m1 = Matrix::Zero(rank, rank);
  Matrix m2 = Matrix::Zero(rank, rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    const auto slice = core.middleCols(k * rank, rank);
    m1 += dist(gen) * slice;
    m2 += dist(gen) * slice;
  }
  Eigen::EigenSolver<Matrix> eig(m1 * pseudo_inverse(m2));
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Eigen::MatrixXcd vectors = eig.eigenvectors();
  Matrix basis(rank, rank);
  for (Eigen::Index r = 0; r < rank; ++r) {
    const auto v = vectors.col(r);
    // Conjugate pairs contribute their real and imaginary parts.
    if (eig.eigenvalues()(r).imag() < 0.0) {
      basis.col(r) = v.imag();
    } else {
      basis.col(r) = v.real();
    }
    const double n = basis.col(r).norm();
    if (!(n > 0.0) || !std::isfinite(n)) return std::nullopt;
    basis.col(r) /= n;
  }
  FactorSet f;
  f.A = u1 * basis;
  f.B = u2 * (pseudo_inverse(basis) * m1).transpose();
  return f;
}

// Solves X Z^T ~ Y_(n) for X given Z = kr(second, first) through the
// Hadamard-product Gram matrix.
Matrix als_update(const Matrix& unfolded, const Matrix& slow, const Matrix& fast) {
  const Matrix gram = (slow.transpose() * slow).cwiseProduct(fast.transpose() * fast);
  return unfolded * khatri_rao(slow, fast) * pseudo_inverse(gram);
}

}  // namespace

double objective(const Tensor3& y, const FactorSet& f, const Matrix& gamma_m, const Matrix& gamma_p,
                 const RegWeights& w) {
  f.validate();
  check_model_shapes(y, gamma_m);
  if (gamma_p.rows() != gamma_m.rows() || gamma_p.cols() != gamma_m.cols()) {
    throw std::invalid_argument("Gamma_p must have the shape of Gamma_M");
  }
  if (gamma_m.cols() != f.A.rows()) throw std::invalid_argument("Gamma_M columns must equal A rows");
  if (static_cast<std::size_t>(f.B.rows()) != y.dims().d2 ||
      static_cast<std::size_t>(f.C.rows()) != y.dims().d3) {
    throw std::invalid_argument("factor sizes do not match Y");
  }
  const FactorSet sensor{(gamma_m + gamma_p) * f.A, f.B, f.C};
  return residual_sq(y, sensor) + w.lambda_p * gamma_p.squaredNorm() +
         w.lambda_b * f.B.cwiseAbs().sum() + w.lambda_c * temporal_roughness(f.C);
}

CpAlsResult cp_als_init(const Tensor3& y, int rank, int iters) {
  const Dims d = y.dims();
  if (rank < 1) throw std::invalid_argument("cp_als_init: rank must be at least 1");
  if (static_cast<std::size_t>(rank) > std::max({d.d1, d.d2, d.d3})) {
    throw std::invalid_argument("cp_als_init: rank exceeds every tensor dimension");
  }
  if (iters < 1) throw std::invalid_argument("cp_als_init: iters must be at least 1");

  const Matrix y1 = unfold(y, 1);
  const Matrix y2 = unfold(y, 2);
  const Matrix y3 = unfold(y, 3);
  const double y_norm = frob_norm(y);

  CpAlsResult res;
  FactorSet& f = res.factors;
  f.A = Matrix::Zero(as_index(d.d1), rank);
  f.B = leading_left_vectors(y2, rank);
  f.C = leading_left_vectors(y3, rank);
  const auto r_size = static_cast<std::size_t>(rank);
  if (rank >= 2 && r_size <= d.d1 && r_size <= d.d2 && r_size <= d.d3 && y_norm > 0.0) {
    if (auto start = gevd_start(y1, leading_left_vectors(y1, rank), f.B, f.C)) {
      f.A = start->A;
      f.B = start->B;
      f.C = als_update(y3, f.B, f.A);
    }
  }
  // Plain ALS sweeps with an extrapolation line search along the change of
  // the previous sweep (step grows like it^(1/3)); an extrapolated point is
  // kept only when it lowers the error, so the trace never increases.
  FactorSet previous;
  double err_sq = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    if (it >= 2) {
      const double step = std::cbrt(static_cast<double>(it + 1));
      FactorSet trial{f.A + step * (f.A - previous.A), f.B + step * (f.B - previous.B),
                      f.C + step * (f.C - previous.C)};
      const double trial_sq = residual_sq(y, trial);
      if (trial_sq < err_sq) f = std::move(trial);
    }
    previous = f;
    f.A = als_update(y1, f.C, f.B);
    f.B = als_update(y2, f.C, f.A);
    f.C = als_update(y3, f.B, f.A);
    err_sq = residual_sq(y, f);
    const double err = std::sqrt(err_sq);
    res.error_trace.push_back(y_norm > 0.0 ? err / y_norm : err);
  }
  return res;
}

void normalize_gauge(FactorSet& f) {
  for (Eigen::Index r = 0; r < f.rank(); ++r) {
    Eigen::Index p = 0;
    const double a_mag = f.A.col(r).cwiseAbs().maxCoeff(&p);
    const double b_norm = f.B.col(r).norm();
    if (a_mag == 0.0 || b_norm == 0.0) continue;
    Eigen::Index fmax = 0;
    f.B.col(r).cwiseAbs().maxCoeff(&fmax);
    const double b_sign = f.B(fmax, r) < 0.0 ? -1.0 : 1.0;
    const double scale = f.A(p, r) * b_norm * b_sign;
    f.A.col(r) /= f.A(p, r);
    f.B.col(r) *= b_sign / b_norm;
    f.C.col(r) *= scale;
  }
}

namespace {

// Leading left singular vector of each residual unfolding reseeds a dead
// component's spectral and temporal factors.
void reseed_component(const Tensor3& residual, FactorSet& f, Eigen::Index r) {
  const Matrix e2 = unfold(residual, 2);
  const Matrix e3 = unfold(residual, 3);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_b(e2 * e2.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig_c(e3 * e3.transpose());
  const Eigen::Index nb = eig_b.eigenvalues().size();
  const Eigen::Index nc = eig_c.eigenvalues().size();
  f.B.col(r) = eig_b.eigenvectors().col(nb - 1);
  f.C.col(r) = eig_c.eigenvectors().col(nc - 1) * std::sqrt(std::max(eig_c.eigenvalues()(nc - 1), 0.0));
}

// Joint least-squares amplitudes for a fixed 1-sparse support.
void refit_amplitudes(const Matrix& y1, const Matrix& gamma, const Matrix& z,
                      const std::vector<bool>& detected, FactorSet& f) {
  const Eigen::Index rank = f.rank();
  std::vector<Eigen::Index> cols;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < rank; ++r) {
    if (!detected[static_cast<std::size_t>(r)]) continue;
    Eigen::Index p = 0;
    f.A.col(r).cwiseAbs().maxCoeff(&p);
    cols.push_back(r);
    rows.push_back(p);
  }
  const auto k = static_cast<Eigen::Index>(cols.size());
  if (k == 0) return;
  Matrix g(gamma.rows(), k), zk(z.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    g.col(i) = gamma.col(rows[static_cast<std::size_t>(i)]);
    zk.col(i) = z.col(cols[static_cast<std::size_t>(i)]);
  }
  const Matrix m = (g.transpose() * g).cwiseProduct(zk.transpose() * zk);
  const Vector h = (g.transpose() * y1 * zk).diagonal();
  const Vector amp = pseudo_inverse(m) * h;
  for (Eigen::Index i = 0; i < k; ++i) {
    f.A(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(i)]) = amp(i);
  }
}

}  // namespace

DecompositionResult structured_als(const Tensor3& y, const Matrix& gamma_m, int rank,
                                   const RegWeights& w, const StoppingOptions& opts,
                                   const WarmStart* warm) {
  check_model_shapes(y, gamma_m);
  if (rank < 1) throw std::invalid_argument("structured_als: rank must be at least 1");
  w.validate();
  opts.validate();

  const Dims d = y.dims();
  const Eigen::Index grid = gamma_m.cols();
  const Matrix y1 = unfold(y, 1);
  const Matrix y2 = unfold(y, 2);
  const Matrix y3 = unfold(y, 3);
  const double y_sq = kernels::sum_squares(y.data());

  DecompositionResult res;
  FactorSet& f = res.factors;
  Matrix& gamma_p = res.gamma_p;
  res.detected.assign(static_cast<std::size_t>(rank), true);

  if (warm != nullptr) {
    const FactorSet& wf = warm->factors;
    if (wf.A.rows() != grid || wf.A.cols() != rank || wf.B.rows() != as_index(d.d2) ||
        wf.B.cols() != rank || warm->gamma_p.rows() != gamma_m.rows() ||
        warm->gamma_p.cols() != grid) {
      throw std::invalid_argument("structured_als: warm start shape mismatch");
    }
    f.A = wf.A;
    f.B = wf.B;
    gamma_p = warm->gamma_p;
    for (Eigen::Index r = 0; r < rank; ++r) {
      res.detected[static_cast<std::size_t>(r)] = f.A.col(r).cwiseAbs().maxCoeff() > 0.0;
    }
    const Matrix sensor_a = (gamma_m + gamma_p) * f.A;
    const Matrix gram = (f.B.transpose() * f.B).cwiseProduct(sensor_a.transpose() * sensor_a);
    f.C = smoothed_ls_gram(gram, y3 * khatri_rao(f.B, sensor_a), w.lambda_c);
  } else {
    const CpAlsResult init = cp_als_init(y, rank, opts.init_iters);
    f.A = Matrix::Zero(grid, rank);
    f.B = init.factors.B;
    f.C = init.factors.C;
    gamma_p = Matrix::Zero(gamma_m.rows(), grid);
  }

  auto current_objective = [&]() { return objective(y, f, gamma_m, gamma_p, w); };

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    const Matrix gamma = gamma_m + gamma_p;

    // Dead components restart from the current residual.
    bool any_dead = false;
    for (bool det : res.detected) any_dead = any_dead || !det;
    if (any_dead) {
      const Tensor3 residual = y - cp_reconstruct({gamma * f.A, f.B, f.C});
      for (Eigen::Index r = 0; r < rank; ++r) {
        if (!res.detected[static_cast<std::size_t>(r)]) reseed_component(residual, f, r);
      }
    }

    BlockObjectives blocks;

    // A: matching pursuit against the perturbed channel on U = Y1 Z^{+T}.
    {
      const Matrix z = khatri_rao(f.C, f.B);
      const Matrix u = y1 * pseudo_inverse(z).transpose();
      for (Eigen::Index r = 0; r < rank; ++r) {
        const OmpResult omp = omp_1sparse(u.col(r), gamma);
        f.A.col(r) = omp.coefficients;
        res.detected[static_cast<std::size_t>(r)] = omp.detected;
      }
      if (opts.refit_a_coefficients) refit_amplitudes(y1, gamma, z, res.detected, f);
      // Amplitudes move into C so the B and C penalties see a fixed scale.
      normalize_gauge(f);
      blocks.after_a = current_objective();
    }

    const Matrix sensor_a = gamma * f.A;
    const Matrix sensor_gram = sensor_a.transpose() * sensor_a;

    // B: LASSO on Y2^T ~ (C kr Gamma A) B^T, warm-started from the current B.
    {
      const Matrix dict = khatri_rao(f.C, sensor_a);
      const Matrix gram = (f.C.transpose() * f.C).cwiseProduct(sensor_gram);
      const Matrix cross = (y2 * dict).transpose();
      f.B = lasso_gram(gram, cross, y_sq, w.lambda_b, opts.inner, f.B).B;
      blocks.after_b = current_objective();
    }

    // C: smoothed least squares on Y3 ~ C (B kr Gamma A)^T.
    {
      const Matrix dict = khatri_rao(f.B, sensor_a);
      const Matrix gram = (f.B.transpose() * f.B).cwiseProduct(sensor_gram);
      f.C = smoothed_ls_gram(gram, y3 * dict, w.lambda_c);
      blocks.after_c = current_objective();
    }

    // Gamma_p: ridge fit of the model residual E = Y - X x_1 Gamma_M.
    {
      const Matrix z = khatri_rao(f.C, f.B);
      const Matrix ztz = (f.C.transpose() * f.C).cwiseProduct(f.B.transpose() * f.B);
      const Matrix x1x1t = f.A * ztz * f.A.transpose();
      const Matrix e1x1t = (y1 * z) * f.A.transpose() - gamma_m * x1x1t;
      gamma_p = rls_gamma_gram(e1x1t, x1x1t, w.lambda_p);
      blocks.after_gamma = current_objective();
    }

    std::vector<Eigen::Index> sup;
    for (Eigen::Index r = 0; r < rank; ++r) {
      Eigen::Index p = 0;
      f.A.col(r).cwiseAbs().maxCoeff(&p);
      sup.push_back(res.detected[static_cast<std::size_t>(r)] ? p : -1);
    }
    res.support_trace.push_back(std::move(sup));
    res.block_trace.push_back(blocks);
    res.objective_trace.push_back(blocks.after_gamma);
    res.sweeps = sweep;

    const double obj = blocks.after_gamma;
    if (sweep > 1) {
      const double change = std::abs(obj - prev);
      const double scale = std::abs(prev);
      if (change == 0.0 || (scale > 0.0 && change < opts.rel_tol * scale)) {
        res.converged = true;
        break;
      }
    }
    prev = obj;
  }

  normalize_gauge(f);
  return res;
}

// ---- Baselines -------------------------------------------------------------

Tensor3 baseline_slice_ls(const Tensor3& y, const Matrix& gamma) {
  check_model_shapes(y, gamma);
  const Dims d = y.dims();
  const Matrix x1 = pseudo_inverse(gamma) * unfold(y, 1);
  return fold(x1, 1, {static_cast<std::size_t>(gamma.cols()), d.d2, d.d3});
}

Tensor3 baseline_slice_lasso(const Tensor3& y, const Matrix& gamma, double lambda,
                             const SolverTolerances& tol) {
  check_model_shapes(y, gamma);
  const Dims d = y.dims();
  const LassoResult res = lasso(unfold(y, 1), gamma, lambda, tol);
  return fold(res.B.transpose(), 1, {static_cast<std::size_t>(gamma.cols()), d.d2, d.d3});
}

Tensor3 moving_average(const Tensor3& y, int window) {
  if (window < 1) throw std::invalid_argument("moving average window must be at least 1");
  const Dims d = y.dims();
  Tensor3 out(d);
  const std::size_t slice = d.d1 * d.d2;
  auto src = y.data();
  auto dst = out.data();
  for (std::size_t t = 0; t < d.d3; ++t) {
    const std::size_t first = t + 1 >= static_cast<std::size_t>(window) ? t + 1 - window : 0;
    const double inv = 1.0 / static_cast<double>(t - first + 1);
    std::span<double> target = dst.subspan(t * slice, slice);
    for (std::size_t s = first; s <= t; ++s) kernels::axpy(inv, src.subspan(s * slice, slice), target);
  }
  return out;
}

Tensor3 baseline_moving_avg(const Tensor3& y, int window, const SliceSolver& solver) {
  return solver(moving_average(y, window));
}

FactorSet baseline_cp_factors(const Tensor3& y, const Matrix& gamma_m, int rank, int iters,
                              GridMapping mapping) {
  check_model_shapes(y, gamma_m);
  CpAlsResult cp = cp_als_init(y, rank, iters);
  FactorSet f = std::move(cp.factors);
  if (mapping == GridMapping::least_squares) {
    f.A = pseudo_inverse(gamma_m) * f.A;
  } else {
    Matrix a = Matrix::Zero(gamma_m.cols(), rank);
    for (Eigen::Index r = 0; r < rank; ++r) a.col(r) = omp_1sparse(f.A.col(r), gamma_m).coefficients;
    f.A = std::move(a);
  }
  return f;
}

}  // namespace specmap
