#pragma once

// Seeded generators shared by the test suites.

#include <cmath>

#include "specmap/random.hpp"
#include "specmap/tensor.hpp"

namespace specmap::test {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  return random_matrix(rng, n, 1, lo, hi);
}

inline int random_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(std::floor(rng.uniform() * (hi - lo + 1)));
}

inline Tensor3 random_tensor(Rng& rng, Dims d) {
  Tensor3 t(d);
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

inline FactorSet random_factors(Rng& rng, Dims d, int rank) {
  return {random_matrix(rng, static_cast<Eigen::Index>(d.d1), rank),
          random_matrix(rng, static_cast<Eigen::Index>(d.d2), rank),
          random_matrix(rng, static_cast<Eigen::Index>(d.d3), rank)};
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace specmap::test
