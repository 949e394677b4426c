#pragma once

// Spectrum maps from recovered propagation factors:
//   M(g, f, t) = sum_p sum_r a_r(p) b_r(f) c_r(t) / max(dist(g, grid_p), d_min)^eta
// plus frequency aggregation and the per-slot estimation error.

#include <vector>

#include "specmap/scenario.hpp"
#include "specmap/tensor.hpp"

namespace specmap {

struct SpectrumMap {
  std::vector<Point> query_points;
  Matrix values;  // queries x frequencies
  std::size_t t = 0;  // 0-based time index
};

/// Evaluates the map at time index t (0-based) from CP factors over the grid.
SpectrumMap spectrum_map(const FactorSet& f, const ChannelModel& channel,
                         const std::vector<Point>& queries, std::size_t t);

/// Same formula driven by a P x F x T propagation tensor (used for baselines
/// that do not produce factors).
SpectrumMap spectrum_map(const Tensor3& x, const ChannelModel& channel,
                         const std::vector<Point>& queries, std::size_t t);

/// Sum over frequencies, one value per query point.
Vector aggregate_map(const SpectrumMap& m);

/// Regular raster over the grid's bounding box, `factor` times finer than
/// the candidate spacing; factor 1 reproduces the grid points in order.
std::vector<Point> raster_points(const GridSpec& grid, int factor);

struct SliceErrorTrace {
  std::vector<double> error;    // per time slot
  std::vector<bool> absolute;   // true where the true slice is all-zero
  double mean() const;
};

/// ||Xhat(:,:,t) - X(:,:,t)||_F / ||X(:,:,t)||_F for each t; slots with an
/// all-zero truth report the absolute error instead.
SliceErrorTrace slice_error_trace(const Tensor3& x_hat, const Tensor3& x_true);

/// Indices of the k largest values, largest first (ties to the lower index).
std::vector<Eigen::Index> top_k(const Vector& values, int k);

/// Grid points whose value is at least `floor_fraction` of the maximum and
/// not exceeded by any of their (up to 8) grid neighbours.
std::vector<Eigen::Index> grid_local_maxima(const GridSpec& grid, const Vector& values,
                                            double floor_fraction);

}  // namespace specmap
