#include "specmap/cartography.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "specmap/kernels.hpp"

namespace specmap {
namespace {

Matrix query_weights(const ChannelModel& channel, const std::vector<Point>& queries) {
  if (queries.empty()) throw std::invalid_argument("spectrum_map: no query points");
  return pathloss_gains(channel.grid_points, queries, channel.eta, channel.d_min);
}

}  // namespace

SpectrumMap spectrum_map(const FactorSet& f, const ChannelModel& channel,
                         const std::vector<Point>& queries, std::size_t t) {
  f.validate();
  if (static_cast<std::size_t>(f.A.rows()) != channel.grid_points.size()) {
    throw std::invalid_argument("spectrum_map: A rows must equal the grid size");
  }
  if (t >= static_cast<std::size_t>(f.C.rows())) throw std::out_of_range("spectrum_map: time index");
  const Vector c_t = f.C.row(static_cast<Eigen::Index>(t)).transpose();
  const Matrix grid_power = f.A * c_t.asDiagonal() * f.B.transpose();  // P x F
  return {queries, query_weights(channel, queries) * grid_power, t};
}

SpectrumMap spectrum_map(const Tensor3& x, const ChannelModel& channel,
                         const std::vector<Point>& queries, std::size_t t) {
  if (x.dims().d1 != channel.grid_points.size()) {
    throw std::invalid_argument("spectrum_map: tensor first dimension must equal the grid size");
  }
  if (t >= x.dims().d3) throw std::out_of_range("spectrum_map: time index");
  return {queries, query_weights(channel, queries) * x.frontal_slice(t), t};
}

Vector aggregate_map(const SpectrumMap& m) { return m.values.rowwise().sum(); }

std::vector<Point> raster_points(const GridSpec& grid, int factor) {
  if (factor < 1) throw std::invalid_argument("raster factor must be at least 1");
  const int rows = (grid.rows - 1) * factor + 1;
  const int cols = (grid.cols - 1) * factor + 1;
  const double step = grid.spacing / factor;
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) pts.push_back({c * step, r * step});
  return pts;
}

double SliceErrorTrace::mean() const {
  if (error.empty()) return 0.0;
  return std::accumulate(error.begin(), error.end(), 0.0) / static_cast<double>(error.size());
}

SliceErrorTrace slice_error_trace(const Tensor3& x_hat, const Tensor3& x_true) {
  if (!(x_hat.dims() == x_true.dims())) throw std::invalid_argument("slice_error_trace: shape mismatch");
  const Dims d = x_true.dims();
  const std::size_t slice = d.d1 * d.d2;
  SliceErrorTrace out;
  for (std::size_t t = 0; t < d.d3; ++t) {
    const auto est = x_hat.data().subspan(t * slice, slice);
    const auto ref = x_true.data().subspan(t * slice, slice);
    const double diff = std::sqrt(kernels::squared_distance(est, ref));
    const double norm = std::sqrt(kernels::sum_squares(ref));
    out.absolute.push_back(norm == 0.0);
    out.error.push_back(norm == 0.0 ? diff : diff / norm);
  }
  return out;
}

std::vector<Eigen::Index> top_k(const Vector& values, int k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(k, 0))));
  return idx;
}

std::vector<Eigen::Index> grid_local_maxima(const GridSpec& grid, const Vector& values,
                                            double floor_fraction) {
  if (values.size() != static_cast<Eigen::Index>(grid.rows) * grid.cols) {
    throw std::invalid_argument("grid_local_maxima: value count must equal the grid size");
  }
  const double floor = floor_fraction * values.maxCoeff();
  std::vector<Eigen::Index> out;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Index p = r * grid.cols + c;
      if (values(p) <= 0.0 || values(p) < floor) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= grid.rows || cc >= grid.cols) continue;
          if (values(rr * grid.cols + cc) > values(p)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) out.push_back(p);
    }
  }
  return out;
}

}  // namespace specmap
