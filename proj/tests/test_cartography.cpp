#include <gtest/gtest.h>

#include "scenarios.hpp"
#include "specmap/cartography.hpp"
#include "support.hpp"

using namespace specmap;
using namespace specmap::test;

namespace {

ChannelModel line_channel() {
  ChannelModel ch;
  ch.grid_points = {{0, 0}, {1, 0}, {2, 0}};
  ch.sensor_points = {{0, 1}};
  ch.eta = 2.0;
  ch.d_min = 0.5;
  return ch;
}

ChannelModel reference_channel() { return build_channel(clean_reference()); }

}  // namespace

TEST(SpectrumMap, SingleComponentAnalytic) {
  const FactorSet f{(Matrix(3, 1) << 1, 0, 0).finished(), Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  const SpectrumMap m = spectrum_map(f, line_channel(), {{2, 0}}, 0);
  EXPECT_DOUBLE_EQ(m.values(0, 0), 0.25);
}

TEST(SpectrumMap, ZeroFactorsGiveZeroMap) {
  const FactorSet f{Matrix::Zero(3, 2), Matrix::Zero(4, 2), Matrix::Zero(5, 2)};
  EXPECT_TRUE(spectrum_map(f, line_channel(), {{0.3, 0.2}, {1, 1}}, 2).values.isZero(0.0));
}

TEST(SpectrumMap, CoincidentQueryIsClamped) {
  const FactorSet f{(Matrix(3, 1) << 0, 2, 0).finished(), Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  const SpectrumMap m = spectrum_map(f, line_channel(), {{1, 0}}, 0);
  EXPECT_DOUBLE_EQ(m.values(0, 0), 2.0 / 0.25);
}

TEST(SpectrumMap, BadArguments) {
  const FactorSet f{Matrix::Zero(3, 1), Matrix::Zero(4, 1), Matrix::Zero(5, 1)};
  EXPECT_THROW(spectrum_map(f, line_channel(), {}, 0), std::invalid_argument);
  EXPECT_THROW(spectrum_map(f, line_channel(), {{0, 0}}, 5), std::out_of_range);
  const FactorSet wrong{Matrix::Zero(4, 1), Matrix::Zero(4, 1), Matrix::Zero(5, 1)};
  EXPECT_THROW(spectrum_map(wrong, line_channel(), {{0, 0}}, 0), std::invalid_argument);
}

TEST(SpectrumMap, GridEvaluationMatchesPathlossGains) {
  const ChannelModel ch = reference_channel();
  Rng rng(1, "map");
  const FactorSet f = random_factors(rng, {25, 6, 7}, 3);
  const SpectrumMap m = spectrum_map(f, ch, ch.grid_points, 4);
  const Matrix w = pathloss_gains(ch.grid_points, ch.grid_points, ch.eta, ch.d_min);
  const Matrix expected = w * f.A * f.C.row(4).asDiagonal() * f.B.transpose();
  EXPECT_LT(rel_diff(m.values, expected), 1e-12);
}

TEST(SpectrumMap, FactorAndTensorFormsAgree) {
  const ChannelModel ch = reference_channel();
  Rng rng(2, "map");
  const FactorSet f = random_factors(rng, {25, 6, 7}, 3);
  const auto q = raster_points({5, 5, 1.0}, 3);
  EXPECT_LT(rel_diff(spectrum_map(f, ch, q, 3).values, spectrum_map(cp_reconstruct(f), ch, q, 3).values), 1e-12);
}

TEST(SpectrumMap, LinearInComponentAmplitude) {
  const ChannelModel ch = reference_channel();
  Rng rng(3, "map");
  const FactorSet f = random_factors(rng, {25, 6, 7}, 3);
  const auto q = raster_points({5, 5, 1.0}, 2);
  FactorSet scaled = f;
  scaled.C.col(1) *= 2.5;
  FactorSet only{f.A.col(1), f.B.col(1), f.C.col(1)};
  const Matrix base = spectrum_map(f, ch, q, 2).values;
  const Matrix comp = spectrum_map(only, ch, q, 2).values;
  EXPECT_LT(rel_diff(spectrum_map(scaled, ch, q, 2).values, base + 1.5 * comp), 1e-12);
}

TEST(AggregateMap, Examples) {
  SpectrumMap m;
  m.values = (Matrix(2, 1) << 3, 4).finished();
  EXPECT_EQ(aggregate_map(m), (Vector(2) << 3, 4).finished());
  m.values = (Matrix(2, 2) << 3, 3, 4, 4).finished();
  EXPECT_EQ(aggregate_map(m), (Vector(2) << 6, 8).finished());
  Rng rng(4, "agg");
  m.values = random_matrix(rng, 7, 5);
  const Vector agg = aggregate_map(m);
  for (Eigen::Index i = 0; i < 7; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < 5; ++j) s += m.values(i, j);
    EXPECT_NEAR(agg(i), s, 1e-14);
  }
}

TEST(AggregateMap, EqualsMapOfFrequencySummedFactors) {
  const ChannelModel ch = reference_channel();
  Rng rng(5, "agg");
  const FactorSet f = random_factors(rng, {25, 6, 7}, 3);
  const auto q = raster_points({5, 5, 1.0}, 4);
  const FactorSet summed{f.A, f.B.colwise().sum(), f.C};
  const Vector lhs = aggregate_map(spectrum_map(f, ch, q, 1));
  const Matrix rhs = spectrum_map(summed, ch, q, 1).values;
  EXPECT_LT(rel_diff(lhs, rhs), 1e-12);
}

TEST(Raster, FactorOneReproducesGrid) {
  const GridSpec g{5, 5, 1.5};
  const auto r = raster_points(g, 1);
  const auto p = grid_points(g);
  ASSERT_EQ(r.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_DOUBLE_EQ(r[i].x, p[i].x);
    EXPECT_DOUBLE_EQ(r[i].y, p[i].y);
  }
  EXPECT_EQ(raster_points(g, 4).size(), 17u * 17u);
  EXPECT_THROW(raster_points(g, 0), std::invalid_argument);
}

TEST(SliceError, Examples) {
  Rng rng(6, "err");
  const Tensor3 x = random_tensor(rng, {4, 3, 5});
  for (double e : slice_error_trace(x, x).error) EXPECT_EQ(e, 0.0);
  for (double e : slice_error_trace(Tensor3({4, 3, 5}), x).error) EXPECT_NEAR(e, 1.0, 1e-15);

  const Tensor3 y = random_tensor(rng, {4, 3, 5});
  const SliceErrorTrace tr = slice_error_trace(y, x);
  for (std::size_t t = 0; t < 5; ++t) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        num += std::pow(y(i, j, t) - x(i, j, t), 2);
        den += std::pow(x(i, j, t), 2);
      }
    EXPECT_NEAR(tr.error[t], std::sqrt(num / den), 1e-14);
    EXPECT_FALSE(tr.absolute[t]);
  }
}

TEST(SliceError, ZeroTruthSlicesAreAbsoluteAndFlagged) {
  Tensor3 truth({2, 2, 2});
  truth(0, 0, 1) = 2.0;
  Tensor3 est({2, 2, 2});
  est(1, 1, 0) = 3.0;
  const SliceErrorTrace tr = slice_error_trace(est, truth);
  EXPECT_TRUE(tr.absolute[0]);
  EXPECT_DOUBLE_EQ(tr.error[0], 3.0);
  EXPECT_FALSE(tr.absolute[1]);
  EXPECT_DOUBLE_EQ(tr.error[1], 1.0);
  EXPECT_THROW(slice_error_trace(Tensor3({2, 2, 1}), truth), std::invalid_argument);
}

TEST(TopK, OrdersAndBreaksTies) {
  const Vector v = (Vector(5) << 1, 5, 3, 5, 0).finished();
  EXPECT_EQ(top_k(v, 3), (std::vector<Eigen::Index>{1, 3, 2}));
}

TEST(LocalMaxima, FindsIsolatedPeaks) {
  Vector v = Vector::Zero(25);
  v(7) = 10;
  v(8) = 4;
  v(19) = 2;
  v(24) = 0.5;
  EXPECT_EQ(grid_local_maxima({5, 5, 1.0}, v, 0.1), (std::vector<Eigen::Index>{7, 19}));
}
