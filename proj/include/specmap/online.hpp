#pragma once

// Sliding-window online cartography. Each slot the newest N x F slice joins
// a window of the most recent W(t) slices, the windowed tensor is
// re-decomposed (warm-started from the previous slot), and the window
// length follows an additive-increase / multiplicative-decrease rule driven
// by the model residual.

#include <deque>
#include <optional>
#include <vector>

#include "specmap/cartography.hpp"
#include "specmap/cpd.hpp"
#include "specmap/scenario.hpp"

namespace specmap {

/// W + 1 when residual <= j, otherwise 1 + floor(W / 2).
int window_update(int w_prev, double residual, double j);

enum class ResidualNorm {
  absolute,   // ||Y - X x_1 Gamma||_F
  per_slice,  // divided by sqrt(W)
  relative,   // divided by ||Y||_F
};

struct OnlineOptions {
  int rank = 2;
  int capacity = 64;
  int sweeps_per_slot = 15;
  double rel_tol = 1e-4;
  int init_iters = 30;
  SolverTolerances inner{500, 1e-10, 0.0};
  RegWeights weights;
  ResidualNorm residual_norm = ResidualNorm::absolute;
  // Fixed threshold; when unset it is calibrated from the warm-up slots.
  std::optional<double> j_threshold;
  int warmup_slots = 10;
  double j_percentile = 0.95;
  double j_margin = 1.0;

  void validate() const;
};

struct WindowState {
  int w = 1;
  std::optional<double> j_threshold;
  std::deque<Matrix> buffer;  // oldest first
  std::optional<WarmStart> warm;
  std::vector<double> warmup_residuals;
  int slots_seen = 0;
};

struct OnlineStepResult {
  int slot = 0;        // 1-based index of the slice just consumed
  int window = 0;      // slices in the decomposed tensor
  int next_window = 0;
  double residual = 0.0;  // after the configured normalization
  double objective = 0.0;
  std::optional<double> threshold;
  DecompositionResult decomposition;
  SpectrumMap map;     // at the newest slot
  std::vector<Eigen::Index> active_locations;  // sorted, distinct
};

/// Consumes one slice and advances the window state.
OnlineStepResult online_step(WindowState& state, const Matrix& slice, const ChannelModel& channel,
                             const OnlineOptions& opts, const std::vector<Point>& map_queries);

/// Empirical quantile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace specmap
