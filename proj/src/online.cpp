#include "specmap/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace specmap {

int window_update(int w_prev, double residual, double j) {
  if (w_prev < 1) throw std::invalid_argument("window_update: window must be at least 1");
  if (!(j > 0.0)) throw std::invalid_argument("window_update: threshold must be positive");
  return residual <= j ? w_prev + 1 : 1 + w_prev / 2;
}

void OnlineOptions::validate() const {
  if (rank < 1) throw std::invalid_argument("online.rank must be at least 1");
  if (capacity < 1) throw std::invalid_argument("online.capacity must be at least 1");
  if (sweeps_per_slot < 1) throw std::invalid_argument("online.sweeps_per_slot must be at least 1");
  if (j_threshold && !(*j_threshold > 0.0)) throw std::invalid_argument("online.j_threshold must be positive");
  if (warmup_slots < 1) throw std::invalid_argument("online.warmup_slots must be at least 1");
  if (!(j_percentile > 0.0 && j_percentile <= 1.0)) {
    throw std::invalid_argument("online.j_percentile must lie in (0, 1]");
  }
  if (!(j_margin > 0.0)) throw std::invalid_argument("online.j_margin must be positive");
  weights.validate();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

OnlineStepResult online_step(WindowState& state, const Matrix& slice, const ChannelModel& channel,
                             const OnlineOptions& opts, const std::vector<Point>& map_queries) {
  opts.validate();
  const Matrix& gamma_m = channel.gamma_m;
  if (slice.rows() != gamma_m.rows()) throw std::invalid_argument("online_step: slice must have N rows");
  if (!state.buffer.empty() && slice.cols() != state.buffer.back().cols()) {
    throw std::invalid_argument("online_step: slice frequency count changed");
  }

  state.buffer.push_back(slice);
  while (static_cast<int>(state.buffer.size()) > state.w) state.buffer.pop_front();
  ++state.slots_seen;

  const auto w = static_cast<std::size_t>(state.buffer.size());
  Tensor3 y({static_cast<std::size_t>(slice.rows()), static_cast<std::size_t>(slice.cols()), w});
  for (std::size_t k = 0; k < w; ++k) y.set_frontal_slice(k, state.buffer[k]);

  StoppingOptions stop;
  stop.rel_tol = opts.rel_tol;
  stop.max_sweeps = opts.sweeps_per_slot;
  stop.init_iters = opts.init_iters;
  stop.inner = opts.inner;
  const WarmStart* warm = state.warm ? &*state.warm : nullptr;

  OnlineStepResult out;
  out.slot = state.slots_seen;
  out.window = static_cast<int>(w);
  out.decomposition = structured_als(y, gamma_m, opts.rank, opts.weights, stop, warm);
  const DecompositionResult& dec = out.decomposition;
  out.objective = dec.objective_trace.back();

  const Matrix gamma = gamma_m + dec.gamma_p;
  double residual = std::sqrt(squared_frob_distance(y, cp_reconstruct({gamma * dec.factors.A, dec.factors.B, dec.factors.C})));
  switch (opts.residual_norm) {
    case ResidualNorm::absolute: break;
    case ResidualNorm::per_slice: residual /= std::sqrt(static_cast<double>(w)); break;
    case ResidualNorm::relative: {
      const double norm = frob_norm(y);
      residual = norm > 0.0 ? residual / norm : 0.0;
      break;
    }
  }
  out.residual = residual;

  if (opts.j_threshold) state.j_threshold = opts.j_threshold;
  int next = state.w;
  if (state.j_threshold) {
    next = window_update(out.window, residual, *state.j_threshold);
  } else {
    state.warmup_residuals.push_back(residual);
    next = out.window + 1;
    if (static_cast<int>(state.warmup_residuals.size()) >= opts.warmup_slots) {
      const double calibrated = opts.j_margin * percentile(state.warmup_residuals, opts.j_percentile);
      state.j_threshold = calibrated > 0.0 ? calibrated : std::numeric_limits<double>::min();
    }
  }
  state.w = std::clamp(next, 1, opts.capacity);
  out.next_window = state.w;
  out.threshold = state.j_threshold;

  state.warm = WarmStart{dec.factors, dec.gamma_p};

  out.map = spectrum_map(dec.factors, channel, map_queries, w - 1);
  const auto sup = dec.support();
  const std::set<Eigen::Index> distinct(sup.begin(), sup.end());
  out.active_locations.assign(distinct.begin(), distinct.end());
  return out;
}

}  // namespace specmap
