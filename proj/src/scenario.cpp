#include "specmap/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "specmap/kernels.hpp"
#include "specmap/random.hpp"

namespace specmap {
namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw std::invalid_argument(field + ": " + why);
}

}  // namespace

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ScenarioConfig::validate() const {
  if (grid.rows < 1 || grid.cols < 1) bad("grid", "rows and cols must be positive");
  if (!(grid.spacing > 0.0) || !std::isfinite(grid.spacing)) bad("grid.spacing", "must be positive");
  if (sensors.points.empty() && sensors.count < 1) bad("sensors.count", "must be positive");
  if (F < 1) bad("F", "must be positive");
  if (T < 1) bad("T", "must be positive");
  if (R < 1) bad("R", "must be positive");
  if (!(eta >= 2.0 && eta <= 3.0)) bad("eta", "loss exponent must lie in [2, 3]");
  if (d_min && !(*d_min > 0.0)) bad("d_min", "must be positive");
  if (static_cast<int>(pus.size()) > R) bad("pus", "more primary users than the rank R");
  for (std::size_t i = 0; i < pus.size(); ++i) {
    const PrimaryUser& pu = pus[i];
    const std::string at = "pus[" + std::to_string(i) + "]";
    if (pu.grid_index < 0 || pu.grid_index >= P()) bad(at + ".grid_index", "outside [0, P)");
    if (pu.freq_lo < 1 || pu.freq_hi < pu.freq_lo || pu.freq_hi > F) {
      bad(at + ".freq_band", "must satisfy 1 <= lo <= hi <= F");
    }
    if (pu.time_lo < 1 || pu.time_hi < pu.time_lo || pu.time_hi > T) {
      bad(at + ".time_span", "must satisfy 1 <= lo <= hi <= T");
    }
    if (!std::isfinite(pu.power)) bad(at + ".power", "must be finite");
    int last = pu.time_lo;
    for (const PuMove& mv : pu.moves) {
      if (mv.grid_index < 0 || mv.grid_index >= P()) bad(at + ".moves.grid_index", "outside [0, P)");
      if (mv.start_slot <= last || mv.start_slot > pu.time_hi) {
        bad(at + ".moves.start_slot", "must increase strictly within the time span");
      }
      last = mv.start_slot;
    }
  }
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    bad("snr_db", "must be a number or +inf");
  }
  if (perturb.taps < 1) bad("perturb.taps", "must be at least 1");
  if (!(perturb.strength >= 0.0) || !std::isfinite(perturb.strength)) {
    bad("perturb.strength", "must be finite and non-negative");
  }
  weights.validate();
}

std::vector<Point> grid_points(const GridSpec& grid) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(grid.rows * grid.cols));
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) pts.push_back({c * grid.spacing, r * grid.spacing});
  return pts;
}

std::vector<Point> place_sensors(const ScenarioConfig& cfg) {
  if (!cfg.sensors.points.empty()) return cfg.sensors.points;
  Rng rng(cfg.seed, "sensors");
  const double width = (cfg.grid.cols - 1) * cfg.grid.spacing;
  const double height = (cfg.grid.rows - 1) * cfg.grid.spacing;
  std::vector<Point> pts;
  for (int n = 0; n < cfg.sensors.count; ++n) {
    const double x = rng.uniform(0.0, width);
    const double y = rng.uniform(0.0, height);
    pts.push_back({x, y});
  }
  return pts;
}

Matrix pathloss_gains(const std::vector<Point>& grid, const std::vector<Point>& sensors, double eta,
                      double d_min) {
  if (!(eta >= 2.0 && eta <= 3.0)) throw std::invalid_argument("pathloss: eta must lie in [2, 3]");
  if (!(d_min > 0.0)) throw std::invalid_argument("pathloss: d_min must be positive");
  Matrix g(static_cast<Eigen::Index>(sensors.size()), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t n = 0; n < sensors.size(); ++n) {
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const double d = std::max(distance(sensors[n], grid[p]), d_min);
      g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)) = 1.0 / std::pow(d, eta);
    }
  }
  return g;
}

FactorSet synth_factors(const ScenarioConfig& cfg) {
  struct Segment {
    int grid_index, t_lo, t_hi;
    const PrimaryUser* pu;
  };
  std::vector<Segment> segments;
  for (const PrimaryUser& pu : cfg.pus) {
    int loc = pu.grid_index;
    int start = pu.time_lo;
    for (const PuMove& mv : pu.moves) {
      segments.push_back({loc, start, mv.start_slot - 1, &pu});
      loc = mv.grid_index;
      start = mv.start_slot;
    }
    segments.push_back({loc, start, pu.time_hi, &pu});
  }
  const auto k = static_cast<Eigen::Index>(segments.size());
  FactorSet f{Matrix::Zero(cfg.P(), k), Matrix::Zero(cfg.F, k), Matrix::Zero(cfg.T, k)};
  for (Eigen::Index r = 0; r < k; ++r) {
    const Segment& s = segments[static_cast<std::size_t>(r)];
    f.A(s.grid_index, r) = 1.0;
    for (int b = s.pu->freq_lo; b <= s.pu->freq_hi; ++b) f.B(b - 1, r) = s.pu->power;
    for (int t = s.t_lo; t <= s.t_hi; ++t) f.C(t - 1, r) = 1.0;
  }
  return f;
}

Matrix rayleigh_perturbation(const Matrix& gamma_m, int taps, double strength, std::uint64_t seed) {
  if (taps < 1) throw std::invalid_argument("rayleigh_perturbation: taps must be at least 1");
  if (!(strength >= 0.0)) throw std::invalid_argument("rayleigh_perturbation: strength must be >= 0");
  Matrix out = Matrix::Zero(gamma_m.rows(), gamma_m.cols());
  if (strength == 0.0) return out;
  Rng rng(seed, "perturbation");
  const double tap_sigma = std::sqrt(0.5 / taps);  // per real dimension
  const double mean_abs = 0.5 * std::sqrt(std::numbers::pi);  // E|h| for E|h|^2 = 1
  for (Eigen::Index p = 0; p < gamma_m.cols(); ++p) {
    for (Eigen::Index n = 0; n < gamma_m.rows(); ++n) {
      double re = 0.0;
      double im = 0.0;
      for (int k = 0; k < taps; ++k) {
        re += tap_sigma * rng.normal();
        im += tap_sigma * rng.normal();
      }
      out(n, p) = gamma_m(n, p) * strength * (std::hypot(re, im) - mean_abs);
    }
  }
  return out;
}

ChannelModel build_channel(const ScenarioConfig& cfg) {
  ChannelModel ch;
  ch.grid_points = grid_points(cfg.grid);
  ch.sensor_points = place_sensors(cfg);
  ch.eta = cfg.eta;
  ch.d_min = cfg.min_distance();
  ch.gamma_m = pathloss_gains(ch.grid_points, ch.sensor_points, ch.eta, ch.d_min);
  ch.gamma_p_true = cfg.perturb.enabled
                        ? rayleigh_perturbation(ch.gamma_m, cfg.perturb.taps, cfg.perturb.strength, cfg.seed)
                        : Matrix::Zero(ch.gamma_m.rows(), ch.gamma_m.cols());
  return ch;
}

GroundTruth make_ground_truth(const ScenarioConfig& cfg) {
  cfg.validate();
  GroundTruth gt;
  gt.factors = synth_factors(cfg);
  gt.X = cp_reconstruct(gt.factors);
  gt.channel = build_channel(cfg);
  return gt;
}

Tensor3 generate_sensed(const GroundTruth& gt, double snr_db, std::uint64_t seed) {
  const ChannelModel& ch = gt.channel;
  if (static_cast<std::size_t>(ch.gamma_m.cols()) != gt.X.dims().d1) {
    throw std::invalid_argument("generate_sensed: channel and propagation tensor disagree on P");
  }
  if (std::isnan(snr_db)) throw std::invalid_argument("generate_sensed: snr_db is NaN");
  Tensor3 y = mode1_product(gt.X, ch.gamma_m + ch.gamma_p_true);
  if (snr_db == std::numeric_limits<double>::infinity()) return y;
  const double signal = kernels::sum_squares(y.data());
  if (signal == 0.0) throw std::invalid_argument("generate_sensed: SNR undefined for an all-zero signal");
  const double noise_var = signal / (static_cast<double>(y.size()) * std::pow(10.0, snr_db / 10.0));
  const double sigma = std::sqrt(noise_var);
  Rng rng(seed, "noise");
  for (double& v : y.data()) v += sigma * rng.normal();
  return y;
}

}  // namespace specmap
