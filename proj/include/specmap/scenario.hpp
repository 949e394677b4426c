#pragma once

// Synthetic spectrum-sensing scenarios: candidate grid and sensor geometry,
// pathloss channel gains, rectangular primary-user activations, Rayleigh
// multipath perturbation of the gains, and AWGN at a global SNR.
//
// Indexing: grid indices are 0-based (row-major over the grid, p = row *
// cols + col). Frequency bins and time slots in a config are 1-based and
// inclusive, matching how activation bands are usually quoted.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "specmap/cpd.hpp"
#include "specmap/tensor.hpp"

namespace specmap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct GridSpec {
  int rows = 5;
  int cols = 5;
  double spacing = 1.0;
};

struct SensorSpec {
  int count = 15;
  std::vector<Point> points;  // explicit placement; random in the grid area when empty
};

struct PuMove {
  int start_slot = 1;   // first slot (1-based) at the new location
  int grid_index = 0;
};

struct PrimaryUser {
  int grid_index = 0;
  int freq_lo = 1, freq_hi = 1;  // inclusive, 1-based
  int time_lo = 1, time_hi = 1;  // inclusive, 1-based
  double power = 1.0;
  std::vector<PuMove> moves;     // step relocations, ascending start_slot
};

struct PerturbSpec {
  bool enabled = false;
  int taps = 6;
  double strength = 0.0;
};

struct ScenarioConfig {
  GridSpec grid;
  SensorSpec sensors;
  int F = 64;
  int T = 100;
  int R = 4;
  double eta = 2.5;
  std::optional<double> d_min;  // defaults to half the grid spacing
  std::vector<PrimaryUser> pus;
  double snr_db = std::numeric_limits<double>::infinity();
  PerturbSpec perturb;
  RegWeights weights;
  std::uint64_t seed = 1;

  int P() const { return grid.rows * grid.cols; }
  int N() const {
    return sensors.points.empty() ? sensors.count : static_cast<int>(sensors.points.size());
  }
  double min_distance() const { return d_min.value_or(0.5 * grid.spacing); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ChannelModel {
  std::vector<Point> grid_points;
  std::vector<Point> sensor_points;
  double eta = 2.5;
  double d_min = 0.5;
  Matrix gamma_m;       // N x P
  Matrix gamma_p_true;  // N x P, zero when unperturbed
};

struct GroundTruth {
  FactorSet factors;  // one component per activation segment
  Tensor3 X;          // P x F x T
  ChannelModel channel;
};

std::vector<Point> grid_points(const GridSpec& grid);
std::vector<Point> place_sensors(const ScenarioConfig& cfg);

/// gamma(n, p) = 1 / max(d(sensor n, grid p), d_min)^eta.
Matrix pathloss_gains(const std::vector<Point>& grid, const std::vector<Point>& sensors, double eta,
                      double d_min);

/// Rectangular activations, one rank-1 component per PU location segment.
FactorSet synth_factors(const ScenarioConfig& cfg);

/// Gamma_p with actual gain = gamma_m * (1 + strength * (|h| - E|h|)), h a
/// sum of `taps` circular complex Gaussians with unit total power.
Matrix rayleigh_perturbation(const Matrix& gamma_m, int taps, double strength, std::uint64_t seed);

ChannelModel build_channel(const ScenarioConfig& cfg);
GroundTruth make_ground_truth(const ScenarioConfig& cfg);

/// Y = X x_1 (Gamma_M + Gamma_p) + noise with 10 log10(P_signal / P_noise)
/// = snr_db over the whole tensor; snr_db = +inf disables noise.
Tensor3 generate_sensed(const GroundTruth& gt, double snr_db, std::uint64_t seed);

}  // namespace specmap
