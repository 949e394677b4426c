#pragma once

// JSON run configuration: the scenario plus solver, baseline, online and
// map settings. Parsing is strict (unknown keys are rejected) and every
// error carries the line of the offending key.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "specmap/cpd.hpp"
#include "specmap/online.hpp"
#include "specmap/scenario.hpp"

namespace specmap {

struct BaselineOptions {
  double lasso_lambda = 10.0;
  int moving_avg_window = 10;
  GridMapping cp_mapping = GridMapping::matching_pursuit;
  int cp_iters = 50;
};

struct MapOptions {
  int raster = 4;     // query raster refinement per grid cell
  int time_slot = 60; // 1-based
};

struct RunConfig {
  ScenarioConfig scenario;
  StoppingOptions solver;
  BaselineOptions baselines;
  OnlineOptions online;
  MapOptions map;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Throws ConfigError; `source` prefixes messages ("fig4.json:12: ...").
RunConfig parse_config(std::string_view text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form with every field spelled out, keys in a fixed order.
std::string dump_config(const RunConfig& cfg);

/// FNV-1a over the canonical dump.
std::uint64_t config_hash(const RunConfig& cfg);

std::string_view preset_config(std::string_view name);  // throws for unknown names

}  // namespace specmap
