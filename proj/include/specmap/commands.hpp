#pragma once

// The command implementations behind the `specmap` tool. Each command
// writes its outputs plus a manifest.json into an output directory and
// never touches its inputs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmap/cartography.hpp"
#include "specmap/config.hpp"

namespace specmap {

inline constexpr const char* kVersion = "0.1.0";

/// Non-convergence under --strict; maps to exit code 3.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> rel_tol;
  std::optional<int> max_sweeps;
  std::optional<int> time_slot;
  std::optional<int> raster;
  bool strict = false;

  void apply(RunConfig& cfg) const;
};

/// Mean normalized slice error per method, plus the per-slot traces.
struct Comparison {
  std::vector<std::string> methods;  // proposed, cp_init, slice_ls, slice_lasso, moving_avg
  std::vector<SliceErrorTrace> traces;
  std::vector<double> means;
  DecompositionResult proposed;
};

Comparison compare_methods(const Tensor3& y, const Tensor3& x_true, const Matrix& gamma_m,
                           const RunConfig& cfg);

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out);
void cmd_decompose(const std::filesystem::path& scenario, const std::filesystem::path& out,
                   const Overrides& ov);
void cmd_compare(const std::filesystem::path& scenario, const std::filesystem::path& out,
                 const Overrides& ov);
void cmd_map(const std::filesystem::path& decomposition, const std::filesystem::path& out,
             const Overrides& ov);
/// Streams slices from `stream` when given, otherwise from the simulated
/// scenario of `cfg`.
void cmd_online(const RunConfig& cfg, const std::optional<std::filesystem::path>& stream,
                const std::filesystem::path& out);
/// fig4: simulate, decompose, compare. fig6: simulate, decompose, map with
/// baseline maps. fig8: online run.
void cmd_reproduce(const std::string& preset, const std::filesystem::path& out, const Overrides& ov);

}  // namespace specmap
