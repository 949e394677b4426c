// specmap: scenario simulation, decomposition, baselines, maps and the
// online loop from the command line.
//
// Exit codes: 0 success, 2 usage or input error, 3 non-convergence under
// --strict, 1 anything else.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "specmap/commands.hpp"
#include "specmap/io.hpp"

namespace {

using namespace specmap;

struct Flags {
  std::string config;
  std::string preset;
  std::string out;
  std::string input;
  std::string stream;
  std::optional<std::uint64_t> seed;
  std::optional<double> rel_tol;
  std::optional<int> max_sweeps;
  std::optional<int> time_slot;
  std::optional<int> raster;
  bool strict = false;

  Overrides overrides() const { return {seed, rel_tol, max_sweeps, time_slot, raster, strict}; }

  RunConfig run_config() const {
    if (config.empty() == preset.empty()) throw std::invalid_argument("give exactly one of --config or --preset");
    RunConfig cfg = preset.empty() ? load_config(config) : parse_config(preset_config(preset), preset + ".json");
    overrides().apply(cfg);
    return cfg;
  }
};

void add_solver_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--rel-tol", f.rel_tol, "Relative objective change that stops the sweeps");
  cmd->add_option("--max-sweeps", f.max_sweeps, "Sweep limit");
  cmd->add_flag("--strict", f.strict, "Exit with code 3 when the decomposition does not converge");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum cartography by structured CP decomposition"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  sim->add_option("--config", f.config, "Scenario config (JSON)");
  sim->add_option("--preset", f.preset, "Bundled config: fig4, fig6 or fig8");
  sim->add_option("--seed", f.seed, "Override the config seed");
  sim->add_option("--out", f.out, "Output directory")->required();

  auto* dec = app.add_subcommand("decompose", "Run the structured decomposition on a scenario");
  dec->add_option("--scenario", f.input, "Directory written by simulate")->required();
  dec->add_option("--out", f.out, "Output directory")->required();
  add_solver_flags(dec, f);

  auto* cmp = app.add_subcommand("compare", "Error traces of the proposed method and the baselines");
  cmp->add_option("--scenario", f.input, "Directory written by simulate")->required();
  cmp->add_option("--out", f.out, "Output directory")->required();
  add_solver_flags(cmp, f);

  auto* map = app.add_subcommand("map", "Spectrum map from a decomposition");
  map->add_option("--decomposition", f.input, "Directory written by decompose")->required();
  map->add_option("--out", f.out, "Output directory")->required();
  map->add_option("--time-slot", f.time_slot, "1-based time slot");
  map->add_option("--raster", f.raster, "Query points per grid spacing");

  auto* onl = app.add_subcommand("online", "Sliding-window run with adaptive window length");
  onl->add_option("--config", f.config, "Scenario config (JSON)");
  onl->add_option("--preset", f.preset, "Bundled config: fig4, fig6 or fig8");
  onl->add_option("--seed", f.seed, "Override the config seed");
  onl->add_option("--stream", f.stream, "Slice stream file; simulated from the config when absent");
  onl->add_option("--out", f.out, "Output directory")->required();

  auto* rep = app.add_subcommand("reproduce", "Run a bundled figure experiment end to end");
  rep->add_option("--preset", f.preset, "fig4, fig6 or fig8")->required();
  rep->add_option("--seed", f.seed, "Override the config seed");
  rep->add_option("--out", f.out, "Output directory")->required();
  add_solver_flags(rep, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      cmd_simulate(f.run_config(), f.out);
    } else if (dec->parsed()) {
      cmd_decompose(f.input, f.out, f.overrides());
    } else if (cmp->parsed()) {
      cmd_compare(f.input, f.out, f.overrides());
    } else if (map->parsed()) {
      cmd_map(f.input, f.out, f.overrides());
    } else if (onl->parsed()) {
      std::optional<std::filesystem::path> stream;
      if (!f.stream.empty()) stream = f.stream;
      cmd_online(f.run_config(), stream, f.out);
    } else if (rep->parsed()) {
      cmd_reproduce(f.preset, f.out, f.overrides());
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
