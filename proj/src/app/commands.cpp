#include "specmap/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "specmap/io.hpp"
#include "specmap/kernels.hpp"

namespace specmap {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void Overrides::apply(RunConfig& cfg) const {
  if (seed) cfg.scenario.seed = *seed;
  if (rel_tol) cfg.solver.rel_tol = *rel_tol;
  if (max_sweeps) cfg.solver.max_sweeps = *max_sweeps;
  if (time_slot) cfg.map.time_slot = *time_slot;
  if (raster) cfg.map.raster = *raster;
  cfg.validate();
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Collects the files a command writes and closes with the manifest.
class Recorder {
 public:
  Recorder(std::string command, fs::path out, const RunConfig& cfg)
      : command_(std::move(command)), out_(std::move(out)), seed_(cfg.scenario.seed),
        hash_(config_hash(cfg)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_);
  }

  void write(const std::string& name, std::string_view content) {
    write_file(out_ / name, content);
    outputs_.push_back(name);
  }

  void adopt(const std::vector<std::string>& names) { outputs_.insert(outputs_.end(), names.begin(), names.end()); }

  void finish() {
    std::sort(outputs_.begin(), outputs_.end());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    ordered_json m;
    m["command"] = command_;
    m["seed"] = seed_;
    m["config_hash"] = hex64(hash_);
    m["versions"] = {{"specmap", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
                     {"kernels", std::string(kernels::isa_name(kernels::active_isa()))}};
    m["outputs"] = outputs_;
    m["duration_seconds"] = secs;
    write_file(out_ / "manifest.json", m.dump(2) + "\n");
  }

  const fs::path& dir() const { return out_; }

 private:
  std::string command_;
  fs::path out_;
  std::uint64_t seed_;
  std::uint64_t hash_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

void check_distinct(const fs::path& in, const fs::path& out) {
  std::error_code ec;
  if (fs::exists(out) && fs::equivalent(in, out, ec)) {
    throw std::invalid_argument("output directory must differ from the input directory");
  }
}

RunConfig load_dir_config(const fs::path& dir) {
  const fs::path path = dir / "config.json";
  if (!fs::exists(path)) throw InputError("missing " + path.string());
  return load_config(path);
}

std::string points_csv(const std::vector<Point>& pts) {
  std::string out = "index,x,y\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out += std::to_string(i) + "," + format_double(pts[i].x) + "," + format_double(pts[i].y) + "\n";
  }
  return out;
}

std::string error_csv(const SliceErrorTrace& tr) {
  std::string out = "slot,error\n";
  for (std::size_t t = 0; t < tr.error.size(); ++t) {
    out += std::to_string(t + 1) + "," + format_double(tr.error[t]) + "\n";
  }
  return out;
}

ChannelModel map_geometry(const ScenarioConfig& s) {
  ChannelModel ch;
  ch.grid_points = grid_points(s.grid);
  ch.eta = s.eta;
  ch.d_min = s.min_distance();
  return ch;
}

std::string grid_map_csv(const std::vector<Point>& pts, const Vector& values) {
  std::string out = "grid_index,x,y,value\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out += std::to_string(i) + "," + format_double(pts[i].x) + "," + format_double(pts[i].y) + "," +
           format_double(values(static_cast<Eigen::Index>(i))) + "\n";
  }
  return out;
}

void check_model_inputs(const Tensor3& y, const Matrix& gamma_m, int rank) {
  if (static_cast<std::size_t>(gamma_m.rows()) != y.dims().d1) {
    throw InputError("gamma_m.csv rows do not match the sensor count of Y.t3");
  }
  if (rank < 1) throw std::invalid_argument("R must be at least 1");
}

}  // namespace

Comparison compare_methods(const Tensor3& y, const Tensor3& x_true, const Matrix& gamma_m,
                           const RunConfig& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  const BaselineOptions& b = cfg.baselines;
  Comparison c;
  c.proposed = structured_als(y, gamma_m, s.R, s.weights, cfg.solver);
  const auto slice_lasso = [&](const Tensor3& t) { return baseline_slice_lasso(t, gamma_m, b.lasso_lambda); };
  const std::vector<std::pair<std::string, Tensor3>> estimates = {
      {"proposed", cp_reconstruct(c.proposed.factors)},
      {"cp_init", cp_reconstruct(baseline_cp_factors(y, gamma_m, s.R, b.cp_iters, b.cp_mapping))},
      {"slice_ls", baseline_slice_ls(y, gamma_m)},
      {"slice_lasso", slice_lasso(y)},
      {"moving_avg", baseline_moving_avg(y, b.moving_avg_window, slice_lasso)},
  };
  for (const auto& [name, est] : estimates) {
    c.methods.push_back(name);
    c.traces.push_back(slice_error_trace(est, x_true));
    c.means.push_back(c.traces.back().mean());
  }
  return c;
}

void cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  Recorder rec("simulate", out, cfg);
  const ScenarioConfig& s = cfg.scenario;
  const GroundTruth gt = make_ground_truth(s);
  const Tensor3 y = generate_sensed(gt, s.snr_db, s.seed);
  std::ostringstream xs, ys;
  write_tensor(xs, gt.X);
  write_tensor(ys, y);

  rec.write("config.json", dump_config(cfg));
  rec.write("grid.csv", points_csv(gt.channel.grid_points));
  rec.write("sensors.csv", points_csv(gt.channel.sensor_points));
  rec.write("gamma_m.csv", matrix_csv(gt.channel.gamma_m));
  rec.write("gamma_p_true.csv", matrix_csv(gt.channel.gamma_p_true));
  rec.write("A_true.csv", matrix_csv(gt.factors.A));
  rec.write("B_true.csv", matrix_csv(gt.factors.B));
  rec.write("C_true.csv", matrix_csv(gt.factors.C));
  rec.write("X.t3", xs.str());
  rec.write("Y.t3", ys.str());
  rec.write("Y_stream.txt", slice_stream(y));
  rec.finish();
}

void cmd_decompose(const fs::path& scenario, const fs::path& out, const Overrides& ov) {
  check_distinct(scenario, out);
  RunConfig cfg = load_dir_config(scenario);
  ov.apply(cfg);
  const Tensor3 y = load_tensor_file(scenario / "Y.t3");
  const Matrix gamma_m = load_matrix_csv(scenario / "gamma_m.csv");
  check_model_inputs(y, gamma_m, cfg.scenario.R);

  Recorder rec("decompose", out, cfg);
  const DecompositionResult res = structured_als(y, gamma_m, cfg.scenario.R, cfg.scenario.weights, cfg.solver);
  const Tensor3 x_hat = cp_reconstruct(res.factors);

  std::string obj = "sweep,objective\n";
  std::string blocks = "sweep,after_a,after_b,after_c,after_gamma\n";
  for (std::size_t k = 0; k < res.objective_trace.size(); ++k) {
    const BlockObjectives& b = res.block_trace[k];
    obj += std::to_string(k + 1) + "," + format_double(res.objective_trace[k]) + "\n";
    blocks += std::to_string(k + 1) + "," + format_double(b.after_a) + "," + format_double(b.after_b) + "," +
              format_double(b.after_c) + "," + format_double(b.after_gamma) + "\n";
  }
  std::ostringstream xs;
  write_tensor(xs, x_hat);
  const auto sup = res.support();
  std::string summary = "key,value\n";
  summary += "converged," + std::string(res.converged ? "true" : "false") + "\n";
  summary += "sweeps," + std::to_string(res.sweeps) + "\n";
  summary += "objective," + format_double(res.objective_trace.back()) + "\n";
  summary += "support," + join(sup, " ", [](Eigen::Index p) { return std::to_string(p); }) + "\n";

  rec.write("config.json", dump_config(cfg));
  rec.write("A.csv", matrix_csv(res.factors.A));
  rec.write("B.csv", matrix_csv(res.factors.B));
  rec.write("C.csv", matrix_csv(res.factors.C));
  rec.write("Gamma_p.csv", matrix_csv(res.gamma_p));
  rec.write("objective_trace.csv", obj);
  rec.write("block_trace.csv", blocks);
  rec.write("X_hat.t3", xs.str());
  rec.write("summary.csv", summary);
  if (fs::exists(scenario / "X.t3")) {
    const Tensor3 x_true = load_tensor_file(scenario / "X.t3");
    if (!(x_true.dims() == x_hat.dims())) throw InputError("X.t3 does not match the decomposition shape");
    rec.write("error_trace.csv", error_csv(slice_error_trace(x_hat, x_true)));
  }
  rec.finish();
  if (ov.strict && !res.converged) {
    throw NumericalFailure("decompose: no convergence within " + std::to_string(cfg.solver.max_sweeps) + " sweeps");
  }
}

void cmd_compare(const fs::path& scenario, const fs::path& out, const Overrides& ov) {
  check_distinct(scenario, out);
  RunConfig cfg = load_dir_config(scenario);
  ov.apply(cfg);
  const Tensor3 y = load_tensor_file(scenario / "Y.t3");
  const Matrix gamma_m = load_matrix_csv(scenario / "gamma_m.csv");
  const Tensor3 x_true = load_tensor_file(scenario / "X.t3");
  check_model_inputs(y, gamma_m, cfg.scenario.R);
  if (x_true.dims().d2 != y.dims().d2 || x_true.dims().d3 != y.dims().d3 ||
      static_cast<Eigen::Index>(x_true.dims().d1) != gamma_m.cols()) {
    throw InputError("X.t3 does not match Y.t3 and gamma_m.csv");
  }

  Recorder rec("compare", out, cfg);
  const Comparison c = compare_methods(y, x_true, gamma_m, cfg);
  std::string traces = "slot," + join(c.methods, ",", [](const std::string& s) { return s; }) + "\n";
  for (std::size_t t = 0; t < y.dims().d3; ++t) {
    traces += std::to_string(t + 1);
    for (const SliceErrorTrace& tr : c.traces) traces += "," + format_double(tr.error[t]);
    traces += "\n";
  }
  std::string summary = "method,mean_error\n";
  for (std::size_t m = 0; m < c.methods.size(); ++m) summary += c.methods[m] + "," + format_double(c.means[m]) + "\n";

  rec.write("config.json", dump_config(cfg));
  rec.write("error_traces.csv", traces);
  rec.write("summary.csv", summary);
  rec.finish();
  if (ov.strict && !c.proposed.converged) throw NumericalFailure("compare: proposed method did not converge");
}

void cmd_map(const fs::path& decomposition, const fs::path& out, const Overrides& ov) {
  check_distinct(decomposition, out);
  RunConfig cfg = load_dir_config(decomposition);
  ov.apply(cfg);
  FactorSet f{load_matrix_csv(decomposition / "A.csv"), load_matrix_csv(decomposition / "B.csv"),
              load_matrix_csv(decomposition / "C.csv")};
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("factor files: ") + e.what());
  }
  const ChannelModel geom = map_geometry(cfg.scenario);
  if (static_cast<std::size_t>(f.A.rows()) != geom.grid_points.size()) {
    throw InputError("A.csv rows do not match the grid in config.json");
  }
  const int slot = cfg.map.time_slot;
  if (slot > f.C.rows()) throw std::invalid_argument("time slot beyond the decomposed horizon");
  const auto t = static_cast<std::size_t>(slot - 1);

  Recorder rec("map", out, cfg);
  const std::vector<Point> queries = raster_points(cfg.scenario.grid, cfg.map.raster);
  const SpectrumMap m = spectrum_map(f, geom, queries, t);
  const Vector agg = aggregate_map(m);
  std::string full = "x,y,f,t,value\n";
  std::string summed = "x,y,t,value\n";
  const std::string ts = std::to_string(slot);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const std::string xy = format_double(queries[q].x) + "," + format_double(queries[q].y) + ",";
    for (Eigen::Index k = 0; k < m.values.cols(); ++k) {
      full += xy + std::to_string(k + 1) + "," + ts + "," + format_double(m.values(qi, k)) + "\n";
    }
    summed += xy + ts + "," + format_double(agg(qi)) + "\n";
  }
  const Vector grid_agg = aggregate_map(spectrum_map(f, geom, geom.grid_points, t));

  rec.write("config.json", dump_config(cfg));
  rec.write("map.csv", full);
  rec.write("map_aggregated.csv", summed);
  rec.write("grid_map.csv", grid_map_csv(geom.grid_points, grid_agg));
  rec.finish();
}

void cmd_online(const RunConfig& cfg, const std::optional<fs::path>& stream, const fs::path& out) {
  cfg.validate();
  const ChannelModel channel = build_channel(cfg.scenario);
  std::vector<Matrix> slices;
  if (stream) {
    slices = parse_slice_stream(read_file(*stream), stream->filename().string());
  } else {
    const GroundTruth gt = make_ground_truth(cfg.scenario);
    const Tensor3 y = generate_sensed(gt, cfg.scenario.snr_db, cfg.scenario.seed);
    for (std::size_t t = 0; t < y.dims().d3; ++t) slices.push_back(y.frontal_slice(t));
  }
  if (slices.empty()) throw InputError("empty slice stream");
  if (slices.front().rows() != channel.gamma_m.rows()) {
    throw InputError("stream slices have " + std::to_string(slices.front().rows()) + " rows, expected " +
                     std::to_string(channel.gamma_m.rows()) + " sensors");
  }

  Recorder rec("online", out, cfg);
  WindowState state;
  std::string trace = "slot,window,residual,objective,active_locations\n";
  for (const Matrix& s : slices) {
    const OnlineStepResult r = online_step(state, s, channel, cfg.online, channel.grid_points);
    trace += std::to_string(r.slot) + "," + std::to_string(r.window) + "," + format_double(r.residual) + "," +
             format_double(r.objective) + "," +
             join(r.active_locations, " ", [](Eigen::Index p) { return std::to_string(p); }) + "\n";
  }
  rec.write("config.json", dump_config(cfg));
  rec.write("online_trace.csv", trace);
  rec.finish();
}

void cmd_reproduce(const std::string& preset, const fs::path& out, const Overrides& ov) {
  RunConfig cfg = parse_config(preset_config(preset), preset + ".json");
  ov.apply(cfg);
  Recorder rec("reproduce " + preset, out, cfg);
  const fs::path scenario = out / "scenario";
  if (preset == "fig8") {
    cmd_online(cfg, std::nullopt, out / "online");
  } else {
    cmd_simulate(cfg, scenario);
    cmd_decompose(scenario, out / "decomposition", ov);
    if (preset == "fig4") {
      cmd_compare(scenario, out / "comparison", ov);
    } else {
      cmd_map(out / "decomposition", out / "map", ov);
      // Baseline maps at the same slot for side-by-side inspection.
      Recorder base("baseline maps", out / "baseline_maps", cfg);
      const Tensor3 y = load_tensor_file(scenario / "Y.t3");
      const Matrix gamma_m = load_matrix_csv(scenario / "gamma_m.csv");
      const ChannelModel geom = map_geometry(cfg.scenario);
      const auto t = static_cast<std::size_t>(cfg.map.time_slot - 1);
      const std::vector<std::pair<std::string, Tensor3>> maps = {
          {"truth", load_tensor_file(scenario / "X.t3")},
          {"slice_ls", baseline_slice_ls(y, gamma_m)},
          {"slice_lasso", baseline_slice_lasso(y, gamma_m, cfg.baselines.lasso_lambda)},
          {"cp_init", cp_reconstruct(baseline_cp_factors(y, gamma_m, cfg.scenario.R, cfg.baselines.cp_iters,
                                                         cfg.baselines.cp_mapping))},
      };
      for (const auto& [name, x] : maps) {
        base.write("grid_map_" + name + ".csv",
                   grid_map_csv(geom.grid_points, aggregate_map(spectrum_map(x, geom, geom.grid_points, t))));
      }
      base.finish();
    }
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), out).generic_string();
    if (rel != "manifest.json") files.push_back(rel);
  }
  rec.adopt(files);
  rec.finish();
}

}  // namespace specmap
