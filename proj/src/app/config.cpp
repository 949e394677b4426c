#include "specmap/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "presets.hpp"
#include "specmap/random.hpp"

namespace specmap {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(int line, const std::string& what) : std::runtime_error(what), line_(line) {}

namespace {

// Line of every key path ("pus[2].freq_band") in the source text. nlohmann
// reports no positions for parsed values, so the text is scanned once.
class KeyLines {
 public:
  explicit KeyLines(std::string_view text) {
    struct Frame {
      bool array;
      std::string path;
      int index = 0;
      std::string key;
    };
    std::vector<Frame> stack;
    int line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
      } else if (c == '"') {
        std::string s;
        for (++i; i < text.size() && text[i] != '"'; ++i) {
          if (text[i] == '\\' && i + 1 < text.size()) ++i;
          s += text[i];
        }
        std::size_t j = i + 1;
        while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
        if (j < text.size() && text[j] == ':' && !stack.empty() && !stack.back().array) {
          Frame& top = stack.back();
          top.key = top.path.empty() ? s : top.path + "." + s;
          lines_.emplace(top.key, line);
        }
      } else if (c == '{' || c == '[') {
        std::string path;
        if (!stack.empty()) {
          const Frame& top = stack.back();
          path = top.array ? top.path + "[" + std::to_string(top.index) + "]" : top.key;
        }
        lines_.emplace(path, line);
        stack.push_back({c == '[', path, 0, {}});
      } else if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
      } else if (c == ',' && !stack.empty() && stack.back().array) {
        ++stack.back().index;
      }
    }
  }

  // Falls back to the nearest enclosing path that was seen.
  int at(std::string path) const {
    for (;;) {
      auto it = lines_.find(path);
      if (it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return path.empty() ? 1 : at("");
      path.resize(cut);
    }
  }

 private:
  std::map<std::string, int> lines_;
};

class Parser {
 public:
  Parser(std::string_view text, std::string source) : lines_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& why) const {
    const int line = lines_.at(path);
    throw ConfigError(line, source_ + ":" + std::to_string(line) + ": " + why);
  }

  // One JSON object; remembers which keys were read so leftovers can be
  // reported as unknown.
  class Object {
   public:
    Object(const Parser& p, const json& j, std::string path) : p_(p), j_(j), path_(std::move(path)) {
      if (!j_.is_object()) p_.fail(path_, where() + "must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& get(const std::string& key) {
      seen_.insert(key);
      if (!j_.contains(key)) p_.fail(path_, "missing required key '" + full(key) + "'");
      return j_.at(key);
    }

    std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key) {
      const json& v = get(key);
      if (!v.is_number()) p_.fail(full(key), "'" + full(key) + "' must be a number");
      return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

    long long integer(const std::string& key) {
      const json& v = get(key);
      if (v.is_number_integer()) return v.get<long long>();
      if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
      }
      p_.fail(full(key), "'" + full(key) + "' must be an integer");
    }
    int integer(const std::string& key, int fallback) {
      if (!has(key)) return static_cast<int>(mark(key, fallback));
      const long long v = integer(key);
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        p_.fail(full(key), "'" + full(key) + "' is out of range");
      }
      return static_cast<int>(v);
    }
    int int32(const std::string& key) {
      const long long v = integer(key);
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        p_.fail(full(key), "'" + full(key) + "' is out of range");
      }
      return static_cast<int>(v);
    }

    bool boolean(const std::string& key, bool fallback) {
      if (!has(key)) return mark(key, fallback);
      const json& v = get(key);
      if (!v.is_boolean()) p_.fail(full(key), "'" + full(key) + "' must be true or false");
      return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
      if (!has(key)) {
        seen_.insert(key);
        return fallback;
      }
      const json& v = get(key);
      if (!v.is_string()) p_.fail(full(key), "'" + full(key) + "' must be a string");
      return v.get<std::string>();
    }

    std::pair<int, int> range(const std::string& key) {
      const json& v = get(key);
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        p_.fail(full(key), "'" + full(key) + "' must be a two-element integer array [lo, hi]");
      }
      return {v[0].get<int>(), v[1].get<int>()};
    }

    Object child(const std::string& key) { return Object(p_, get(key), full(key)); }

    // Present-but-null optional keys are not unknown.
    void allow(const std::string& key) { seen_.insert(key); }

    void finish() const {
      for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (!seen_.count(it.key())) p_.fail(full(it.key()), "unknown key '" + full(it.key()) + "'");
      }
    }

    const std::string& path() const { return path_; }

   private:
    template <class T>
    T mark(const std::string& key, T fallback) {
      seen_.insert(key);
      return fallback;
    }
    std::string where() const { return path_.empty() ? "the document " : "'" + path_ + "' "; }

    const Parser& p_;
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
  };

 private:
  KeyLines lines_;
  std::string source_;
};

RegWeights parse_weights(Parser::Object o) {
  RegWeights w;
  w.lambda_p = o.number("lambda_p");
  w.lambda_b = o.number("lambda_b");
  w.lambda_c = o.number("lambda_c");
  o.finish();
  return w;
}

double parse_snr(const Parser& p, Parser::Object& root) {
  const json& v = root.get("snr_db");
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf")) {
    return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) p.fail("snr_db", "'snr_db' must be a number, \"inf\" or null");
  return v.get<double>();
}

void parse_scenario(const Parser& p, Parser::Object& root, ScenarioConfig& s) {
  {
    Parser::Object g = root.child("grid");
    s.grid.rows = g.int32("rows");
    s.grid.cols = g.int32("cols");
    s.grid.spacing = g.number("spacing", 1.0);
    g.finish();
  }
  {
    Parser::Object so = root.child("sensors");
    if (so.has("points")) {
      const json& pts = so.get("points");
      if (!pts.is_array()) p.fail("sensors.points", "'sensors.points' must be an array of [x, y] pairs");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const json& pt = pts[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          p.fail("sensors.points[" + std::to_string(i) + "]", "sensor point must be [x, y]");
        }
        s.sensors.points.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      s.sensors.count = so.integer("count", static_cast<int>(s.sensors.points.size()));
      if (s.sensors.count != static_cast<int>(s.sensors.points.size())) {
        p.fail("sensors.count", "'sensors.count' disagrees with the number of points");
      }
    } else {
      s.sensors.count = so.int32("count");
    }
    so.finish();
  }
  s.F = root.int32("F");
  s.T = root.int32("T");
  s.R = root.int32("R");
  s.eta = root.number("eta", 2.5);
  if (root.has("d_min")) s.d_min = root.number("d_min");
  root.allow("d_min");

  const json& pus = root.get("pus");
  if (!pus.is_array()) p.fail("pus", "'pus' must be an array");
  for (std::size_t i = 0; i < pus.size(); ++i) {
    Parser::Object o(p, pus[i], "pus[" + std::to_string(i) + "]");
    PrimaryUser pu;
    pu.grid_index = o.int32("grid_index");
    std::tie(pu.freq_lo, pu.freq_hi) = o.range("freq_band");
    std::tie(pu.time_lo, pu.time_hi) = o.range("time_span");
    pu.power = o.number("power", 1.0);
    if (o.has("moves")) {
      const json& moves = o.get("moves");
      if (!moves.is_array()) p.fail(o.full("moves"), "'" + o.full("moves") + "' must be an array");
      for (std::size_t k = 0; k < moves.size(); ++k) {
        Parser::Object m(p, moves[k], o.full("moves") + "[" + std::to_string(k) + "]");
        pu.moves.push_back({m.int32("start_slot"), m.int32("grid_index")});
        m.finish();
      }
    }
    o.allow("moves");
    o.finish();
    s.pus.push_back(std::move(pu));
  }

  s.snr_db = parse_snr(p, root);
  if (root.has("perturb")) {
    Parser::Object o = root.child("perturb");
    s.perturb.enabled = o.boolean("enabled", true);
    s.perturb.taps = o.integer("taps", 6);
    s.perturb.strength = o.number("strength", 0.0);
    o.finish();
  }
  root.allow("perturb");
  s.weights = parse_weights(root.child("weights"));

  const json& seed = root.get("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    p.fail("seed", "'seed' must be a non-negative integer");
  }
  s.seed = seed.get<std::uint64_t>();
}

GridMapping parse_mapping(const Parser& p, const std::string& path, const std::string& v) {
  if (v == "matching_pursuit") return GridMapping::matching_pursuit;
  if (v == "least_squares") return GridMapping::least_squares;
  p.fail(path, "'" + path + "' must be \"matching_pursuit\" or \"least_squares\"");
}

ResidualNorm parse_norm(const Parser& p, const std::string& path, const std::string& v) {
  if (v == "absolute") return ResidualNorm::absolute;
  if (v == "per_slice") return ResidualNorm::per_slice;
  if (v == "relative") return ResidualNorm::relative;
  p.fail(path, "'" + path + "' must be \"absolute\", \"per_slice\" or \"relative\"");
}

const char* mapping_name(GridMapping m) {
  return m == GridMapping::matching_pursuit ? "matching_pursuit" : "least_squares";
}

const char* norm_name(ResidualNorm n) {
  switch (n) {
    case ResidualNorm::absolute: return "absolute";
    case ResidualNorm::per_slice: return "per_slice";
    case ResidualNorm::relative: return "relative";
  }
  return "absolute";
}

ordered_json weights_json(const RegWeights& w) {
  return {{"lambda_p", w.lambda_p}, {"lambda_b", w.lambda_b}, {"lambda_c", w.lambda_c}};
}

// Validator messages start with the field they complain about.
std::string field_of(const std::string& msg) {
  const std::string head = msg.substr(0, msg.find_first_of(": "));
  if (head.rfind("lambda_", 0) == 0) return "weights." + head;
  if (head == "rel_tol" || head == "max_sweeps" || head == "init_iters") return "solver." + head;
  return head;
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  solver.validate();
  online.validate();
  if (!(baselines.lasso_lambda >= 0.0)) throw std::invalid_argument("baselines.lasso_lambda: must be non-negative");
  if (baselines.moving_avg_window < 1) throw std::invalid_argument("baselines.moving_avg_window: must be at least 1");
  if (baselines.cp_iters < 1) throw std::invalid_argument("baselines.cp_iters: must be at least 1");
  if (map.raster < 1) throw std::invalid_argument("map.raster: must be at least 1");
  if (map.time_slot < 1 || map.time_slot > scenario.T) throw std::invalid_argument("map.time_slot: must lie in [1, T]");
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    std::string why = e.what();
    const auto cut = why.find(": ");
    if (cut != std::string::npos) why = why.substr(cut + 2);
    throw ConfigError(line, source + ":" + std::to_string(line) + ": syntax error: " + why);
  }

  const Parser p(text, source);
  RunConfig cfg;
  Parser::Object root(p, doc, "");
  parse_scenario(p, root, cfg.scenario);
  cfg.online.weights = cfg.scenario.weights;

  if (root.has("solver")) {
    Parser::Object o = root.child("solver");
    StoppingOptions& s = cfg.solver;
    s.rel_tol = o.number("rel_tol", s.rel_tol);
    s.max_sweeps = o.integer("max_sweeps", s.max_sweeps);
    s.init_iters = o.integer("init_iters", s.init_iters);
    s.inner.max_inner_iters = o.integer("inner_max_iters", s.inner.max_inner_iters);
    s.inner.rel_tol = o.number("inner_rel_tol", s.inner.rel_tol);
    s.inner.abs_zero = o.number("inner_abs_zero", s.inner.abs_zero);
    s.refit_a_coefficients = o.boolean("refit_a", s.refit_a_coefficients);
    o.finish();
  }
  root.allow("solver");

  if (root.has("baselines")) {
    Parser::Object o = root.child("baselines");
    BaselineOptions& b = cfg.baselines;
    b.lasso_lambda = o.number("lasso_lambda", b.lasso_lambda);
    b.moving_avg_window = o.integer("moving_avg_window", b.moving_avg_window);
    b.cp_mapping = parse_mapping(p, o.full("cp_mapping"), o.string("cp_mapping", mapping_name(b.cp_mapping)));
    b.cp_iters = o.integer("cp_iters", b.cp_iters);
    o.finish();
  }
  root.allow("baselines");

  if (root.has("online")) {
    Parser::Object o = root.child("online");
    OnlineOptions& on = cfg.online;
    on.rank = o.integer("rank", on.rank);
    on.capacity = o.integer("capacity", on.capacity);
    on.sweeps_per_slot = o.integer("sweeps_per_slot", on.sweeps_per_slot);
    on.rel_tol = o.number("rel_tol", on.rel_tol);
    on.init_iters = o.integer("init_iters", on.init_iters);
    if (o.has("weights")) on.weights = parse_weights(o.child("weights"));
    o.allow("weights");
    on.residual_norm = parse_norm(p, o.full("residual_norm"), o.string("residual_norm", norm_name(on.residual_norm)));
    if (o.has("j_threshold")) on.j_threshold = o.number("j_threshold");
    o.allow("j_threshold");
    on.warmup_slots = o.integer("warmup_slots", on.warmup_slots);
    on.j_percentile = o.number("j_percentile", on.j_percentile);
    on.j_margin = o.number("j_margin", on.j_margin);
    o.finish();
  }
  root.allow("online");

  if (root.has("map")) {
    Parser::Object o = root.child("map");
    cfg.map.raster = o.integer("raster", cfg.map.raster);
    cfg.map.time_slot = o.integer("time_slot", cfg.map.time_slot);
    o.finish();
  }
  root.allow("map");
  root.finish();

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    p.fail(field_of(e.what()), e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.filename().string());
}

std::string dump_config(const RunConfig& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  ordered_json j;
  j["grid"] = {{"rows", s.grid.rows}, {"cols", s.grid.cols}, {"spacing", s.grid.spacing}};
  if (s.sensors.points.empty()) {
    j["sensors"] = {{"count", s.sensors.count}};
  } else {
    ordered_json pts = ordered_json::array();
    for (const Point& pt : s.sensors.points) pts.push_back({pt.x, pt.y});
    j["sensors"] = {{"count", s.sensors.count}, {"points", pts}};
  }
  j["F"] = s.F;
  j["T"] = s.T;
  j["R"] = s.R;
  j["eta"] = s.eta;
  j["d_min"] = s.min_distance();
  ordered_json pus = ordered_json::array();
  for (const PrimaryUser& pu : s.pus) {
    ordered_json o;
    o["grid_index"] = pu.grid_index;
    o["freq_band"] = {pu.freq_lo, pu.freq_hi};
    o["time_span"] = {pu.time_lo, pu.time_hi};
    o["power"] = pu.power;
    if (!pu.moves.empty()) {
      ordered_json mv = ordered_json::array();
      for (const PuMove& m : pu.moves) mv.push_back({{"start_slot", m.start_slot}, {"grid_index", m.grid_index}});
      o["moves"] = mv;
    }
    pus.push_back(o);
  }
  j["pus"] = pus;
  if (std::isinf(s.snr_db)) j["snr_db"] = "inf";
  else j["snr_db"] = s.snr_db;
  j["perturb"] = {{"enabled", s.perturb.enabled}, {"taps", s.perturb.taps}, {"strength", s.perturb.strength}};
  j["weights"] = weights_json(s.weights);
  j["seed"] = s.seed;

  const StoppingOptions& so = cfg.solver;
  j["solver"] = {{"rel_tol", so.rel_tol},
                 {"max_sweeps", so.max_sweeps},
                 {"init_iters", so.init_iters},
                 {"inner_max_iters", so.inner.max_inner_iters},
                 {"inner_rel_tol", so.inner.rel_tol},
                 {"inner_abs_zero", so.inner.abs_zero},
                 {"refit_a", so.refit_a_coefficients}};
  const BaselineOptions& b = cfg.baselines;
  j["baselines"] = {{"lasso_lambda", b.lasso_lambda},
                    {"moving_avg_window", b.moving_avg_window},
                    {"cp_mapping", mapping_name(b.cp_mapping)},
                    {"cp_iters", b.cp_iters}};
  const OnlineOptions& on = cfg.online;
  ordered_json o;
  o["rank"] = on.rank;
  o["capacity"] = on.capacity;
  o["sweeps_per_slot"] = on.sweeps_per_slot;
  o["rel_tol"] = on.rel_tol;
  o["init_iters"] = on.init_iters;
  o["weights"] = weights_json(on.weights);
  o["residual_norm"] = norm_name(on.residual_norm);
  if (on.j_threshold) o["j_threshold"] = *on.j_threshold;
  else o["j_threshold"] = nullptr;
  o["warmup_slots"] = on.warmup_slots;
  o["j_percentile"] = on.j_percentile;
  o["j_margin"] = on.j_margin;
  j["online"] = o;
  j["map"] = {{"raster", cfg.map.raster}, {"time_slot", cfg.map.time_slot}};
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(dump_config(cfg)); }

std::string_view preset_config(std::string_view name) {
  for (const auto& [key, text] : kPresets) {
    if (key == name) return text;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected fig4, fig6 or fig8)");
}

}  // namespace specmap
