#include <gtest/gtest.h>

#include <regex>

#include "scenarios.hpp"
#include "specmap/config.hpp"
#include "specmap/io.hpp"
#include "support.hpp"

using namespace specmap;
using namespace specmap::test;

namespace {

// fig4 text with one line replaced (1-based), for line-anchored errors.
std::string edited(int line, const std::string& replacement) {
  std::string text(preset_config("fig4"));
  std::string out;
  std::size_t pos = 0;
  for (int n = 1; pos < text.size(); ++n) {
    const std::size_t end = text.find('\n', pos);
    const std::string cur = text.substr(pos, end - pos);
    out += (n == line ? replacement : cur) + "\n";
    pos = end == std::string::npos ? text.size() : end + 1;
  }
  return out;
}

int error_line(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, PresetsParse) {
  const RunConfig fig4 = preset("fig4");
  EXPECT_EQ(fig4.scenario.P(), 25);
  EXPECT_EQ(fig4.scenario.N(), 15);
  EXPECT_EQ(fig4.scenario.F, 64);
  EXPECT_EQ(fig4.scenario.T, 100);
  EXPECT_EQ(fig4.scenario.R, 4);
  EXPECT_EQ(fig4.scenario.snr_db, 5.0);
  EXPECT_TRUE(fig4.scenario.perturb.enabled);
  EXPECT_EQ(fig4.scenario.pus[3].grid_index, 9);
  EXPECT_EQ(fig4.scenario.pus[3].freq_lo, 41);
  EXPECT_EQ(fig4.scenario.pus[3].time_hi, 97);
  EXPECT_EQ(fig4.map.time_slot, 60);

  const RunConfig fig8 = preset("fig8");
  EXPECT_EQ(fig8.scenario.T, 200);
  EXPECT_EQ(fig8.scenario.pus.size(), 2u);
  EXPECT_EQ(fig8.scenario.pus[0].moves.size(), 3u);
  EXPECT_EQ(fig8.online.residual_norm, ResidualNorm::absolute);
  EXPECT_EQ(fig8.online.warmup_slots, 10);

  EXPECT_NO_THROW(preset("fig6"));
  EXPECT_THROW(preset_config("fig5"), std::invalid_argument);
}

TEST(Config, MissingKeyIsNamed) {
  std::string text(preset_config("fig4"));
  text.replace(text.find("\"grid\""), std::string("\"grid\": {\"rows\": 5, \"cols\": 5, \"spacing\": 1.0},").size(), "");
  const std::string msg = error_text(text);
  EXPECT_NE(msg.find("missing required key 'grid'"), std::string::npos) << msg;
  EXPECT_EQ(msg.rfind("cfg.json:", 0), 0u);
}

TEST(Config, UnknownKeyReportsItsLine) {
  const std::string text = edited(16, R"(  "weights": {"lambda_p": 1.0, "lambda_b": 10.0,)" "\n" R"(   "lambda_q": 1.0, "lambda_c": 1.0},)");
  EXPECT_EQ(error_line(text), 17);
  EXPECT_NE(error_text(text).find("lambda_q"), std::string::npos);
}

TEST(Config, BadValueReportsItsLine) {
  EXPECT_EQ(error_line(edited(7, R"(  "eta": 5.0,)")), 7);
  EXPECT_EQ(error_line(edited(6, R"(  "R": 0,)")), 6);
  EXPECT_EQ(error_line(edited(10, R"(    {"grid_index": 25, "freq_band": [20, 27], "time_span": [30, 85], "power": 0.8},)")), 10);
  EXPECT_EQ(error_line(edited(16, R"(  "weights": {"lambda_p": 0.0, "lambda_b": 10.0, "lambda_c": 1.0},)")), 16);
  EXPECT_EQ(error_line(edited(18, R"(  "solver": {"rel_tol": -1, "max_sweeps": 100, "init_iters": 50},)")), 18);
}

TEST(Config, SyntaxErrorReportsItsLine) {
  EXPECT_EQ(error_line(edited(4, R"(  "F": 64,,)")), 4);
  EXPECT_NE(error_text(edited(4, R"(  "F": 64,,)")).find("syntax error"), std::string::npos);
}

TEST(Config, WrongTypeIsRejected) {
  EXPECT_EQ(error_line(edited(4, R"(  "F": "many",)")), 4);
  EXPECT_EQ(error_line(edited(17, R"(  "seed": -3,)")), 17);
}

TEST(Config, SnrAcceptsInfinity) {
  EXPECT_EQ(parse_config(edited(14, R"(  "snr_db": "inf",)")).scenario.snr_db, std::numeric_limits<double>::infinity());
  EXPECT_EQ(parse_config(edited(14, R"(  "snr_db": null,)")).scenario.snr_db, std::numeric_limits<double>::infinity());
}

TEST(Config, DumpRoundTripsAndHashIsStable) {
  for (const char* name : {"fig4", "fig6", "fig8"}) {
    const RunConfig cfg = preset(name);
    const std::string dump = dump_config(cfg);
    const RunConfig back = parse_config(dump, "dump");
    EXPECT_EQ(dump_config(back), dump);
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
  RunConfig other = preset("fig4");
  other.scenario.seed = 2;
  EXPECT_NE(config_hash(other), config_hash(preset("fig4")));
  const RunConfig inf = parse_config(edited(14, R"(  "snr_db": "inf",)"));
  EXPECT_EQ(parse_config(dump_config(inf)).scenario.snr_db, std::numeric_limits<double>::infinity());
}

TEST(Config, OnlineWeightsDefaultToScenarioWeights) {
  const RunConfig cfg = preset("fig4");
  EXPECT_EQ(cfg.online.weights.lambda_b, cfg.scenario.weights.lambda_b);
  EXPECT_EQ(cfg.online.weights.lambda_c, cfg.scenario.weights.lambda_c);
}

TEST(Io, MatrixCsvRoundTrip) {
  Rng rng(1, "csv");
  Matrix m = random_matrix(rng, 4, 3);
  m(0, 0) = 1e-310;
  m(1, 1) = -0.0;
  EXPECT_EQ(parse_matrix_csv(matrix_csv(m), "m.csv"), m);
}

TEST(Io, MatrixCsvErrorsNameTheLine) {
  try {
    parse_matrix_csv("1,2\n3\n", "m.csv");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("m.csv:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_matrix_csv("1,x\n", "m.csv"), InputError);
}

TEST(Io, SliceStreamRoundTrip) {
  Rng rng(2, "stream");
  const Tensor3 y = random_tensor(rng, {3, 4, 5});
  const auto slices = parse_slice_stream(slice_stream(y), "s");
  ASSERT_EQ(slices.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(slices[k], y.frontal_slice(k));
}

TEST(Io, JoinFormats) {
  EXPECT_EQ(join(std::vector<int>{1, 2, 3}, " ", [](int v) { return std::to_string(v); }), "1 2 3");
  EXPECT_EQ(join(std::vector<int>{}, ",", [](int v) { return std::to_string(v); }), "");
}
