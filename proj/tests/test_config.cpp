#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "plcmon/config.hpp"

using namespace plcmon;

namespace {

RunConfig read(const std::string& text) {
  ConfigReader r(parse_ini_text(text, "t.ini"));
  auto c = read_run_config(r);
  r.finish();
  return c;
}

std::string config_error(const std::string& text) {
  try {
    read(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Ini, ParsesSectionsCommentsAndQuotes) {
  const auto doc = parse_ini_text("# c\n[a]\nx = 1\n; c\n y=\" two \" \n[b]\nz=3\n", "s");
  ASSERT_EQ(doc.sections.size(), 2u);
  EXPECT_EQ(doc.sections.at("a").at("x").value, "1");
  EXPECT_EQ(doc.sections.at("a").at("y").value, " two ");
  EXPECT_EQ(doc.sections.at("a").at("y").line, 5u);
  EXPECT_EQ(doc.sections.at("b").at("z").value, "3");
}

TEST(Ini, SyntaxErrorsCarryLocation) {
  const auto msg = [](const std::string& text) {
    try {
      parse_ini_text(text, "f.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg("[a]\nx=1\nx=2\n").find("f.ini:3"), std::string::npos);
  EXPECT_NE(msg("x=1\n").find("f.ini:1"), std::string::npos);
  EXPECT_NE(msg("[a]\n[b\n").find("f.ini:2"), std::string::npos);
  EXPECT_NE(msg("[a]\njust text\n").find("f.ini:2"), std::string::npos);
}

TEST(RunConfigTest, DefaultsWhenEmpty) {
  const auto c = read("");
  EXPECT_EQ(c.scenario.n_samples, 664u * kSamplesPerDay);
  EXPECT_EQ(c.scenario.load_model, LoadModel::l3);
  EXPECT_EQ(c.predictor.kind, PredictorKind::arima);
  EXPECT_EQ(c.n_batches, 9u);
  EXPECT_DOUBLE_EQ(c.detector.p_fa, 0.01);
}

TEST(RunConfigTest, ReadsValues) {
  const auto c = read(
      "[scenario]\ndays = 2\nseed = 42\nload_model = l1\n"
      "[fault]\nkind = distributed\nseverity_fraction = 0.2\nonset_index = 96\n"
      "[predictor]\nkind = lstm\nwindow = 12\noptimizer = adam\n"
      "[detector]\nthreshold_mode = empirical\np_fa = 0.05\n");
  EXPECT_EQ(c.scenario.n_samples, 192u);
  EXPECT_EQ(c.scenario.seed, 42u);
  EXPECT_EQ(c.scenario.load_model, LoadModel::l1);
  EXPECT_EQ(c.scenario.fault.kind, FaultKind::distributed);
  EXPECT_DOUBLE_EQ(c.scenario.fault.severity_fraction, 0.2);
  EXPECT_EQ(c.predictor.kind, PredictorKind::lstm);
  EXPECT_EQ(c.predictor.window, 12u);
  EXPECT_EQ(c.detector.mode, ThresholdMode::empirical);
}

TEST(RunConfigTest, UnknownKeyReportsSourceLine) {
  const auto msg = config_error("[scenario]\nseed = 1\n\n[detector]\np_fa = 0.01\npfa = 0.02\n");
  EXPECT_NE(msg.find("t.ini:6"), std::string::npos) << msg;
  EXPECT_NE(msg.find("pfa"), std::string::npos) << msg;
}

TEST(RunConfigTest, BadValuesReportLocation) {
  EXPECT_NE(config_error("[detector]\np_fa = 2\n").find("t.ini:2"), std::string::npos);
  EXPECT_NE(config_error("[scenario]\nseed = abc\n").find("t.ini:2"), std::string::npos);
  EXPECT_NE(config_error("[predictor]\n\nkind = svm\n").find("t.ini:3"), std::string::npos);
  EXPECT_FALSE(config_error("[pipeline]\ntrain_fraction = 1.5\n").empty());
}

TEST(RunConfigTest, ToIniRoundTrip) {
  const auto a = read(
      "[scenario]\ndays = 3\nseed = 7\n[fault]\nkind = concentrated\nonset_index = 150\nfault_resistance_ohm = 50\n"
      "[predictor]\nkind = l2boost\nk_total = 40\n[roc]\npredictors = arima, ffnn\nseverities = 0.6, 0.1\n");
  const std::string text = to_ini(a);
  const auto b = read(text);
  EXPECT_EQ(to_ini(b), text);
  EXPECT_EQ(b.scenario.n_samples, a.scenario.n_samples);
  EXPECT_EQ(b.scenario.seed, 7u);
  EXPECT_EQ(b.scenario.fault.onset_index, 150u);
  EXPECT_EQ(b.predictor.boost.k_total, 40);
  EXPECT_EQ(b.roc.predictors, (std::vector<std::string>{"arima", "ffnn"}));
  EXPECT_EQ(b.roc.severities, (std::vector<double>{0.6, 0.1}));
}

TEST(RunConfigTest, LoadsFromJsonManifest) {
  const auto dir = std::filesystem::temp_directory_path() / "plcmon_test_config";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "m.json").string();
  {
    std::ofstream os(path);
    os << nlohmann::json{{"format", "plcmon-dataset-manifest"}, {"config", "[scenario]\nseed = 99\n"}}.dump();
  }
  ConfigReader r(load_config_document(path));
  EXPECT_EQ(read_run_config(r).scenario.seed, 99u);
  {
    std::ofstream os(path);
    os << "{\"format\": 1}";
  }
  EXPECT_THROW(load_config_document(path), ConfigError);
  EXPECT_THROW(load_config_document((dir / "missing.ini").string()), ConfigError);
}
