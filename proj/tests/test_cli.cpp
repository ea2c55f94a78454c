#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PLCMON_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("plcmon_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::size_t count_files(const fs::path& d) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(d)) n += e.is_regular_file() ? 1 : 0;
  return n;
}

// Generates `days` of data with the given extra config text; returns the dataset path.
fs::path generate(const fs::path& dir, int seed, double days, const std::string& extra = "") {
  write(dir / "gen.ini", "[scenario]\ndays = " + std::to_string(days) + "\n" + extra);
  EXPECT_EQ(run("--config " + (dir / "gen.ini").string() + " --seed " + std::to_string(seed) + " --out " +
                dir.string() + " generate"),
            0);
  return dir / ("dataset_" + std::to_string(seed) + ".csv");
}

fs::path train_config(const fs::path& dir, const fs::path& dataset, const std::string& extra = "") {
  const fs::path cfg = dir / "train.ini";
  write(cfg, "[io]\ndataset = " + dataset.string() + "\nmodels = " + (dir / "models").string() +
                 "\n[pipeline]\ntrain_fraction = 0.5\n" + extra);
  return cfg;
}

}  // namespace

TEST(Cli, HelpAndUsageExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("generate --no-such-flag"), 2);
}

TEST(Cli, UnknownConfigKeyFailsBeforeWriting) {
  const auto dir = fresh_dir("unknown_key");
  write(dir / "bad.ini", "[scenario]\ndays = 1\nsede = 3\n");
  const auto out = dir / "out";
  EXPECT_EQ(run("--config " + (dir / "bad.ini").string() + " --out " + out.string() + " generate"), 2);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run("--config " + (dir / "missing.ini").string() + " generate"), 2);
}

TEST(Cli, MissingDatasetIsDataError) {
  const auto dir = fresh_dir("missing_data");
  const auto cfg = train_config(dir, dir / "nope.csv");
  EXPECT_EQ(run("--config " + cfg.string() + " --out " + dir.string() + " train"), 3);
  EXPECT_EQ(run("--config " + cfg.string() + " --out " + dir.string() + " detect"), 3);
}

TEST(Cli, GenerateIsDeterministicAndManifestReproduces) {
  const auto a = fresh_dir("gen_a");
  const auto b = fresh_dir("gen_b");
  const auto c = fresh_dir("gen_c");
  const std::string fault = "[fault]\nkind = concentrated\nonset_index = 100\n";
  const auto da = generate(a, 5, 2, fault);
  const auto db = generate(b, 5, 2, fault);
  ASSERT_TRUE(fs::exists(da));
  EXPECT_EQ(slurp(da), slurp(db));
  EXPECT_EQ(slurp(a / "loads_5.csv"), slurp(b / "loads_5.csv"));

  const auto manifest = read_json(a / "dataset_5.manifest.json");
  EXPECT_EQ(manifest.at("anomaly_mask").at("first_anomalous_index"), 100);
  EXPECT_EQ(manifest.at("anomaly_mask").at("anomalous_count"), 2 * 96 - 100);

  EXPECT_EQ(run("--config " + (a / "dataset_5.manifest.json").string() + " --out " + c.string() + " generate"), 0);
  EXPECT_EQ(slurp(c / "dataset_5.csv"), slurp(da));

  const auto d6 = generate(b, 6, 2, fault);
  EXPECT_NE(slurp(d6), slurp(da));
}

TEST(Cli, TrainWritesModelsAndIsReproducible) {
  const auto dir = fresh_dir("train");
  const auto data = generate(dir, 3, 6);
  const auto cfg = train_config(dir, data, "[predictor]\nkind = l2boost\nwindow = 8\nk_total = 20\n");
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + dir.string() + " train"), 0);
  for (int i = 0; i < 9; ++i) EXPECT_TRUE(fs::exists(dir / "models" / ("batch_" + std::to_string(i) + ".json")));
  EXPECT_TRUE(fs::exists(dir / "models" / "detector.json"));
  EXPECT_EQ(count_files(dir / "models"), 10u);
  const auto report = read_json(dir / "train_report.json");
  EXPECT_EQ(report.at("batches").size(), 9u);
  for (const auto& b : report.at("batches")) EXPECT_TRUE(b.at("test_nrmse").is_number());

  const std::string first = slurp(dir / "models" / "batch_4.json") + slurp(dir / "models" / "detector.json");
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + dir.string() + " train"), 0);
  EXPECT_EQ(slurp(dir / "models" / "batch_4.json") + slurp(dir / "models" / "detector.json"), first);
}

TEST(Cli, DetectRejectsBatchMismatch) {
  const auto dir = fresh_dir("mismatch");
  const auto data = generate(dir, 4, 3);
  const auto cfg = train_config(dir, data, "[predictor]\nkind = baseline\nwindow = 4\n");
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + dir.string() + " train"), 0);
  write(dir / "detect.ini", "[io]\ndataset = " + data.string() + "\nmodels = " + (dir / "models").string() +
                                "\n[pipeline]\nn_batches = 5\n");
  EXPECT_EQ(run("--config " + (dir / "detect.ini").string() + " --out " + dir.string() + " detect"), 3);
}

TEST(Cli, DetectHealthyAlarmRateAndFaultOnset) {
  const auto h = fresh_dir("detect_healthy");
  const auto hdata = generate(h, 12, 20);
  const auto hcfg = train_config(h, hdata);
  ASSERT_EQ(run("--config " + hcfg.string() + " --out " + h.string() + " train"), 0);
  ASSERT_EQ(run("--config " + hcfg.string() + " --seed 12 --out " + h.string() + " detect"), 0);
  const auto hs = read_json(h / "detect_arima_12.json");
  EXPECT_NEAR(hs.at("threshold").get<double>(), 21.67, 0.01);
  const double rate = hs.at("alarm_fraction").get<double>();
  EXPECT_GE(rate, 0.004);
  EXPECT_LE(rate, 0.025);
  const std::string csv = slurp(h / "detect_arima_12.csv");
  const auto rows = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(rows, 20 * 96 - 96 + 1);

  const auto f = fresh_dir("detect_fault");
  const auto fdata = generate(f, 12, 20, "[fault]\nkind = concentrated\nonset_index = 1440\n");
  const auto fcfg = train_config(f, fdata);
  ASSERT_EQ(run("--config " + fcfg.string() + " --out " + f.string() + " train"), 0);
  ASSERT_EQ(run("--config " + fcfg.string() + " --seed 12 --out " + f.string() + " detect"), 0);
  const auto fs_ = read_json(f / "detect_arima_12.json");
  EXPECT_EQ(fs_.at("onset_index"), 1440);
  ASSERT_FALSE(fs_.at("first_alarm_at_or_after_onset").is_null());
  EXPECT_LE(fs_.at("first_alarm_at_or_after_onset").get<std::size_t>(), 1442u);
}
