#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ranxrl/runner.hpp"

using namespace ranxrl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("ranxrl_run_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const fs::path& p) {
  const std::string text = slurp(p);
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// A short run: big enough to train a few batches, small enough for a test.
ExperimentConfig tiny_config() {
  ExperimentConfig c = default_experiment_config();
  c.slices[0].mean_demand_bits = 1.2e5;
  c.slices[1].mean_demand_bits = 2.4e5;
  c.slices[2].mean_demand_bits = 3.0e5;
  c.run.max_timesteps = 120;
  c.run.episode_length = 25;
  c.run.seeds = {1};
  c.agent.start_timesteps = 50;
  c.agent.batch_size = 8;
  c.agent.buffer_capacity = 256;
  c.agent.epsilon_decay_steps = 100;
  c.agent.hidden_sizes = {16, 16};
  c.xai.background_size = 6;
  c.xai.background_refresh_period = 10;
  return c;
}

}  // namespace

TEST_CASE("mode strings") {
  CHECK(mode_from_string("rl") == Mode::rl);
  CHECK(mode_from_string("xrl") == Mode::xrl);
  CHECK(to_string(Mode::rl) == "rl");
  CHECK(to_string(Mode::xrl) == "xrl");
  CHECK_THROWS_AS(mode_from_string("RL"), std::invalid_argument);
  CHECK_THROWS_AS(mode_from_string(""), std::invalid_argument);
}

TEST_CASE("csv numbers survive a text round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-7, 1e300, 0.0, -0.0,
                   0.00802306608275597, 14956875.43418305}) {
    const std::string s = csv_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("measurement window covers the trailing fraction") {
  CHECK(measurement_start(10, 0.2) == 8);
  CHECK(measurement_start(10, 1.0) == 0);
  CHECK(measurement_start(1, 0.2) == 0);    // at least one interval
  CHECK(measurement_start(100, 0.2) == 80);
  CHECK(measurement_start(3, 0.5) == 1);    // ceil(1.5) = 2 samples
}

TEST_CASE("plain run writes the expected files") {
  TempDir tmp("rl");
  const ExperimentConfig cfg = tiny_config();
  const RunSummary sum = run_single(cfg, Mode::rl, 1, tmp.path.string());

  CHECK(sum.mode == Mode::rl);
  CHECK(sum.seed == 1);
  CHECK(sum.timesteps == 120);
  CHECK(sum.train_iterations > 0);
  CHECK(sum.explainer_calls == 0);
  REQUIRE(sum.slices.size() == 3);
  CHECK(sum.slices[0].name == "urllc");

  CHECK(fs::exists(tmp.path / "metrics.jsonl"));
  CHECK(fs::exists(tmp.path / "rewards.csv"));
  CHECK(fs::exists(tmp.path / "latency_cdf.csv"));
  CHECK(fs::exists(tmp.path / "drops_box.csv"));
  CHECK(fs::exists(tmp.path / "run_summary.json"));
  CHECK(fs::exists(tmp.path / "config.json"));
  for (int i = 0; i < 3; ++i)
    CHECK(fs::exists(tmp.path / "checkpoints" /
                     ("slice_" + std::to_string(i) + ".qnet")));
  // explanation streams belong to xrl runs only
  CHECK_FALSE(fs::exists(tmp.path / "xai.jsonl"));
  CHECK_FALSE(fs::exists(tmp.path / "waterfall_early.csv"));

  CHECK(count_lines(tmp.path / "metrics.jsonl") == 120);
  CHECK(count_lines(tmp.path / "rewards.csv") == 121);  // header + rows

  const MetricsFile mf = read_metrics_jsonl((tmp.path / "metrics.jsonl").string());
  CHECK(mf.slice_names == std::vector<std::string>{"urllc", "embb", "mmtc"});
  REQUIRE(mf.records.size() == 120);
  CHECK(mf.records[0].t == 0);
  CHECK(mf.records[119].t == 119);
  CHECK(mf.records[0].epsilon == doctest::Approx(1.0));
  for (const auto& rec : mf.records) {
    REQUIRE(rec.slices.size() == 3);
    int total_granted = 0;
    for (const auto& s : rec.slices) total_granted += s.metrics.granted_prb;
    CHECK(total_granted <= cfg.gnb.capacity_prb);
  }
  // before warmup nothing trains
  CHECK_FALSE(mf.records[10].slices[0].trained);
}

TEST_CASE("explained run adds attribution streams") {
  TempDir tmp("xrl");
  const ExperimentConfig cfg = tiny_config();
  const RunSummary sum = run_single(cfg, Mode::xrl, 1, tmp.path.string());

  CHECK(sum.mode == Mode::xrl);
  CHECK(sum.explainer_calls > 0);
  CHECK(fs::exists(tmp.path / "xai.jsonl"));
  CHECK(fs::exists(tmp.path / "waterfall_early.csv"));
  CHECK(fs::exists(tmp.path / "waterfall_late.csv"));

  // waterfall rows reconstruct the model output from the attribution pieces
  for (const char* name : {"waterfall_early.csv", "waterfall_late.csv"}) {
    std::ifstream in(tmp.path / name);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "slice,t,probe,x_snr,x_demand,x_capacity,base_value,fx,"
          "shap_snr,shap_demand,shap_capacity");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 11);
      const double base = std::strtod(cells[6].c_str(), nullptr);
      const double fx = std::strtod(cells[7].c_str(), nullptr);
      const double add = std::strtod(cells[8].c_str(), nullptr) +
                         std::strtod(cells[9].c_str(), nullptr) +
                         std::strtod(cells[10].c_str(), nullptr);
      CHECK(std::fabs(base + add - fx) < 1e-6);
      CHECK(fx >= 0.0);
      CHECK(fx <= cfg.gnb.capacity_prb);
      ++rows;
    }
    CHECK(rows > 0);
  }
}

TEST_CASE("same seed reproduces the run byte for byte") {
  TempDir a("rep_a");
  TempDir b("rep_b");
  const ExperimentConfig cfg = tiny_config();
  run_single(cfg, Mode::xrl, 7, a.path.string());
  run_single(cfg, Mode::xrl, 7, b.path.string());
  for (const char* name : {"metrics.jsonl", "rewards.csv", "latency_cdf.csv",
                           "drops_box.csv", "xai.jsonl", "waterfall_late.csv"}) {
    CHECK(slurp(a.path / name) == slurp(b.path / name));
  }
}

TEST_CASE("summarize rebuilds the csv files byte for byte") {
  TempDir tmp("sum");
  const ExperimentConfig cfg = tiny_config();
  run_single(cfg, Mode::rl, 3, tmp.path.string());
  const std::string rewards = slurp(tmp.path / "rewards.csv");
  const std::string cdf = slurp(tmp.path / "latency_cdf.csv");
  const std::string box = slurp(tmp.path / "drops_box.csv");
  fs::remove(tmp.path / "rewards.csv");
  fs::remove(tmp.path / "latency_cdf.csv");
  fs::remove(tmp.path / "drops_box.csv");

  const std::string report = summarize_run(tmp.path.string());
  CHECK(slurp(tmp.path / "rewards.csv") == rewards);
  CHECK(slurp(tmp.path / "latency_cdf.csv") == cdf);
  CHECK(slurp(tmp.path / "drops_box.csv") == box);
  CHECK(report.find("urllc") != std::string::npos);
  CHECK(report.find("embb") != std::string::npos);
  CHECK(report.find("mmtc") != std::string::npos);
  CHECK_THROWS(summarize_run((tmp.path / "missing").string()));
}

TEST_CASE("waterfall export replays saved checkpoints") {
  TempDir tmp("wf");
  const ExperimentConfig cfg = tiny_config();
  run_single(cfg, Mode::rl, 2, tmp.path.string());
  const std::string out = (tmp.path / "wf.csv").string();
  export_waterfall(cfg, (tmp.path / "checkpoints").string(), 1, 2, 5, out);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("slice,t,probe", 0) == 0);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    CHECK(cells[0] == "embb");
    const double base = std::strtod(cells[6].c_str(), nullptr);
    const double fx = std::strtod(cells[7].c_str(), nullptr);
    const double add = std::strtod(cells[8].c_str(), nullptr) +
                       std::strtod(cells[9].c_str(), nullptr) +
                       std::strtod(cells[10].c_str(), nullptr);
    CHECK(std::fabs(base + add - fx) < 1e-6);
    ++rows;
  }
  CHECK(rows == 5);
  CHECK_THROWS(export_waterfall(cfg, (tmp.path / "nowhere").string(), 1, 2, 5,
                                out));
  CHECK_THROWS(export_waterfall(cfg, (tmp.path / "checkpoints").string(), 9,
                                2, 5, out));
}

TEST_CASE("experiment sweep writes one directory per seed") {
  TempDir tmp("sweep");
  ExperimentConfig cfg = tiny_config();
  cfg.run.seeds = {4, 9};
  const auto sums = run_experiment(cfg, Mode::rl, tmp.path.string());
  REQUIRE(sums.size() == 2);
  CHECK(sums[0].seed == 4);
  CHECK(sums[1].seed == 9);
  CHECK(fs::exists(tmp.path / "seed_4" / "metrics.jsonl"));
  CHECK(fs::exists(tmp.path / "seed_9" / "metrics.jsonl"));
  CHECK(fs::exists(tmp.path / "summary.json"));
}

TEST_CASE("an explained run with a zero bonus matches the plain run") {
  TempDir a("mu0_xrl");
  TempDir b("mu0_rl");
  ExperimentConfig cfg = tiny_config();
  cfg.xai.mu = 0.0;
  run_single(cfg, Mode::xrl, 5, a.path.string());
  run_single(cfg, Mode::rl, 5, b.path.string());
  for (const char* name :
       {"metrics.jsonl", "rewards.csv", "latency_cdf.csv", "drops_box.csv"}) {
    CHECK(slurp(a.path / name) == slurp(b.path / name));
  }
}
