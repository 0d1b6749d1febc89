#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pxrl/config.hpp"
#include "pxrl/harness.hpp"
#include "pxrl/plot.hpp"

using namespace pxrl;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("pxrl_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream buffer;
  buffer << f.rdbuf();
  return buffer.str();
}

ExperimentConfig tiny_experiment(const std::string& out_dir) {
  Config cfg;
  cfg.set("env.id", "chain:6");
  cfg.set("agent.kind", "ppo");
  cfg.set("agent.hidden", "8,8");
  cfg.set("agent.horizon", "32");
  cfg.set("agent.n_actors", "1");
  cfg.set("run.total_steps", "256");
  cfg.set("run.seeds", "1,2,3");
  cfg.set("run.out", out_dir);
  return experiment_from_config(cfg);
}

std::vector<EpisodeRecord> constant_records(std::uint64_t seed, int n, double value,
                                            int start_episode = 0) {
  std::vector<EpisodeRecord> records;
  for (int i = 0; i < n; ++i) {
    EpisodeRecord r;
    r.seed = seed;
    r.episode = start_episode + i;
    r.step = 10 * (start_episode + i + 1);
    r.return_ext = value;
    r.return_learn = value;
    r.length = 10;
    records.push_back(r);
  }
  return records;
}

ComparisonRow row_with_mean(const std::string& env, const std::string& variant, double mean) {
  ComparisonRow row;
  row.environment = env;
  row.variant = variant;
  row.per_seed_means = {mean};
  row.mean = mean;
  return row;
}

}  // namespace

TEST(ConfigFile, ParsesTypedValuesAndComments) {
  const auto dir = temp_dir("cfg");
  {
    std::ofstream f(dir + "/a.cfg");
    f << "# comment line\n"
      << "env.id = chain:9   # trailing comment\n"
      << "agent.kind = a2c\n"
      << "agent.gamma = 0.9\n"
      << "run.seeds = 4, 5, 6\n"
      << "run.total_steps = 1000\n";
  }
  const Config cfg = Config::from_file(dir + "/a.cfg");
  const ExperimentConfig exp = experiment_from_config(cfg);
  EXPECT_EQ(exp.env_id, "chain:9");
  EXPECT_TRUE(exp.agent.kind == AgentKind::kA2c);
  EXPECT_DOUBLE_EQ(exp.agent.a2c.gamma, 0.9);
  EXPECT_EQ(exp.seeds, (std::vector<std::uint64_t>{4, 5, 6}));
  EXPECT_EQ(exp.agent.hidden, (std::vector<int>{128, 128}));  // a2c default
  fs::remove_all(dir);
}

TEST(ConfigFile, RejectsUnknownKeys) {
  Config cfg;
  cfg.set("env.id", "chain:6");
  cfg.set("agent.learning_rate", "0.1");  // not a key
  EXPECT_THROW(experiment_from_config(cfg), ConfigError);
}

TEST(ConfigFile, RejectsDuplicateSeeds) {
  Config cfg;
  cfg.set("env.id", "chain:6");
  cfg.set("run.seeds", "1,1");
  EXPECT_THROW(experiment_from_config(cfg), ConfigError);
}

TEST(ConfigFile, RejectsTotalStepsBelowHorizon) {
  Config cfg;
  cfg.set("env.id", "chain:6");
  cfg.set("agent.horizon", "128");
  cfg.set("run.total_steps", "64");
  EXPECT_THROW(experiment_from_config(cfg), ConfigError);
}

TEST(ConfigFile, HashIsStableAndContentSensitive) {
  Config a, b;
  a.set("env.id", "chain:6");
  b.set("env.id", "chain:6");
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.set("env.id", "chain:7");
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(EpisodeRecordIo, JsonRoundTrip) {
  EpisodeRecord r;
  r.seed = 42;
  r.episode = 7;
  r.step = 12345;
  r.return_ext = 1.5;
  r.return_learn = 1.75;
  r.length = 88;
  const auto back = episode_from_json(to_jsonl(r));
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.episode, r.episode);
  EXPECT_EQ(back.step, r.step);
  EXPECT_DOUBLE_EQ(back.return_ext, r.return_ext);
  EXPECT_DOUBLE_EQ(back.return_learn, r.return_learn);
  EXPECT_EQ(back.length, r.length);
}

TEST(RunExperiment, OneLogFilePerSeed) {
  const auto dir = temp_dir("logs");
  const auto cfg = tiny_experiment(dir);
  const RunResult result = run_experiment(cfg);
  EXPECT_FALSE(result.any_failed());
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    EXPECT_TRUE(fs::exists(seed_log_path(dir, seed)));
    EXPECT_TRUE(fs::exists(dir + "/policy_seed_" + std::to_string(seed) + ".pxnn"));
  }
  EXPECT_TRUE(fs::exists(dir + "/manifest.json"));
  int jsonl_files = 0;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".jsonl") ++jsonl_files;
  EXPECT_EQ(jsonl_files, 3);
  fs::remove_all(dir);
}

TEST(RunExperiment, SingleActorRunsAreByteIdentical) {
  const auto dir_a = temp_dir("det_a");
  const auto dir_b = temp_dir("det_b");
  auto cfg_a = tiny_experiment(dir_a);
  auto cfg_b = tiny_experiment(dir_b);
  run_experiment(cfg_a);
  run_experiment(cfg_b);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto a = slurp(seed_log_path(dir_a, seed));
    const auto b = slurp(seed_log_path(dir_b, seed));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b) << "seed " << seed;
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST(RunExperiment, RejectsBadEnvironmentBeforeRunning) {
  const auto dir = temp_dir("reject");
  auto cfg = tiny_experiment(dir + "/sub");
  cfg.env_id = "no-such-env";
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(dir + "/sub"));  // rejected before any run starts
  fs::remove_all(dir);
}

TEST(RunExperiment, NumericalFailureIsMarkedAndLogsRetained) {
  const auto dir = temp_dir("blowup");
  auto cfg = tiny_experiment(dir);
  cfg.seeds = {1};
  cfg.total_steps = 4096;
  cfg.agent.ppo.step_size = 1e200;  // guaranteed overflow in the value loss
  const RunResult result = run_experiment(cfg);
  ASSERT_TRUE(result.any_failed());
  EXPECT_FALSE(result.outcomes[0].error.empty());
  EXPECT_TRUE(fs::exists(seed_log_path(dir, 1)));  // partial log retained
  const auto manifest = slurp(dir + "/manifest.json");
  EXPECT_NE(manifest.find("\"failed\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(Aggregate, WindowOfConstantReturns) {
  const auto row =
      aggregate_last100("chain:6", "x", {constant_records(1, 100, 5.0)});
  EXPECT_DOUBLE_EQ(row.mean, 5.0);
  EXPECT_DOUBLE_EQ(row.per_seed_means[0], 5.0);
}

TEST(Aggregate, WindowPicksLastHundred) {
  auto records = constant_records(1, 50, 0.0);
  const auto tail = constant_records(1, 100, 1.0, 50);
  records.insert(records.end(), tail.begin(), tail.end());
  const auto row = aggregate_last100("chain:6", "x", {records});
  EXPECT_DOUBLE_EQ(row.per_seed_means[0], 1.0);
}

TEST(Aggregate, WindowClampsToAvailableEpisodes) {
  const auto row = aggregate_last100("chain:6", "x", {constant_records(1, 40, 2.0)});
  EXPECT_DOUBLE_EQ(row.per_seed_means[0], 2.0);
}

TEST(Aggregate, CrossSeedStatistics) {
  const auto row = aggregate_last100(
      "chain:6", "x", {constant_records(1, 10, 1.0), constant_records(2, 10, 3.0)});
  EXPECT_DOUBLE_EQ(row.mean, 2.0);
  EXPECT_DOUBLE_EQ(row.stddev, std::sqrt(2.0));  // sample std of {1, 3}
}

TEST(Aggregate, EmptyRecordSetRejected) {
  EXPECT_THROW(aggregate_last100("chain:6", "x", {}), UsageError);
  EXPECT_THROW(aggregate_last100("chain:6", "x", {{}}), UsageError);
}

TEST(Compare, VariantBeatsBaseline) {
  const auto table = compare({row_with_mean("e", "base", 5.0)}, {row_with_mean("e", "v", 10.0)});
  ASSERT_EQ(table.size(), 2u);
  EXPECT_FALSE(table[0].beats_baseline);
  EXPECT_TRUE(table[1].beats_baseline);
  EXPECT_TRUE(table[1].winner);
  EXPECT_FALSE(table[0].winner);
}

TEST(Compare, TieGoesToBaseline) {
  const auto table = compare({row_with_mean("e", "base", 5.0)}, {row_with_mean("e", "v", 5.0)});
  EXPECT_FALSE(table[1].beats_baseline);
  EXPECT_TRUE(table[0].winner);  // baseline keeps the tie
  EXPECT_FALSE(table[1].winner);
}

TEST(Compare, WinnerIsMaxAcrossVariants) {
  const auto table = compare({row_with_mean("e", "base", 1.0)},
                             {row_with_mean("e", "v1", 3.0), row_with_mean("e", "v2", 7.0),
                              row_with_mean("e", "v3", 5.0)});
  int winners = 0;
  for (const auto& row : table) {
    if (row.winner) {
      ++winners;
      EXPECT_EQ(row.variant, "v2");
    }
  }
  EXPECT_EQ(winners, 1);
}

TEST(Compare, MismatchedEnvironmentsRejected) {
  try {
    compare({row_with_mean("envA", "base", 1.0)}, {row_with_mean("envB", "v", 2.0)});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("envA"), std::string::npos);  // error lists the difference
    EXPECT_NE(what.find("envB"), std::string::npos);
  }
}

TEST(Plot, MovingAverageWindowOneIsIdentity) {
  const std::vector<double> values{1.0, 5.0, -2.0, 0.5};
  EXPECT_EQ(moving_average(values, 1), values);
}

TEST(Plot, MovingAverageSmooths) {
  const auto out = moving_average({0.0, 2.0, 4.0, 6.0}, 2);
  EXPECT_DOUBLE_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0);
  EXPECT_DOUBLE_EQ(out[2], 3.0);
  EXPECT_DOUBLE_EQ(out[3], 5.0);
}

TEST(Plot, ConstantReturnsGiveHorizontalLine) {
  RunData run;
  run.environment = "chain:6";
  run.variant = "const";
  run.seeds = {1};
  run.per_seed_records = {constant_records(1, 30, 4.0)};
  const auto series = build_series(run, 5);
  for (double m : series.mean) EXPECT_DOUBLE_EQ(m, 4.0);
  for (std::size_t g = 0; g < series.grid.size(); ++g) {
    EXPECT_DOUBLE_EQ(series.lo[g], 4.0);
    EXPECT_DOUBLE_EQ(series.hi[g], 4.0);
  }
}

TEST(Plot, BandSpansSeedExtremes) {
  RunData run;
  run.environment = "chain:6";
  run.variant = "five-seeds";
  const std::vector<double> levels{1.0, 2.0, 3.0, 4.0, 5.0};
  for (std::size_t s = 0; s < levels.size(); ++s) {
    run.seeds.push_back(s + 1);
    run.per_seed_records.push_back(constant_records(s + 1, 20, levels[s]));
  }
  const auto series = build_series(run, 1);
  // recompute the extremes straight from the record sets
  for (std::size_t g = 0; g < series.grid.size(); ++g) {
    EXPECT_DOUBLE_EQ(series.lo[g], 1.0);
    EXPECT_DOUBLE_EQ(series.hi[g], 5.0);
    EXPECT_DOUBLE_EQ(series.mean[g], 3.0);
  }
}

TEST(Plot, SvgFileIsSelfContainedAndDeterministic) {
  const auto dir = temp_dir("svg");
  RunData run;
  run.environment = "chain:6";
  run.variant = "curve";
  run.seeds = {1, 2};
  run.per_seed_records = {constant_records(1, 25, 1.0), constant_records(2, 25, 2.0)};
  plot_learning_curves({run}, 5, dir + "/a.svg", "test");
  plot_learning_curves({run}, 5, dir + "/b.svg", "test");
  const auto a = slurp(dir + "/a.svg");
  EXPECT_NE(a.find("<svg"), std::string::npos);
  EXPECT_NE(a.find("curve"), std::string::npos);          // legend label
  EXPECT_NE(a.find("global steps"), std::string::npos);   // axis label
  EXPECT_NE(a.find("extrinsic return"), std::string::npos);
  EXPECT_EQ(a, slurp(dir + "/b.svg"));  // aggregation is a pure function of the logs
  fs::remove_all(dir);
}

TEST(Sweep, SingleCellGridReturnsThatConfig) {
  const auto dir = temp_dir("sweep1");
  Config base;
  base.set("env.id", "chain:4");
  base.set("agent.kind", "ppo");
  base.set("agent.hidden", "8");
  base.set("agent.horizon", "32");
  base.set("agent.n_actors", "1");
  base.set("run.total_steps", "128");
  base.set("run.seeds", "1");
  const std::vector<GridAxis> axes{{"agent.gamma", {"0.95"}}};
  const auto result = sweep(base, axes, dir);
  ASSERT_EQ(result.cells.size(), 1u);
  EXPECT_EQ(result.best_index, 0u);
  EXPECT_EQ(result.cells[0].assignment.at("agent.gamma"), "0.95");
  fs::remove_all(dir);
}

TEST(Sweep, TwoByTwoGridRunsFourCells) {
  const auto dir = temp_dir("sweep4");
  Config base;
  base.set("env.id", "chain:4");
  base.set("agent.kind", "ppo");
  base.set("agent.hidden", "8");
  base.set("agent.horizon", "32");
  base.set("agent.n_actors", "1");
  base.set("run.total_steps", "128");
  base.set("run.seeds", "1");
  const std::vector<GridAxis> axes{{"agent.gamma", {"0.9", "0.99"}},
                                   {"agent.entropy_coeff", {"0.0", "0.01"}}};
  const auto result = sweep(base, axes, dir);
  EXPECT_EQ(result.cells.size(), 4u);
  for (int c = 0; c < 4; ++c) EXPECT_TRUE(fs::exists(dir + "/cell_" + std::to_string(c)));
  EXPECT_TRUE(fs::exists(dir + "/grid.csv"));
  fs::remove_all(dir);
}

TEST(Sweep, SelectsInjectedDominantCell) {
  const auto dir = temp_dir("sweepdom");
  Config base;
  base.set("env.id", "chain:4");  // goal two steps right of the start
  base.set("agent.kind", "ppo");
  base.set("agent.hidden", "8,8");
  base.set("agent.horizon", "64");
  base.set("agent.n_actors", "1");
  base.set("run.total_steps", "6144");
  base.set("run.seeds", "1");
  // one cell can learn, the other is frozen at the random policy
  const std::vector<GridAxis> axes{{"agent.step_size", {"0.0", "0.001"}}};
  const auto result = sweep(base, axes, dir);
  ASSERT_EQ(result.cells.size(), 2u);
  EXPECT_EQ(result.cells[result.best_index].assignment.at("agent.step_size"), "0.001");
  EXPECT_GT(result.cells[result.best_index].row.mean,
            result.cells[1 - result.best_index].row.mean);
  fs::remove_all(dir);
}

TEST(Sweep, RejectsUnknownGridKeys) {
  const auto dir = temp_dir("sweepbad");
  {
    std::ofstream f(dir + "/grid.cfg");
    f << "agent.learning_rate = 0.1,0.2\n";
  }
  EXPECT_THROW(load_grid(dir + "/grid.cfg"), ConfigError);
  fs::remove_all(dir);
}

TEST(LoadRunDirectory, RoundTripsManifestAndRecords) {
  const auto dir = temp_dir("loadrun");
  auto cfg = tiny_experiment(dir);
  cfg.name = "my-variant";
  run_experiment(cfg);
  const RunData data = load_run_directory(dir);
  EXPECT_EQ(data.environment, "chain:6");
  EXPECT_EQ(data.variant, "my-variant");
  EXPECT_EQ(data.seeds.size(), 3u);
  for (const auto& records : data.per_seed_records) EXPECT_FALSE(records.empty());
  fs::remove_all(dir);
}
