#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pxrl/agents.hpp"
#include "pxrl/config.hpp"
#include "pxrl/envs.hpp"
#include "pxrl/errors.hpp"

namespace pxrl {

// One log row per finished training episode. The extrinsic return is the sum
// of environment rewards and never includes bonuses; the learner return is
// logged separately for diagnosis.
struct EpisodeRecord {
  std::uint64_t seed = 0;
  std::int64_t episode = 0;
  std::int64_t step = 0;  // global step at episode end
  double return_ext = 0.0;
  double return_learn = 0.0;
  int length = 0;
};

inline std::string to_jsonl(const EpisodeRecord& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["episode"] = r.episode;
  j["step"] = r.step;
  j["return_ext"] = r.return_ext;
  j["return_learn"] = r.return_learn;
  j["length"] = r.length;
  return j.dump();
}

inline EpisodeRecord episode_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  EpisodeRecord r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.episode = j.at("episode").get<std::int64_t>();
  r.step = j.at("step").get<std::int64_t>();
  r.return_ext = j.at("return_ext").get<double>();
  r.return_learn = j.at("return_learn").get<double>();
  r.length = j.at("length").get<int>();
  return r;
}

inline std::vector<EpisodeRecord> load_episode_records(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open episode log: " + path);
  std::vector<EpisodeRecord> records;
  std::string line;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    records.push_back(episode_from_json(line));
  }
  return records;
}

inline std::string seed_log_path(const std::string& out_dir, std::uint64_t seed) {
  return out_dir + "/seed_" + std::to_string(seed) + ".jsonl";
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::int64_t episodes = 0;
  std::int64_t final_step = 0;
};

struct RunResult {
  std::string out_dir;
  std::vector<SeedOutcome> outcomes;
  bool any_failed() const {
    return std::any_of(outcomes.begin(), outcomes.end(),
                       [](const SeedOutcome& o) { return o.failed; });
  }
};

// One training run per seed, each writing only its own log file, so seeds can
// run in parallel threads. Episode records are appended as episodes finish;
// the manifest echoes the resolved config plus its content hash and per-seed
// status. Partial logs from a numerically failed seed are retained.
inline RunResult run_experiment(const ExperimentConfig& cfg,
                                int max_parallel = static_cast<int>(std::thread::hardware_concurrency())) {
  cfg.validate();
  make_env(cfg.env_id);  // reject bad environment ids before any run starts
  std::filesystem::create_directories(cfg.out_dir);

  RunResult result;
  result.out_dir = cfg.out_dir;
  result.outcomes.resize(cfg.seeds.size());

  auto run_seed = [&cfg, &result](std::size_t seed_index) {
    const std::uint64_t seed = cfg.seeds[seed_index];
    SeedOutcome outcome;
    outcome.seed = seed;
    std::ofstream log(seed_log_path(cfg.out_dir, seed), std::ios::trunc);
    std::ofstream eval_log;
    if (cfg.eval_interval > 0)
      eval_log.open(cfg.out_dir + "/eval_seed_" + std::to_string(seed) + ".jsonl", std::ios::trunc);
    try {
      Trainer trainer([&cfg]() { return make_env(cfg.env_id); }, cfg.agent, cfg.explore,
                      cfg.total_steps, seed);
      trainer.set_episode_sink([&](const EpisodeStats& e) {
        EpisodeRecord r;
        r.seed = seed;
        r.episode = e.episode_index;
        r.step = e.global_step;
        r.return_ext = e.return_ext;
        r.return_learn = e.return_learn;
        r.length = e.length;
        log << to_jsonl(r) << "\n";
        log.flush();
        outcome.episodes += 1;
      });
      std::int64_t next_eval = cfg.eval_interval;
      std::int64_t eval_index = 0;
      bool more = true;
      while (more) {
        more = trainer.iterate();
        if (cfg.eval_interval > 0 && trainer.global_step() >= next_eval) {
          EpisodeRecord r;
          r.seed = seed;
          r.episode = eval_index++;
          r.step = trainer.global_step();
          r.return_ext = trainer.eval_episode(derive_seed(seed, 0xEA11 + eval_index));
          r.return_learn = r.return_ext;
          eval_log << to_jsonl(r) << "\n";
          next_eval += cfg.eval_interval;
        }
      }
      outcome.final_step = trainer.global_step();
      save_network(trainer.policy(), cfg.out_dir + "/policy_seed_" + std::to_string(seed) + ".pxnn");
      save_network(trainer.value_network(),
                   cfg.out_dir + "/value_seed_" + std::to_string(seed) + ".pxnn");
    } catch (const NumericalError& e) {
      outcome.failed = true;
      outcome.error = e.what();
    }
    result.outcomes[seed_index] = outcome;
  };

  const int workers = std::max(1, std::min<int>(max_parallel, static_cast<int>(cfg.seeds.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) run_seed(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t mine;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= cfg.seeds.size()) return;
            mine = next++;
          }
          run_seed(mine);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  nlohmann::json manifest;
  const Config echo = experiment_to_config(cfg);
  manifest["config"] = nlohmann::json::object();
  for (const auto& [k, v] : echo.values()) manifest["config"][k] = v;
  manifest["config_hash"] = config_hash(echo);
  manifest["name"] = cfg.name;
  manifest["environment"] = cfg.env_id;
  manifest["seeds"] = nlohmann::json::array();
  for (const auto& outcome : result.outcomes) {
    nlohmann::json s;
    s["seed"] = outcome.seed;
    s["status"] = outcome.failed ? "failed" : "completed";
    if (outcome.failed) s["error"] = outcome.error;
    s["episodes"] = outcome.episodes;
    s["final_step"] = outcome.final_step;
    manifest["seeds"].push_back(s);
  }
  std::ofstream mf(cfg.out_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  return result;
}

// ---------------------------------------------------------------------------
// Aggregation and comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string environment;
  std::string variant;
  std::vector<double> per_seed_means;  // last-100 mean per seed
  double mean = 0.0;
  double stddev = 0.0;  // cross-seed sample standard deviation
  bool beats_baseline = false;
  bool winner = false;
};

// Mean extrinsic return over the final min(100, total) episodes per seed,
// then cross-seed mean and sample standard deviation.
inline ComparisonRow aggregate_last100(const std::string& environment, const std::string& variant,
                                       const std::vector<std::vector<EpisodeRecord>>& per_seed,
                                       int window = 100) {
  if (per_seed.empty()) throw UsageError("aggregate_last100: no seeds to aggregate");
  ComparisonRow row;
  row.environment = environment;
  row.variant = variant;
  for (const auto& records : per_seed) {
    if (records.empty()) throw UsageError("aggregate_last100: a seed has no episodes");
    const std::size_t take = std::min<std::size_t>(window, records.size());
    double sum = 0.0;
    for (std::size_t i = records.size() - take; i < records.size(); ++i)
      sum += records[i].return_ext;
    row.per_seed_means.push_back(sum / static_cast<double>(take));
  }
  for (double m : row.per_seed_means) row.mean += m;
  row.mean /= static_cast<double>(row.per_seed_means.size());
  if (row.per_seed_means.size() > 1) {
    double ss = 0.0;
    for (double m : row.per_seed_means) ss += (m - row.mean) * (m - row.mean);
    row.stddev = std::sqrt(ss / static_cast<double>(row.per_seed_means.size() - 1));
  }
  return row;
}

// A run directory as written by run_experiment.
struct RunData {
  std::string environment;
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<EpisodeRecord>> per_seed_records;
};

inline RunData load_run_directory(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw ConfigError("cannot open run manifest: " + manifest_path);
  nlohmann::json manifest;
  mf >> manifest;
  RunData data;
  data.environment = manifest.at("environment").get<std::string>();
  data.variant = manifest.at("name").get<std::string>();
  for (const auto& s : manifest.at("seeds")) {
    const auto seed = s.at("seed").get<std::uint64_t>();
    data.seeds.push_back(seed);
    data.per_seed_records.push_back(load_episode_records(seed_log_path(dir, seed)));
  }
  return data;
}

// One row per (environment, variant); the winner per environment is the row
// with the maximum cross-seed mean, ties broken toward the baseline.
inline std::vector<ComparisonRow> compare(const std::vector<ComparisonRow>& baseline_rows,
                                          const std::vector<ComparisonRow>& variant_rows) {
  std::set<std::string> base_envs, variant_envs;
  std::map<std::string, const ComparisonRow*> baseline_by_env;
  for (const auto& row : baseline_rows) {
    base_envs.insert(row.environment);
    baseline_by_env[row.environment] = &row;
  }
  for (const auto& row : variant_rows) variant_envs.insert(row.environment);
  if (base_envs != variant_envs) {
    std::string diff;
    for (const auto& e : base_envs)
      if (!variant_envs.count(e)) diff += " baseline-only:" + e;
    for (const auto& e : variant_envs)
      if (!base_envs.count(e)) diff += " variant-only:" + e;
    throw UsageError("compare: environment sets differ:" + diff);
  }

  std::vector<ComparisonRow> table;
  for (const auto& base : baseline_rows) {
    ComparisonRow row = base;
    row.beats_baseline = false;
    table.push_back(row);
  }
  for (const auto& variant : variant_rows) {
    ComparisonRow row = variant;
    row.beats_baseline = row.mean > baseline_by_env.at(row.environment)->mean;
    table.push_back(row);
  }
  // winner flags, per environment
  for (const auto& env : base_envs) {
    ComparisonRow* best = nullptr;
    for (auto& row : table) {
      if (row.environment != env) continue;
      // strict > keeps the earlier row (the baseline comes first) on ties
      if (best == nullptr || row.mean > best->mean) best = &row;
    }
    if (best != nullptr) best->winner = true;
  }
  return table;
}

inline void write_comparison_csv(const std::vector<ComparisonRow>& table, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open comparison output: " + path);
  f.precision(17);
  f << "environment,variant,seeds,per_seed_means,mean,stddev,beats_baseline,winner\n";
  for (const auto& row : table) {
    f << row.environment << "," << row.variant << "," << row.per_seed_means.size() << ",";
    for (std::size_t i = 0; i < row.per_seed_means.size(); ++i)
      f << (i ? "|" : "") << row.per_seed_means[i];
    f << "," << row.mean << "," << row.stddev << "," << (row.beats_baseline ? "true" : "false")
      << "," << (row.winner ? "true" : "false") << "\n";
  }
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

// Grid file format: one `key = v1,v2,v3` line per axis, over known config
// keys. Unknown keys are rejected.
inline std::vector<GridAxis> load_grid(const std::string& path) {
  const Config raw = Config::from_file(path);
  std::vector<GridAxis> axes;
  for (const auto& [key, value] : raw.values()) {
    if (!known_config_keys().count(key)) throw ConfigError("grid over unknown config key: " + key);
    GridAxis axis;
    axis.key = key;
    axis.values = split(value, ',');
    if (axis.values.empty()) throw ConfigError("grid axis " + key + " has no values");
    axes.push_back(axis);
  }
  if (axes.empty()) throw ConfigError("empty grid: " + path);
  return axes;
}

struct SweepCell {
  std::size_t index = 0;
  std::map<std::string, std::string> assignment;
  std::string out_dir;
  ComparisonRow row;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::size_t best_index = 0;
};

// Runs the full Cartesian grid, each cell with the configured seeds, and
// selects the cell with the highest cross-seed last-100 mean. The full grid
// table is written alongside the winner, not just the winner.
inline SweepResult sweep(const Config& base, const std::vector<GridAxis>& axes,
                         const std::string& out_dir) {
  std::size_t n_cells = 1;
  for (const auto& axis : axes) n_cells *= axis.values.size();
  std::filesystem::create_directories(out_dir);

  SweepResult result;
  for (std::size_t cell_index = 0; cell_index < n_cells; ++cell_index) {
    SweepCell cell;
    cell.index = cell_index;
    Config cfg = base;
    std::size_t rest = cell_index;
    for (const auto& axis : axes) {
      const std::string& value = axis.values[rest % axis.values.size()];
      rest /= axis.values.size();
      cfg.set(axis.key, value);
      cell.assignment[axis.key] = value;
    }
    cell.out_dir = out_dir + "/cell_" + std::to_string(cell_index);
    cfg.set("run.out", cell.out_dir);

    ExperimentConfig exp = experiment_from_config(cfg);
    const RunResult run = run_experiment(exp);
    if (run.any_failed()) throw NumericalError("sweep cell " + std::to_string(cell_index) + " failed");
    const RunData data = load_run_directory(cell.out_dir);
    cell.row = aggregate_last100(data.environment, data.variant, data.per_seed_records);
    result.cells.push_back(std::move(cell));
  }

  for (std::size_t i = 1; i < result.cells.size(); ++i)
    if (result.cells[i].row.mean > result.cells[result.best_index].row.mean) result.best_index = i;

  std::ofstream f(out_dir + "/grid.csv");
  f.precision(17);
  f << "cell,assignment,mean,stddev,best\n";
  for (const auto& cell : result.cells) {
    f << cell.index << ",";
    bool first = true;
    for (const auto& [k, v] : cell.assignment) {
      f << (first ? "" : ";") << k << "=" << v;
      first = false;
    }
    f << "," << cell.row.mean << "," << cell.row.stddev << ","
      << (cell.index == result.best_index ? "true" : "false") << "\n";
  }
  return result;
}

}  // namespace pxrl
