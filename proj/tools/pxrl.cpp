// Command-line front end: train / sweep / compare / plot / verify.
// Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
// 3 verification failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pxrl/config.hpp"
#include "pxrl/harness.hpp"
#include "pxrl/plot.hpp"
#include "pxrl/verify.hpp"

namespace {

int cmd_train(const std::string& config_path, long long seed_override, long long steps_override,
              const std::string& out_override, const std::vector<std::string>& sets) {
  pxrl::Config cfg = pxrl::Config::from_file(config_path);
  cfg.merge(pxrl::Config::from_pairs(sets));  // CLI flags override file keys
  if (seed_override >= 0) cfg.set("run.seeds", std::to_string(seed_override));
  if (steps_override > 0) cfg.set("run.total_steps", std::to_string(steps_override));
  if (!out_override.empty()) cfg.set("run.out", out_override);

  const pxrl::ExperimentConfig exp = pxrl::experiment_from_config(cfg);
  const pxrl::RunResult result = pxrl::run_experiment(exp);
  for (const auto& outcome : result.outcomes) {
    std::cout << "seed " << outcome.seed << ": "
              << (outcome.failed ? "FAILED (" + outcome.error + ")" : "completed") << ", "
              << outcome.episodes << " episodes, final step " << outcome.final_step << "\n";
  }
  std::cout << "run directory: " << result.out_dir << "\n";
  return result.any_failed() ? 2 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_dir) {
  const pxrl::Config base = pxrl::Config::from_file(config_path);
  const auto axes = pxrl::load_grid(grid_path);
  const pxrl::SweepResult result = pxrl::sweep(base, axes, out_dir);
  const auto& best = result.cells[result.best_index];
  std::cout << "grid cells: " << result.cells.size() << "\n";
  std::cout << "best cell " << best.index << " (last-100 mean " << best.row.mean << "):\n";
  for (const auto& [k, v] : best.assignment) std::cout << "  " << k << " = " << v << "\n";
  std::cout << "grid table: " << out_dir << "/grid.csv\n";
  return 0;
}

int cmd_compare(const std::string& runs_arg, const std::string& out_path) {
  const auto dirs = pxrl::split(runs_arg, ',');
  if (dirs.size() < 2)
    throw pxrl::UsageError("compare needs at least two run directories (baseline first)");
  std::vector<pxrl::ComparisonRow> baseline_rows, variant_rows;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const pxrl::RunData data = pxrl::load_run_directory(dirs[i]);
    const auto row = pxrl::aggregate_last100(data.environment, data.variant, data.per_seed_records);
    (i == 0 ? baseline_rows : variant_rows).push_back(row);
  }
  const auto table = pxrl::compare(baseline_rows, variant_rows);
  pxrl::write_comparison_csv(table, out_path);
  for (const auto& row : table) {
    std::printf("%-24s %-24s mean %10.4f  std %9.4f%s%s\n", row.environment.c_str(),
                row.variant.c_str(), row.mean, row.stddev,
                row.beats_baseline ? "  beats-baseline" : "", row.winner ? "  [winner]" : "");
  }
  std::cout << "table: " << out_path << "\n";
  return 0;
}

int cmd_plot(const std::string& runs_arg, int window, const std::string& out_path,
             const std::string& title) {
  std::vector<pxrl::RunData> runs;
  for (const auto& dir : pxrl::split(runs_arg, ',')) runs.push_back(pxrl::load_run_directory(dir));
  pxrl::plot_learning_curves(runs, window, out_path, title);
  std::cout << "figure: " << out_path << "\n";
  return 0;
}

int cmd_verify() {
  const auto results = pxrl::run_verification();
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %-40s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy-gradient exploration testbed"};
  app.require_subcommand(1);

  std::string config_path, grid_path, runs_arg, out_path, title;
  std::vector<std::string> sets;
  long long seed_override = -1, steps_override = 0;
  int window = 100;

  auto* train = app.add_subcommand("train", "train one experiment (all configured seeds)");
  train->add_option("--config", config_path, "experiment config file")->required();
  train->add_option("--seed", seed_override, "override run.seeds with a single seed");
  train->add_option("--steps", steps_override, "override run.total_steps");
  train->add_option("--out", out_path, "override run.out");
  train->add_option("--set", sets, "extra key=value overrides");

  auto* sweep = app.add_subcommand("sweep", "grid search over config keys");
  sweep->add_option("--config", config_path, "base experiment config file")->required();
  sweep->add_option("--grid", grid_path, "grid file: `key = v1,v2,...` per axis")->required();
  sweep->add_option("--out", out_path, "sweep output directory")->required();

  auto* compare = app.add_subcommand("compare", "aggregate runs into a comparison table");
  compare->add_option("--runs", runs_arg, "run directories, baseline first (comma separated)")
      ->required();
  compare->add_option("--out", out_path, "output CSV path")->required();

  auto* plot = app.add_subcommand("plot", "render learning curves to SVG");
  plot->add_option("--runs", runs_arg, "run directories (comma separated)")->required();
  plot->add_option("--window", window, "moving-average window (episodes)");
  plot->add_option("--out", out_path, "output SVG path")->required();
  plot->add_option("--title", title, "figure title");

  auto* verify = app.add_subcommand("verify", "run the built-in invariant/oracle suite");

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(config_path, seed_override, steps_override, out_path, sets);
    if (sweep->parsed()) return cmd_sweep(config_path, grid_path, out_path);
    if (compare->parsed()) return cmd_compare(runs_arg, out_path);
    if (plot->parsed()) return cmd_plot(runs_arg, window, out_path, title);
    if (verify->parsed()) return cmd_verify();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const pxrl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const pxrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const pxrl::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
