// Command-line front-end: run, batch, analyze, null-model.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rewevo/analysis.hpp"
#include "rewevo/config.hpp"
#include "rewevo/lifecycle.hpp"

namespace fs = std::filesystem;
using namespace rewevo;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string output_root() {
  const char *env = std::getenv("REWEVO_OUT");
  return env && *env ? env : "runs";
}

std::vector<std::uint64_t> parse_seeds(const std::string &spec) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("bad seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error &) {
      throw ConfigError("bad seed list '" + spec + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

struct ConfigOptions {
  std::string config_path;
  std::string preset = "baseline";
  std::vector<std::string> overrides;
  long max_steps = -1;

  void add_to(CLI::App *cmd) {
    cmd->add_option("--config", config_path, "Config file (key = value lines)");
    cmd->add_option("--preset", preset, "Experiment preset")
        ->check(CLI::IsMember(preset_names()));
    cmd->add_option("--set", overrides, "Override, key=value (repeatable)");
    cmd->add_option("--max-steps", max_steps, "Step horizon");
  }

  SimulationConfig resolve(std::optional<std::uint64_t> seed) const {
    auto overrides_all = overrides;
    if (max_steps >= 0) overrides_all.push_back("max_steps=" + std::to_string(max_steps));
    if (seed) overrides_all.push_back("seed=" + std::to_string(*seed));
    return load_config(config_path.empty() ? std::nullopt : std::optional(config_path), preset,
                       overrides_all);
  }
};

void print_warnings(const ExportResult &r) {
  for (const auto &w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Evolution of reward functions in a foraging population"};
  app.require_subcommand(1);

  ConfigOptions run_cfg;
  std::uint64_t run_seed = 0;
  std::string run_out;
  auto *run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cfg.add_to(run_cmd);
  run_cmd->add_option("--seed", run_seed, "Root seed");
  run_cmd->add_option("--out", run_out, "Run directory (default $REWEVO_OUT/<preset>/seed_<n>)");

  ConfigOptions batch_cfg;
  std::string batch_seeds = "0-4";
  std::string batch_out;
  int batch_jobs = 1;
  auto *batch_cmd = app.add_subcommand("batch", "Run one simulation per seed");
  batch_cfg.add_to(batch_cmd);
  batch_cmd->add_option("--seeds", batch_seeds, "Seeds, e.g. 0-4 or 1,5,9");
  batch_cmd->add_option("--out", batch_out, "Batch directory (default $REWEVO_OUT/<preset>)");
  batch_cmd->add_option("--jobs", batch_jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);

  std::string kind;
  long k = 5000;
  long stride = 1000;
  std::vector<std::string> inputs;
  std::string analyze_out;
  auto *analyze_cmd = app.add_subcommand("analyze", "Export CSV tables from run directories");
  analyze_cmd
      ->add_option("--kind", kind, "Table to export")
      ->required()
      ->check(CLI::IsMember({"reward_scatter_last_k", "reward_dynamics", "metrics_table",
                             "extinction_table", "population_curve"}));
  analyze_cmd->add_option("--k", k, "Agents per seed for the scatter")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--stride", stride, "Sampling stride in steps")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--in", inputs, "Run or batch directories")->required();
  analyze_cmd->add_option("--out", analyze_out, "Output CSV (default stdout)");

  int trials = 1000;
  int walk_steps = 1000;
  std::uint64_t null_seed = 0;
  std::string null_out;
  auto *null_cmd = app.add_subcommand("null-model", "Random-walk endpoints of the mutation");
  null_cmd->add_option("--trials", trials)->check(CLI::NonNegativeNumber);
  null_cmd->add_option("--steps", walk_steps)->check(CLI::NonNegativeNumber);
  null_cmd->add_option("--seed", null_seed);
  null_cmd->add_option("--out", null_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) {
      const auto config = run_cfg.resolve(run_seed);
      const std::string dir =
          run_out.empty()
              ? (fs::path(output_root()) / run_cfg.preset / ("seed_" + std::to_string(run_seed)))
                    .string()
              : run_out;
      const auto entry = run_to_directory(config, run_cfg.preset, dir, 1000);
      std::cout << "seed " << entry.seed << ": " << entry.steps << " steps, "
                << (entry.extinct ? "extinct" : "alive") << ", births " << entry.metrics.births
                << ", deaths " << entry.metrics.deaths << " -> " << dir << '\n';
      return 0;
    }
    if (*batch_cmd) {
      const auto seeds = parse_seeds(batch_seeds);
      const auto config = batch_cfg.resolve(std::nullopt);
      BatchOptions options;
      options.label = batch_cfg.preset;
      options.out_root =
          batch_out.empty() ? (fs::path(output_root()) / batch_cfg.preset).string() : batch_out;
      options.jobs = batch_jobs;
      const auto entries = run_batch(config, seeds, options);
      write_batch_summary(std::cout, entries);
      const bool any_failed =
          std::any_of(entries.begin(), entries.end(), [](const auto &e) { return !e.ok; });
      return any_failed ? kRuntimeError : 0;
    }
    if (*analyze_cmd) {
      std::vector<RunData> runs;
      for (const auto &in : inputs) {
        const auto dirs = find_run_directories(in);
        if (dirs.empty()) throw ConfigError("no run directories under '" + in + "'");
        for (const auto &d : dirs) runs.push_back(load_run(d));
      }
      std::ofstream file;
      if (!analyze_out.empty()) {
        if (const auto parent = fs::path(analyze_out).parent_path(); !parent.empty())
          fs::create_directories(parent);
        file.open(analyze_out);
        if (!file) throw std::runtime_error("cannot write '" + analyze_out + "'");
      }
      std::ostream &out = analyze_out.empty() ? std::cout : file;
      ExportResult result;
      if (kind == "reward_scatter_last_k")
        result = export_reward_scatter(runs, k, out);
      else if (kind == "reward_dynamics")
        result = export_reward_dynamics(runs, stride, out);
      else if (kind == "metrics_table")
        result = export_metrics_table(runs, out);
      else if (kind == "extinction_table")
        result = export_extinction_table(runs, out);
      else
        result = export_population_curve(runs, stride, out);
      print_warnings(result);
      if (!analyze_out.empty())
        std::cerr << result.rows << " rows written to " << analyze_out << '\n';
      return 0;
    }
    if (*null_cmd) {
      const auto config = preset_config("random-walk-null");
      Rng rng = Rng::derive(null_seed, {static_cast<std::uint64_t>(Stream::random_walk)});
      const auto endpoints =
          random_walk_characterization(walk_steps, trials, rng, config.mutation);
      std::ofstream file;
      if (!null_out.empty()) {
        file.open(null_out);
        if (!file) throw std::runtime_error("cannot write '" + null_out + "'");
      }
      export_null_model(endpoints, null_out.empty() ? std::cout : file);
      long at_bounds = 0;
      for (const auto &w : endpoints)
        for (double v : {w.w_food, w.w_act})
          at_bounds += (v == config.mutation.clip_min || v == config.mutation.clip_max);
      std::cerr << "fraction of weights at clip bounds: "
                << (endpoints.empty() ? 0.0 : double(at_bounds) / (2.0 * endpoints.size()))
                << '\n';
      return 0;
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
