#pragma once

// Batch runs over seeds and CSV exports of event logs. A run directory holds
// config.txt (resolved config), events.jsonl and summary.json.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rewevo/engine.hpp"

namespace rewevo {

struct RunData {
  std::string label;  // preset name or free-form tag
  std::uint64_t seed = 0;
  long steps = 0;
  bool extinct = false;
  std::vector<EventRecord> events;
};

struct BatchEntry {
  std::uint64_t seed = 0;
  std::string directory;
  bool ok = false;
  std::string error;
  long steps = 0;
  bool extinct = false;
  Metrics metrics;
};

struct BatchOptions {
  std::string label = "baseline";
  std::string out_root;  // one sub-directory per seed
  int jobs = 1;
  long metrics_stride = 1000;
};

// Runs the config once per seed. A failing seed is reported in its entry
// and does not stop the others. Writes `summary.csv` under out_root.
std::vector<BatchEntry> run_batch(const SimulationConfig &config,
                                  const std::vector<std::uint64_t> &seeds,
                                  const BatchOptions &options);

// Writes config.txt, events.jsonl and summary.json for one run.
BatchEntry run_to_directory(const SimulationConfig &config, const std::string &label,
                            const std::string &directory, long metrics_stride);

RunData load_run(const std::string &directory);
// Every directory below `root` (inclusive) containing summary.json, sorted.
std::vector<std::string> find_run_directories(const std::string &root);

void write_batch_summary(std::ostream &out, const std::vector<BatchEntry> &entries);

struct ExportResult {
  long rows = 0;
  std::vector<std::string> warnings;
};

// seed,agent_id,w_food,w_act[,w_poor|w_poison] for the last k agents born in
// each run (founders included), in birth order.
ExportResult export_reward_scatter(const std::vector<RunData> &runs, long k, std::ostream &out);

// seed,step,population,w_food,w_act[,w_extra] sampled every `stride` steps;
// a `pooled` row per sampled step averages over all runs' living agents.
ExportResult export_reward_dynamics(const std::vector<RunData> &runs, long stride,
                                    std::ostream &out);

// label,seed,steps,extinct,avg_lifetime,consumption,... one row per run plus
// a `mean` row per label.
ExportResult export_metrics_table(const std::vector<RunData> &runs, std::ostream &out);

// label,runs,extinct_runs,extinction_rate
ExportResult export_extinction_table(const std::vector<RunData> &runs, std::ostream &out);

// seed,step,population
ExportResult export_population_curve(const std::vector<RunData> &runs, long stride,
                                     std::ostream &out);

// trial,w_food,w_act
ExportResult export_null_model(const std::vector<RewardParams> &endpoints, std::ostream &out);

// Formats a double for CSV: shortest round-trip, empty for NaN.
std::string csv_number(double value);

}  // namespace rewevo
