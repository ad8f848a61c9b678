#include "rewevo/analysis.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rewevo/config.hpp"

namespace fs = std::filesystem;

namespace rewevo {
namespace {

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

// Extra weight column name shared by all runs, or empty.
std::string extra_weight_column(const std::vector<RunData> &runs) {
  std::string name;
  bool seen = false;
  for (const auto &run : runs) {
    for (const auto &e : run.events) {
      if (e.kind != EventKind::birth) continue;
      const std::string n = e.weights.w_poor ? "w_poor" : e.weights.w_poison ? "w_poison" : "";
      if (seen && n != name) throw std::runtime_error("runs mix different reward-weight layouts");
      name = n;
      seen = true;
    }
  }
  return name;
}

std::optional<double> extra_weight(const RewardParams &w) {
  if (w.w_poor) return w.w_poor;
  return w.w_poison;
}

}  // namespace

std::string csv_number(double value) {
  if (std::isnan(value)) return "";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

BatchEntry run_to_directory(const SimulationConfig &config, const std::string &label,
                            const std::string &directory, long metrics_stride) {
  BatchEntry entry;
  entry.seed = config.seed;
  entry.directory = directory;
  fs::create_directories(directory);
  {
    std::ofstream echo(fs::path(directory) / "config.txt");
    echo << config_to_text(config);
  }
  RunOptions options;
  options.event_log_path = (fs::path(directory) / "events.jsonl").string();
  if (config.checkpoint_every > 0)
    options.checkpoint_dir = (fs::path(directory) / "checkpoints").string();
  options.metrics_stride = metrics_stride;
  const auto outcome = run(config, options);
  entry.ok = true;
  entry.steps = outcome.steps;
  entry.extinct = outcome.extinct;
  entry.metrics = outcome.metrics;

  nlohmann::ordered_json j;
  j["label"] = label;
  j["seed"] = config.seed;
  j["steps"] = outcome.steps;
  j["extinct"] = outcome.extinct;
  const auto &m = outcome.metrics;
  j["founders"] = m.founders;
  j["births"] = m.births;
  j["deaths"] = m.deaths;
  j["average_lifetime"] = m.average_lifetime ? nlohmann::ordered_json(*m.average_lifetime)
                                             : nlohmann::ordered_json(nullptr);
  j["agent_steps"] = m.agent_steps;
  j["total_eaten"] = m.total_eaten;
  j["consumption_per_step"] = m.consumption_per_step;
  std::ofstream summary(fs::path(directory) / "summary.json");
  summary << j.dump(2) << '\n';
  return entry;
}

std::vector<BatchEntry> run_batch(const SimulationConfig &config,
                                  const std::vector<std::uint64_t> &seeds,
                                  const BatchOptions &options) {
  if (seeds.empty()) throw std::invalid_argument("run_batch needs at least one seed");
  std::vector<BatchEntry> entries(seeds.size());
  std::size_t next = 0;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= seeds.size()) return;
        i = next++;
      }
      SimulationConfig c = config;
      c.seed = seeds[i];
      const auto dir = (fs::path(options.out_root) / seed_dir_name(seeds[i])).string();
      try {
        entries[i] = run_to_directory(c, options.label, dir, options.metrics_stride);
      } catch (const std::exception &ex) {
        entries[i].seed = seeds[i];
        entries[i].directory = dir;
        entries[i].ok = false;
        entries[i].error = ex.what();
      }
    }
  };
  const int jobs = std::clamp(options.jobs, 1, static_cast<int>(seeds.size()));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto &t : threads) t.join();

  fs::create_directories(options.out_root);
  std::ofstream out(fs::path(options.out_root) / "summary.csv");
  write_batch_summary(out, entries);
  return entries;
}

void write_batch_summary(std::ostream &out, const std::vector<BatchEntry> &entries) {
  out << "seed,status,steps,extinct,births,deaths,avg_lifetime,consumption_per_step\n";
  long extinct = 0, completed = 0;
  for (const auto &e : entries) {
    out << e.seed << ',';
    if (!e.ok) {
      std::string msg = e.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << "failed: " << msg << ",,,,,,\n";
      continue;
    }
    ++completed;
    extinct += e.extinct;
    const auto &m = e.metrics;
    out << "ok," << e.steps << ',' << (e.extinct ? 1 : 0) << ',' << m.births << ',' << m.deaths
        << ',' << (m.average_lifetime ? csv_number(*m.average_lifetime) : "") << ','
        << csv_number(m.consumption_per_step) << '\n';
  }
  out << "# extinction_rate," << (completed > 0 ? csv_number(double(extinct) / completed) : "")
      << '\n';
}

RunData load_run(const std::string &directory) {
  RunData run;
  std::ifstream summary(fs::path(directory) / "summary.json");
  if (!summary) throw std::runtime_error("no summary.json in '" + directory + "'");
  const auto j = nlohmann::json::parse(summary);
  run.label = j.at("label").get<std::string>();
  run.seed = j.at("seed").get<std::uint64_t>();
  run.steps = j.at("steps").get<long>();
  run.extinct = j.at("extinct").get<bool>();
  std::ifstream events(fs::path(directory) / "events.jsonl");
  if (!events) throw std::runtime_error("no events.jsonl in '" + directory + "'");
  run.events = read_event_log(events);
  return run;
}

std::vector<std::string> find_run_directories(const std::string &root) {
  std::vector<std::string> dirs;
  if (fs::exists(fs::path(root) / "summary.json")) dirs.push_back(root);
  if (fs::is_directory(root)) {
    for (const auto &entry : fs::recursive_directory_iterator(root))
      if (entry.is_regular_file() && entry.path().filename() == "summary.json" &&
          entry.path().parent_path() != fs::path(root))
        dirs.push_back(entry.path().parent_path().string());
  }
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  return dirs;
}

ExportResult export_reward_scatter(const std::vector<RunData> &runs, long k, std::ostream &out) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  ExportResult result;
  const auto extra = extra_weight_column(runs);
  out << "seed,agent_id,w_food,w_act" << (extra.empty() ? "" : "," + extra) << '\n';
  for (const auto &run : runs) {
    std::vector<const EventRecord *> births;
    for (const auto &e : run.events)
      if (e.kind == EventKind::birth) births.push_back(&e);
    if (static_cast<long>(births.size()) < k)
      result.warnings.push_back("seed " + std::to_string(run.seed) + ": only " +
                                std::to_string(births.size()) + " agents born, fewer than k = " +
                                std::to_string(k) + "; exporting all");
    const std::size_t first = births.size() > static_cast<std::size_t>(k) ? births.size() - k : 0;
    for (std::size_t i = first; i < births.size(); ++i) {
      const auto &w = births[i]->weights;
      out << run.seed << ',' << births[i]->agent_id << ',' << csv_number(w.w_food) << ','
          << csv_number(w.w_act);
      if (!extra.empty()) out << ',' << csv_number(*extra_weight(w));
      out << '\n';
      ++result.rows;
    }
  }
  return result;
}

ExportResult export_reward_dynamics(const std::vector<RunData> &runs, long stride,
                                    std::ostream &out) {
  ExportResult result;
  const auto extra = extra_weight_column(runs);
  out << "seed,step,population,w_food,w_act" << (extra.empty() ? "" : ",w_extra") << '\n';
  struct Pool {
    long population = 0;
    double food = 0.0, act = 0.0, extra = 0.0;
  };
  std::map<long, Pool> pooled;
  for (const auto &run : runs) {
    const auto m = compute_metrics(run.events, run.steps, run.extinct, stride);
    for (std::size_t i = 0; i < m.sample_steps.size(); ++i) {
      const long s = m.sample_steps[i];
      out << run.seed << ',' << s << ',' << m.population[i] << ',' << csv_number(m.mean_w_food[i])
          << ',' << csv_number(m.mean_w_act[i]);
      if (!extra.empty()) out << ',' << csv_number(m.mean_w_extra[i]);
      out << '\n';
      ++result.rows;
      auto &p = pooled[s];
      if (m.population[i] > 0) {
        p.population += m.population[i];
        p.food += m.mean_w_food[i] * m.population[i];
        p.act += m.mean_w_act[i] * m.population[i];
        if (!extra.empty()) p.extra += m.mean_w_extra[i] * m.population[i];
      }
    }
  }
  const double nan = std::nan("");
  for (const auto &[s, p] : pooled) {
    const double n = static_cast<double>(p.population);
    out << "pooled," << s << ',' << p.population << ',' << csv_number(n > 0 ? p.food / n : nan)
        << ',' << csv_number(n > 0 ? p.act / n : nan);
    if (!extra.empty()) out << ',' << csv_number(n > 0 ? p.extra / n : nan);
    out << '\n';
    ++result.rows;
  }
  return result;
}

ExportResult export_metrics_table(const std::vector<RunData> &runs, std::ostream &out) {
  ExportResult result;
  out << "label,seed,steps,extinct,avg_lifetime,consumption_per_step,consumption_normal,"
         "consumption_poor,consumption_poison,births,deaths\n";
  struct Acc {
    int runs = 0, with_lifetime = 0;
    double lifetime = 0.0, consumption = 0.0;
    std::array<double, kFoodTypeCount> by_kind{};
  };
  std::map<std::string, Acc> per_label;
  for (const auto &run : runs) {
    const auto m = compute_metrics(run.events, run.steps, run.extinct);
    out << run.label << ',' << run.seed << ',' << run.steps << ',' << (run.extinct ? 1 : 0) << ','
        << (m.average_lifetime ? csv_number(*m.average_lifetime) : "") << ','
        << csv_number(m.consumption_per_step);
    for (double c : m.consumption_by_kind) out << ',' << csv_number(c);
    out << ',' << m.births << ',' << m.deaths << '\n';
    ++result.rows;
    auto &acc = per_label[run.label];
    ++acc.runs;
    if (m.average_lifetime) {
      acc.lifetime += *m.average_lifetime;
      ++acc.with_lifetime;
    }
    acc.consumption += m.consumption_per_step;
    for (int k = 0; k < kFoodTypeCount; ++k) acc.by_kind[k] += m.consumption_by_kind[k];
  }
  for (const auto &[label, acc] : per_label) {
    out << label << ",mean,,,"
        << (acc.with_lifetime > 0 ? csv_number(acc.lifetime / acc.with_lifetime) : "") << ','
        << csv_number(acc.consumption / acc.runs);
    for (double c : acc.by_kind) out << ',' << csv_number(c / acc.runs);
    out << ",,\n";
    ++result.rows;
  }
  return result;
}

ExportResult export_extinction_table(const std::vector<RunData> &runs, std::ostream &out) {
  ExportResult result;
  out << "label,runs,extinct_runs,extinction_rate\n";
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto &run : runs) {
    auto &c = counts[run.label];
    ++c.first;
    c.second += run.extinct ? 1 : 0;
  }
  for (const auto &[label, c] : counts) {
    out << label << ',' << c.first << ',' << c.second << ','
        << csv_number(static_cast<double>(c.second) / c.first) << '\n';
    ++result.rows;
  }
  return result;
}

ExportResult export_population_curve(const std::vector<RunData> &runs, long stride,
                                     std::ostream &out) {
  ExportResult result;
  out << "seed,step,population\n";
  for (const auto &run : runs) {
    const auto m = compute_metrics(run.events, run.steps, run.extinct, stride);
    for (std::size_t i = 0; i < m.sample_steps.size(); ++i) {
      out << run.seed << ',' << m.sample_steps[i] << ',' << m.population[i] << '\n';
      ++result.rows;
    }
  }
  return result;
}

ExportResult export_null_model(const std::vector<RewardParams> &endpoints, std::ostream &out) {
  ExportResult result;
  out << "trial,w_food,w_act\n";
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    out << i << ',' << csv_number(endpoints[i].w_food) << ',' << csv_number(endpoints[i].w_act)
        << '\n';
    ++result.rows;
  }
  return result;
}

}  // namespace rewevo
