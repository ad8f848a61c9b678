#pragma once

// Evolutionary loop: per step, every agent observes, (possibly) learns and
// acts; physics advances; food is eaten and regrown; energy is updated and
// rewards recorded; then each pre-existing agent draws birth, then death.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rewevo/arena.hpp"
#include "rewevo/lifecycle.hpp"
#include "rewevo/reward.hpp"
#include "rewevo/rl.hpp"

namespace rewevo {

struct SimulationConfig {
  ArenaConfig arena;
  HazardParams hazard;
  BirthParams birth;
  MutationParams mutation;
  ReproductionParams reproduction;
  RewardConfig reward;
  rl::PpoHyper ppo;
  // Policy outputs are multiplied by this before the motor clip.
  double action_scale = 20.0;
  int initial_agents = 50;
  double initial_energy = 20.0;
  int capacity = 200;
  long max_steps = 200000;
  std::uint64_t seed = 0;
  long checkpoint_every = 100000;  // 0 disables
  bool log_eat_events = true;
  bool log_update_events = true;
};

enum class EventKind { birth, death, eat, update, relocation };
std::string_view to_string(EventKind kind);

struct EventRecord {
  long step = 0;
  EventKind kind = EventKind::birth;
  int agent_id = -1;
  // birth
  int parent_id = -1;
  long birth_step = 0;
  RewardParams weights;
  // birth: child energy; death: energy at death
  double energy = 0.0;
  // death
  long age = 0;
  // eat
  int food_id = -1;
  FoodType food = FoodType::normal;
  // update
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  bool aborted = false;
  // relocation
  int corner = 0;
  long total_eaten = 0;

  friend bool operator==(const EventRecord &, const EventRecord &) = default;
};

// One JSON object per line; see README for the schema.
std::string to_json_line(const EventRecord &event);
EventRecord event_from_json_line(const std::string &line);
void write_event_log(std::ostream &out, const std::vector<EventRecord> &events);
std::vector<EventRecord> read_event_log(std::istream &in);

struct AgentState {
  int id = 0;
  int parent_id = -1;
  long birth_step = 0;
  double energy = 0.0;
  RewardParams reward;
  rl::Learner learner;
  rl::RolloutBuffer buffer;
  long eaten = 0;

  long age(long step) const { return step - birth_step; }
};

// Energy bookkeeping for one step. The identity
//   after = before + food - metabolism + child_endowment - parent_deduction - death_removal
// holds up to floating-point summation order.
struct StepLedger {
  long step = 0;
  double energy_before = 0.0;
  double food_inflow = 0.0;
  double metabolic_outflow = 0.0;
  double child_endowment = 0.0;
  double parent_deduction = 0.0;
  double death_removal = 0.0;
  double energy_after = 0.0;

  double predicted_after() const {
    return energy_before + food_inflow - metabolic_outflow + child_endowment - parent_deduction -
           death_removal;
  }
  double residual() const { return energy_after - predicted_after(); }
};

class Simulation {
 public:
  explicit Simulation(SimulationConfig config);

  const SimulationConfig &config() const { return config_; }
  const Arena &arena() const { return arena_; }
  Arena &mutable_arena() { return arena_; }
  long current_step() const { return step_; }
  bool extinct() const { return agents_.empty(); }
  const std::vector<AgentState> &agents() const { return agents_; }
  std::vector<AgentState> &mutable_agents() { return agents_; }
  const AgentState *agent(int id) const;
  int next_agent_id() const { return next_id_; }
  const std::vector<EventRecord> &events() const { return events_; }
  const StepLedger &last_ledger() const { return ledger_; }
  int observation_dim() const { return arena_.observation_dim(); }

  // Called once per appended event, in log order.
  void set_event_sink(std::function<void(const EventRecord &)> sink) { sink_ = std::move(sink); }

  // Advances one step and returns the number of events it appended.
  std::size_t step();

  // Adds an agent at an explicit pose (used by tests and founders).
  int spawn_agent(Vec2 position, double orientation, double energy, const RewardParams &weights,
                  int parent_id, long birth_step);

  void save_checkpoint(const std::string &path) const;
  static Simulation load_checkpoint(const std::string &path);

 private:
  struct Restore {};
  Simulation(SimulationConfig config, Restore);

  EventRecord create_agent(Vec2 position, double orientation, double energy,
                           const RewardParams &weights, int parent_id, long birth_step);
  void emit(EventRecord event);
  void place_founders();
  AgentState *find(int id);
  double total_energy() const;

  SimulationConfig config_;
  Arena arena_;
  std::vector<AgentState> agents_;  // ascending id
  std::vector<EventRecord> events_;
  std::vector<EventRecord> pending_founders_;
  std::function<void(const EventRecord &)> sink_;
  StepLedger ledger_;
  long step_ = 0;
  int next_id_ = 0;
};

struct Metrics {
  long steps = 0;
  bool extinct = false;
  long births = 0;  // children only
  long founders = 0;
  long deaths = 0;
  std::optional<double> average_lifetime;  // mean age at death
  long agent_steps = 0;
  long total_eaten = 0;
  EatenCounts eaten_by_kind{};
  double consumption_per_step = 0.0;  // total eaten / agent-steps
  std::array<double, kFoodTypeCount> consumption_by_kind{};
  // Sampled every `stride` steps from step 0.
  std::vector<long> sample_steps;
  std::vector<int> population;
  std::vector<double> mean_w_food, mean_w_act, mean_w_extra;  // NaN when nobody alive
};

// `total_steps` is the number of steps the run executed. An agent is alive at
// step s when birth_step <= s <= death step (or the last step for survivors).
Metrics compute_metrics(const std::vector<EventRecord> &events, long total_steps, bool extinct,
                        long stride = 1000);

struct RunOutcome {
  Metrics metrics;
  std::vector<EventRecord> events;
  long steps = 0;
  bool extinct = false;
};

struct RunOptions {
  std::string event_log_path;   // empty: keep events in memory only
  std::string checkpoint_dir;   // empty: no checkpoints
  long metrics_stride = 1000;
  std::function<void(const Simulation &)> on_step;
};

// Runs until max_steps or extinction.
RunOutcome run(const SimulationConfig &config, const RunOptions &options = {});

}  // namespace rewevo
