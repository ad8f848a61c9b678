#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rewevo/config.hpp"
#include "rewevo/engine.hpp"

// Checkpoint layout (little-endian, native doubles):
//   "RWEVOCKP" u32 version
//   string config text
//   i64 step, i32 next agent id, i64 total eaten, i32 next food id
//   u32 populations { f64 budget, u32 items { i32 id, f64 x, f64 y } }
//   u32 agents { body pose and velocity, learner and buffer state }
//   string pending founder events, string event log (JSON lines)

namespace rewevo {
namespace {

constexpr char kMagic[8] = {'R', 'W', 'E', 'V', 'O', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream &out) : out_(out) {}

  template <typename T>
  void pod(const T &v) {
    out_.write(reinterpret_cast<const char *>(&v), sizeof(T));
  }
  void str(const std::string &s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void doubles(const double *data, std::size_t n) {
    pod<std::uint64_t>(n);
    out_.write(reinterpret_cast<const char *>(data), static_cast<std::streamsize>(n * 8));
  }

 private:
  std::ostream &out_;
};

class Reader {
 public:
  explicit Reader(std::istream &in) : in_(in) {}

  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in_) throw std::runtime_error("checkpoint truncated");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("checkpoint truncated");
    return s;
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    std::vector<double> v(n);
    in_.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(n * 8));
    if (!in_) throw std::runtime_error("checkpoint truncated");
    return v;
  }
  void into(double *data, std::size_t expected) {
    const auto v = doubles();
    if (v.size() != expected) throw std::runtime_error("checkpoint shape mismatch");
    std::memcpy(data, v.data(), expected * 8);
  }

 private:
  std::istream &in_;
};

std::string events_text(const std::vector<EventRecord> &events) {
  std::ostringstream out;
  write_event_log(out, events);
  return out.str();
}

std::vector<EventRecord> events_from_text(const std::string &text) {
  std::istringstream in(text);
  return read_event_log(in);
}

}  // namespace

void Simulation::save_checkpoint(const std::string &path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp + "'");
    Writer w(out);
    out.write(kMagic, sizeof(kMagic));
    w.pod(kVersion);
    w.str(config_to_text(config_));
    w.pod<std::int64_t>(step_);
    w.pod<std::int32_t>(next_id_);
    w.pod<std::int64_t>(arena_.total_eaten());
    w.pod<std::int32_t>(arena_.next_food_id());

    const auto foods = arena_.foods();
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(foods.size()));
    for (const auto &pop : foods) {
      w.pod(pop.budget);
      w.pod<std::uint32_t>(static_cast<std::uint32_t>(pop.items.size()));
      for (const auto &item : pop.items) {
        w.pod<std::int32_t>(item.id);
        w.pod(item.position.x);
        w.pod(item.position.y);
      }
    }

    w.pod<std::uint32_t>(static_cast<std::uint32_t>(agents_.size()));
    for (const auto &a : agents_) {
      const auto *b = arena_.agent_body(a.id);
      w.pod<std::int32_t>(a.id);
      w.pod<std::int32_t>(a.parent_id);
      w.pod<std::int64_t>(a.birth_step);
      w.pod(a.energy);
      w.pod<std::int64_t>(a.eaten);
      const auto weights = a.reward.to_vector();
      w.doubles(weights.data(), weights.size());
      w.pod(b->center.x);
      w.pod(b->center.y);
      w.pod(b->orientation);
      w.pod(b->linear_velocity.x);
      w.pod(b->linear_velocity.y);
      w.pod(b->angular_velocity);
      const auto &p = a.learner.params.flat();
      w.doubles(p.data(), static_cast<std::size_t>(p.size()));
      const auto &adam = a.learner.adam;
      w.doubles(adam.first_moment.data(), static_cast<std::size_t>(adam.first_moment.size()));
      w.doubles(adam.second_moment.data(), static_cast<std::size_t>(adam.second_moment.size()));
      w.pod<std::int64_t>(adam.step);
      const auto &buf = a.buffer;
      const auto n = static_cast<std::size_t>(buf.size());
      w.pod<std::int32_t>(buf.size());
      w.doubles(buf.observations().data(), n * static_cast<std::size_t>(buf.obs_dim()));
      w.doubles(buf.actions().data(), n * rl::kActionDim);
      w.doubles(buf.log_probs().data(), n);
      w.doubles(buf.values().data(), n);
      w.doubles(buf.rewards().data(), n);
      for (std::size_t i = 0; i < n; ++i) w.pod<std::uint8_t>(buf.dones()[i]);
    }
    w.str(events_text(pending_founders_));
    w.str(events_text(events_));
    if (!out) throw std::runtime_error("failed writing checkpoint '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Simulation Simulation::load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("'" + path + "' is not a checkpoint");
  Reader r(in);
  const auto version = r.pod<std::uint32_t>();
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const SimulationConfig config = apply_config_text(r.str(), preset_config("baseline"));

  Simulation sim(config, Restore{});
  sim.step_ = r.pod<std::int64_t>();
  sim.next_id_ = r.pod<std::int32_t>();
  const auto total_eaten = r.pod<std::int64_t>();
  const auto next_food = r.pod<std::int32_t>();
  sim.arena_.restore_counters(total_eaten, next_food);

  auto foods = sim.arena_.mutable_foods();
  const auto n_pop = r.pod<std::uint32_t>();
  if (n_pop != foods.size()) throw std::runtime_error("checkpoint food populations mismatch");
  for (auto &pop : foods) {
    pop.budget = r.pod<double>();
    pop.items.resize(r.pod<std::uint32_t>());
    for (auto &item : pop.items) {
      item.id = r.pod<std::int32_t>();
      item.position.x = r.pod<double>();
      item.position.y = r.pod<double>();
    }
  }

  const bool poor = sim.arena_.has_food_type(FoodType::poor);
  const bool poison = sim.arena_.has_food_type(FoodType::poison);
  const int obs_dim = sim.arena_.observation_dim();
  const auto n_agents = r.pod<std::uint32_t>();
  for (std::uint32_t k = 0; k < n_agents; ++k) {
    AgentState a;
    a.id = r.pod<std::int32_t>();
    a.parent_id = r.pod<std::int32_t>();
    a.birth_step = r.pod<std::int64_t>();
    a.energy = r.pod<double>();
    a.eaten = r.pod<std::int64_t>();
    a.reward = RewardParams::from_vector(r.doubles(), poor, poison);
    Vec2 center{r.pod<double>(), 0.0};
    center.y = r.pod<double>();
    const double orientation = r.pod<double>();
    sim.arena_.add_agent(a.id, center, orientation);
    auto *body = sim.arena_.mutable_agent_body(a.id);
    body->orientation = orientation;
    body->linear_velocity.x = r.pod<double>();
    body->linear_velocity.y = r.pod<double>();
    body->angular_velocity = r.pod<double>();

    a.learner.params = rl::PolicyParams(obs_dim, config.ppo.hidden);
    auto &p = a.learner.params.flat();
    r.into(p.data(), static_cast<std::size_t>(p.size()));
    a.learner.adam = rl::AdamState::zeros(p.size());
    r.into(a.learner.adam.first_moment.data(), static_cast<std::size_t>(p.size()));
    r.into(a.learner.adam.second_moment.data(), static_cast<std::size_t>(p.size()));
    a.learner.adam.step = r.pod<std::int64_t>();

    a.buffer = rl::RolloutBuffer(obs_dim, config.ppo.rollout_steps);
    const int n = r.pod<std::int32_t>();
    if (n < 0 || n > config.ppo.rollout_steps) throw std::runtime_error("bad buffer size");
    const auto un = static_cast<std::size_t>(n);
    r.into(a.buffer.mutable_observations().data(), un * static_cast<std::size_t>(obs_dim));
    r.into(a.buffer.mutable_actions().data(), un * rl::kActionDim);
    r.into(a.buffer.mutable_log_probs().data(), un);
    r.into(a.buffer.mutable_values().data(), un);
    r.into(a.buffer.mutable_rewards().data(), un);
    for (std::size_t i = 0; i < un; ++i) a.buffer.mutable_dones()[i] = r.pod<std::uint8_t>();
    a.buffer.set_size(n);
    sim.agents_.push_back(std::move(a));
  }
  sim.pending_founders_ = events_from_text(r.str());
  sim.events_ = events_from_text(r.str());
  return sim;
}

RunOutcome run(const SimulationConfig &config, const RunOptions &options) {
  Simulation sim(config);
  std::ofstream log;
  if (!options.event_log_path.empty()) {
    log.open(options.event_log_path);
    if (!log) throw std::runtime_error("cannot write event log '" + options.event_log_path + "'");
    sim.set_event_sink([&log](const EventRecord &e) { log << to_json_line(e) << '\n'; });
  }
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);

  while (sim.current_step() < config.max_steps) {
    sim.step();
    if (options.on_step) options.on_step(sim);
    if (sim.extinct()) break;
    if (!options.checkpoint_dir.empty() && config.checkpoint_every > 0 &&
        sim.current_step() % config.checkpoint_every == 0) {
      const auto file = std::filesystem::path(options.checkpoint_dir) /
                        ("checkpoint_" + std::to_string(sim.current_step()) + ".bin");
      sim.save_checkpoint(file.string());
    }
  }
  if (log.is_open()) {
    log.flush();
    if (!log) throw std::runtime_error("failed writing event log");
  }

  RunOutcome outcome;
  outcome.steps = sim.current_step();
  outcome.extinct = sim.extinct();
  outcome.metrics =
      compute_metrics(sim.events(), outcome.steps, outcome.extinct, options.metrics_stride);
  outcome.events = sim.events();
  return outcome;
}

}  // namespace rewevo
