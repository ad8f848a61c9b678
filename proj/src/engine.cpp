#include "rewevo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace rewevo {
namespace {

using ordered_json = nlohmann::ordered_json;

std::uint64_t key(long v) { return static_cast<std::uint64_t>(v); }
std::uint64_t key(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
std::uint64_t key(Stream s) { return static_cast<std::uint64_t>(s); }

ordered_json weights_json(const RewardParams &w) {
  ordered_json j;
  j["w_food"] = w.w_food;
  j["w_act"] = w.w_act;
  if (w.w_poor) j["w_poor"] = *w.w_poor;
  if (w.w_poison) j["w_poison"] = *w.w_poison;
  return j;
}

double number_or_nan(const ordered_json &j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::birth:
      return "birth";
    case EventKind::death:
      return "death";
    case EventKind::eat:
      return "eat";
    case EventKind::update:
      return "update";
    case EventKind::relocation:
      return "relocation";
  }
  return "unknown";
}

std::string to_json_line(const EventRecord &e) {
  ordered_json j;
  j["step"] = e.step;
  j["kind"] = to_string(e.kind);
  switch (e.kind) {
    case EventKind::birth:
      j["agent"] = e.agent_id;
      j["parent"] = e.parent_id;
      j["birth_step"] = e.birth_step;
      j["energy"] = e.energy;
      j["weights"] = weights_json(e.weights);
      break;
    case EventKind::death:
      j["agent"] = e.agent_id;
      j["age"] = e.age;
      j["energy"] = e.energy;
      break;
    case EventKind::eat:
      j["agent"] = e.agent_id;
      j["food_id"] = e.food_id;
      j["food"] = to_string(e.food);
      break;
    case EventKind::update:
      j["agent"] = e.agent_id;
      j["policy_loss"] = e.policy_loss;
      j["value_loss"] = e.value_loss;
      j["approx_kl"] = e.approx_kl;
      j["aborted"] = e.aborted;
      break;
    case EventKind::relocation:
      j["corner"] = e.corner;
      j["total_eaten"] = e.total_eaten;
      break;
  }
  return j.dump();
}

EventRecord event_from_json_line(const std::string &line) {
  const auto j = ordered_json::parse(line);
  EventRecord e;
  e.step = j.at("step").get<long>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "birth") {
    e.kind = EventKind::birth;
    e.agent_id = j.at("agent").get<int>();
    e.parent_id = j.at("parent").get<int>();
    e.birth_step = j.at("birth_step").get<long>();
    e.energy = j.at("energy").get<double>();
    const auto &w = j.at("weights");
    e.weights.w_food = w.at("w_food").get<double>();
    e.weights.w_act = w.at("w_act").get<double>();
    if (w.contains("w_poor")) e.weights.w_poor = w.at("w_poor").get<double>();
    if (w.contains("w_poison")) e.weights.w_poison = w.at("w_poison").get<double>();
  } else if (kind == "death") {
    e.kind = EventKind::death;
    e.agent_id = j.at("agent").get<int>();
    e.age = j.at("age").get<long>();
    e.energy = j.at("energy").get<double>();
  } else if (kind == "eat") {
    e.kind = EventKind::eat;
    e.agent_id = j.at("agent").get<int>();
    e.food_id = j.at("food_id").get<int>();
    const auto food = food_type_from_string(j.at("food").get<std::string>());
    if (!food) throw std::runtime_error("unknown food kind in event log");
    e.food = *food;
  } else if (kind == "update") {
    e.kind = EventKind::update;
    e.agent_id = j.at("agent").get<int>();
    e.policy_loss = number_or_nan(j.at("policy_loss"));
    e.value_loss = number_or_nan(j.at("value_loss"));
    e.approx_kl = number_or_nan(j.at("approx_kl"));
    e.aborted = j.at("aborted").get<bool>();
  } else if (kind == "relocation") {
    e.kind = EventKind::relocation;
    e.corner = j.at("corner").get<int>();
    e.total_eaten = j.at("total_eaten").get<long>();
  } else {
    throw std::runtime_error("unknown event kind: " + kind);
  }
  return e;
}

void write_event_log(std::ostream &out, const std::vector<EventRecord> &events) {
  for (const auto &e : events) out << to_json_line(e) << '\n';
}

std::vector<EventRecord> read_event_log(std::istream &in) {
  std::vector<EventRecord> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(event_from_json_line(line));
  }
  return events;
}

// ---------------------------------------------------------------------------

namespace {

Arena make_arena(const SimulationConfig &config) {
  Rng rng = Rng::derive(config.seed, {key(Stream::food_init)});
  return Arena(config.arena, rng);
}

}  // namespace

Simulation::Simulation(SimulationConfig config)
    : config_(std::move(config)), arena_(make_arena(config_)) {
  place_founders();
}

Simulation::Simulation(SimulationConfig config, Restore)
    : config_(std::move(config)), arena_(make_arena(config_)) {}

const AgentState *Simulation::agent(int id) const {
  const auto it = std::lower_bound(agents_.begin(), agents_.end(), id,
                                   [](const AgentState &a, int v) { return a.id < v; });
  return it != agents_.end() && it->id == id ? &*it : nullptr;
}

AgentState *Simulation::find(int id) { return const_cast<AgentState *>(agent(id)); }

double Simulation::total_energy() const {
  double sum = 0.0;
  for (const auto &a : agents_) sum += a.energy;
  return sum;
}

void Simulation::emit(EventRecord event) {
  events_.push_back(event);
  if (sink_) sink_(events_.back());
}

void Simulation::place_founders() {
  Rng rng = Rng::derive(config_.seed, {key(Stream::founders)});
  const bool poor = arena_.has_food_type(FoodType::poor);
  const bool poison = arena_.has_food_type(FoodType::poison);
  for (int i = 0; i < config_.initial_agents; ++i) {
    const auto pos = arena_.random_free_position(rng, config_.arena.agent_radius, 1000);
    if (!pos) throw std::runtime_error("no free position for founder agent");
    const double orientation = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const auto weights = sample_initial_weights(rng, config_.reward, poor, poison);
    // Founder births are reported when the first step runs.
    pending_founders_.push_back(
        create_agent(*pos, orientation, config_.initial_energy, weights, -1, 0));
  }
}

EventRecord Simulation::create_agent(Vec2 position, double orientation, double energy,
                                     const RewardParams &weights, int parent_id,
                                     long birth_step) {
  AgentState a;
  a.id = next_id_++;
  a.parent_id = parent_id;
  a.birth_step = birth_step;
  a.energy = energy;
  a.reward = weights;
  Rng init = Rng::derive(config_.seed, {key(Stream::child_policy), key(a.id)});
  a.learner = rl::init_policy(init, arena_.observation_dim(), config_.ppo.hidden);
  a.buffer = rl::RolloutBuffer(arena_.observation_dim(), config_.ppo.rollout_steps);
  arena_.add_agent(a.id, position, orientation);

  EventRecord e;
  e.step = step_;
  e.kind = EventKind::birth;
  e.agent_id = a.id;
  e.parent_id = parent_id;
  e.birth_step = birth_step;
  e.energy = energy;
  e.weights = weights;
  agents_.push_back(std::move(a));
  return e;
}

int Simulation::spawn_agent(Vec2 position, double orientation, double energy,
                            const RewardParams &weights, int parent_id, long birth_step) {
  auto e = create_agent(position, orientation, energy, weights, parent_id, birth_step);
  emit(e);
  return e.agent_id;
}

std::size_t Simulation::step() {
  const std::size_t first_event = events_.size();
  const long s = step_;
  const std::uint64_t root = config_.seed;
  for (auto &e : pending_founders_) emit(e);
  pending_founders_.clear();

  StepLedger ledger;
  ledger.step = s;
  ledger.energy_before = total_energy();

  // Observe, learn, act.
  std::vector<double> energies;
  energies.reserve(agents_.size());
  for (const auto &a : agents_) energies.push_back(a.energy);
  const auto observations = arena_.observe_all(energies);
  std::vector<Vec2> clipped(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto &a = agents_[i];
    const auto x = observations[i].to_vector(config_.arena.velocity_scale,
                                             config_.arena.energy_scale);
    if (a.buffer.full()) {
      const double bootstrap = rl::policy_forward(a.learner.params, x).value;
      Rng rng = Rng::derive(root, {key(Stream::learner), key(s), key(a.id)});
      const auto stats =
          rl::ppo_update(a.learner.params, a.learner.adam, a.buffer, bootstrap, config_.ppo, rng);
      a.buffer.clear();
      if (config_.log_update_events) {
        EventRecord e;
        e.step = s;
        e.kind = EventKind::update;
        e.agent_id = a.id;
        e.policy_loss = stats.policy_loss;
        e.value_loss = stats.value_loss;
        e.approx_kl = stats.approx_kl;
        e.aborted = stats.aborted;
        emit(e);
      }
    }
    const auto out = rl::policy_forward(a.learner.params, x);
    Rng rng = Rng::derive(root, {key(Stream::action), key(s), key(a.id)});
    const auto sample = rl::sample_action(out.mean, out.stddev, rng);
    a.buffer.add(x, sample.action, sample.log_prob, out.value);
    const Vec2 force{config_.action_scale * sample.action(0),
                     config_.action_scale * sample.action(1)};
    clipped[i] = arena_.apply_motor_action(a.id, force);
  }

  arena_.step_physics();

  // Eating and food regrowth.
  const auto eats = arena_.process_eating();
  std::vector<EatenCounts> eaten(agents_.size(), EatenCounts{});
  const auto foods = arena_.foods();
  std::vector<int> eaten_per_population(foods.size(), 0);
  for (const auto &ev : eats) {
    const auto it = std::lower_bound(agents_.begin(), agents_.end(), ev.agent_id,
                                     [](const AgentState &a, int v) { return a.id < v; });
    const auto i = static_cast<std::size_t>(it - agents_.begin());
    ++eaten[i][static_cast<int>(ev.kind)];
    ++it->eaten;
    for (std::size_t p = 0; p < foods.size(); ++p)
      if (foods[p].kind.tag == ev.kind) ++eaten_per_population[p];
    if (config_.log_eat_events) {
      EventRecord e;
      e.step = s;
      e.kind = EventKind::eat;
      e.agent_id = ev.agent_id;
      e.food_id = ev.food_id;
      e.food = ev.kind;
      emit(e);
    }
  }
  Rng food_rng = Rng::derive(root, {key(Stream::food), key(s)});
  for (std::size_t p = 0; p < foods.size(); ++p)
    arena_.regenerate_food(static_cast<int>(p), eaten_per_population[p], food_rng);
  if (!eats.empty() && arena_.record_eaten(static_cast<int>(eats.size()))) {
    EventRecord e;
    e.step = s;
    e.kind = EventKind::relocation;
    e.corner = relocation_corner(arena_.total_eaten(), config_.arena.spawn.relocate_every);
    e.total_eaten = arena_.total_eaten();
    emit(e);
  }

  // Metabolism and rewards.
  std::vector<FoodKind> kinds;
  for (const auto &pop : arena_.foods()) kinds.push_back(pop.kind);
  const auto &met = config_.arena.metabolism;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    auto &a = agents_[i];
    const double norm = length(clipped[i]);
    double gain = 0.0;
    for (const auto &k : kinds) gain += k.energy_gain * eaten[i][static_cast<int>(k.tag)];
    ledger.food_inflow += gain;
    ledger.metabolic_outflow += met.e_act * norm + met.e_basic;
    a.energy = metabolize(a.energy, eaten[i], clipped[i], met, kinds);
    a.buffer.set_last_reward(compute_reward(a.reward, eaten[i], norm, config_.reward));
  }

  // Birth, then death, for every agent alive at the start of this phase.
  std::vector<int> ids;
  ids.reserve(agents_.size());
  for (const auto &a : agents_) ids.push_back(a.id);
  const double radius = config_.arena.agent_radius;
  for (const int id : ids) {
    AgentState *a = find(id);
    Rng birth_rng = Rng::derive(root, {key(Stream::birth), key(s), key(id)});
    const double u_birth = birth_rng.uniform();
    if (static_cast<int>(agents_.size()) < config_.capacity &&
        u_birth < birth_probability(a->energy, config_.birth)) {
      Rng place_rng = Rng::derive(root, {key(Stream::placement), key(s), key(id)});
      const Vec2 parent_pos = arena_.agent_body(id)->center;
      const auto spot = try_place_child(
          parent_pos, config_.arena.width,
          [&](Vec2 p) { return arena_.is_free(p, radius); }, place_rng, config_.reproduction);
      if (spot) {
        const auto split = split_energy(a->energy, config_.reproduction.energy_share_ratio);
        ledger.parent_deduction += a->energy - split.parent;
        ledger.child_endowment += split.child;
        a->energy = split.parent;
        Rng mutation_rng = Rng::derive(root, {key(Stream::mutation), key(next_id_)});
        const auto weights = mutate_weights(a->reward, mutation_rng, config_.mutation);
        const double orientation = place_rng.uniform(-std::numbers::pi, std::numbers::pi);
        spawn_agent(*spot, orientation, split.child, weights, id, s + 1);
        a = find(id);
      }
    }
    Rng death_rng = Rng::derive(root, {key(Stream::death), key(s), key(id)});
    if (death_rng.uniform() < hazard(static_cast<double>(a->age(s)), a->energy, config_.hazard)) {
      ledger.death_removal += a->energy;
      EventRecord e;
      e.step = s;
      e.kind = EventKind::death;
      e.agent_id = id;
      e.age = a->age(s);
      e.energy = a->energy;
      emit(e);
      arena_.remove_agent(id);
      agents_.erase(agents_.begin() + (a - agents_.data()));
    }
  }

  ledger.energy_after = total_energy();
  ledger_ = ledger;
  ++step_;
  return events_.size() - first_event;
}

// ---------------------------------------------------------------------------

Metrics compute_metrics(const std::vector<EventRecord> &events, long total_steps, bool extinct,
                        long stride) {
  if (stride <= 0) throw std::invalid_argument("metrics stride must be positive");
  Metrics m;
  m.steps = total_steps;
  m.extinct = extinct;

  struct Life {
    long birth_step = 0;
    long death_step = -1;
    RewardParams weights;
  };
  std::map<int, Life> lives;
  double age_sum = 0.0;
  for (const auto &e : events) {
    switch (e.kind) {
      case EventKind::birth:
        lives[e.agent_id] = {e.birth_step, -1, e.weights};
        if (e.parent_id < 0)
          ++m.founders;
        else
          ++m.births;
        break;
      case EventKind::death:
        lives[e.agent_id].death_step = e.step;
        ++m.deaths;
        age_sum += static_cast<double>(e.age);
        break;
      case EventKind::eat:
        ++m.total_eaten;
        ++m.eaten_by_kind[static_cast<int>(e.food)];
        break;
      default:
        break;
    }
  }
  if (m.deaths > 0) m.average_lifetime = age_sum / static_cast<double>(m.deaths);

  const long last = total_steps - 1;
  for (long s = 0; s <= last; s += stride) m.sample_steps.push_back(s);
  const std::size_t n = m.sample_steps.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sum_food(n, 0.0), sum_act(n, 0.0), sum_extra(n, 0.0);
  std::vector<int> extra_count(n, 0);
  m.population.assign(n, 0);

  for (const auto &[id, life] : lives) {
    const long end = life.death_step >= 0 ? life.death_step : last;
    if (end < life.birth_step) continue;
    m.agent_steps += end - life.birth_step + 1;
    const long first_sample = (life.birth_step + stride - 1) / stride;
    for (long k = first_sample; k < static_cast<long>(n) && k * stride <= end; ++k) {
      ++m.population[k];
      sum_food[k] += life.weights.w_food;
      sum_act[k] += life.weights.w_act;
      const auto extra = life.weights.w_poor ? life.weights.w_poor : life.weights.w_poison;
      if (extra) {
        sum_extra[k] += *extra;
        ++extra_count[k];
      }
    }
  }
  m.mean_w_food.resize(n);
  m.mean_w_act.resize(n);
  m.mean_w_extra.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = m.population[k];
    m.mean_w_food[k] = c > 0 ? sum_food[k] / c : nan;
    m.mean_w_act[k] = c > 0 ? sum_act[k] / c : nan;
    m.mean_w_extra[k] = extra_count[k] > 0 ? sum_extra[k] / extra_count[k] : nan;
  }
  if (m.agent_steps > 0) {
    m.consumption_per_step = static_cast<double>(m.total_eaten) / m.agent_steps;
    for (int k = 0; k < kFoodTypeCount; ++k)
      m.consumption_by_kind[k] = static_cast<double>(m.eaten_by_kind[k]) / m.agent_steps;
  }
  return m;
}

}  // namespace rewevo
