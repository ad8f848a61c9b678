#include "rewevo/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace rewevo {
namespace {

constexpr std::array<FoodType, kFoodTypeCount> kAllFoods{FoodType::normal, FoodType::poor,
                                                         FoodType::poison};

FoodConfig default_food(FoodType type) {
  FoodConfig f;
  f.kind.tag = type;
  switch (type) {
    case FoodType::normal:
      f.kind.energy_gain = 1.0;
      f.capacity = 100;
      f.growth_rate = 0.02;
      break;
    case FoodType::poor:
      f.kind.energy_gain = 0.2;
      f.capacity = 30;
      f.growth_rate = 0.005;
      break;
    case FoodType::poison:
      f.kind.energy_gain = -0.6;
      f.capacity = 40;
      f.growth_rate = 0.005;
      break;
  }
  return f;
}

// Parsing state: every food type keeps its settings even while inactive so
// that `food.types` can be given after the per-type keys.
struct Context {
  SimulationConfig config;
  std::array<FoodConfig, kFoodTypeCount> foods;
  std::vector<FoodType> active;
  std::set<FoodType> touched;

  explicit Context(const SimulationConfig &base) : config(base) {
    for (auto t : kAllFoods) foods[static_cast<int>(t)] = default_food(t);
    for (const auto &f : base.arena.foods) {
      foods[static_cast<int>(f.kind.tag)] = f;
      active.push_back(f.kind.tag);
    }
  }

  bool is_active(FoodType t) const {
    return std::find(active.begin(), active.end(), t) != active.end();
  }

  SimulationConfig finish() const {
    for (auto t : touched)
      if (!is_active(t))
        throw ConfigError("food." + std::string(to_string(t)) +
                          ".* given but that type is not listed in food.types");
    SimulationConfig out = config;
    out.arena.foods.clear();
    for (auto t : active) out.arena.foods.push_back(foods[static_cast<int>(t)]);
    return out;
  }
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string &key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a finite number, got '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int parse_int(const std::string &key, std::string_view v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(const std::string &key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + std::string(v) + "'");
}

struct Entry {
  std::string key;
  std::function<std::optional<std::string>(const Context &)> get;
  std::function<void(Context &, const std::string &key, std::string_view)> set;
};

template <typename Access>
Entry real(std::string key, Access access) {
  return {std::move(key),
          [access](const Context &c) {
            return std::optional<std::string>(
                format_double(access(c.config)));
          },
          [access](Context &c, const std::string &k, std::string_view v) {
            access(c.config) = parse_double(k, v);
          }};
}

template <typename Access>
Entry integer(std::string key, Access access) {
  return {std::move(key),
          [access](const Context &c) {
            return std::optional<std::string>(
                std::to_string(access(c.config)));
          },
          [access](Context &c, const std::string &k, std::string_view v) {
            auto &field = access(c.config);
            field = parse_int<std::remove_reference_t<decltype(field)>>(k, v);
          }};
}

template <typename Access>
Entry boolean(std::string key, Access access) {
  return {std::move(key),
          [access](const Context &c) {
            return std::optional<std::string>(
                access(c.config) ? "true" : "false");
          },
          [access](Context &c, const std::string &k, std::string_view v) {
            access(c.config) = parse_bool(k, v);
          }};
}

std::string_view distribution_name(SpawnDistribution d) {
  switch (d) {
    case SpawnDistribution::uniform:
      return "uniform";
    case SpawnDistribution::centered_gaussian:
      return "centered";
    case SpawnDistribution::relocating_gaussian:
      return "relocating";
  }
  return "uniform";
}

std::vector<Entry> build_table() {
  std::vector<Entry> t;
  t.push_back(integer("seed", [](auto &c) -> auto & { return c.seed; }));
  t.push_back(integer("max_steps", [](auto &c) -> auto & { return c.max_steps; }));
  t.push_back(integer("initial_agents", [](auto &c) -> auto & { return c.initial_agents; }));
  t.push_back(real("initial_energy", [](auto &c) -> auto & { return c.initial_energy; }));
  t.push_back(integer("capacity", [](auto &c) -> auto & { return c.capacity; }));
  t.push_back(real("action_scale", [](auto &c) -> auto & { return c.action_scale; }));
  t.push_back(integer("checkpoint_every", [](auto &c) -> auto & { return c.checkpoint_every; }));
  t.push_back(boolean("log.eat_events", [](auto &c) -> auto & { return c.log_eat_events; }));
  t.push_back(boolean("log.update_events", [](auto &c) -> auto & { return c.log_update_events; }));

  t.push_back(real("arena.width", [](auto &c) -> auto & { return c.arena.width; }));
  t.push_back(real("arena.height", [](auto &c) -> auto & { return c.arena.height; }));
  t.push_back(real("arena.agent_radius", [](auto &c) -> auto & { return c.arena.agent_radius; }));
  t.push_back(real("arena.agent_mass", [](auto &c) -> auto & { return c.arena.agent_mass; }));
  t.push_back(real("arena.food_radius", [](auto &c) -> auto & { return c.arena.food_radius; }));
  t.push_back(integer("arena.n_rays", [](auto &c) -> auto & { return c.arena.n_rays; }));
  t.push_back(real("arena.sensor_arc_deg", [](auto &c) -> auto & { return c.arena.sensor_arc_deg; }));
  t.push_back(real("arena.sensor_range_fraction",
                   [](auto &c) -> auto & { return c.arena.sensor_range_fraction; }));
  t.push_back(real("arena.mouth_arc_deg", [](auto &c) -> auto & { return c.arena.mouth_arc_deg; }));
  t.push_back(real("arena.action_min", [](auto &c) -> auto & { return c.arena.action_min; }));
  t.push_back(real("arena.action_max", [](auto &c) -> auto & { return c.arena.action_max; }));
  t.push_back(real("arena.velocity_scale", [](auto &c) -> auto & { return c.arena.velocity_scale; }));
  t.push_back(real("arena.energy_scale", [](auto &c) -> auto & { return c.arena.energy_scale; }));

  t.push_back(integer("physics.velocity_iterations",
                      [](auto &c) -> auto & { return c.arena.solver.velocity_iterations; }));
  t.push_back(integer("physics.position_iterations",
                      [](auto &c) -> auto & { return c.arena.solver.position_iterations; }));
  t.push_back(integer("physics.correction_rounds",
                      [](auto &c) -> auto & { return c.arena.solver.correction_rounds; }));
  t.push_back(real("physics.penetration_slop",
                   [](auto &c) -> auto & { return c.arena.solver.penetration_slop; }));
  t.push_back(real("physics.position_correction_factor",
                   [](auto &c) -> auto & { return c.arena.solver.position_correction_factor; }));
  t.push_back(real("physics.restitution", [](auto &c) -> auto & { return c.arena.solver.restitution; }));
  t.push_back(real("physics.friction",
                   [](auto &c) -> auto & { return c.arena.solver.friction_coefficient; }));
  t.push_back(real("physics.linear_damping",
                   [](auto &c) -> auto & { return c.arena.solver.linear_damping; }));
  t.push_back(real("physics.angular_damping",
                   [](auto &c) -> auto & { return c.arena.solver.angular_damping; }));

  t.push_back(real("metabolism.e_basic", [](auto &c) -> auto & { return c.arena.metabolism.e_basic; }));
  t.push_back(real("metabolism.e_act", [](auto &c) -> auto & { return c.arena.metabolism.e_act; }));

  t.push_back({"spawn.distribution",
               [](const Context &c) {
                 return std::optional<std::string>(
                     std::string(distribution_name(c.config.arena.spawn.distribution)));
               },
               [](Context &c, const std::string &k, std::string_view v) {
                 auto &d = c.config.arena.spawn.distribution;
                 if (v == "uniform")
                   d = SpawnDistribution::uniform;
                 else if (v == "centered")
                   d = SpawnDistribution::centered_gaussian;
                 else if (v == "relocating")
                   d = SpawnDistribution::relocating_gaussian;
                 else
                   throw ConfigError(k + ": expected uniform, centered or relocating, got '" +
                                     std::string(v) + "'");
               }});
  t.push_back(real("spawn.std_fraction", [](auto &c) -> auto & { return c.arena.spawn.std_fraction; }));
  t.push_back(real("spawn.corner_inset", [](auto &c) -> auto & { return c.arena.spawn.corner_inset; }));
  t.push_back(
      integer("spawn.relocate_every", [](auto &c) -> auto & { return c.arena.spawn.relocate_every; }));
  t.push_back(
      integer("spawn.max_attempts", [](auto &c) -> auto & { return c.arena.spawn.max_attempts; }));

  t.push_back({"food.types",
               [](const Context &c) {
                 std::string s;
                 for (auto f : c.active) {
                   if (!s.empty()) s += ',';
                   s += to_string(f);
                 }
                 return std::optional<std::string>(s);
               },
               [](Context &c, const std::string &k, std::string_view v) {
                 std::vector<FoodType> types;
                 std::string item;
                 std::stringstream ss{std::string(v)};
                 while (std::getline(ss, item, ',')) {
                   const auto t = food_type_from_string(trim(item));
                   if (!t) throw ConfigError(k + ": unknown food type '" + trim(item) + "'");
                   if (std::find(types.begin(), types.end(), *t) != types.end())
                     throw ConfigError(k + ": food type '" + trim(item) + "' listed twice");
                   types.push_back(*t);
                 }
                 c.active = types;
               }});
  for (auto type : kAllFoods) {
    const std::string prefix = "food." + std::string(to_string(type)) + ".";
    const int i = static_cast<int>(type);
    auto food_entry = [&](const std::string &field, auto get, auto set) {
      t.push_back({prefix + field,
                   [type, get, i](const Context &c) -> std::optional<std::string> {
                     if (!c.is_active(type)) return std::nullopt;
                     return get(c.foods[i]);
                   },
                   [type, set, i](Context &c, const std::string &k, std::string_view v) {
                     set(c.foods[i], k, v);
                     c.touched.insert(type);
                   }});
    };
    food_entry(
        "energy", [](const FoodConfig &f) { return format_double(f.kind.energy_gain); },
        [](FoodConfig &f, const std::string &k, std::string_view v) {
          f.kind.energy_gain = parse_double(k, v);
        });
    food_entry(
        "capacity", [](const FoodConfig &f) { return std::to_string(f.capacity); },
        [](FoodConfig &f, const std::string &k, std::string_view v) {
          f.capacity = parse_int<int>(k, v);
        });
    food_entry(
        "growth_rate", [](const FoodConfig &f) { return format_double(f.growth_rate); },
        [](FoodConfig &f, const std::string &k, std::string_view v) {
          f.growth_rate = parse_double(k, v);
        });
    food_entry(
        "initial", [](const FoodConfig &f) { return format_double(f.initial); },
        [](FoodConfig &f, const std::string &k, std::string_view v) {
          f.initial = parse_double(k, v);
        });
  }

  t.push_back(real("hazard.kappa_h", [](auto &c) -> auto & { return c.hazard.kappa_h; }));
  t.push_back(real("hazard.alpha_e", [](auto &c) -> auto & { return c.hazard.alpha_e; }));
  t.push_back(real("hazard.beta_he", [](auto &c) -> auto & { return c.hazard.beta_he; }));
  t.push_back(real("hazard.alpha_a", [](auto &c) -> auto & { return c.hazard.alpha_a; }));
  t.push_back(real("hazard.beta_a", [](auto &c) -> auto & { return c.hazard.beta_a; }));
  t.push_back(real("birth.kappa_b", [](auto &c) -> auto & { return c.birth.kappa_b; }));
  t.push_back(real("birth.beta_b", [](auto &c) -> auto & { return c.birth.beta_b; }));
  t.push_back({"birth.orientation",
               [](const Context &c) {
                 return std::optional<std::string>(
                     c.config.birth.orientation == BirthOrientation::increasing ? "increasing"
                                                                                : "as_printed");
               },
               [](Context &c, const std::string &k, std::string_view v) {
                 if (v == "increasing")
                   c.config.birth.orientation = BirthOrientation::increasing;
                 else if (v == "as_printed")
                   c.config.birth.orientation = BirthOrientation::as_printed;
                 else
                   throw ConfigError(k + ": expected increasing or as_printed, got '" +
                                     std::string(v) + "'");
               }});
  t.push_back(real("mutation.cauchy_scale", [](auto &c) -> auto & { return c.mutation.cauchy_scale; }));
  t.push_back(real("mutation.clip_min", [](auto &c) -> auto & { return c.mutation.clip_min; }));
  t.push_back(real("mutation.clip_max", [](auto &c) -> auto & { return c.mutation.clip_max; }));
  t.push_back(
      real("reproduction.eta", [](auto &c) -> auto & { return c.reproduction.energy_share_ratio; }));
  t.push_back(real("reproduction.placement_std",
                   [](auto &c) -> auto & { return c.reproduction.placement_std; }));
  t.push_back(integer("reproduction.placement_attempts",
                      [](auto &c) -> auto & { return c.reproduction.placement_attempts; }));
  t.push_back(real("reward.c_act", [](auto &c) -> auto & { return c.reward.c_act; }));
  t.push_back(real("reward.init_std", [](auto &c) -> auto & { return c.reward.init_std; }));
  t.push_back(real("reward.clip_min", [](auto &c) -> auto & { return c.reward.clip_min; }));
  t.push_back(real("reward.clip_max", [](auto &c) -> auto & { return c.reward.clip_max; }));

  t.push_back(real("ppo.gamma", [](auto &c) -> auto & { return c.ppo.gamma; }));
  t.push_back(real("ppo.gae_lambda", [](auto &c) -> auto & { return c.ppo.gae_lambda; }));
  t.push_back(real("ppo.clip", [](auto &c) -> auto & { return c.ppo.clip; }));
  t.push_back(integer("ppo.epochs", [](auto &c) -> auto & { return c.ppo.epochs; }));
  t.push_back(integer("ppo.minibatch", [](auto &c) -> auto & { return c.ppo.minibatch; }));
  t.push_back(real("ppo.entropy_coeff", [](auto &c) -> auto & { return c.ppo.entropy_coeff; }));
  t.push_back(real("ppo.value_coeff", [](auto &c) -> auto & { return c.ppo.value_coeff; }));
  t.push_back(real("ppo.lr", [](auto &c) -> auto & { return c.ppo.lr; }));
  t.push_back(real("ppo.adam_eps", [](auto &c) -> auto & { return c.ppo.adam_eps; }));
  t.push_back(real("ppo.adam_beta1", [](auto &c) -> auto & { return c.ppo.adam_beta1; }));
  t.push_back(real("ppo.adam_beta2", [](auto &c) -> auto & { return c.ppo.adam_beta2; }));
  t.push_back(integer("ppo.rollout_steps", [](auto &c) -> auto & { return c.ppo.rollout_steps; }));
  t.push_back(integer("ppo.hidden", [](auto &c) -> auto & { return c.ppo.hidden; }));
  return t;
}

const std::vector<Entry> &table() {
  static const std::vector<Entry> t = build_table();
  return t;
}

const Entry *lookup(const std::string &key) {
  for (const auto &e : table())
    if (e.key == key) return &e;
  return nullptr;
}

SimulationConfig apply_pairs(const std::vector<std::pair<std::string, std::string>> &pairs,
                             const SimulationConfig &base) {
  Context ctx(base);
  std::set<std::string> seen;
  // food.types decides which per-type keys are legal, so it goes first.
  for (const auto &[k, v] : pairs)
    if (k == "food.types") lookup(k)->set(ctx, k, v);
  for (const auto &[k, v] : pairs) {
    const Entry *e = lookup(k);
    if (!e) throw ConfigError("unknown config key '" + k + "'");
    if (!seen.insert(k).second) throw ConfigError("config key '" + k + "' given twice");
    if (k != "food.types") e->set(ctx, k, v);
  }
  return ctx.finish();
}

void require(bool ok, const std::string &message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"baseline", "small", "large", "centered", "relocation", "poor", "poison",
          "random-walk-null"};
}

SimulationConfig preset_config(std::string_view name) {
  SimulationConfig c;
  c.arena.foods = {default_food(FoodType::normal)};
  if (name == "baseline" || name == "random-walk-null") return c;
  if (name == "small") {
    c.arena.width = 360.0;
    c.arena.height = 360.0;
    return c;
  }
  if (name == "large") {
    c.arena.width = 480.0;
    c.arena.height = 480.0;
    return c;
  }
  if (name == "centered") {
    c.arena.spawn.distribution = SpawnDistribution::centered_gaussian;
    return c;
  }
  if (name == "relocation") {
    c.arena.spawn.distribution = SpawnDistribution::relocating_gaussian;
    return c;
  }
  if (name == "poor" || name == "poison") {
    const bool poor = name == "poor";
    FoodConfig normal = default_food(FoodType::normal);
    FoodConfig extra = default_food(poor ? FoodType::poor : FoodType::poison);
    normal.capacity = poor ? 90 : 120;
    extra.capacity = poor ? 30 : 40;
    // Total growth 0.02 split in proportion to capacity.
    normal.growth_rate = 0.015;
    extra.growth_rate = 0.005;
    c.arena.foods = {normal, extra};
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

SimulationConfig apply_config_text(std::string_view text, const SimulationConfig &base) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    pairs.emplace_back(trim(std::string_view(content).substr(0, eq)),
                       trim(std::string_view(content).substr(eq + 1)));
  }
  return apply_pairs(pairs, base);
}

SimulationConfig apply_overrides(const std::vector<std::string> &overrides,
                                 const SimulationConfig &base) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto &o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    pairs.emplace_back(trim(std::string_view(o).substr(0, eq)),
                       trim(std::string_view(o).substr(eq + 1)));
  }
  return apply_pairs(pairs, base);
}

void validate(const SimulationConfig &c) {
  const auto &a = c.arena;
  require(a.width > 0 && a.height > 0, "arena.width and arena.height must be positive");
  require(a.agent_radius > 0, "arena.agent_radius must be positive");
  require(a.agent_mass > 0, "arena.agent_mass must be positive");
  require(a.food_radius > 0, "arena.food_radius must be positive");
  require(2 * a.agent_radius < std::min(a.width, a.height), "agents do not fit in the arena");
  require(a.n_rays >= 1, "arena.n_rays must be at least 1");
  require(a.sensor_arc_deg > 0 && a.sensor_arc_deg <= 360, "arena.sensor_arc_deg must be in (0, 360]");
  require(a.sensor_range_fraction > 0, "arena.sensor_range_fraction must be positive");
  require(a.mouth_arc_deg >= 0 && a.mouth_arc_deg <= 360, "arena.mouth_arc_deg must be in [0, 360]");
  require(a.action_min < a.action_max, "arena.action_min must be below arena.action_max");
  require(a.velocity_scale > 0 && a.energy_scale > 0, "observation scales must be positive");

  const auto &s = a.solver;
  require(s.velocity_iterations >= 1 && s.position_iterations >= 1 && s.correction_rounds >= 1,
          "physics iterations must be at least 1");
  require(s.penetration_slop >= 0, "physics.penetration_slop must be non-negative");
  require(s.position_correction_factor > 0 && s.position_correction_factor <= 1,
          "physics.position_correction_factor must be in (0, 1]");
  require(s.restitution >= 0 && s.restitution <= 1, "physics.restitution must be in [0, 1]");
  require(s.friction_coefficient >= 0, "physics.friction must be non-negative");
  require(s.linear_damping >= 0 && s.angular_damping >= 0, "physics damping must be non-negative");

  require(a.metabolism.e_basic > 0, "metabolism.e_basic must be positive");
  require(a.metabolism.e_act > 0, "metabolism.e_act must be positive");

  require(a.spawn.std_fraction > 0, "spawn.std_fraction must be positive");
  require(a.spawn.corner_inset >= 0 && a.spawn.corner_inset <= 0.5,
          "spawn.corner_inset must be in [0, 0.5]");
  require(a.spawn.relocate_every >= 1, "spawn.relocate_every must be at least 1");
  require(a.spawn.max_attempts >= 1, "spawn.max_attempts must be at least 1");

  require(!a.foods.empty(), "food.types must list at least one food type");
  bool poor = false, poison = false;
  for (const auto &f : a.foods) {
    const std::string name = "food." + std::string(to_string(f.kind.tag));
    require(f.capacity >= 0, name + ".capacity must be non-negative");
    require(f.growth_rate >= 0, name + ".growth_rate must be non-negative");
    require(f.initial <= f.capacity, name + ".initial must not exceed capacity");
    poor |= f.kind.tag == FoodType::poor;
    poison |= f.kind.tag == FoodType::poison;
  }
  require(!(poor && poison), "food.types may contain poor or poison, not both");

  const auto &h = c.hazard;
  require(h.kappa_h > 0 && h.alpha_e > 0 && h.beta_he > 0 && h.alpha_a > 0 && h.beta_a > 0,
          "hazard parameters must be positive");
  require(c.birth.kappa_b > 0 && c.birth.kappa_b <= 1, "birth.kappa_b must be in (0, 1]");
  require(c.birth.beta_b > 0, "birth.beta_b must be positive");
  require(c.mutation.cauchy_scale > 0, "mutation.cauchy_scale must be positive");
  require(c.mutation.clip_min < c.mutation.clip_max, "mutation.clip_min must be below clip_max");
  const auto &r = c.reproduction;
  require(r.energy_share_ratio >= 0 && r.energy_share_ratio <= 1, "reproduction.eta must be in [0, 1]");
  require(r.placement_std > 0, "reproduction.placement_std must be positive");
  require(r.placement_attempts >= 1, "reproduction.placement_attempts must be at least 1");
  require(c.reward.c_act > 0, "reward.c_act must be positive");
  require(c.reward.init_std >= 0, "reward.init_std must be non-negative");
  require(c.reward.clip_min < c.reward.clip_max, "reward.clip_min must be below clip_max");

  const auto &p = c.ppo;
  require(p.gamma > 0 && p.gamma <= 1, "ppo.gamma must be in (0, 1]");
  require(p.gae_lambda > 0 && p.gae_lambda <= 1, "ppo.gae_lambda must be in (0, 1]");
  require(p.clip > 0, "ppo.clip must be positive");
  require(p.epochs >= 1 && p.minibatch >= 1 && p.rollout_steps >= 1 && p.hidden >= 1,
          "ppo epochs, minibatch, rollout_steps and hidden must be at least 1");
  require(p.entropy_coeff >= 0 && p.value_coeff >= 0, "ppo coefficients must be non-negative");
  require(p.lr > 0 && p.adam_eps > 0, "ppo.lr and ppo.adam_eps must be positive");
  require(p.adam_beta1 >= 0 && p.adam_beta1 < 1 && p.adam_beta2 >= 0 && p.adam_beta2 < 1,
          "Adam betas must be in [0, 1)");

  require(c.action_scale > 0, "action_scale must be positive");
  require(c.capacity >= 1, "capacity must be at least 1");
  require(c.initial_agents >= 0 && c.initial_agents <= c.capacity,
          "initial_agents must be in [0, capacity]");
  require(c.max_steps >= 0, "max_steps must be non-negative");
  require(c.checkpoint_every >= 0, "checkpoint_every must be non-negative");
}

std::string config_to_text(const SimulationConfig &config) {
  const Context ctx(config);
  std::string out;
  for (const auto &e : table()) {
    const auto v = e.get(ctx);
    if (v) out += e.key + " = " + *v + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto &e : table()) keys.push_back(e.key);
  return keys;
}

SimulationConfig load_config(const std::optional<std::string> &path, std::string_view preset,
                             const std::vector<std::string> &overrides) {
  SimulationConfig c = preset_config(preset);
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    c = apply_config_text(buf.str(), c);
  }
  c = apply_overrides(overrides, c);
  validate(c);
  return c;
}

bool operator==(const SimulationConfig &a, const SimulationConfig &b) {
  return config_to_text(a) == config_to_text(b);
}

}  // namespace rewevo
