#include "rewevo/arena.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rewevo {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

ObjectKind object_kind(FoodType type) {
  switch (type) {
    case FoodType::normal:
      return ObjectKind::food_normal;
    case FoodType::poor:
      return ObjectKind::food_poor;
    case FoodType::poison:
      return ObjectKind::food_poison;
  }
  return ObjectKind::food_normal;
}

double next_food_budget(double budget, double growth_rate, int eaten, int capacity) {
  return std::min(budget + growth_rate - static_cast<double>(eaten), static_cast<double>(capacity));
}

Vec2 clip_action(Vec2 action, double lo, double hi) {
  return {std::clamp(action.x, lo, hi), std::clamp(action.y, lo, hi)};
}

double relative_bearing(Vec2 center, double heading, Vec2 point) {
  const Vec2 h = unit_from_angle(heading);
  const Vec2 d = point - center;
  return std::atan2(cross(h, d), dot(h, d));
}

bool in_mouth(double bearing, double mouth_arc_deg) {
  return std::abs(bearing) <= 0.5 * mouth_arc_deg * kDeg;
}

int collision_sector(double bearing) {
  const double b = wrap_angle(bearing);
  const int k = static_cast<int>(std::floor((b + std::numbers::pi) / (60.0 * kDeg)));
  return std::clamp(k, 0, kCollisionSectors - 1);
}

double metabolize(double energy, const EatenCounts &eaten, Vec2 clipped_action,
                  const MetabolicParams &params, std::span<const FoodKind> kinds) {
  double gain = 0.0;
  for (const auto &k : kinds) gain += k.energy_gain * eaten[static_cast<int>(k.tag)];
  return energy + gain - params.e_act * length(clipped_action) - params.e_basic;
}

int relocation_corner(long total_eaten, int every) {
  if (every <= 0) return 0;
  return static_cast<int>((total_eaten / every) % 4);
}

Vec2 corner_center(int corner, double width, double height, double inset) {
  const double lo_x = inset * width, hi_x = (1.0 - inset) * width;
  const double lo_y = inset * height, hi_y = (1.0 - inset) * height;
  switch (corner % 4) {
    case 0:
      return {lo_x, hi_y};
    case 1:
      return {hi_x, hi_y};
    case 2:
      return {hi_x, lo_y};
    default:
      return {lo_x, lo_y};
  }
}

std::vector<double> Observation::to_vector(double velocity_scale, double energy_scale) const {
  const std::size_t k = kinds.size();
  std::vector<double> v;
  v.reserve(range_readings.size() * (1 + k) + kCollisionSectors * k + 4);
  for (const auto &r : range_readings) {
    v.push_back(r.distance);
    const std::size_t at = v.size();
    v.resize(at + k, 0.0);
    if (r.kind) {
      const auto slot = std::find(kinds.begin(), kinds.end(), *r.kind) - kinds.begin();
      v[at + static_cast<std::size_t>(slot)] = 1.0;
    }
  }
  for (const auto &sector : collision_sectors)
    for (auto flag : sector) v.push_back(flag);
  v.push_back(self_angle / std::numbers::pi);
  v.push_back(self_velocity.x / velocity_scale);
  v.push_back(self_velocity.y / velocity_scale);
  v.push_back(energy / energy_scale);
  return v;
}

struct Arena::SensingIndex {
  std::vector<physics::Body> bodies;  // agents first (same indices), then foods
  physics::SpatialGrid far;
  physics::SpatialGrid near;
  double max_radius;

  SensingIndex(std::vector<physics::Body> b, double far_cell, double near_cell, double rmax)
      : bodies(std::move(b)),
        far(bodies, far_cell),
        near(bodies, near_cell),
        max_radius(rmax) {}
};

Arena::Arena(ArenaConfig config, Rng &rng) : config_(std::move(config)) {
  const double w = config_.width, h = config_.height;
  if (w <= 0.0 || h <= 0.0) throw std::invalid_argument("arena size must be positive");
  walls_ = {{{0.0, 0.0}, {w, 0.0}}, {{w, 0.0}, {w, h}}, {{w, h}, {0.0, h}}, {{0.0, h}, {0.0, 0.0}}};

  sensed_kinds_ = {ObjectKind::agent, ObjectKind::wall};
  for (const auto &fc : config_.foods) {
    const auto k = object_kind(fc.kind.tag);
    if (std::find(sensed_kinds_.begin(), sensed_kinds_.end(), k) != sensed_kinds_.end())
      throw std::invalid_argument("duplicate food kind");
    sensed_kinds_.push_back(k);
  }

  for (const auto &fc : config_.foods) {
    FoodPopulation pop;
    pop.kind = fc.kind;
    pop.capacity = fc.capacity;
    pop.growth_rate = fc.growth_rate;
    pop.budget = fc.initial < 0.0 ? static_cast<double>(fc.capacity) : fc.initial;
    foods_.push_back(std::move(pop));
  }
  for (auto &pop : foods_) {
    const int target = static_cast<int>(std::floor(pop.budget));
    for (int i = 0; i < target; ++i) {
      auto pos = sample_food_position(rng);
      if (!pos) break;
      pop.items.push_back({next_food_id_++, *pos});
    }
  }
}

int Arena::kind_slot(ObjectKind kind) const {
  const auto it = std::find(sensed_kinds_.begin(), sensed_kinds_.end(), kind);
  return static_cast<int>(it - sensed_kinds_.begin());
}

int Arena::observation_dim() const {
  const int k = static_cast<int>(sensed_kinds_.size());
  return config_.n_rays * (1 + k) + kCollisionSectors * k + 4;
}

bool Arena::has_food_type(FoodType type) const {
  return std::any_of(foods_.begin(), foods_.end(),
                     [&](const FoodPopulation &p) { return p.kind.tag == type; });
}

int Arena::index_of(int agent_id) const {
  const auto it = std::lower_bound(bodies_.begin(), bodies_.end(), agent_id,
                                   [](const physics::Body &b, int id) { return b.id < id; });
  if (it == bodies_.end() || it->id != agent_id) return -1;
  return static_cast<int>(it - bodies_.begin());
}

void Arena::add_agent(int agent_id, Vec2 position, double orientation) {
  physics::Body b;
  b.id = agent_id;
  b.center = position;
  b.orientation = wrap_angle(orientation);
  b.radius = config_.agent_radius;
  b.inverse_mass = 1.0 / config_.agent_mass;
  b.inverse_inertia = 1.0 / (0.5 * config_.agent_mass * b.radius * b.radius);
  b.tag = static_cast<int>(ObjectKind::agent);
  const auto it = std::lower_bound(bodies_.begin(), bodies_.end(), agent_id,
                                   [](const physics::Body &x, int id) { return x.id < id; });
  if (it != bodies_.end() && it->id == agent_id) throw std::logic_error("duplicate agent id");
  const auto at = it - bodies_.begin();
  bodies_.insert(it, b);
  wrenches_.insert(wrenches_.begin() + at, physics::Wrench{});
}

void Arena::remove_agent(int agent_id) {
  const int i = index_of(agent_id);
  if (i < 0) return;
  bodies_.erase(bodies_.begin() + i);
  wrenches_.erase(wrenches_.begin() + i);
}

const physics::Body *Arena::agent_body(int agent_id) const {
  const int i = index_of(agent_id);
  return i < 0 ? nullptr : &bodies_[i];
}

physics::Body *Arena::mutable_agent_body(int agent_id) {
  const int i = index_of(agent_id);
  return i < 0 ? nullptr : &bodies_[i];
}

bool Arena::is_free(Vec2 p, double radius) const {
  if (p.x < radius || p.x > config_.width - radius || p.y < radius ||
      p.y > config_.height - radius)
    return false;
  for (const auto &b : bodies_) {
    const double r = radius + b.radius;
    if (length_squared(b.center - p) < r * r) return false;
  }
  const double rf = radius + config_.food_radius;
  for (const auto &pop : foods_)
    for (const auto &item : pop.items)
      if (length_squared(item.position - p) < rf * rf) return false;
  return true;
}

std::optional<Vec2> Arena::random_free_position(Rng &rng, double radius, int attempts) const {
  for (int i = 0; i < attempts; ++i) {
    const Vec2 p{rng.uniform(radius, config_.width - radius),
                 rng.uniform(radius, config_.height - radius)};
    if (is_free(p, radius)) return p;
  }
  return std::nullopt;
}

Vec2 Arena::spawn_center() const {
  switch (config_.spawn.distribution) {
    case SpawnDistribution::relocating_gaussian:
      return corner_center(relocation_corner(total_eaten_, config_.spawn.relocate_every),
                           config_.width, config_.height, config_.spawn.corner_inset);
    default:
      return {0.5 * config_.width, 0.5 * config_.height};
  }
}

std::optional<Vec2> Arena::sample_food_position(Rng &rng) const {
  const double r = config_.food_radius;
  for (int i = 0; i < config_.spawn.max_attempts; ++i) {
    Vec2 p;
    if (config_.spawn.distribution == SpawnDistribution::uniform) {
      p = {rng.uniform(r, config_.width - r), rng.uniform(r, config_.height - r)};
    } else {
      const double s = config_.spawn.std_fraction * config_.width;
      const Vec2 c = spawn_center();
      const double dx = rng.normal(0.0, s);
      const double dy = rng.normal(0.0, s);
      p = c + Vec2{dx, dy};
    }
    if (is_free(p, r)) return p;
  }
  return std::nullopt;
}

Observation Arena::observe_with(const SensingIndex &index, int ai, double energy) const {
  const auto &self = bodies_[ai];
  const double range = config_.sensor_range();
  const double r = self.radius;
  const Vec2 heading = unit_from_angle(self.orientation);
  const std::size_t k = sensed_kinds_.size();

  Observation obs;
  obs.self_angle = self.orientation;
  obs.self_velocity = {dot(self.linear_velocity, heading),
                       dot(self.linear_velocity, perp(heading))};
  obs.energy = energy;
  obs.kinds = sensed_kinds_;
  for (auto &sector : obs.collision_sectors) sector.assign(k, 0);

  // Range sensors.
  std::vector<int> candidates;
  {
    const double reach = range + r + index.max_radius;
    for (int j : index.far.query(self.center, reach)) {
      if (j == ai) continue;
      const auto &o = index.bodies[j];
      const Vec2 d = o.center - self.center;
      const double lim = range + r + o.radius;
      if (length_squared(d) > lim * lim) continue;
      if (dot(d, heading) < -(o.radius + r)) continue;
      candidates.push_back(j);
    }
  }
  const int n = config_.n_rays;
  const double arc = config_.sensor_arc_deg * kDeg;
  obs.range_readings.resize(n);
  for (int i = 0; i < n; ++i) {
    const double offset = n == 1 ? 0.0 : arc * (static_cast<double>(i) / (n - 1) - 0.5);
    const Vec2 dir = unit_from_angle(self.orientation + offset);
    const Vec2 origin = self.center + dir * r;
    const auto hit =
        physics::raycast(origin, dir, range, index.bodies, walls_, ai, &candidates);
    if (!hit) continue;
    auto &reading = obs.range_readings[i];
    reading.distance = std::clamp(hit->distance / range, 0.0, 1.0);
    reading.kind = hit->kind == physics::HitKind::wall ? ObjectKind::wall
                                                       : static_cast<ObjectKind>(hit->tag);
  }

  // Touch sensors.
  for (int j : index.near.query(self.center, r + index.max_radius)) {
    if (j == ai) continue;
    const auto &o = index.bodies[j];
    const double lim = r + o.radius;
    if (length_squared(o.center - self.center) > lim * lim) continue;
    const int s = collision_sector(relative_bearing(self.center, self.orientation, o.center));
    obs.collision_sectors[s][kind_slot(static_cast<ObjectKind>(o.tag))] = 1;
  }
  const int wall_slot = kind_slot(ObjectKind::wall);
  for (const auto &w : walls_) {
    const Vec2 ab = w.b - w.a;
    const double t = std::clamp(dot(self.center - w.a, ab) / length_squared(ab), 0.0, 1.0);
    const Vec2 q = w.a + ab * t;
    if (length_squared(q - self.center) > r * r) continue;
    const int s = collision_sector(relative_bearing(self.center, self.orientation, q));
    obs.collision_sectors[s][wall_slot] = 1;
  }
  return obs;
}

std::vector<physics::Body> Arena::sensing_bodies() const {
  std::vector<physics::Body> all(bodies_.begin(), bodies_.end());
  for (const auto &pop : foods_) {
    for (const auto &item : pop.items) {
      physics::Body f;
      f.id = item.id;
      f.center = item.position;
      f.radius = config_.food_radius;
      f.inverse_mass = 0.0;
      f.inverse_inertia = 0.0;
      f.sensor = true;
      f.tag = static_cast<int>(object_kind(pop.kind.tag));
      all.push_back(f);
    }
  }
  return all;
}

std::vector<Observation> Arena::observe_all(std::span<const double> energies) const {
  if (energies.size() != bodies_.size())
    throw std::invalid_argument("observe_all: one energy per agent expected");
  const double rmax = std::max(config_.agent_radius, config_.food_radius);
  const SensingIndex index(sensing_bodies(), std::max(config_.sensor_range() / 4.0, 2.0 * rmax),
                           2.0 * rmax, rmax);
  std::vector<Observation> out;
  out.reserve(bodies_.size());
  for (int i = 0; i < static_cast<int>(bodies_.size()); ++i)
    out.push_back(observe_with(index, i, energies[i]));
  return out;
}

Observation Arena::build_observation(int agent_id, double energy) const {
  const int ai = index_of(agent_id);
  if (ai < 0) throw std::invalid_argument("unknown agent id");
  const double rmax = std::max(config_.agent_radius, config_.food_radius);
  const SensingIndex index(sensing_bodies(), std::max(config_.sensor_range() / 4.0, 2.0 * rmax),
                           2.0 * rmax, rmax);
  return observe_with(index, ai, energy);
}

Vec2 Arena::apply_motor_action(int agent_id, Vec2 action) {
  const int i = index_of(agent_id);
  if (i < 0) throw std::invalid_argument("unknown agent id");
  const Vec2 a = clip_action(action, config_.action_min, config_.action_max);
  const auto &b = bodies_[i];
  const Vec2 heading = unit_from_angle(b.orientation);
  // a.x drives the left side, a.y the right side.
  wrenches_[i].force = heading * (a.x + a.y);
  wrenches_[i].torque = b.radius * (a.y - a.x);
  return a;
}

physics::Wrench Arena::pending_wrench(int agent_id) const {
  const int i = index_of(agent_id);
  return i < 0 ? physics::Wrench{} : wrenches_[i];
}

void Arena::step_physics() {
  physics::step(bodies_, walls_, wrenches_, 1.0, config_.solver);
  std::fill(wrenches_.begin(), wrenches_.end(), physics::Wrench{});
}

std::vector<EatEvent> Arena::process_eating() {
  std::vector<EatEvent> events;
  std::vector<std::vector<bool>> eaten(foods_.size());
  for (std::size_t p = 0; p < foods_.size(); ++p) eaten[p].assign(foods_[p].items.size(), false);
  const double reach = config_.agent_radius + config_.food_radius;
  for (const auto &agent : bodies_) {
    for (std::size_t p = 0; p < foods_.size(); ++p) {
      const auto &items = foods_[p].items;
      for (std::size_t f = 0; f < items.size(); ++f) {
        if (eaten[p][f]) continue;
        const Vec2 d = items[f].position - agent.center;
        const double lim = agent.radius + config_.food_radius;
        if (std::abs(d.x) > reach || std::abs(d.y) > reach) continue;
        if (length_squared(d) > lim * lim) continue;
        const double bearing =
            relative_bearing(agent.center, agent.orientation, items[f].position);
        if (!in_mouth(bearing, config_.mouth_arc_deg)) continue;
        eaten[p][f] = true;
        events.push_back({agent.id, items[f].id, foods_[p].kind.tag});
      }
    }
  }
  for (std::size_t p = 0; p < foods_.size(); ++p) {
    auto &items = foods_[p].items;
    std::size_t w = 0;
    for (std::size_t f = 0; f < items.size(); ++f)
      if (!eaten[p][f]) items[w++] = items[f];
    items.resize(w);
  }
  return events;
}

void Arena::regenerate_food(int population_index, int eaten_this_step, Rng &rng) {
  auto &pop = foods_.at(population_index);
  pop.budget = next_food_budget(pop.budget, pop.growth_rate, eaten_this_step, pop.capacity);
  while (static_cast<int>(pop.items.size()) < pop.capacity &&
         std::floor(pop.budget) > static_cast<double>(pop.items.size())) {
    const auto pos = sample_food_position(rng);
    if (!pos) break;  // retried next step
    pop.items.push_back({next_food_id_++, *pos});
  }
}

bool Arena::record_eaten(int count) {
  const int every = config_.spawn.relocate_every;
  const int before = relocation_corner(total_eaten_, every);
  total_eaten_ += count;
  return config_.spawn.distribution == SpawnDistribution::relocating_gaussian &&
         relocation_corner(total_eaten_, every) != before;
}

void Arena::restore_counters(long total_eaten, int next_food_id) {
  total_eaten_ = total_eaten;
  next_food_id_ = next_food_id;
}

}  // namespace rewevo
