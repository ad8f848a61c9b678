#pragma once

// Foraging arena: walled rectangle, food populations with linear
// regeneration, frontal range sensors, 60-degree collision sectors, a
// frontal mouth, differential-drive motors and per-step metabolism.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rewevo/physics.hpp"
#include "rewevo/random.hpp"
#include "rewevo/reward.hpp"
#include "rewevo/vec2.hpp"

namespace rewevo {

// Object classes an agent can sense. Food kinds are reported separately.
enum class ObjectKind : int { agent = 0, wall = 1, food_normal = 2, food_poor = 3, food_poison = 4 };

ObjectKind object_kind(FoodType type);

struct FoodKind {
  FoodType tag = FoodType::normal;
  double energy_gain = 1.0;
};

enum class SpawnDistribution { uniform, centered_gaussian, relocating_gaussian };

struct SpawnConfig {
  SpawnDistribution distribution = SpawnDistribution::uniform;
  double std_fraction = 0.1;   // Gaussian std as a fraction of arena width
  double corner_inset = 0.25;  // relocation corners, fraction of each side
  int relocate_every = 1000;   // eaten foods between relocations
  int max_attempts = 100;
};

struct FoodConfig {
  FoodKind kind;
  int capacity = 100;  // n_max
  double growth_rate = 0.02;
  // Initial budget n_0 (and initial food count); negative means capacity.
  double initial = -1.0;
};

struct FoodItem {
  int id = 0;
  Vec2 position;
};

struct FoodPopulation {
  FoodKind kind;
  std::vector<FoodItem> items;  // ascending id
  double budget = 0.0;          // accumulator n_t
  int capacity = 100;
  double growth_rate = 0.02;
};

// n_{t+1} = min(n_t + g - eaten, n_max)
double next_food_budget(double budget, double growth_rate, int eaten, int capacity);

struct MetabolicParams {
  double e_basic = 0.001;
  double e_act = 2e-5;
};

struct ArenaConfig {
  double width = 480.0;
  double height = 360.0;
  double agent_radius = 10.0;
  double agent_mass = 40.0;
  double food_radius = 4.0;
  int n_rays = 16;
  double sensor_arc_deg = 120.0;
  double sensor_range_fraction = 0.5;  // of arena width
  double mouth_arc_deg = 120.0;
  double action_min = -20.0;
  double action_max = 80.0;
  double velocity_scale = 4.0;
  double energy_scale = 20.0;
  physics::SolverConfig solver{.linear_damping = 1.0, .angular_damping = 1.0};
  MetabolicParams metabolism;
  SpawnConfig spawn;
  std::vector<FoodConfig> foods{FoodConfig{}};

  double sensor_range() const { return sensor_range_fraction * width; }
};

struct RangeReading {
  double distance = 1.0;  // hit distance / range, 1 when nothing is hit
  std::optional<ObjectKind> kind;
};

// Collision sector k covers relative bearings [-180 + 60k, -120 + 60k)
// degrees; 0 is straight ahead and positive bearings are to the left.
inline constexpr int kCollisionSectors = 6;

struct Observation {
  std::vector<RangeReading> range_readings;
  // [sector][kind slot] touch flags.
  std::array<std::vector<std::uint8_t>, kCollisionSectors> collision_sectors;
  double self_angle = 0.0;  // heading, radians in [-pi, pi)
  Vec2 self_velocity;       // body frame: (forward, left)
  double energy = 0.0;
  std::vector<ObjectKind> kinds;  // one-hot order used by to_vector

  // Flat network input: per ray [distance, one-hot kind...], then the
  // sector flags, then angle / pi, velocity / scale, energy / scale.
  std::vector<double> to_vector(double velocity_scale, double energy_scale) const;
};

struct EatEvent {
  int agent_id = 0;
  int food_id = 0;
  FoodType kind = FoodType::normal;
};

// Clamps each component to [lo, hi].
Vec2 clip_action(Vec2 action, double lo, double hi);

// Relative bearing of `point` seen from a body at `center` facing `heading`.
double relative_bearing(Vec2 center, double heading, Vec2 point);

// |bearing| <= half the mouth arc, boundary inclusive.
bool in_mouth(double bearing, double mouth_arc_deg);

int collision_sector(double bearing);

// energy + sum(gains) - e_act |action| - e_basic
double metabolize(double energy, const EatenCounts &eaten, Vec2 clipped_action,
                  const MetabolicParams &params, std::span<const FoodKind> kinds);

// Gaussian spawn centre for relocating food: corner index advances clockwise
// (top-left, top-right, bottom-right, bottom-left) every `every` eaten foods.
int relocation_corner(long total_eaten, int every);
Vec2 corner_center(int corner, double width, double height, double inset);

class Arena {
 public:
  // Spawns the initial food using `rng`.
  Arena(ArenaConfig config, Rng &rng);

  const ArenaConfig &config() const { return config_; }
  std::span<const physics::WallSegment> walls() const { return walls_; }
  std::span<const physics::Body> agent_bodies() const { return bodies_; }
  std::span<const FoodPopulation> foods() const { return foods_; }
  std::span<FoodPopulation> mutable_foods() { return foods_; }

  // Sensed kinds in one-hot order: agent, wall, then each food kind present.
  const std::vector<ObjectKind> &sensed_kinds() const { return sensed_kinds_; }
  int observation_dim() const;

  bool has_food_type(FoodType type) const;

  // Adds a body for a new agent; ids must be added in increasing order.
  void add_agent(int agent_id, Vec2 position, double orientation);
  void remove_agent(int agent_id);
  const physics::Body *agent_body(int agent_id) const;
  physics::Body *mutable_agent_body(int agent_id);

  // Inside the walls and not overlapping any agent or food.
  bool is_free(Vec2 position, double radius) const;
  std::optional<Vec2> random_free_position(Rng &rng, double radius, int attempts) const;

  Observation build_observation(int agent_id, double energy) const;
  // Observations for all agents in id order; equivalent to calling
  // build_observation per agent.
  std::vector<Observation> observe_all(std::span<const double> energies) const;

  // Clips the action, stores the wrench for the next physics step and
  // returns the clipped action.
  Vec2 apply_motor_action(int agent_id, Vec2 action);
  physics::Wrench pending_wrench(int agent_id) const;

  void step_physics();

  // Foods touched inside an agent's mouth are removed; agents are visited in
  // id order so the lowest id wins contested food.
  std::vector<EatEvent> process_eating();

  // Applies the budget rule for one population and spawns food while
  // floor(budget) exceeds the item count.
  void regenerate_food(int population_index, int eaten_this_step, Rng &rng);

  // Advances the cumulative eaten counter; returns true when the relocating
  // spawn centre moved.
  bool record_eaten(int count);
  long total_eaten() const { return total_eaten_; }
  Vec2 spawn_center() const;
  int next_food_id() const { return next_food_id_; }

  // Restores counters when loading a checkpoint.
  void restore_counters(long total_eaten, int next_food_id);

 private:
  std::optional<Vec2> sample_food_position(Rng &rng) const;
  int index_of(int agent_id) const;
  struct SensingIndex;
  // Agents (same indices as bodies_) followed by foods as static sensors.
  std::vector<physics::Body> sensing_bodies() const;
  Observation observe_with(const SensingIndex &index, int agent_index, double energy) const;
  int kind_slot(ObjectKind kind) const;

  ArenaConfig config_;
  std::vector<physics::WallSegment> walls_;
  std::vector<physics::Body> bodies_;  // agents, ascending id
  std::vector<physics::Wrench> wrenches_;
  std::vector<FoodPopulation> foods_;
  std::vector<ObjectKind> sensed_kinds_;
  long total_eaten_ = 0;
  int next_food_id_ = 0;
};

}  // namespace rewevo
