#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rewevo/arena.hpp"
#include "rewevo/config.hpp"

using namespace rewevo;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Baseline geometry with no initial food so scenes can be built by hand.
ArenaConfig empty_config() {
  ArenaConfig c;
  c.foods[0].initial = 0.0;
  return c;
}

void add_food(Arena &arena, int population, int id, Vec2 at) {
  arena.mutable_foods()[population].items.push_back({id, at});
}

}  // namespace

TEST_CASE("observation dimension per experiment") {
  Rng rng(1);
  Arena baseline(preset_config("baseline").arena, rng);
  // 16 rays x (distance + agent, wall, food) + 6 sectors x 3 + angle, velocity(2), energy
  CHECK(baseline.observation_dim() == 16 * 4 + 6 * 3 + 4);
  Arena poor(preset_config("poor").arena, rng);
  CHECK(poor.observation_dim() == 16 * 5 + 6 * 4 + 4);
  Arena poison(preset_config("poison").arena, rng);
  CHECK(poison.observation_dim() == 16 * 5 + 6 * 4 + 4);
  CHECK(poison.sensed_kinds().back() == ObjectKind::food_poison);

  baseline.add_agent(0, {240, 180}, 0.0);
  const auto obs = baseline.build_observation(0, 20.0);
  CHECK(static_cast<int>(obs.to_vector(4.0, 20.0).size()) == baseline.observation_dim());
}

TEST_CASE("no objects in range reads as empty") {
  ArenaConfig c = empty_config();
  c.sensor_range_fraction = 0.2;  // 96 units; walls are further away
  Rng rng(1);
  Arena arena(c, rng);
  arena.add_agent(0, {240, 180}, 0.3);
  const auto obs = arena.build_observation(0, 20.0);
  for (const auto &r : obs.range_readings) {
    CHECK(r.distance == 1.0);
    CHECK_FALSE(r.kind.has_value());
  }
  const auto v = obs.to_vector(c.velocity_scale, c.energy_scale);
  for (int i = 0; i < c.n_rays; ++i) {
    CHECK(v[i * 4] == 1.0);
    for (int k = 1; k < 4; ++k) CHECK(v[i * 4 + k] == 0.0);
  }
  for (const auto &sector : obs.collision_sectors)
    for (auto f : sector) CHECK(f == 0);
}

TEST_CASE("food dead ahead at half range") {
  ArenaConfig c = empty_config();
  c.n_rays = 17;  // odd count puts one ray exactly on the heading
  Rng rng(1);
  Arena arena(c, rng);
  const double range = c.sensor_range();
  arena.add_agent(0, {100, 180}, 0.0);
  add_food(arena, 0, 0, {100 + c.agent_radius + 0.5 * range + c.food_radius, 180});
  const auto obs = arena.build_observation(0, 20.0);
  const auto &center = obs.range_readings[8];
  CHECK(center.distance == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(center.kind.has_value());
  CHECK(*center.kind == ObjectKind::food_normal);
}

TEST_CASE("wall contact behind-left sets one rear sector") {
  Rng rng(1);
  Arena arena(empty_config(), rng);
  // Touching the left wall while facing +45 degrees: the contact point
  // lies at bearing +135 degrees, in sector [120, 180).
  arena.add_agent(0, {9.5, 180}, 45.0 * kDeg);
  const auto obs = arena.build_observation(0, 20.0);
  const int wall = 1;
  int flags = 0;
  for (int s = 0; s < kCollisionSectors; ++s)
    for (std::size_t k = 0; k < obs.collision_sectors[s].size(); ++k)
      flags += obs.collision_sectors[s][k];
  CHECK(flags == 1);
  CHECK(obs.collision_sectors[5][wall] == 1);
  CHECK(collision_sector(135.0 * kDeg) == 5);
  CHECK(collision_sector(-179.0 * kDeg) == 0);
  CHECK(collision_sector(0.0) == 3);
}

TEST_CASE("observe_all equals per-agent observation") {
  Rng rng(4);
  Arena arena(preset_config("baseline").arena, rng);
  Rng place(9);
  for (int id = 0; id < 30; ++id) {
    const auto p = arena.random_free_position(place, 10.0, 1000);
    REQUIRE(p);
    arena.add_agent(id, *p, place.uniform(-3.0, 3.0));
  }
  std::vector<double> energies(30, 5.0);
  const auto all = arena.observe_all(energies);
  for (int id = 0; id < 30; ++id) {
    const auto one = arena.build_observation(id, 5.0);
    CHECK(one.to_vector(4, 20) == all[id].to_vector(4, 20));
  }
}

TEST_CASE("motor action clipping and wrench") {
  Rng rng(1);
  Arena arena(empty_config(), rng);
  arena.add_agent(0, {100, 100}, 0.0);
  CHECK(arena.apply_motor_action(0, {100, -50}) == Vec2{80, -20});
  arena.apply_motor_action(0, {0, 0});
  auto w = arena.pending_wrench(0);
  CHECK(w.force == Vec2{0, 0});
  CHECK(w.torque == 0.0);
  arena.apply_motor_action(0, {80, 80});
  w = arena.pending_wrench(0);
  CHECK(w.force.x == doctest::Approx(160.0));
  CHECK(w.force.y == doctest::Approx(0.0));
  CHECK(w.torque == 0.0);
}

TEST_CASE("eating examples") {
  Rng rng(1);
  Arena arena(empty_config(), rng);
  arena.add_agent(0, {100, 100}, 0.0);
  SUBCASE("bearing 0 is eaten") {
    add_food(arena, 0, 7, {113, 100});
    const auto ev = arena.process_eating();
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].food_id == 7);
    CHECK(arena.foods()[0].items.empty());
  }
  SUBCASE("bearing 90 is not eaten") {
    add_food(arena, 0, 7, {100, 113});
    CHECK(arena.process_eating().empty());
    CHECK(arena.foods()[0].items.size() == 1);
  }
  SUBCASE("contested food goes to the lowest id") {
    arena.add_agent(1, {128, 100}, std::numbers::pi);
    add_food(arena, 0, 3, {114, 100});
    const auto ev = arena.process_eating();
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].agent_id == 0);
  }
}

TEST_CASE("mouth fuzz: eaten iff |bearing| <= 60 degrees") {
  Rng rng(1);
  Arena arena(empty_config(), rng);
  arena.add_agent(0, {200, 180}, 0.7);
  Rng fuzz(123);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const double bearing = fuzz.uniform(-std::numbers::pi, std::numbers::pi);
    const double dist = fuzz.uniform(0.5, 13.99);
    const Vec2 at = Vec2{200, 180} + unit_from_angle(0.7 + bearing) * dist;
    arena.mutable_foods()[0].items.assign(1, FoodItem{i, at});
    const bool eaten = !arena.process_eating().empty();
    const double measured = relative_bearing({200, 180}, 0.7, at);
    if (eaten != (std::abs(measured) <= 60.0 * kDeg)) ++mismatches;
  }
  CHECK(mismatches == 0);
  CHECK(in_mouth(60.0 * kDeg, 120.0));
  CHECK(in_mouth(-60.0 * kDeg, 120.0));
  CHECK_FALSE(in_mouth(60.0 * kDeg + 1e-12, 120.0));
}

TEST_CASE("food budget rule") {
  CHECK(next_food_budget(99.5, 0.02, 2, 100) == doctest::Approx(97.52).epsilon(1e-15));
  CHECK(next_food_budget(100.0, 0.02, 0, 100) == 100.0);

  // Matches a scalar reference on random traces exactly.
  Rng rng(5);
  double budget = 100.0, ref = 100.0;
  for (int t = 0; t < 10000; ++t) {
    const int eaten = static_cast<int>(rng.below(3));
    budget = next_food_budget(budget, 0.02, eaten, 100);
    ref = std::min(ref + 0.02 - eaten, 100.0);
    REQUIRE(budget == ref);
  }
}

TEST_CASE("floor crossing spawns one food") {
  ArenaConfig c = empty_config();
  c.foods[0].growth_rate = 0.2;
  Rng rng(1);
  Arena arena(c, rng);
  for (int i = 0; i < 5; ++i) add_food(arena, 0, 100 + i, {20.0 + 30 * i, 50});
  arena.mutable_foods()[0].budget = 5.9;
  Rng food(2);
  arena.regenerate_food(0, 0, food);
  CHECK(arena.foods()[0].budget == doctest::Approx(6.1));
  CHECK(arena.foods()[0].items.size() == 6);
}

TEST_CASE("spawn exhaustion skips without touching the budget") {
  ArenaConfig c = empty_config();
  c.width = 20;
  c.height = 20;
  c.agent_radius = 9;
  c.foods[0].growth_rate = 0.2;
  Rng rng(1);
  Arena arena(c, rng);
  arena.add_agent(0, {10, 10}, 0.0);  // every food position overlaps it
  arena.mutable_foods()[0].budget = 0.9;
  Rng food(2);
  arena.regenerate_food(0, 0, food);
  CHECK(arena.foods()[0].budget == doctest::Approx(1.1));
  CHECK(arena.foods()[0].items.empty());
  arena.remove_agent(0);
  arena.regenerate_food(0, 0, food);
  CHECK(arena.foods()[0].budget == doctest::Approx(1.3));
  CHECK(arena.foods()[0].items.size() == 1);
}

TEST_CASE("food count never exceeds capacity") {
  ArenaConfig c = empty_config();
  c.foods[0].capacity = 10;
  c.foods[0].growth_rate = 3.0;
  Rng rng(1);
  Arena arena(c, rng);
  Rng food(2);
  for (int t = 0; t < 50; ++t) {
    arena.regenerate_food(0, 0, food);
    CHECK(arena.foods()[0].items.size() <= 10);
    CHECK(arena.foods()[0].budget <= 10.0);
  }
  CHECK(arena.foods()[0].items.size() == 10);
}

TEST_CASE("food relocation cycles clockwise every 1000 eaten") {
  ArenaConfig c = empty_config();
  c.spawn.distribution = SpawnDistribution::relocating_gaussian;
  Rng rng(1);
  Arena arena(c, rng);
  const Vec2 first = arena.spawn_center();
  CHECK_FALSE(arena.record_eaten(999));
  CHECK(arena.spawn_center() == first);
  CHECK(arena.record_eaten(1));
  CHECK(relocation_corner(arena.total_eaten(), 1000) == 1);
  CHECK(arena.spawn_center().x > first.x);  // top-left to top-right
  CHECK(arena.spawn_center().y == first.y);
  arena.record_eaten(2999);
  CHECK(relocation_corner(arena.total_eaten(), 1000) == 3);
  CHECK(arena.record_eaten(1));
  CHECK(arena.total_eaten() == 4000);
  CHECK(arena.spawn_center() == first);
}

TEST_CASE("metabolism examples") {
  const MetabolicParams met;
  const std::vector<FoodKind> kinds{{FoodType::normal, 1.0}, {FoodType::poison, -0.6}};
  EatenCounts none{};
  CHECK(metabolize(0.0, none, {80, 80}, met, kinds) ==
        doctest::Approx(-2e-5 * std::sqrt(2.0 * 80 * 80) - 0.001).epsilon(1e-12));
  CHECK(metabolize(0.0, none, {80, 80}, met, kinds) == doctest::Approx(-0.0032627).epsilon(1e-4));
  EatenCounts one{1, 0, 0};
  CHECK(metabolize(0.0, one, {0, 0}, met, kinds) == doctest::Approx(0.999).epsilon(1e-14));
  EatenCounts poison{0, 0, 1};
  CHECK(metabolize(0.0, poison, {0, 0}, met, kinds) == doctest::Approx(-0.601).epsilon(1e-14));
}
