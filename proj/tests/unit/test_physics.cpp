#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rewevo/physics.hpp"

using namespace rewevo;
using namespace rewevo::physics;

namespace {

Body circle(int id, Vec2 c, double r, double inv_mass = 1.0) {
  Body b;
  b.id = id;
  b.center = c;
  b.radius = r;
  b.inverse_mass = inv_mass;
  b.inverse_inertia = inv_mass == 0.0 ? 0.0 : 2.0 * inv_mass / (r * r);
  return b;
}

}  // namespace

TEST_CASE("detect_contacts on simple geometry") {
  std::vector<Body> two{circle(0, {0, 0}, 1), circle(1, {1.5, 0}, 1)};
  auto contacts = detect_contacts(two, {});
  REQUIRE(contacts.size() == 1);
  CHECK(contacts[0].normal.x == doctest::Approx(1.0));
  CHECK(contacts[0].normal.y == doctest::Approx(0.0));
  CHECK(contacts[0].penetration_depth == doctest::Approx(0.5));

  std::vector<Body> apart{circle(0, {0, 0}, 1), circle(1, {3, 0}, 1)};
  CHECK(detect_contacts(apart, {}).empty());

  std::vector<Body> one{circle(0, {0, 0.5}, 1)};
  std::vector<WallSegment> floor{{{-5, 0}, {5, 0}}};
  contacts = detect_contacts(one, floor);
  REQUIRE(contacts.size() == 1);
  CHECK(contacts[0].with_wall);
  CHECK(contacts[0].penetration_depth == doctest::Approx(0.5));
  CHECK(contacts[0].normal.x == doctest::Approx(0.0));
  CHECK(contacts[0].normal.y == doctest::Approx(-1.0));
}

TEST_CASE("contact normals are unit length and ordering is deterministic") {
  std::mt19937_64 gen(7);
  auto scene = oracle::random_scene(gen, 20, 20.0);
  for (auto &b : scene.bodies) b.center.x += 0.3 * b.radius;  // force overlaps
  const auto a = detect_contacts(scene.bodies, scene.walls);
  const auto b = detect_contacts(scene.bodies, scene.walls);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(length(a[i].normal) - 1.0) < 1e-9);
    CHECK(a[i].penetration_depth >= 0.0);
    CHECK(a[i].index_a == b[i].index_a);
    CHECK(a[i].index_b == b[i].index_b);
    if (i > 0) {
      const auto &p = a[i - 1];
      const bool ordered = p.index_a < a[i].index_a ||
                           (p.index_a == a[i].index_a && (p.with_wall < a[i].with_wall ||
                                                          (p.with_wall == a[i].with_wall &&
                                                           p.index_b < a[i].index_b)));
      CHECK(ordered);
    }
  }
}

TEST_CASE("solve_velocities removes approach velocity") {
  SolverConfig cfg;
  SUBCASE("head-on equal masses") {
    std::vector<Body> bodies{circle(0, {0, 0}, 1), circle(1, {1.9, 0}, 1)};
    bodies[0].linear_velocity = {1, 0};
    bodies[1].linear_velocity = {-1, 0};
    auto contacts = detect_contacts(bodies, {});
    solve_velocities(bodies, contacts, cfg);
    CHECK(bodies[0].linear_velocity.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bodies[1].linear_velocity.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(contacts[0].accumulated_normal_impulse >= 0.0);
  }
  SUBCASE("circle against static wall keeps tangential velocity") {
    std::vector<Body> bodies{circle(0, {0, 0.9}, 1)};
    bodies[0].linear_velocity = {0.7, -2.0};
    std::vector<WallSegment> floor{{{-5, 0}, {5, 0}}};
    auto contacts = detect_contacts(bodies, floor);
    solve_velocities(bodies, contacts, cfg);
    CHECK(bodies[0].linear_velocity.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bodies[0].linear_velocity.x == doctest::Approx(0.7));
  }
  SUBCASE("resting overlap gets no impulse") {
    std::vector<Body> bodies{circle(0, {0, 0}, 1), circle(1, {1.5, 0}, 1)};
    auto contacts = detect_contacts(bodies, {});
    solve_velocities(bodies, contacts, cfg);
    CHECK(bodies[0].linear_velocity == Vec2{0, 0});
    CHECK(bodies[1].linear_velocity == Vec2{0, 0});
  }
}

TEST_CASE("correct_positions follows the projection rule") {
  // Two equal unit circles overlapping by 0.5. Each sweep removes
  // factor * (depth - slop), so the residual excess shrinks geometrically.
  const double slop = 0.01;
  for (double factor : {0.2, 1.0}) {
    SolverConfig cfg;
    cfg.penetration_slop = slop;
    cfg.position_correction_factor = factor;
    cfg.position_iterations = 8;
    std::vector<Body> bodies{circle(0, {0, 0}, 1), circle(1, {1.5, 0}, 1)};
    const auto contacts = detect_contacts(bodies, {});
    correct_positions(bodies, contacts, {}, cfg);
    double excess = 0.5 - slop;
    for (int i = 0; i < 8; ++i) excess *= (1.0 - factor);
    const double depth = 2.0 - length(bodies[1].center - bodies[0].center);
    CHECK(depth == doctest::Approx(slop + excess).epsilon(1e-12));
    if (factor == 1.0) CHECK(depth <= slop + 1e-6);
  }

  SUBCASE("zero depth leaves positions alone") {
    std::vector<Body> bodies{circle(0, {0, 0}, 1), circle(1, {2, 0}, 1)};
    const auto contacts = detect_contacts(bodies, {});
    correct_positions(bodies, contacts, {}, SolverConfig{});
    CHECK(bodies[0].center == Vec2{0, 0});
    CHECK(bodies[1].center == Vec2{2, 0});
  }
  SUBCASE("static bodies never move") {
    std::vector<Body> bodies{circle(0, {0, 0}, 1, 0.0), circle(1, {1.5, 0}, 1)};
    const auto contacts = detect_contacts(bodies, {});
    correct_positions(bodies, contacts, {}, SolverConfig{});
    CHECK(bodies[0].center == Vec2{0, 0});
    CHECK(bodies[1].center.x > 1.5);
    CHECK(bodies[1].center.y == 0.0);
  }
  SUBCASE("circle inside wall translates along the normal only") {
    std::vector<Body> bodies{circle(0, {2, 0.5}, 1)};
    std::vector<WallSegment> floor{{{-5, 0}, {5, 0}}};
    const auto contacts = detect_contacts(bodies, floor);
    correct_positions(bodies, contacts, floor, SolverConfig{});
    CHECK(bodies[0].center.x == 2.0);
    CHECK(bodies[0].center.y == doctest::Approx(1.0 - SolverConfig{}.penetration_slop));
  }
}

TEST_CASE("integrate is semi-implicit Euler") {
  SolverConfig cfg;
  std::vector<Body> bodies{circle(0, {0, 0}, 1), circle(1, {5, 5}, 1), circle(2, {9, 9}, 1, 0.0)};
  bodies[1].linear_velocity = {0.5, -0.25};
  std::vector<Wrench> forces{{{1, 0}, 0}, {}, {{3, 3}, 1}};
  integrate(bodies, forces, 1.0, cfg);
  CHECK(bodies[0].linear_velocity == Vec2{1, 0});
  CHECK(bodies[0].center == Vec2{1, 0});
  CHECK(bodies[1].center == Vec2{5.5, 4.75});
  CHECK(bodies[2].center == Vec2{9, 9});
  CHECK(bodies[2].linear_velocity == Vec2{0, 0});
}

TEST_CASE("raycast examples") {
  std::vector<Body> one{circle(0, {10, 0}, 1)};
  auto hit = raycast({0, 0}, {1, 0}, 100, one, {});
  REQUIRE(hit);
  CHECK(hit->distance == doctest::Approx(9.0));
  CHECK_FALSE(raycast({0, 0}, {1, 0}, 5, one, {}));
  std::vector<Body> two{circle(0, {10, 0}, 1), circle(1, {5, 0}, 1)};
  hit = raycast({0, 0}, {1, 0}, 100, two, {});
  REQUIRE(hit);
  CHECK(hit->distance == doctest::Approx(4.0));
  CHECK(hit->index == 1);
}

TEST_CASE("raycast agrees with brute-force intersection") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int scene_i = 0; scene_i < 100; ++scene_i) {
    auto scene = oracle::random_scene(gen, 20);
    for (int r = 0; r < 10; ++r) {
      const Vec2 o{40 * unit(gen), 40 * unit(gen)};
      const double a = 6.283185307179586 * unit(gen);
      const Vec2 d{std::cos(a), std::sin(a)};
      const auto got = raycast(o, d, 30.0, scene.bodies, scene.walls);
      const auto want = oracle::raycast_bruteforce(o, d, 30.0, scene.bodies, scene.walls);
      REQUIRE(got.has_value() == want.has_value());
      if (got) CHECK(std::abs(got->distance - want->distance) <= 1e-9);
    }
  }
}

TEST_CASE("full step keeps bodies separated without adding energy") {
  std::mt19937_64 gen(3);
  SolverConfig cfg;
  for (int i = 0; i < 100; ++i) {
    auto scene = oracle::random_scene(gen, 20);
    const double before = oracle::kinetic_energy_naive(scene.bodies);
    step(scene.bodies, scene.walls, {}, 1.0, cfg);
    CHECK(oracle::max_penetration_bruteforce(scene.bodies, scene.walls) <=
          cfg.penetration_slop + 1e-6);
    CHECK(oracle::kinetic_energy_naive(scene.bodies) <= before * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("accumulated impulses stay non-negative") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) {
    auto scene = oracle::random_scene(gen, 20, 18.0);
    for (auto &b : scene.bodies) b.linear_velocity = b.linear_velocity * 3.0;
    integrate_positions(scene.bodies, 1.0);
    auto contacts = detect_contacts(scene.bodies, scene.walls);
    for (int sweep = 1; sweep <= 4; ++sweep) {
      SolverConfig cfg;
      cfg.velocity_iterations = 1;
      solve_velocities(scene.bodies, contacts, cfg);
      for (const auto &c : contacts) CHECK(c.accumulated_normal_impulse >= 0.0);
    }
  }
}

TEST_CASE("physics step is deterministic") {
  std::mt19937_64 g1(9), g2(9);
  auto a = oracle::random_scene(g1, 20);
  auto b = oracle::random_scene(g2, 20);
  for (int i = 0; i < 50; ++i) {
    step(a.bodies, a.walls, {}, 1.0, SolverConfig{});
    step(b.bodies, b.walls, {}, 1.0, SolverConfig{});
  }
  for (std::size_t i = 0; i < a.bodies.size(); ++i) {
    CHECK(a.bodies[i].center == b.bodies[i].center);
    CHECK(a.bodies[i].linear_velocity == b.bodies[i].linear_velocity);
  }
}
