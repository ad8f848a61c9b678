#pragma once

// Minimal 2D rigid-body engine: dynamic/static circles, static wall
// segments, sequential-impulse (projected Gauss-Seidel) contact solve with
// non-linear position correction, and raycasting.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rewevo/vec2.hpp"

namespace rewevo::physics {

struct Body {
  int id = 0;
  Vec2 center;
  double orientation = 0.0;  // [-pi, pi)
  Vec2 linear_velocity;      // units / step
  double angular_velocity = 0.0;
  double radius = 1.0;
  double inverse_mass = 1.0;  // 0 for static bodies
  double inverse_inertia = 1.0;
  // Opaque kind tag reported by raycasts (agent, food kind, ...).
  int tag = 0;
  // Sensor bodies report contacts but never receive or apply impulses.
  bool sensor = false;

  bool is_static() const { return inverse_mass == 0.0; }
};

struct WallSegment {
  Vec2 a;
  Vec2 b;
};

// Contact between bodies[index_a] and either bodies[index_b] or
// walls[index_b] (when `with_wall`). `normal` points from a towards b.
struct Contact {
  int index_a = 0;
  int index_b = 0;
  bool with_wall = false;
  Vec2 normal;
  double penetration_depth = 0.0;
  Vec2 contact_point;
  double accumulated_normal_impulse = 0.0;
  double accumulated_tangent_impulse = 0.0;
  double normal_mass = 0.0;
  double tangent_mass = 0.0;
  double velocity_bias = 0.0;
};

struct SolverConfig {
  int velocity_iterations = 8;
  int position_iterations = 8;
  double penetration_slop = 0.005;
  // Fraction of the excess penetration removed per contact visit.
  double position_correction_factor = 1.0;
  // Full step only: contact re-detection rounds, each followed by
  // position_iterations sweeps, until penetration is within slop.
  int correction_rounds = 64;
  double restitution = 0.0;
  double friction_coefficient = 0.0;
  // Per-step velocity damping: v <- v / (1 + damping * dt).
  double linear_damping = 0.0;
  double angular_damping = 0.0;
};

struct Wrench {
  Vec2 force;
  double torque = 0.0;
};

// Circle-circle pairs (sensors included, static-static skipped) and
// circle-wall pairs for non-static, non-sensor circles. Contacts are ordered
// by (index_a, with_wall, index_b) with index_a < index_b for circle pairs.
std::vector<Contact> detect_contacts(std::span<const Body> bodies,
                                     std::span<const WallSegment> walls);

// Sequential impulses over non-sensor contacts. Accumulated normal impulses
// are clamped at zero after every visit.
void solve_velocities(std::span<Body> bodies, std::span<Contact> contacts,
                      const SolverConfig &config);

// Non-linear Gauss-Seidel position projection. Penetration is recomputed
// from current positions at every visit; static bodies never move.
void correct_positions(std::span<Body> bodies, std::span<const Contact> contacts,
                       std::span<const WallSegment> walls, const SolverConfig &config);

// Semi-implicit Euler: velocities first (forces, then damping), then
// positions. `wrenches` is either empty or parallel to `bodies`.
void integrate_velocities(std::span<Body> bodies, std::span<const Wrench> wrenches,
                          double dt, const SolverConfig &config);
void integrate_positions(std::span<Body> bodies, double dt);
void integrate(std::span<Body> bodies, std::span<const Wrench> wrenches, double dt,
               const SolverConfig &config);

// Full step: integrate velocities, solve contacts found at the start of the
// step, advance positions, then correct penetrations among fresh contacts.
void step(std::span<Body> bodies, std::span<const WallSegment> walls,
          std::span<const Wrench> wrenches, double dt, const SolverConfig &config);

// Depth of the worst non-sensor overlap among dynamic bodies.
double max_penetration(std::span<const Body> bodies, std::span<const WallSegment> walls);
double kinetic_energy(std::span<const Body> bodies);

enum class HitKind : std::uint8_t { body, wall };

struct RayHit {
  double distance = 0.0;
  HitKind kind = HitKind::body;
  int index = 0;  // body or wall index
  int tag = 0;    // body tag; -1 for walls
};

// Entry distance of a ray into a circle, or nullopt. Rays starting inside
// the circle hit at distance 0.
std::optional<double> ray_circle(Vec2 origin, Vec2 direction, Vec2 center, double radius);
std::optional<double> ray_segment(Vec2 origin, Vec2 direction, const WallSegment &wall);

// Nearest hit within max_range. `ignore_index` excludes one body (the
// sensing agent). When `candidates` is non-null only those bodies are tested.
std::optional<RayHit> raycast(Vec2 origin, Vec2 direction, double max_range,
                              std::span<const Body> bodies,
                              std::span<const WallSegment> walls, int ignore_index = -1,
                              const std::vector<int> *candidates = nullptr);

// Uniform hash grid over body indices, used for the broadphase.
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Body> bodies, double cell_size);

  // Indices of bodies whose cell lies within the square of half-size
  // `reach` around `point`. Sorted ascending.
  std::vector<int> query(Vec2 point, double reach) const;

  double cell_size() const { return cell_size_; }

 private:
  struct Entry {
    std::int64_t key;
    int index;
  };
  std::int64_t key_of(std::int64_t cx, std::int64_t cy) const;
  std::int64_t cell_coord(double v) const;

  std::span<const Body> bodies_;
  double cell_size_;
  std::vector<Entry> entries_;  // sorted by (key, index)
};

}  // namespace rewevo::physics
