#include "rewevo/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rewevo::physics {
namespace {

struct SegmentProximity {
  Vec2 closest;
  double distance;
};

SegmentProximity closest_on_segment(Vec2 p, const WallSegment &wall) {
  const Vec2 ab = wall.b - wall.a;
  const double len2 = length_squared(ab);
  double t = len2 > 0.0 ? dot(p - wall.a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q = wall.a + ab * t;
  return {q, length(p - q)};
}

Vec2 wall_normal(const WallSegment &wall) {
  const Vec2 n = perp(wall.b - wall.a);
  return n * (1.0 / length(n));
}

double inv_inertia(const Body &b) { return b.is_static() ? 0.0 : b.inverse_inertia; }

bool participates(const Body &a, const Body &b) {
  return !a.sensor && !b.sensor && !(a.is_static() && b.is_static());
}

std::optional<Contact> circle_circle(std::span<const Body> bodies, int ia, int ib) {
  const Body &a = bodies[ia];
  const Body &b = bodies[ib];
  const Vec2 d = b.center - a.center;
  const double dist2 = length_squared(d);
  const double rsum = a.radius + b.radius;
  if (dist2 >= rsum * rsum) return std::nullopt;
  const double dist = std::sqrt(dist2);
  Contact c;
  c.index_a = ia;
  c.index_b = ib;
  c.normal = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
  c.penetration_depth = rsum - dist;
  c.contact_point = a.center + c.normal * (a.radius - 0.5 * c.penetration_depth);
  return c;
}

std::optional<Contact> circle_wall(const Body &body, int ib, const WallSegment &wall, int iw) {
  const auto prox = closest_on_segment(body.center, wall);
  if (prox.distance >= body.radius) return std::nullopt;
  Contact c;
  c.index_a = ib;
  c.index_b = iw;
  c.with_wall = true;
  c.normal = prox.distance > 0.0 ? (prox.closest - body.center) * (1.0 / prox.distance)
                                 : wall_normal(wall);
  c.penetration_depth = body.radius - prox.distance;
  c.contact_point = prox.closest;
  return c;
}

double max_radius(std::span<const Body> bodies) {
  double r = 0.0;
  for (const auto &b : bodies) r = std::max(r, b.radius);
  return r;
}

}  // namespace

SpatialGrid::SpatialGrid(std::span<const Body> bodies, double cell_size)
    : bodies_(bodies), cell_size_(cell_size > 0.0 ? cell_size : 1.0) {
  entries_.reserve(bodies.size());
  for (int i = 0; i < static_cast<int>(bodies.size()); ++i) {
    const auto &b = bodies[i];
    entries_.push_back({key_of(cell_coord(b.center.x), cell_coord(b.center.y)), i});
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry &l, const Entry &r) {
    return l.key != r.key ? l.key < r.key : l.index < r.index;
  });
}

std::int64_t SpatialGrid::cell_coord(double v) const {
  return static_cast<std::int64_t>(std::floor(v / cell_size_));
}

std::int64_t SpatialGrid::key_of(std::int64_t cx, std::int64_t cy) const {
  return (cx << 32) ^ (cy & 0xffffffffLL);
}

std::vector<int> SpatialGrid::query(Vec2 point, double reach) const {
  std::vector<int> out;
  const auto x0 = cell_coord(point.x - reach), x1 = cell_coord(point.x + reach);
  const auto y0 = cell_coord(point.y - reach), y1 = cell_coord(point.y + reach);
  for (auto cx = x0; cx <= x1; ++cx) {
    for (auto cy = y0; cy <= y1; ++cy) {
      const auto key = key_of(cx, cy);
      auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                 [](const Entry &e, std::int64_t k) { return e.key < k; });
      for (; it != entries_.end() && it->key == key; ++it) out.push_back(it->index);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Contact> detect_contacts(std::span<const Body> bodies,
                                     std::span<const WallSegment> walls) {
  std::vector<Contact> contacts;
  const int n = static_cast<int>(bodies.size());
  if (n == 0) return contacts;
  const double rmax = max_radius(bodies);
  const SpatialGrid grid(bodies, 2.0 * rmax);
  for (int i = 0; i < n; ++i) {
    const Body &a = bodies[i];
    for (int j : grid.query(a.center, a.radius + rmax)) {
      if (j <= i) continue;
      if (a.is_static() && bodies[j].is_static()) continue;
      if (auto c = circle_circle(bodies, i, j)) contacts.push_back(*c);
    }
    if (a.is_static() || a.sensor) continue;
    for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
      if (auto c = circle_wall(a, i, walls[w], w)) contacts.push_back(*c);
    }
  }
  std::sort(contacts.begin(), contacts.end(), [](const Contact &l, const Contact &r) {
    if (l.index_a != r.index_a) return l.index_a < r.index_a;
    if (l.with_wall != r.with_wall) return !l.with_wall;
    return l.index_b < r.index_b;
  });
  return contacts;
}

void solve_velocities(std::span<Body> bodies, std::span<Contact> contacts,
                      const SolverConfig &config) {
  Body wall_body;
  wall_body.inverse_mass = 0.0;
  wall_body.inverse_inertia = 0.0;

  auto other = [&](const Contact &c) -> Body & {
    return c.with_wall ? wall_body : bodies[c.index_b];
  };
  auto active = [&](const Contact &c) {
    return c.with_wall ? !bodies[c.index_a].sensor && !bodies[c.index_a].is_static()
                       : participates(bodies[c.index_a], bodies[c.index_b]);
  };
  auto relative_velocity = [](const Body &a, const Body &b, Vec2 ra, Vec2 rb) {
    return (b.linear_velocity + cross(b.angular_velocity, rb)) -
           (a.linear_velocity + cross(a.angular_velocity, ra));
  };
  auto apply = [](Body &a, Body &b, Vec2 ra, Vec2 rb, Vec2 impulse) {
    a.linear_velocity -= impulse * a.inverse_mass;
    a.angular_velocity -= inv_inertia(a) * cross(ra, impulse);
    b.linear_velocity += impulse * b.inverse_mass;
    b.angular_velocity += inv_inertia(b) * cross(rb, impulse);
  };

  for (auto &c : contacts) {
    c.accumulated_normal_impulse = 0.0;
    c.accumulated_tangent_impulse = 0.0;
    if (!active(c)) continue;
    const Body &a = bodies[c.index_a];
    const Body &b = other(c);
    const Vec2 ra = c.contact_point - a.center;
    const Vec2 rb = c.with_wall ? Vec2{} : c.contact_point - b.center;
    const Vec2 t = perp(c.normal);
    const double rna = cross(ra, c.normal), rnb = cross(rb, c.normal);
    const double rta = cross(ra, t), rtb = cross(rb, t);
    const double kn = a.inverse_mass + b.inverse_mass + inv_inertia(a) * rna * rna +
                      inv_inertia(b) * rnb * rnb;
    const double kt = a.inverse_mass + b.inverse_mass + inv_inertia(a) * rta * rta +
                      inv_inertia(b) * rtb * rtb;
    c.normal_mass = kn > 0.0 ? 1.0 / kn : 0.0;
    c.tangent_mass = kt > 0.0 ? 1.0 / kt : 0.0;
    const double vn = dot(relative_velocity(a, b, ra, rb), c.normal);
    c.velocity_bias = vn < 0.0 ? -config.restitution * vn : 0.0;
  }

  for (int iter = 0; iter < config.velocity_iterations; ++iter) {
    for (auto &c : contacts) {
      if (!active(c) || c.normal_mass == 0.0) continue;
      Body &a = bodies[c.index_a];
      Body &b = other(c);
      const Vec2 ra = c.contact_point - a.center;
      const Vec2 rb = c.with_wall ? Vec2{} : c.contact_point - b.center;

      if (config.friction_coefficient > 0.0) {
        const Vec2 t = perp(c.normal);
        const double vt = dot(relative_velocity(a, b, ra, rb), t);
        const double limit = config.friction_coefficient * c.accumulated_normal_impulse;
        const double old = c.accumulated_tangent_impulse;
        c.accumulated_tangent_impulse = std::clamp(old - vt * c.tangent_mass, -limit, limit);
        apply(a, b, ra, rb, t * (c.accumulated_tangent_impulse - old));
      }

      const double vn = dot(relative_velocity(a, b, ra, rb), c.normal);
      const double old = c.accumulated_normal_impulse;
      c.accumulated_normal_impulse =
          std::max(old - (vn - c.velocity_bias) * c.normal_mass, 0.0);
      apply(a, b, ra, rb, c.normal * (c.accumulated_normal_impulse - old));
    }
  }
}

void correct_positions(std::span<Body> bodies, std::span<const Contact> contacts,
                       std::span<const WallSegment> walls, const SolverConfig &config) {
  const double slop = config.penetration_slop;
  const double factor = config.position_correction_factor;
  for (int iter = 0; iter < config.position_iterations; ++iter) {
    double worst = 0.0;
    for (const auto &c : contacts) {
      Body &a = bodies[c.index_a];
      if (c.with_wall) {
        if (a.sensor || a.is_static()) continue;
        const auto &wall = walls[c.index_b];
        const auto prox = closest_on_segment(a.center, wall);
        const double excess = a.radius - prox.distance - slop;
        if (excess <= 0.0) continue;
        worst = std::max(worst, excess);
        const Vec2 n = prox.distance > 0.0 ? (prox.closest - a.center) * (1.0 / prox.distance)
                                           : c.normal;
        a.center -= n * (factor * excess);
        continue;
      }
      Body &b = bodies[c.index_b];
      if (!participates(a, b)) continue;
      const Vec2 d = b.center - a.center;
      const double dist = length(d);
      const double excess = a.radius + b.radius - dist - slop;
      if (excess <= 0.0) continue;
      worst = std::max(worst, excess);
      const Vec2 n = dist > 0.0 ? d * (1.0 / dist) : c.normal;
      const double w = a.inverse_mass + b.inverse_mass;
      const double move = factor * excess / w;
      a.center -= n * (move * a.inverse_mass);
      b.center += n * (move * b.inverse_mass);
    }
    if (worst == 0.0) break;
  }
}

void integrate_velocities(std::span<Body> bodies, std::span<const Wrench> wrenches,
                          double dt, const SolverConfig &config) {
  const double lin = 1.0 / (1.0 + dt * config.linear_damping);
  const double ang = 1.0 / (1.0 + dt * config.angular_damping);
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    Body &b = bodies[i];
    if (b.is_static()) continue;
    if (!wrenches.empty()) {
      b.linear_velocity += wrenches[i].force * (b.inverse_mass * dt);
      b.angular_velocity += wrenches[i].torque * b.inverse_inertia * dt;
    }
    b.linear_velocity *= lin;
    b.angular_velocity *= ang;
  }
}

void integrate_positions(std::span<Body> bodies, double dt) {
  for (auto &b : bodies) {
    if (b.is_static()) continue;
    b.center += b.linear_velocity * dt;
    b.orientation = wrap_angle(b.orientation + b.angular_velocity * dt);
  }
}

void integrate(std::span<Body> bodies, std::span<const Wrench> wrenches, double dt,
               const SolverConfig &config) {
  integrate_velocities(bodies, wrenches, dt, config);
  integrate_positions(bodies, dt);
}

void step(std::span<Body> bodies, std::span<const WallSegment> walls,
          std::span<const Wrench> wrenches, double dt, const SolverConfig &config) {
  integrate_velocities(bodies, wrenches, dt, config);
  auto contacts = detect_contacts(bodies, walls);
  solve_velocities(bodies, contacts, config);
  integrate_positions(bodies, dt);
  // Corrections can push a body into a neighbour it was not touching when
  // the contact list was built, so contacts are re-detected between rounds.
  for (int round = 0; round < config.correction_rounds; ++round) {
    contacts = detect_contacts(bodies, walls);
    if (round > 0 && max_penetration(bodies, walls) <= config.penetration_slop + 1e-9) break;
    correct_positions(bodies, contacts, walls, config);
  }
}

double max_penetration(std::span<const Body> bodies, std::span<const WallSegment> walls) {
  double worst = 0.0;
  for (const auto &c : detect_contacts(bodies, walls)) {
    const Body &a = bodies[c.index_a];
    const bool counts = c.with_wall ? !a.sensor : participates(a, bodies[c.index_b]);
    if (counts) worst = std::max(worst, c.penetration_depth);
  }
  return worst;
}

double kinetic_energy(std::span<const Body> bodies) {
  double e = 0.0;
  for (const auto &b : bodies) {
    if (b.is_static()) continue;
    e += 0.5 * length_squared(b.linear_velocity) / b.inverse_mass;
    if (b.inverse_inertia > 0.0)
      e += 0.5 * b.angular_velocity * b.angular_velocity / b.inverse_inertia;
  }
  return e;
}

std::optional<double> ray_circle(Vec2 origin, Vec2 direction, Vec2 center, double radius) {
  const Vec2 m = origin - center;
  const double c = length_squared(m) - radius * radius;
  if (c <= 0.0) return 0.0;
  const double b = dot(m, direction);
  if (b > 0.0) return std::nullopt;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  return -b - std::sqrt(disc);
}

std::optional<double> ray_segment(Vec2 origin, Vec2 direction, const WallSegment &wall) {
  const Vec2 e = wall.b - wall.a;
  const double denom = cross(direction, e);
  if (denom == 0.0) return std::nullopt;
  const Vec2 w = wall.a - origin;
  const double t = cross(w, e) / denom;
  const double u = cross(w, direction) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<RayHit> raycast(Vec2 origin, Vec2 direction, double max_range,
                              std::span<const Body> bodies,
                              std::span<const WallSegment> walls, int ignore_index,
                              const std::vector<int> *candidates) {
  std::optional<RayHit> best;
  double best_d = max_range;
  auto consider_body = [&](int i) {
    if (i == ignore_index) return;
    const auto &b = bodies[i];
    if (auto d = ray_circle(origin, direction, b.center, b.radius); d && *d <= best_d) {
      if (best && *d == best_d && best->kind == HitKind::body && best->index < i) return;
      best_d = *d;
      best = RayHit{*d, HitKind::body, i, b.tag};
    }
  };
  if (candidates) {
    for (int i : *candidates) consider_body(i);
  } else {
    for (int i = 0; i < static_cast<int>(bodies.size()); ++i) consider_body(i);
  }
  for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
    if (auto d = ray_segment(origin, direction, walls[w]); d && *d < best_d) {
      best_d = *d;
      best = RayHit{*d, HitKind::wall, w, -1};
    }
  }
  return best;
}

}  // namespace rewevo::physics
