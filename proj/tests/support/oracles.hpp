#pragma once

// Reference computations written independently of the library code paths
// they check: direct formula evaluation, brute-force sums and naive loops.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "rewevo/physics.hpp"
#include "rewevo/rl.hpp"

namespace oracle {

// h(t, e) evaluated literally from the printed formula.
inline double hazard(double t, double e, double kappa_h = 0.01, double alpha_e = 0.02,
                     double beta_he = 0.2, double alpha_a = 2e-7, double beta_a = 4e-6) {
  return kappa_h / (1.0 + alpha_e * std::exp(beta_he * e)) + alpha_a * std::exp(beta_a * t);
}

// Increasing-orientation birth sigmoid.
inline double birth(double e, double kappa_b = 4e-4, double beta_b = 0.1) {
  return kappa_b / (1.0 + std::exp(-beta_b * e));
}

// exp(-integral_0^t h) by the composite trapezoid rule on a uniform grid.
inline double survival_trapezoid(double t, double e, int panels) {
  if (t == 0.0) return 1.0;
  const double dt = t / panels;
  double integral = 0.5 * (hazard(0.0, e) + hazard(t, e));
  for (int i = 1; i < panels; ++i) integral += hazard(i * dt, e);
  return std::exp(-integral * dt);
}

// A_t = sum_k (gamma lambda)^k delta_{t+k}, truncated at the first done.
inline std::vector<double> gae_bruteforce(const std::vector<double> &rewards,
                                          const std::vector<double> &values, double bootstrap,
                                          const std::vector<std::uint8_t> &dones, double gamma,
                                          double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? values[t + 1] : bootstrap;
    delta[t] = rewards[t] + gamma * next * (1.0 - dones[t]) - values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += weight * delta[k];
      if (dones[k]) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

// Discounted return with bootstrap, no dones.
inline std::vector<double> discounted_returns(const std::vector<double> &rewards, double bootstrap,
                                              double gamma) {
  const std::size_t n = rewards.size();
  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0, w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      sum += w * rewards[k];
      w *= gamma;
    }
    g[t] = sum + w * bootstrap;
  }
  return g;
}

struct ForwardResult {
  double mean[2];
  double stddev[2];
  double value;
};

// Scalar-loop forward pass over the flat parameter layout accessors.
inline ForwardResult forward_naive(const rewevo::rl::PolicyParams &p, const std::vector<double> &x) {
  const int h = p.hidden(), d = p.obs_dim();
  const auto w1 = p.w1();
  const auto b1 = p.b1();
  const auto w2 = p.w2();
  const auto b2 = p.b2();
  std::vector<double> h1(h), h2(h);
  for (int i = 0; i < h; ++i) {
    double s = b1(i);
    for (int j = 0; j < d; ++j) s += w1(i, j) * x[j];
    h1[i] = std::tanh(s);
  }
  for (int i = 0; i < h; ++i) {
    double s = b2(i);
    for (int j = 0; j < h; ++j) s += w2(i, j) * h1[j];
    h2[i] = std::tanh(s);
  }
  ForwardResult r{};
  for (int a = 0; a < 2; ++a) {
    double s = p.b_pi()(a);
    for (int j = 0; j < h; ++j) s += p.w_pi()(a, j) * h2[j];
    r.mean[a] = s;
    r.stddev[a] = std::exp(p.log_std()(a));
  }
  double v = p.b_v()(0);
  for (int j = 0; j < h; ++j) v += p.w_v()(0, j) * h2[j];
  r.value = v;
  return r;
}

// Nearest analytic intersection over every object, no broadphase.
struct Hit {
  double distance;
  bool wall;
  int index;
};

inline std::optional<double> ray_circle_quadratic(rewevo::Vec2 o, rewevo::Vec2 d, rewevo::Vec2 c,
                                                  double r) {
  // |o + t d - c|^2 = r^2 with |d| = 1.
  const double fx = o.x - c.x, fy = o.y - c.y;
  const double b = fx * d.x + fy * d.y;
  const double cc = fx * fx + fy * fy - r * r;
  if (cc <= 0.0) return 0.0;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  if (t < 0.0) return std::nullopt;
  return t;
}

inline std::optional<double> ray_segment_param(rewevo::Vec2 o, rewevo::Vec2 d, rewevo::Vec2 a,
                                               rewevo::Vec2 b) {
  // Solve o + t d = a + s (b - a).
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double den = d.x * ey - d.y * ex;
  if (std::abs(den) < 1e-15) return std::nullopt;
  const double ax = a.x - o.x, ay = a.y - o.y;
  const double t = (ax * ey - ay * ex) / den;
  const double s = (ax * d.y - ay * d.x) / den;
  if (t < 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

inline std::optional<Hit> raycast_bruteforce(rewevo::Vec2 o, rewevo::Vec2 d, double max_range,
                                             const std::vector<rewevo::physics::Body> &bodies,
                                             const std::vector<rewevo::physics::WallSegment> &walls) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto t = ray_circle_quadratic(o, d, bodies[i].center, bodies[i].radius);
    if (t && *t <= max_range && (!best || *t < best->distance))
      best = Hit{*t, false, static_cast<int>(i)};
  }
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto t = ray_segment_param(o, d, walls[i].a, walls[i].b);
    if (t && *t <= max_range && (!best || *t < best->distance))
      best = Hit{*t, true, static_cast<int>(i)};
  }
  return best;
}

// Deepest overlap among non-sensor dynamic pairs and dynamic circles vs walls.
inline double max_penetration_bruteforce(const std::vector<rewevo::physics::Body> &bodies,
                                         const std::vector<rewevo::physics::WallSegment> &walls) {
  double worst = 0.0;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto &a = bodies[i];
    if (a.sensor) continue;
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      const auto &b = bodies[j];
      if (b.sensor || (a.inverse_mass == 0.0 && b.inverse_mass == 0.0)) continue;
      const double dx = a.center.x - b.center.x, dy = a.center.y - b.center.y;
      worst = std::max(worst, a.radius + b.radius - std::sqrt(dx * dx + dy * dy));
    }
    if (a.inverse_mass == 0.0) continue;
    for (const auto &w : walls) {
      const double ex = w.b.x - w.a.x, ey = w.b.y - w.a.y;
      double s = ((a.center.x - w.a.x) * ex + (a.center.y - w.a.y) * ey) / (ex * ex + ey * ey);
      s = std::clamp(s, 0.0, 1.0);
      const double qx = w.a.x + s * ex - a.center.x, qy = w.a.y + s * ey - a.center.y;
      worst = std::max(worst, a.radius - std::sqrt(qx * qx + qy * qy));
    }
  }
  return worst;
}

inline double kinetic_energy_naive(const std::vector<rewevo::physics::Body> &bodies) {
  double k = 0.0;
  for (const auto &b : bodies) {
    if (b.inverse_mass > 0.0)
      k += 0.5 * (b.linear_velocity.x * b.linear_velocity.x +
                  b.linear_velocity.y * b.linear_velocity.y) /
           b.inverse_mass;
    if (b.inverse_inertia > 0.0 && b.inverse_mass > 0.0)
      k += 0.5 * b.angular_velocity * b.angular_velocity / b.inverse_inertia;
  }
  return k;
}

struct Scene {
  std::vector<rewevo::physics::Body> bodies;
  std::vector<rewevo::physics::WallSegment> walls;
};

// `n` circles inside a closed box, placed by rejection so that they start
// separated, with random velocities and spins. Uses std::mt19937_64 so the
// scene generator shares no code with the library RNG.
inline Scene random_scene(std::mt19937_64 &gen, int n, double box = 40.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scene s;
  s.walls = {{{0, 0}, {box, 0}}, {{box, 0}, {box, box}}, {{box, box}, {0, box}}, {{0, box}, {0, 0}}};
  int id = 0;
  while (static_cast<int>(s.bodies.size()) < n) {
    rewevo::physics::Body b;
    b.id = id;
    b.radius = 0.8 + 2.2 * unit(gen);
    b.center = {b.radius + (box - 2 * b.radius) * unit(gen),
                b.radius + (box - 2 * b.radius) * unit(gen)};
    bool clear = true;
    for (const auto &o : s.bodies) {
      const double dx = o.center.x - b.center.x, dy = o.center.y - b.center.y;
      if (std::sqrt(dx * dx + dy * dy) < o.radius + b.radius) clear = false;
    }
    if (!clear) continue;
    const double mass = 0.5 + 2.0 * unit(gen);
    b.inverse_mass = 1.0 / mass;
    b.inverse_inertia = 1.0 / (0.5 * mass * b.radius * b.radius);
    b.linear_velocity = {4.0 * (unit(gen) - 0.5), 4.0 * (unit(gen) - 0.5)};
    b.angular_velocity = 0.2 * (unit(gen) - 0.5);
    b.orientation = 6.0 * (unit(gen) - 0.5);
    s.bodies.push_back(b);
    ++id;
  }
  return s;
}

// Kolmogorov asymptotic survival Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

// Two-sample Kolmogorov-Smirnov test.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
