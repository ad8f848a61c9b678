#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rewevo/random.hpp"
#include "rewevo/reward.hpp"
#include "rewevo/vec2.hpp"

namespace rewevo {

// h(t, e) = kappa_h / (1 + alpha_e exp(beta_he e)) + alpha_a exp(beta_a t)
struct HazardParams {
  double kappa_h = 0.01;
  double alpha_e = 0.02;
  double beta_he = 0.2;
  double alpha_a = 2e-7;  // age (Gompertz) scale
  double beta_a = 4e-6;   // age slope, 1/steps
};

enum class BirthOrientation {
  increasing,  // kappa_b / (1 + exp(-beta_b e))
  as_printed,  // kappa_b / (1 + exp(+beta_b e))
};

struct BirthParams {
  double kappa_b = 4e-4;
  double beta_b = 0.1;
  BirthOrientation orientation = BirthOrientation::increasing;
};

struct MutationParams {
  double cauchy_scale = 0.02;
  double clip_min = -10.0;
  double clip_max = 10.0;
};

struct ReproductionParams {
  double energy_share_ratio = 0.4;  // eta
  double placement_std = 0.08;      // fraction of arena width
  int placement_attempts = 10;
};

// Per-step death probability, clamped to [0, 1].
double hazard(double age, double energy, const HazardParams &params);

// Energy term of the hazard only (no age term, no clamp).
double energy_hazard(double energy, const HazardParams &params);

// exp(-integral_0^age h(s, energy) ds) at constant energy, closed form.
double survival(double age, double energy, const HazardParams &params);

double birth_probability(double energy, const BirthParams &params);

// Independent Cauchy(0, scale) perturbation of every active weight,
// then clipped to [clip_min, clip_max].
RewardParams mutate_weights(const RewardParams &parent, Rng &rng, const MutationParams &params);

// Endpoints of `trials` independent random walks of `steps` mutations each,
// starting at (w_food, w_act) = (0, 0).
std::vector<RewardParams> random_walk_characterization(int steps, int trials, Rng &rng,
                                                       const MutationParams &params);

struct EnergySplit {
  double parent;
  double child;
};

// child = eta * e, parent = e - child.
EnergySplit split_energy(double parent_energy, double eta);

// Samples up to `placement_attempts` positions from an isotropic Gaussian
// around the parent (std = placement_std * arena_width) and returns the first
// one `is_free` accepts.
std::optional<Vec2> try_place_child(Vec2 parent_position, double arena_width,
                                    const std::function<bool(Vec2)> &is_free, Rng &rng,
                                    const ReproductionParams &params);

}  // namespace rewevo
