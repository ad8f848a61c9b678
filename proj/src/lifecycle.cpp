#include "rewevo/lifecycle.hpp"

#include <algorithm>
#include <cmath>

namespace rewevo {
namespace {

// 1 / (1 + exp(z)) without overflow.
double logistic_complement(double z) {
  if (z > 0.0) {
    const double ez = std::exp(-z);
    return ez / (1.0 + ez);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

double energy_hazard(double energy, const HazardParams &params) {
  const double z = std::log(params.alpha_e) + params.beta_he * energy;
  return params.kappa_h * logistic_complement(z);
}

double hazard(double age, double energy, const HazardParams &params) {
  const double h = energy_hazard(energy, params) + params.alpha_a * std::exp(params.beta_a * age);
  return std::clamp(h, 0.0, 1.0);
}

double survival(double age, double energy, const HazardParams &params) {
  if (age <= 0.0) return 1.0;
  const double cumulative = energy_hazard(energy, params) * age +
                            params.alpha_a / params.beta_a * std::expm1(params.beta_a * age);
  return std::exp(-cumulative);
}

double birth_probability(double energy, const BirthParams &params) {
  const double sign = params.orientation == BirthOrientation::increasing ? -1.0 : 1.0;
  return params.kappa_b * logistic_complement(sign * params.beta_b * energy);
}

RewardParams mutate_weights(const RewardParams &parent, Rng &rng, const MutationParams &params) {
  auto perturb = [&](double w) {
    return std::clamp(w + rng.cauchy(params.cauchy_scale), params.clip_min, params.clip_max);
  };
  RewardParams child;
  child.w_food = perturb(parent.w_food);
  child.w_act = perturb(parent.w_act);
  if (parent.w_poor) child.w_poor = perturb(*parent.w_poor);
  if (parent.w_poison) child.w_poison = perturb(*parent.w_poison);
  return child;
}

std::vector<RewardParams> random_walk_characterization(int steps, int trials, Rng &rng,
                                                       const MutationParams &params) {
  std::vector<RewardParams> endpoints;
  endpoints.reserve(static_cast<std::size_t>(std::max(trials, 0)));
  for (int trial = 0; trial < trials; ++trial) {
    RewardParams w;
    for (int s = 0; s < steps; ++s) w = mutate_weights(w, rng, params);
    endpoints.push_back(w);
  }
  return endpoints;
}

EnergySplit split_energy(double parent_energy, double eta) {
  const double child = eta * parent_energy;
  return {parent_energy - child, child};
}

std::optional<Vec2> try_place_child(Vec2 parent_position, double arena_width,
                                    const std::function<bool(Vec2)> &is_free, Rng &rng,
                                    const ReproductionParams &params) {
  const double stddev = params.placement_std * arena_width;
  for (int attempt = 0; attempt < params.placement_attempts; ++attempt) {
    const double dx = rng.normal(0.0, stddev);
    const double dy = rng.normal(0.0, stddev);
    const Vec2 candidate = parent_position + Vec2{dx, dy};
    if (is_free(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace rewevo
