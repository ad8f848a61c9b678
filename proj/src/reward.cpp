#include "rewevo/reward.hpp"

#include <algorithm>
#include <stdexcept>

namespace rewevo {

std::string_view to_string(FoodType type) {
  switch (type) {
    case FoodType::normal:
      return "normal";
    case FoodType::poor:
      return "poor";
    case FoodType::poison:
      return "poison";
  }
  return "unknown";
}

std::optional<FoodType> food_type_from_string(std::string_view name) {
  if (name == "normal") return FoodType::normal;
  if (name == "poor") return FoodType::poor;
  if (name == "poison") return FoodType::poison;
  return std::nullopt;
}

std::vector<double> RewardParams::to_vector() const {
  std::vector<double> v{w_food, w_act};
  if (w_poor) v.push_back(*w_poor);
  if (w_poison) v.push_back(*w_poison);
  return v;
}

RewardParams RewardParams::from_vector(const std::vector<double> &values, bool has_poor,
                                       bool has_poison) {
  const std::size_t expected = 2 + (has_poor ? 1 : 0) + (has_poison ? 1 : 0);
  if (values.size() != expected) throw std::invalid_argument("reward weight count mismatch");
  RewardParams p;
  p.w_food = values[0];
  p.w_act = values[1];
  std::size_t i = 2;
  if (has_poor) p.w_poor = values[i++];
  if (has_poison) p.w_poison = values[i++];
  return p;
}

double compute_reward(const RewardParams &params, const EatenCounts &eaten,
                      double action_norm, const RewardConfig &config) {
  double r = params.w_food * eaten[static_cast<int>(FoodType::normal)];
  if (params.w_poor) r += *params.w_poor * eaten[static_cast<int>(FoodType::poor)];
  if (params.w_poison) r += *params.w_poison * eaten[static_cast<int>(FoodType::poison)];
  return r + config.c_act * params.w_act * action_norm;
}

RewardParams sample_initial_weights(Rng &rng, const RewardConfig &config, bool has_poor,
                                    bool has_poison) {
  auto draw = [&] {
    return std::clamp(rng.normal(0.0, config.init_std), config.clip_min, config.clip_max);
  };
  RewardParams p;
  p.w_food = draw();
  p.w_act = draw();
  if (has_poor) p.w_poor = draw();
  if (has_poison) p.w_poison = draw();
  return p;
}

}  // namespace rewevo
