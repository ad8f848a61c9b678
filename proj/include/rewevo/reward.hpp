#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "rewevo/random.hpp"

namespace rewevo {

enum class FoodType : int { normal = 0, poor = 1, poison = 2 };
inline constexpr int kFoodTypeCount = 3;

std::string_view to_string(FoodType type);
std::optional<FoodType> food_type_from_string(std::string_view name);

using EatenCounts = std::array<int, kFoodTypeCount>;

// Heritable reward weights. `w_poor` / `w_poison` are present only in
// experiments that contain that food type.
struct RewardParams {
  double w_food = 0.0;
  double w_act = 0.0;
  std::optional<double> w_poor;
  std::optional<double> w_poison;

  // Active weights in canonical order: food, act, then poor or poison.
  std::vector<double> to_vector() const;
  // Inverse of to_vector for the given layout.
  static RewardParams from_vector(const std::vector<double> &values, bool has_poor,
                                  bool has_poison);
  friend bool operator==(const RewardParams &, const RewardParams &) = default;
};

struct RewardConfig {
  double c_act = 0.01;
  double init_std = 0.1;
  double clip_min = -10.0;
  double clip_max = 10.0;
};

// r = w_food n_normal + w_poor n_poor + w_poison n_poison + c_act w_act |a|
double compute_reward(const RewardParams &params, const EatenCounts &eaten,
                      double action_norm, const RewardConfig &config);

// Founder weights ~ Normal(0, init_std), clipped.
RewardParams sample_initial_weights(Rng &rng, const RewardConfig &config, bool has_poor,
                                    bool has_poison);

}  // namespace rewevo
