#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>

namespace rewevo {

// Counter-based SplitMix64 stream. Every transform below is written out
// explicitly so draws are identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  // Substream keyed by a root seed and an ordered list of integers
  // (purpose tag, step, agent id, ...).
  static Rng derive(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in (0, 1), never exactly zero.
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  double cauchy(double scale);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Purpose tags used when deriving substreams; values are part of the
// reproducibility contract and must not be renumbered.
enum class Stream : std::uint64_t {
  founders = 1,
  action = 2,
  learner = 3,
  birth = 4,
  death = 5,
  placement = 6,
  mutation = 7,
  child_policy = 8,
  food = 9,
  food_init = 10,
  random_walk = 11,
};

std::uint64_t mix64(std::uint64_t z);

template <typename T>
void shuffle(std::span<T> items, Rng &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace rewevo
