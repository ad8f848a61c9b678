#pragma once

// Shared test inputs: random policy parameters and a toy PPO minibatch.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rewevo/random.hpp"
#include "rewevo/rl.hpp"

namespace fixture {

inline std::vector<double> random_vector(rewevo::Rng &rng, int n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto &x : v) x = scale * rng.normal();
  return v;
}

inline rewevo::rl::PolicyParams random_params(rewevo::Rng &rng, int obs_dim, int hidden) {
  rewevo::rl::PolicyParams p(obs_dim, hidden);
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) p.flat()(i) = 0.5 * rng.normal();
  return p;
}

// Old log-probs sit `log_ratio_offset` (plus small noise) below the current
// policy so ratios land inside, above or below the clip band, away from the
// surrogate's kinks.
inline rewevo::rl::Minibatch toy_batch(const rewevo::rl::PolicyParams &p, rewevo::Rng &rng, int n,
                                       double log_ratio_offset) {
  using namespace rewevo::rl;
  Minibatch b;
  b.observations.resize(p.obs_dim(), n);
  b.actions.resize(kActionDim, n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto x = random_vector(rng, p.obs_dim());
    for (int d = 0; d < p.obs_dim(); ++d) b.observations(d, k) = x[d];
    const auto out = policy_forward(p, x);
    const auto s = sample_action(out.mean, out.stddev, rng);
    b.actions.col(k) = s.action;
    b.old_log_probs(k) = s.log_prob + log_ratio_offset + 0.05 * rng.normal();
    b.advantages(k) = rng.normal();
    b.returns(k) = rng.normal();
  }
  return b;
}

// Max over parameters of |analytic - central difference| / max(|.|, |.|, 1e-6).
inline double gradient_check(rewevo::rl::PolicyParams p, const rewevo::rl::Minibatch &b,
                             const rewevo::rl::PpoHyper &h, double eps = 1e-5) {
  Eigen::VectorXd grad;
  rewevo::rl::ppo_loss(p, b, h, &grad);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) {
    const double keep = p.flat()(i);
    p.flat()(i) = keep + eps;
    const double up = rewevo::rl::ppo_loss(p, b, h).total;
    p.flat()(i) = keep - eps;
    const double down = rewevo::rl::ppo_loss(p, b, h).total;
    p.flat()(i) = keep;
    const double fd = (up - down) / (2 * eps);
    const double scale = std::max({std::abs(fd), std::abs(grad(i)), 1e-6});
    worst = std::max(worst, std::abs(fd - grad(i)) / scale);
  }
  return worst;
}

}  // namespace fixture
