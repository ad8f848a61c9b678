#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "rewevo/rl.hpp"

using namespace rewevo;
using namespace rewevo::rl;

using fixture::random_params;
using fixture::random_vector;
using fixture::toy_batch;

TEST_CASE("forward pass") {
  PolicyParams zero(5, 8);
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto out = policy_forward(zero, x);
  CHECK(out.mean.isZero());
  CHECK(out.stddev == Eigen::Vector2d(1, 1));
  CHECK(out.value == 0.0);

  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(rng, 7, 16);
    const auto obs = random_vector(rng, 7);
    const auto got = policy_forward(p, obs);
    const auto want = oracle::forward_naive(p, obs);
    for (int a = 0; a < 2; ++a) {
      CHECK(std::abs(got.mean(a) - want.mean[a]) < 1e-6);
      CHECK(std::abs(got.stddev(a) - want.stddev[a]) < 1e-6);
    }
    CHECK(std::abs(got.value - want.value) < 1e-6);
  }

  CHECK_THROWS_AS(policy_forward(zero, std::vector<double>{1, 2}), std::invalid_argument);

  const auto p = random_params(rng, 7, 16);
  auto huge = random_vector(rng, 7);
  for (auto &v : huge) v *= 1e6;
  const auto act = trunk_forward(p, huge);
  CHECK(act.h1.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(act.h2.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("action sampling") {
  Rng rng(1);
  const Eigen::Vector2d mean(0.3, -2.0);
  const auto s = sample_action(mean, Eigen::Vector2d(1e-12, 1e-12), rng);
  CHECK((s.action - mean).cwiseAbs().maxCoeff() < 1e-9);

  const Eigen::Vector2d x(0.7, -1.2);
  const double want = -0.5 * (0.49 + 1.44) - std::log(2 * std::numbers::pi);
  CHECK(gaussian_log_prob(x, Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()) ==
        doctest::Approx(want).epsilon(1e-14));

  double sum[2] = {0, 0}, sq[2] = {0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto a = sample_action(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones(), rng);
    CHECK(a.log_prob == doctest::Approx(gaussian_log_prob(a.action, Eigen::Vector2d::Zero(),
                                                          Eigen::Vector2d::Ones())));
    for (int d = 0; d < 2; ++d) {
      sum[d] += a.action(d);
      sq[d] += a.action(d) * a.action(d);
    }
  }
  for (int d = 0; d < 2; ++d) {
    const double m = sum[d] / n;
    const double var = (sq[d] - n * m * m) / (n - 1);
    CHECK(std::abs(var - 1.0) < 0.05);
  }
}

TEST_CASE("GAE examples") {
  const std::vector<std::uint8_t> none1{0}, none2{0, 0};
  auto g = compute_gae(std::vector<double>{1}, std::vector<double>{0}, 0, none1, 0.999, 0.95);
  CHECK(g.advantages[0] == doctest::Approx(1.0));

  g = compute_gae(std::vector<double>{0, 1}, std::vector<double>{0.5, 0.25}, 0, none2, 0.999,
                  0.95);
  CHECK(g.advantages[0] == doctest::Approx(0.4615375).epsilon(1e-12));
  CHECK(g.advantages[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(g.returns[0] == doctest::Approx(0.9615375).epsilon(1e-12));
  CHECK(g.returns[1] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS(compute_gae(std::vector<double>{0, 1}, std::vector<double>{0.5}, 0, none2, 0.9,
                           0.9));
}

TEST_CASE("GAE matches brute force") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution done(0.15);
  double worst = 0.0, worst_mc = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(10), v(10);
    std::vector<std::uint8_t> d(10), none(10, 0);
    for (int t = 0; t < 10; ++t) {
      r[t] = normal(gen);
      v[t] = normal(gen);
      d[t] = done(gen);
    }
    const double boot = normal(gen);
    const auto got = compute_gae(r, v, boot, d, 0.999, 0.95);
    const auto want = oracle::gae_bruteforce(r, v, boot, d, 0.999, 0.95);
    for (int t = 0; t < 10; ++t) {
      worst = std::max(worst, std::abs(got.advantages[t] - want[t]));
      CHECK(got.returns[t] == doctest::Approx(got.advantages[t] + v[t]));
    }

    const auto mc = compute_gae(r, v, boot, none, 0.99, 1.0);
    const auto ret = oracle::discounted_returns(r, boot, 0.99);
    for (int t = 0; t < 10; ++t) worst_mc = std::max(worst_mc, std::abs(mc.advantages[t] - (ret[t] - v[t])));
  }
  CHECK(worst < 1e-8);
  CHECK(worst_mc < 1e-8);
}

TEST_CASE("clipped surrogate") {
  Rng rng(5);
  auto p = random_params(rng, 4, 8);
  Minibatch b;
  b.observations = Eigen::MatrixXd::Constant(4, 1, 0.3);
  const std::vector<double> x(4, 0.3);
  const auto out = policy_forward(p, x);
  b.actions = out.mean + Eigen::Vector2d(0.1, -0.2);
  const double logp = gaussian_log_prob(b.actions.col(0), out.mean, out.stddev);
  b.old_log_probs = Eigen::VectorXd::Constant(1, logp - std::log(1.3));
  b.advantages = Eigen::VectorXd::Constant(1, 2.0);
  b.returns = Eigen::VectorXd::Constant(1, out.value);
  PpoHyper h;
  auto terms = ppo_loss(p, b, h);
  CHECK(terms.policy == doctest::Approx(-1.2 * 2.0).epsilon(1e-12));
  CHECK(terms.clip_fraction == 1.0);
  CHECK(terms.value == doctest::Approx(0.0));

  // At epoch start the ratio is 1 for every transition.
  b.old_log_probs(0) = logp;
  terms = ppo_loss(p, b, h);
  CHECK(terms.policy == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(terms.approx_kl) < 1e-15);
  CHECK(terms.clip_fraction == 0.0);
}

TEST_CASE("zero advantages leave only the value gradient") {
  Rng rng(6);
  const auto p = random_params(rng, 4, 8);
  auto b = toy_batch(p, rng, 16, 0.0);
  b.advantages.setZero();
  Eigen::VectorXd grad;
  const auto terms = ppo_loss(p, b, PpoHyper{}, &grad);
  CHECK(terms.policy == 0.0);
  PolicyParams view = p;
  CHECK(view.w_pi(grad).isZero());
  CHECK(view.b_pi(grad).isZero());
  CHECK(view.log_std(grad).isZero());
  CHECK_FALSE(view.w_v(grad).isZero());
}

TEST_CASE("loss gradient matches central finite differences") {
  Rng rng(7);
  for (double offset : {0.0, -0.6, 0.6}) {  // inside, above and below the clip band
    auto p = random_params(rng, 4, 8);
    const auto b = toy_batch(p, rng, 32, offset);
    PpoHyper h;
    h.entropy_coeff = 0.01;
    const double worst = fixture::gradient_check(p, b, h);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("Adam") {
  Eigen::VectorXd params = Eigen::VectorXd::LinSpaced(6, -1, 1);
  const Eigen::VectorXd start = params;
  auto state = AdamState::zeros(6);
  adam_step(params, Eigen::VectorXd::Zero(6), state, 3e-4, 1e-7);
  CHECK(params == start);
  CHECK(state.step == 1);

  params = start;
  state = AdamState::zeros(6);
  Eigen::VectorXd g(6);
  g << 0.5, -3.0, 1e-3, -1e-2, 40.0, 2.0;
  adam_step(params, g, state, 3e-4, 1e-7);
  for (int i = 0; i < 6; ++i) {
    const double delta = params(i) - start(i);
    CHECK(std::abs(delta) <= 3e-4 * (1 + 1e-6));
    CHECK(delta * g(i) < 0.0);
    CHECK(std::abs(delta) == doctest::Approx(3e-4).epsilon(1e-3));
  }

  Eigen::VectorXd a = start, c = start;
  auto sa = AdamState::zeros(6), sc = AdamState::zeros(6);
  for (int k = 0; k < 3; ++k) {
    adam_step(a, g, sa, 1e-3, 1e-7);
    adam_step(c, g, sc, 1e-3, 1e-7);
  }
  CHECK(a == c);
  CHECK(sa.first_moment == sc.first_moment);
}

TEST_CASE("advantage normalization") {
  Rng rng(2);
  const auto raw = random_vector(rng, 1024, 37.0);
  const auto n = normalize_advantages(raw);
  double mean = 0, sq = 0;
  for (double v : n) mean += v;
  mean /= n.size();
  for (double v : n) sq += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(std::sqrt(sq / n.size()) - 1.0) < 1e-6);
  const std::vector<double> flat(8, 3.0);
  CHECK(normalize_advantages(flat) == std::vector<double>(8, 0.0));
}

TEST_CASE("policy initialization") {
  Rng a(11), b(11);
  const auto la = init_policy(a, 86, 64);
  const auto lb = init_policy(b, 86, 64);
  CHECK(la.params.flat() == lb.params.flat());
  CHECK(la.params.log_std().isZero());
  CHECK(la.params.b1().isZero());
  CHECK(la.adam.step == 0);
  CHECK(la.adam.first_moment.isZero());

  // Normalized inputs: every component has unit scale.
  Rng inputs(12);
  double s1 = 0, s2 = 0, worst_value = 0;
  long n = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_vector(inputs, 86);
    const auto act = trunk_forward(la.params, x);
    s1 += act.pre1.squaredNorm();
    s2 += act.pre2.squaredNorm();
    n += act.pre1.size();
    worst_value = std::max(worst_value, std::abs(policy_forward(la.params, x).value));
  }
  const double std1 = std::sqrt(s1 / n), std2 = std::sqrt(s2 / n);
  CHECK(std1 >= 0.3);
  CHECK(std1 <= 3.0);
  CHECK(std2 >= 0.3);
  CHECK(std2 <= 3.0);
  CHECK(worst_value <= 3.0);
}

TEST_CASE("rollout buffer and update") {
  PpoHyper h;
  h.rollout_steps = 64;
  h.minibatch = 16;
  h.epochs = 2;
  Rng rng(3);
  auto learner = init_policy(rng, 6, 8);
  RolloutBuffer buffer(6, h.rollout_steps);
  for (int t = 0; t < h.rollout_steps; ++t) {
    const auto x = random_vector(rng, 6);
    const auto out = policy_forward(learner.params, x);
    const auto s = sample_action(out.mean, out.stddev, rng);
    buffer.add(x, s.action, s.log_prob, out.value);
    buffer.set_last_reward((t % 2 ? 1e3 : -1e3) * rng.uniform());
  }
  CHECK(buffer.full());
  const auto before = learner.params.flat();
  Rng update_rng(9);
  const auto stats = ppo_update(learner.params, learner.adam, buffer, 0.0, h, update_rng);
  CHECK_FALSE(stats.aborted);
  CHECK(stats.minibatches == 8);
  CHECK(learner.params.flat().allFinite());
  CHECK(learner.params.flat() != before);
  CHECK(learner.adam.step == 8);

  // A non-finite reward aborts and restores the previous state.
  buffer.set_last_reward(std::numeric_limits<double>::quiet_NaN());
  const auto keep = learner.params.flat();
  const auto keep_step = learner.adam.step;
  const auto bad = ppo_update(learner.params, learner.adam, buffer, 0.0, h, update_rng);
  CHECK(bad.aborted);
  CHECK(learner.params.flat() == keep);
  CHECK(learner.adam.step == keep_step);
}
