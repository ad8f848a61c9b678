#pragma once

// Per-agent learner: tanh MLP actor-critic with a diagonal Gaussian policy,
// GAE, clipped-surrogate PPO and Adam. All parameters live in one flat
// vector so the optimizer and checkpoints treat them uniformly.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rewevo/random.hpp"

namespace rewevo::rl {

inline constexpr int kActionDim = 2;

struct PpoHyper {
  double gamma = 0.999;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 10;
  int minibatch = 256;
  double entropy_coeff = 0.0;
  double value_coeff = 0.5;
  double lr = 3e-4;
  double adam_eps = 1e-7;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int rollout_steps = 1024;
  int hidden = 64;
};

class PolicyParams {
 public:
  PolicyParams() = default;
  PolicyParams(int obs_dim, int hidden);

  static std::size_t parameter_count(int obs_dim, int hidden);

  int obs_dim() const { return obs_dim_; }
  int hidden() const { return hidden_; }

  Eigen::VectorXd &flat() { return flat_; }
  const Eigen::VectorXd &flat() const { return flat_; }

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  // Views into flat(); the same offsets apply to gradient vectors.
  MatMap w1(Eigen::VectorXd &v) const { return mat(v, off_w1_, hidden_, obs_dim_); }
  VecMap b1(Eigen::VectorXd &v) const { return vec(v, off_b1_, hidden_); }
  MatMap w2(Eigen::VectorXd &v) const { return mat(v, off_w2_, hidden_, hidden_); }
  VecMap b2(Eigen::VectorXd &v) const { return vec(v, off_b2_, hidden_); }
  MatMap w_pi(Eigen::VectorXd &v) const { return mat(v, off_wpi_, kActionDim, hidden_); }
  VecMap b_pi(Eigen::VectorXd &v) const { return vec(v, off_bpi_, kActionDim); }
  VecMap log_std(Eigen::VectorXd &v) const { return vec(v, off_logstd_, kActionDim); }
  MatMap w_v(Eigen::VectorXd &v) const { return mat(v, off_wv_, 1, hidden_); }
  VecMap b_v(Eigen::VectorXd &v) const { return vec(v, off_bv_, 1); }

  ConstMatMap w1() const { return cmat(off_w1_, hidden_, obs_dim_); }
  ConstVecMap b1() const { return cvec(off_b1_, hidden_); }
  ConstMatMap w2() const { return cmat(off_w2_, hidden_, hidden_); }
  ConstVecMap b2() const { return cvec(off_b2_, hidden_); }
  ConstMatMap w_pi() const { return cmat(off_wpi_, kActionDim, hidden_); }
  ConstVecMap b_pi() const { return cvec(off_bpi_, kActionDim); }
  ConstVecMap log_std() const { return cvec(off_logstd_, kActionDim); }
  ConstMatMap w_v() const { return cmat(off_wv_, 1, hidden_); }
  ConstVecMap b_v() const { return cvec(off_bv_, 1); }

  MatMap w1() { return w1(flat_); }
  VecMap b1() { return b1(flat_); }
  MatMap w2() { return w2(flat_); }
  VecMap b2() { return b2(flat_); }
  MatMap w_pi() { return w_pi(flat_); }
  VecMap b_pi() { return b_pi(flat_); }
  VecMap log_std() { return log_std(flat_); }
  MatMap w_v() { return w_v(flat_); }
  VecMap b_v() { return b_v(flat_); }

 private:
  MatMap mat(Eigen::VectorXd &v, Eigen::Index off, Eigen::Index r, Eigen::Index c) const {
    return MatMap(v.data() + off, r, c);
  }
  VecMap vec(Eigen::VectorXd &v, Eigen::Index off, Eigen::Index n) const {
    return VecMap(v.data() + off, n);
  }
  ConstMatMap cmat(Eigen::Index off, Eigen::Index r, Eigen::Index c) const {
    return ConstMatMap(flat_.data() + off, r, c);
  }
  ConstVecMap cvec(Eigen::Index off, Eigen::Index n) const {
    return ConstVecMap(flat_.data() + off, n);
  }

  int obs_dim_ = 0;
  int hidden_ = 0;
  Eigen::Index off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0, off_wpi_ = 0, off_bpi_ = 0,
               off_logstd_ = 0, off_wv_ = 0, off_bv_ = 0;
  Eigen::VectorXd flat_;
};

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;

  static AdamState zeros(Eigen::Index n);
};

struct PolicyOutput {
  Eigen::Vector2d mean;
  Eigen::Vector2d stddev;
  double value = 0.0;
};

struct ActionSample {
  Eigen::Vector2d action;
  double log_prob = 0.0;
};

// Throws std::invalid_argument when the observation size does not match.
PolicyOutput policy_forward(const PolicyParams &params, std::span<const double> observation);

// Hidden activations of both layers, exposed for init-scale diagnostics.
struct TrunkActivations {
  Eigen::VectorXd pre1, h1, pre2, h2;
};
TrunkActivations trunk_forward(const PolicyParams &params, std::span<const double> observation);

double gaussian_log_prob(const Eigen::Vector2d &action, const Eigen::Vector2d &mean,
                         const Eigen::Vector2d &stddev);
ActionSample sample_action(const Eigen::Vector2d &mean, const Eigen::Vector2d &stddev, Rng &rng);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap_value, std::span<const std::uint8_t> dones, double gamma,
                      double lambda);

// Fixed-capacity rollout storage for one agent.
class RolloutBuffer {
 public:
  RolloutBuffer() = default;
  RolloutBuffer(int obs_dim, int capacity);

  int capacity() const { return capacity_; }
  int size() const { return size_; }
  int obs_dim() const { return obs_dim_; }
  bool full() const { return size_ == capacity_; }
  void clear() { size_ = 0; }

  // Appends a transition; its reward is filled in after the environment step.
  void add(std::span<const double> observation, const Eigen::Vector2d &action, double log_prob,
           double value);
  void set_last_reward(double reward);
  void set_last_done(bool done);

  const Eigen::MatrixXd &observations() const { return observations_; }
  const Eigen::MatrixXd &actions() const { return actions_; }
  const std::vector<double> &log_probs() const { return log_probs_; }
  const std::vector<double> &values() const { return values_; }
  const std::vector<double> &rewards() const { return rewards_; }
  const std::vector<std::uint8_t> &dones() const { return dones_; }

  // Raw storage access for checkpoint restore.
  Eigen::MatrixXd &mutable_observations() { return observations_; }
  Eigen::MatrixXd &mutable_actions() { return actions_; }
  std::vector<double> &mutable_log_probs() { return log_probs_; }
  std::vector<double> &mutable_values() { return values_; }
  std::vector<double> &mutable_rewards() { return rewards_; }
  std::vector<std::uint8_t> &mutable_dones() { return dones_; }
  void set_size(int size) { size_ = size; }

 private:
  int obs_dim_ = 0;
  int capacity_ = 0;
  int size_ = 0;
  Eigen::MatrixXd observations_;  // obs_dim x capacity
  Eigen::MatrixXd actions_;       // 2 x capacity
  std::vector<double> log_probs_, values_, rewards_;
  std::vector<std::uint8_t> dones_;
};

// One minibatch in column layout.
struct Minibatch {
  Eigen::MatrixXd observations;  // obs_dim x B
  Eigen::MatrixXd actions;       // 2 x B
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// loss = -mean(min(rho A, clip(rho, 1-eps, 1+eps) A))
//        + value_coeff * mean((V - R)^2) - entropy_coeff * entropy
// When `gradient` is non-null it receives dloss/dparams (same layout as flat()).
LossTerms ppo_loss(const PolicyParams &params, const Minibatch &batch, const PpoHyper &hyper,
                   Eigen::VectorXd *gradient = nullptr);

void adam_step(Eigen::VectorXd &params, const Eigen::VectorXd &grads, AdamState &state,
               double lr, double eps, double beta1 = 0.9, double beta2 = 0.999);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  int minibatches = 0;
  bool aborted = false;
};

// Normalizes advantages over the rollout (population std), then runs
// `epochs` passes of shuffled minibatches. A non-finite loss or gradient
// restores the parameters and optimizer state from before the update.
UpdateStats ppo_update(PolicyParams &params, AdamState &adam, const RolloutBuffer &buffer,
                       double bootstrap_value, const PpoHyper &hyper, Rng &rng);

// Mean 0, population std 1; all zeros when the input is constant.
std::vector<double> normalize_advantages(std::span<const double> advantages);

struct Learner {
  PolicyParams params;
  AdamState adam;
};

// Orthogonal init: trunk gain sqrt(2), actor head 0.01, critic head 1;
// zero biases and log-std.
Learner init_policy(Rng &rng, int obs_dim, int hidden);

}  // namespace rewevo::rl
