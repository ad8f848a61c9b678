#include "rewevo/rl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace rewevo::rl {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

Eigen::MatrixXd orthogonal(Rng &rng, int rows, int cols, double gain) {
  const int big = std::max(rows, cols), small = std::min(rows, cols);
  Eigen::MatrixXd g(big, small);
  for (int c = 0; c < small; ++c)
    for (int r = 0; r < big; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd rmat = qr.matrixQR().topLeftCorner(small, small);
  for (int c = 0; c < small; ++c)
    if (rmat(c, c) < 0.0) q.col(c) = -q.col(c);
  Eigen::MatrixXd out = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  return gain * out;
}

}  // namespace

PolicyParams::PolicyParams(int obs_dim, int hidden) : obs_dim_(obs_dim), hidden_(hidden) {
  if (obs_dim <= 0 || hidden <= 0) throw std::invalid_argument("network sizes must be positive");
  Eigen::Index off = 0;
  auto take = [&](Eigen::Index n) {
    const Eigen::Index at = off;
    off += n;
    return at;
  };
  off_w1_ = take(static_cast<Eigen::Index>(hidden) * obs_dim);
  off_b1_ = take(hidden);
  off_w2_ = take(static_cast<Eigen::Index>(hidden) * hidden);
  off_b2_ = take(hidden);
  off_wpi_ = take(static_cast<Eigen::Index>(kActionDim) * hidden);
  off_bpi_ = take(kActionDim);
  off_logstd_ = take(kActionDim);
  off_wv_ = take(hidden);
  off_bv_ = take(1);
  flat_ = Eigen::VectorXd::Zero(off);
}

std::size_t PolicyParams::parameter_count(int obs_dim, int hidden) {
  const std::size_t h = hidden, d = obs_dim;
  return h * d + h + h * h + h + kActionDim * h + 2 * kActionDim + h + 1;
}

AdamState AdamState::zeros(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

TrunkActivations trunk_forward(const PolicyParams &params, std::span<const double> observation) {
  if (static_cast<int>(observation.size()) != params.obs_dim())
    throw std::invalid_argument("observation dimension " + std::to_string(observation.size()) +
                                " does not match policy input " +
                                std::to_string(params.obs_dim()));
  const Eigen::Map<const Eigen::VectorXd> o(observation.data(), params.obs_dim());
  TrunkActivations t;
  t.pre1 = params.w1() * o + params.b1();
  t.h1 = t.pre1.array().tanh();
  t.pre2 = params.w2() * t.h1 + params.b2();
  t.h2 = t.pre2.array().tanh();
  return t;
}

PolicyOutput policy_forward(const PolicyParams &params, std::span<const double> observation) {
  const auto t = trunk_forward(params, observation);
  PolicyOutput out;
  out.mean = params.w_pi() * t.h2 + params.b_pi();
  out.stddev = params.log_std().array().exp();
  out.value = (params.w_v() * t.h2)(0) + params.b_v()(0);
  return out;
}

double gaussian_log_prob(const Eigen::Vector2d &action, const Eigen::Vector2d &mean,
                         const Eigen::Vector2d &stddev) {
  double lp = 0.0;
  for (int d = 0; d < kActionDim; ++d) {
    const double z = (action(d) - mean(d)) / stddev(d);
    lp += -0.5 * z * z - std::log(stddev(d)) - kHalfLog2Pi;
  }
  return lp;
}

ActionSample sample_action(const Eigen::Vector2d &mean, const Eigen::Vector2d &stddev, Rng &rng) {
  ActionSample s;
  for (int d = 0; d < kActionDim; ++d) s.action(d) = mean(d) + stddev(d) * rng.normal();
  s.log_prob = gaussian_log_prob(s.action, mean, stddev);
  return s;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap_value, std::span<const std::uint8_t> dones, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || (!dones.empty() && dones.size() != n))
    throw std::invalid_argument("compute_gae: sequence lengths differ");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = i + 1 < n ? values[i + 1] : bootstrap_value;
    const double nonterminal = (!dones.empty() && dones[i]) ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * nonterminal - values[i];
    next_adv = delta + gamma * lambda * nonterminal * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
  }
  return out;
}

RolloutBuffer::RolloutBuffer(int obs_dim, int capacity)
    : obs_dim_(obs_dim),
      capacity_(capacity),
      observations_(Eigen::MatrixXd::Zero(obs_dim, capacity)),
      actions_(Eigen::MatrixXd::Zero(kActionDim, capacity)),
      log_probs_(capacity, 0.0),
      values_(capacity, 0.0),
      rewards_(capacity, 0.0),
      dones_(capacity, 0) {}

void RolloutBuffer::add(std::span<const double> observation, const Eigen::Vector2d &action,
                        double log_prob, double value) {
  if (full()) throw std::logic_error("rollout buffer is full");
  observations_.col(size_) = Eigen::Map<const Eigen::VectorXd>(observation.data(), obs_dim_);
  actions_.col(size_) = action;
  log_probs_[size_] = log_prob;
  values_[size_] = value;
  rewards_[size_] = 0.0;
  dones_[size_] = 0;
  ++size_;
}

void RolloutBuffer::set_last_reward(double reward) {
  if (size_ == 0) throw std::logic_error("rollout buffer is empty");
  rewards_[size_ - 1] = reward;
}

void RolloutBuffer::set_last_done(bool done) {
  if (size_ == 0) throw std::logic_error("rollout buffer is empty");
  dones_[size_ - 1] = done ? 1 : 0;
}

LossTerms ppo_loss(const PolicyParams &params, const Minibatch &batch, const PpoHyper &hyper,
                   Eigen::VectorXd *gradient) {
  const Eigen::Index n = batch.observations.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  const Eigen::MatrixXd h1 =
      ((params.w1() * batch.observations).colwise() + params.b1()).array().tanh();
  const Eigen::MatrixXd h2 = ((params.w2() * h1).colwise() + params.b2()).array().tanh();
  const Eigen::MatrixXd mean = (params.w_pi() * h2).colwise() + params.b_pi();
  const Eigen::RowVectorXd value = (params.w_v() * h2).array() + params.b_v()(0);
  const Eigen::Vector2d log_std = params.log_std();
  const Eigen::Vector2d inv_var = (-2.0 * log_std.array()).exp();

  const Eigen::MatrixXd diff = batch.actions - mean;  // 2 x n
  Eigen::VectorXd log_prob(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lp = 0.0;
    for (int d = 0; d < kActionDim; ++d)
      lp += -0.5 * diff(d, i) * diff(d, i) * inv_var(d) - log_std(d) - kHalfLog2Pi;
    log_prob(i) = lp;
  }

  LossTerms terms;
  Eigen::VectorXd dlogp(n);
  const double lo = 1.0 - hyper.clip, hi = 1.0 + hyper.clip;
  double clipped = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double log_ratio = log_prob(i) - batch.old_log_probs(i);
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages(i);
    const double unclipped = ratio * adv;
    const double clipped_obj = std::clamp(ratio, lo, hi) * adv;
    const bool use_unclipped = unclipped <= clipped_obj;
    terms.policy -= std::min(unclipped, clipped_obj) * inv_n;
    dlogp(i) = use_unclipped ? -adv * ratio * inv_n : 0.0;
    if (ratio < lo || ratio > hi) clipped += 1.0;
    terms.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
  }
  terms.clip_fraction = clipped * inv_n;

  const Eigen::RowVectorXd verr = value - batch.returns.transpose();
  terms.value = verr.squaredNorm() * inv_n;
  terms.entropy = kActionDim * (0.5 + kHalfLog2Pi) + log_std.sum();
  terms.total = terms.policy + hyper.value_coeff * terms.value - hyper.entropy_coeff * terms.entropy;

  if (gradient) {
    gradient->setZero(params.flat().size());
    Eigen::VectorXd &g = *gradient;

    // d logp / d mean = diff / var ; d logp / d log_std = diff^2 / var - 1
    Eigen::MatrixXd dmean(kActionDim, n);
    Eigen::Vector2d dlog_std = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int d = 0; d < kActionDim; ++d) {
        dmean(d, i) = dlogp(i) * diff(d, i) * inv_var(d);
        dlog_std(d) += dlogp(i) * (diff(d, i) * diff(d, i) * inv_var(d) - 1.0);
      }
    }
    dlog_std.array() -= hyper.entropy_coeff;
    const Eigen::RowVectorXd dvalue = (2.0 * hyper.value_coeff * inv_n) * verr;

    params.w_pi(g) = dmean * h2.transpose();
    params.b_pi(g) = dmean.rowwise().sum();
    params.log_std(g) = dlog_std;
    params.w_v(g) = dvalue * h2.transpose();
    params.b_v(g)(0) = dvalue.sum();

    const Eigen::MatrixXd dh2 =
        params.w_pi().transpose() * dmean + params.w_v().transpose() * dvalue;
    const Eigen::MatrixXd dz2 = dh2.array() * (1.0 - h2.array().square());
    params.w2(g) = dz2 * h1.transpose();
    params.b2(g) = dz2.rowwise().sum();
    const Eigen::MatrixXd dh1 = params.w2().transpose() * dz2;
    const Eigen::MatrixXd dz1 = dh1.array() * (1.0 - h1.array().square());
    params.w1(g) = dz1 * batch.observations.transpose();
    params.b1(g) = dz1.rowwise().sum();
  }
  return terms;
}

void adam_step(Eigen::VectorXd &params, const Eigen::VectorXd &grads, AdamState &state,
               double lr, double eps, double beta1, double beta2) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.step;
  state.first_moment = beta1 * state.first_moment + (1.0 - beta1) * grads;
  state.second_moment = beta2 * state.second_moment + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + eps);
}

std::vector<double> normalize_advantages(std::span<const double> advantages) {
  std::vector<double> out(advantages.begin(), advantages.end());
  if (out.empty()) return out;
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (double a : out) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / n);
  if (stddev == 0.0) return std::vector<double>(out.size(), 0.0);
  for (double &a : out) a = (a - mean) / stddev;
  return out;
}

UpdateStats ppo_update(PolicyParams &params, AdamState &adam, const RolloutBuffer &buffer,
                       double bootstrap_value, const PpoHyper &hyper, Rng &rng) {
  UpdateStats stats;
  const int n = buffer.size();
  if (n == 0) return stats;

  const auto gae = compute_gae(
      std::span(buffer.rewards()).first(n), std::span(buffer.values()).first(n), bootstrap_value,
      std::span(buffer.dones()).first(n), hyper.gamma, hyper.gae_lambda);
  const auto advantages = normalize_advantages(gae.advantages);

  const PolicyParams saved_params = params;
  const AdamState saved_adam = adam;

  const int mb = std::clamp(hyper.minibatch, 1, n);
  std::vector<int> order(n);
  Minibatch batch;
  Eigen::VectorXd grad;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span<int>(order), rng);
    for (int start = 0; start + mb <= n; start += mb) {
      batch.observations.resize(buffer.obs_dim(), mb);
      batch.actions.resize(kActionDim, mb);
      batch.old_log_probs.resize(mb);
      batch.advantages.resize(mb);
      batch.returns.resize(mb);
      for (int k = 0; k < mb; ++k) {
        const int i = order[start + k];
        batch.observations.col(k) = buffer.observations().col(i);
        batch.actions.col(k) = buffer.actions().col(i);
        batch.old_log_probs(k) = buffer.log_probs()[i];
        batch.advantages(k) = advantages[i];
        batch.returns(k) = gae.returns[i];
      }
      const auto terms = ppo_loss(params, batch, hyper, &grad);
      if (!std::isfinite(terms.total) || !grad.allFinite()) {
        params = saved_params;
        adam = saved_adam;
        stats.aborted = true;
        return stats;
      }
      adam_step(params.flat(), grad, adam, hyper.lr, hyper.adam_eps, hyper.adam_beta1,
                hyper.adam_beta2);
      stats.policy_loss += terms.policy;
      stats.value_loss += terms.value;
      stats.entropy += terms.entropy;
      stats.approx_kl += terms.approx_kl;
      stats.clip_fraction += terms.clip_fraction;
      ++stats.minibatches;
    }
  }
  if (!params.flat().allFinite()) {
    params = saved_params;
    adam = saved_adam;
    return UpdateStats{.aborted = true};
  }
  if (stats.minibatches > 0) {
    const double k = 1.0 / stats.minibatches;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.approx_kl *= k;
    stats.clip_fraction *= k;
  }
  return stats;
}

Learner init_policy(Rng &rng, int obs_dim, int hidden) {
  Learner l{PolicyParams(obs_dim, hidden), {}};
  auto &p = l.params;
  p.w1() = orthogonal(rng, hidden, obs_dim, std::numbers::sqrt2);
  p.w2() = orthogonal(rng, hidden, hidden, std::numbers::sqrt2);
  p.w_pi() = orthogonal(rng, kActionDim, hidden, 0.01);
  p.w_v() = orthogonal(rng, 1, hidden, 1.0);
  l.adam = AdamState::zeros(p.flat().size());
  return l;
}

}  // namespace rewevo::rl
