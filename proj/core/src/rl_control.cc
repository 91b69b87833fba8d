// Copyright 2026 The hsid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsid/rl_control.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "hsid/error.h"

namespace hsid {
namespace {

constexpr char kPolicyMagic[4] = {'H', 'S', 'I', 'P'};
constexpr std::uint32_t kPolicyVersion = 1;

template <typename T>
void WriteLe(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw InvalidInputError("policy checkpoint: truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

double GaussianLogProb(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                       const Eigen::VectorXd& action) {
  const Eigen::ArrayXd z = (action - mean).array() / log_std.array().exp();
  return (-0.5 * z.square() - log_std.array() - 0.5 * std::log(2.0 * std::numbers::pi)).sum();
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::mt19937_64& rng, double output_scale) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InvalidInputError("mlp: need input and output sizes");
  for (int s : sizes_) {
    if (s < 1) throw InvalidInputError("mlp: layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double s = std::sqrt(1.0 / sizes_[l]) * (l + 2 == sizes_.size() ? output_scale : 1.0);
    std::uniform_real_distribution<double> uni(-s, s);
    Eigen::MatrixXd W(sizes_[l + 1], sizes_[l]);
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = uni(rng);
    }
    weights_.push_back(std::move(W));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

int Mlp::num_params() const {
  int n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& x, Cache* cache) const {
  if (x.size() != input_dim()) throw InvalidInputError("mlp: input has wrong size");
  Eigen::VectorXd a = x;
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(a);
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    a = l + 1 < weights_.size() ? Eigen::VectorXd(z.array().tanh()) : z;
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

void Mlp::Backward(const Cache& cache, const Eigen::VectorXd& d_output, Eigen::VectorXd& grad) const {
  if (grad.size() != num_params()) grad = Eigen::VectorXd::Zero(num_params());
  std::vector<int> offsets(weights_.size());
  int offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    offsets[l] = offset;
    offset += weights_[l].size() + biases_[l].size();
  }
  Eigen::VectorXd delta = d_output;
  for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
    const Eigen::VectorXd& input = cache.activations[l];
    const Eigen::Index rows = weights_[l].rows(), cols = weights_[l].cols();
    // Row-major weight block.
    for (Eigen::Index r = 0; r < rows; ++r) {
      grad.segment(offsets[l] + r * cols, cols) += delta[r] * input;
    }
    grad.segment(offsets[l] + rows * cols, rows) += delta;
    if (l > 0) delta = (weights_[l].transpose() * delta).array() * (1.0 - input.array().square());
  }
}

Eigen::VectorXd Mlp::Params() const {
  Eigen::VectorXd p(num_params());
  int k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) p[k++] = weights_[l](r, c);
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) p[k++] = biases_[l][r];
  }
  return p;
}

void Mlp::SetParams(const Eigen::VectorXd& p) {
  if (p.size() != num_params()) throw InvalidInputError("mlp: parameter vector has wrong size");
  int k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = p[k++];
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l][r] = p[k++];
  }
}

Eigen::VectorXd Policy::Act(const Eigen::VectorXd& obs) const {
  return mean.Forward(obs).cwiseMax(-bound).cwiseMin(bound);
}

double Policy::LogProb(const Eigen::VectorXd& mean_out, const Eigen::VectorXd& action) const {
  return GaussianLogProb(mean_out, log_std, action);
}

double Policy::Entropy() const {
  return (log_std.array() + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e)).sum();
}

Policy MakePolicy(int obs_dim, const Eigen::VectorXd& bound, std::uint64_t seed, int hidden,
                  double init_std_fraction) {
  if (!(bound.array() > 0).all()) throw InvalidInputError("policy: action bounds must be positive");
  std::mt19937_64 rng(seed);
  Policy p;
  p.mean = Mlp({obs_dim, hidden, hidden, static_cast<int>(bound.size())}, rng, 0.01);
  p.log_std = (init_std_fraction * bound).array().log();
  p.bound = bound;
  return p;
}

void SavePolicy(const Policy& policy, std::ostream& out) {
  out.write(kPolicyMagic, 4);
  WriteLe<std::uint32_t>(out, kPolicyVersion);
  const auto& sizes = policy.mean.sizes();
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < policy.mean.weights().size(); ++l) {
    const Eigen::MatrixXd& W = policy.mean.weights()[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) WriteLe<double>(out, W(r, c));
    }
    for (Eigen::Index r = 0; r < policy.mean.biases()[l].size(); ++r) {
      WriteLe<double>(out, policy.mean.biases()[l][r]);
    }
  }
  for (Eigen::Index k = 0; k < policy.log_std.size(); ++k) WriteLe<double>(out, policy.log_std[k]);
  for (Eigen::Index k = 0; k < policy.bound.size(); ++k) WriteLe<double>(out, policy.bound[k]);
  if (!out) throw InvalidInputError("policy checkpoint: write failed");
}

Policy LoadPolicy(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kPolicyMagic, 4) != 0) {
    throw InvalidInputError("policy checkpoint: bad magic");
  }
  if (ReadLe<std::uint32_t>(in) != kPolicyVersion) {
    throw InvalidInputError("policy checkpoint: unsupported version");
  }
  const std::uint32_t layers = ReadLe<std::uint32_t>(in);
  if (layers < 2 || layers > 64) throw InvalidInputError("policy checkpoint: bad layer count");
  std::vector<int> sizes;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint32_t s = ReadLe<std::uint32_t>(in);
    if (s < 1 || s > (1u << 20)) throw InvalidInputError("policy checkpoint: bad layer size");
    sizes.push_back(static_cast<int>(s));
  }
  std::mt19937_64 rng(0);
  Policy p;
  p.mean = Mlp(sizes, rng);
  Eigen::VectorXd params(p.mean.num_params());
  for (Eigen::Index k = 0; k < params.size(); ++k) params[k] = ReadLe<double>(in);
  p.mean.SetParams(params);
  p.log_std.resize(sizes.back());
  p.bound.resize(sizes.back());
  for (Eigen::Index k = 0; k < p.log_std.size(); ++k) p.log_std[k] = ReadLe<double>(in);
  for (Eigen::Index k = 0; k < p.bound.size(); ++k) p.bound[k] = ReadLe<double>(in);
  return p;
}

SwimmerEnv::SwimmerEnv(std::shared_ptr<const SwimmerModel> model, std::shared_ptr<Surrogate> f,
                       RewardSpec spec, SwimmerEnvOptions options)
    : model_(std::move(model)), f_(std::move(f)), spec_(std::move(spec)), options_(options) {
  if (!model_ || !f_) throw InvalidInputError("swimmer env: null model or surrogate");
  ValidateRewardSpec(spec_);
  if (options_.horizon < 1 || !(options_.dt > 0) || options_.dt > model_->config().max_dt ||
      !(options_.reset_noise >= 0) || options_.reset_noise > model_->config().joint_limit) {
    throw ConfigError("swimmer env: invalid horizon, dt or reset noise");
  }
}

Eigen::VectorXd SwimmerEnv::Observe() const {
  Eigen::VectorXd o(8);
  o << state_.q, state_.velocity.tail<3>(), state_.pose[2], model_->CenterOfMassVelocity(state_)[0];
  return o;
}

Eigen::VectorXd SwimmerEnv::Reset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-options_.reset_noise, options_.reset_noise);
  state_ = SwimmerState{};
  for (int j = 0; j < 3; ++j) state_.q[j] = uni(rng);
  t_ = 0;
  return Observe();
}

StepOutcome SwimmerEnv::Step(const Eigen::VectorXd& action) {
  const double limit = model_->config().torque_limit;
  const Eigen::Vector3d u = action.cwiseMax(-limit).cwiseMin(limit);
  StepOutcome out;
  out.reward = spec_.tracking_weight * SwimForwardReward(*model_, state_, options_.dt) -
               spec_.control_weight * u.squaredNorm();
  try {
    state_ = StepSwimmer(*model_, state_, u, options_.dt, *f_, nullptr, t_);
  } catch (const BlowUpError&) {
    out.reward = options_.blowup_penalty;
    out.done = true;
  }
  ++t_;
  out.done = out.done || t_ >= options_.horizon;
  out.obs = Observe();
  return out;
}

ValueFunction MakeValueFunction(int obs_dim, std::uint64_t seed, int hidden) {
  std::mt19937_64 rng(seed);
  return ValueFunction{Mlp({obs_dim, hidden, hidden, 1}, rng, 0.1)};
}

RolloutBatch Collect(const Policy& policy, const ValueFunction& value, Environment& env, int steps,
                     std::uint64_t seed) {
  if (steps < 1) throw InvalidInputError("collect: batch size must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RolloutBatch batch;
  const std::int64_t evals0 = env.exact_eval_count();
  const Eigen::VectorXd std_dev = policy.log_std.array().exp();
  Eigen::VectorXd obs = env.Reset(rng);
  double episode_return = 0.0;
  bool last_done = false;
  for (int t = 0; t < steps; ++t) {
    const Eigen::VectorXd mu = policy.mean.Forward(obs);
    Eigen::VectorXd a(mu.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = mu[k] + std_dev[k] * normal(rng);
    const StepOutcome step = env.Step(a.cwiseMax(-policy.bound).cwiseMin(policy.bound));
    batch.obs.push_back(obs);
    batch.actions.push_back(a);
    batch.log_probs.push_back(policy.LogProb(mu, a));
    batch.rewards.push_back(step.reward);
    batch.values.push_back(value.Predict(obs));
    batch.dones.push_back(step.done);
    episode_return += step.reward;
    last_done = step.done;
    if (step.done) {
      batch.episode_returns.push_back(episode_return);
      episode_return = 0.0;
      obs = env.Reset(rng);
    } else {
      obs = step.obs;
    }
  }
  batch.last_value = last_done ? 0.0 : value.Predict(obs);
  batch.exact_evals = env.exact_eval_count() - evals0;
  return batch;
}

void ComputeAdvantages(RolloutBatch& batch, double gamma, double lambda) {
  const int n = batch.size();
  batch.advantages.assign(n, 0.0);
  batch.returns.assign(n, 0.0);
  double next_value = batch.last_value, next_adv = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double live = batch.dones[t] ? 0.0 : 1.0;
    const double delta = batch.rewards[t] + gamma * next_value * live - batch.values[t];
    const double adv = delta + gamma * lambda * live * next_adv;
    batch.advantages[t] = adv;
    batch.returns[t] = adv + batch.values[t];
    next_value = batch.values[t];
    next_adv = adv;
  }
}

Eigen::VectorXd ClippedObjectiveGradient(const Policy& policy, const RolloutBatch& batch,
                                         const std::vector<int>& indices,
                                         const std::vector<double>& advantages, double clip,
                                         double entropy_coef) {
  const int np = policy.mean.num_params();
  const int na = static_cast<int>(policy.log_std.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(np + na);
  Eigen::VectorXd grad_net = Eigen::VectorXd::Zero(np);
  const Eigen::ArrayXd var = (2.0 * policy.log_std.array()).exp();
  const double scale = indices.empty() ? 0.0 : 1.0 / indices.size();
  Mlp::Cache cache;
  for (int t : indices) {
    const Eigen::VectorXd mu = policy.mean.Forward(batch.obs[t], &cache);
    const Eigen::VectorXd& a = batch.actions[t];
    const double ratio = std::exp(policy.LogProb(mu, a) - batch.log_probs[t]);
    const double A = advantages[t];
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    // The ratio term contributes only where the unclipped branch is active.
    const bool inside = ratio > 1.0 - clip && ratio < 1.0 + clip;
    if (!inside && !(ratio * A < clipped * A)) continue;
    const double w = scale * ratio * A;  // d objective / d log pi
    const Eigen::ArrayXd diff = (a - mu).array();
    policy.mean.Backward(cache, Eigen::VectorXd(w * diff / var), grad_net);
    grad.tail(na).array() += w * (diff.square() / var - 1.0);
  }
  grad.head(np) = grad_net;
  grad.tail(na).array() += entropy_coef;
  return grad;
}

void PpoTrainer::Adam::Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (m.size() != params.size()) {
    m = Eigen::VectorXd::Zero(params.size());
    v = Eigen::VectorXd::Zero(params.size());
  }
  ++t;
  m = kBeta1 * m + (1 - kBeta1) * grad;
  v = kBeta2 * v + (1 - kBeta2) * grad.cwiseAbs2();
  const double c1 = 1 - std::pow(kBeta1, t), c2 = 1 - std::pow(kBeta2, t);
  params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
}

PpoTrainer::PpoTrainer(Policy policy, ValueFunction value, PpoOptions options, std::uint64_t seed)
    : policy_(std::move(policy)), value_(std::move(value)), options_(options), rng_(seed) {
  if (options_.epochs < 1 || options_.minibatch < 1 || !(options_.clip >= 0) || !(options_.lr > 0) ||
      !(options_.gamma >= 0 && options_.gamma <= 1) || !(options_.lambda >= 0 && options_.lambda <= 1)) {
    throw ConfigError("ppo: invalid hyperparameters");
  }
}

UpdateDiagnostics PpoTrainer::Update(RolloutBatch& batch) {
  UpdateDiagnostics diag;
  ComputeAdvantages(batch, options_.gamma, options_.lambda);
  const int n = batch.size();
  std::vector<double> adv = batch.advantages;
  if (options_.normalize_advantages && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / (n - 1)) + 1e-8;
    for (double& a : adv) a = (a - mean) / sd;
  }
  const Policy policy_backup = policy_;
  const ValueFunction value_backup = value_;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int np = policy_.mean.num_params();
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    for (int start = 0; start < n; start += options_.minibatch) {
      const std::vector<int> idx(order.begin() + start,
                                 order.begin() + std::min(n, start + options_.minibatch));
      const Eigen::VectorXd g =
          ClippedObjectiveGradient(policy_, batch, idx, adv, options_.clip, options_.entropy_coef);
      Eigen::VectorXd vg = Eigen::VectorXd::Zero(value_.net.num_params());
      Mlp::Cache cache;
      for (int t : idx) {
        const double v = value_.net.Forward(batch.obs[t], &cache)[0];
        const Eigen::VectorXd d = Eigen::VectorXd::Constant(
            1, options_.value_coef * (v - batch.returns[t]) / idx.size());
        value_.net.Backward(cache, d, vg);
      }
      if (!g.allFinite() || !vg.allFinite()) {
        policy_ = policy_backup;
        value_ = value_backup;
        diag.skipped = true;
        return diag;
      }
      Eigen::VectorXd p(np + policy_.log_std.size());
      p << policy_.mean.Params(), policy_.log_std;
      policy_adam_.Step(p, -g, options_.lr);  // ascent
      policy_.mean.SetParams(p.head(np));
      policy_.log_std = p.tail(policy_.log_std.size());
      Eigen::VectorXd vp = value_.net.Params();
      value_adam_.Step(vp, vg, options_.lr);
      value_.net.SetParams(vp);
    }
  }
  double objective = 0.0, vloss = 0.0;
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd mu = policy_.mean.Forward(batch.obs[t]);
    const double ratio = std::exp(policy_.LogProb(mu, batch.actions[t]) - batch.log_probs[t]);
    objective += std::min(ratio * adv[t],
                          std::clamp(ratio, 1 - options_.clip, 1 + options_.clip) * adv[t]);
    const double e = value_.Predict(batch.obs[t]) - batch.returns[t];
    vloss += 0.5 * e * e;
  }
  diag.policy_objective = objective / n;
  diag.value_loss = vloss / n;
  diag.entropy = policy_.Entropy();
  if (!std::isfinite(diag.policy_objective) || !std::isfinite(diag.value_loss) ||
      !policy_.log_std.allFinite()) {
    policy_ = policy_backup;
    value_ = value_backup;
    diag.skipped = true;
  }
  return diag;
}

}  // namespace hsid
