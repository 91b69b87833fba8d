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

#ifndef HSID_RL_CONTROL_H_
#define HSID_RL_CONTROL_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hsid/bem_swimmer.h"
#include "hsid/surrogate.h"
#include "hsid/tasks.h"

namespace hsid {

// Fully connected network with tanh hidden layers and a linear output.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}. Weights ~ U(-s, s), s = sqrt(1/fan_in),
  // the output layer scaled by `output_scale`.
  Mlp(std::vector<int> sizes, std::mt19937_64& rng, double output_scale = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_params() const;

  // Activations of every layer, kept for the backward pass.
  struct Cache {
    std::vector<Eigen::VectorXd> activations;
  };
  Eigen::VectorXd Forward(const Eigen::VectorXd& x, Cache* cache = nullptr) const;
  // Accumulates d loss / d params into `grad` (size num_params) given
  // d loss / d output.
  void Backward(const Cache& cache, const Eigen::VectorXd& d_output, Eigen::VectorXd& grad) const;

  Eigen::VectorXd Params() const;
  void SetParams(const Eigen::VectorXd& p);

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// Diagonal Gaussian policy around the network mean; actions clamped to
// [-bound, bound] before they reach the environment.
struct Policy {
  Mlp mean;
  Eigen::VectorXd log_std;
  Eigen::VectorXd bound;

  Eigen::VectorXd Act(const Eigen::VectorXd& obs) const;  // clamped mean
  double LogProb(const Eigen::VectorXd& mean_out, const Eigen::VectorXd& action) const;
  double Entropy() const;
};

Policy MakePolicy(int obs_dim, const Eigen::VectorXd& bound, std::uint64_t seed,
                  int hidden = 32, double init_std_fraction = 0.5);

// Checkpoint: "HSIP", u32 version, u32 layer count, u32 sizes, then each
// layer's weights row-major followed by its bias, then log_std and bound,
// all little-endian float64.
void SavePolicy(const Policy& policy, std::ostream& out);
Policy LoadPolicy(std::istream& in);

struct StepOutcome {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual Eigen::VectorXd Reset(std::mt19937_64& rng) = 0;
  virtual StepOutcome Step(const Eigen::VectorXd& action) = 0;
  virtual std::int64_t exact_eval_count() const { return 0; }
  virtual int grid_level() const { return -1; }
};

struct SwimmerEnvOptions {
  int horizon = 200;
  double dt = 5e-3;
  double reset_noise = 0.1;       // rad, uniform joint perturbation
  double blowup_penalty = -1.0;
};

// Observation: joint angles, joint velocities, heading, forward COM speed.
// Reward: the swim-forward reward of the planner.
class SwimmerEnv final : public Environment {
 public:
  SwimmerEnv(std::shared_ptr<const SwimmerModel> model, std::shared_ptr<Surrogate> f,
             RewardSpec spec, SwimmerEnvOptions options = {});
  int obs_dim() const override { return 8; }
  int act_dim() const override { return 3; }
  Eigen::VectorXd Reset(std::mt19937_64& rng) override;
  StepOutcome Step(const Eigen::VectorXd& action) override;
  std::int64_t exact_eval_count() const override { return f_->exact_eval_count(); }
  int grid_level() const override { return f_->level(); }
  const SwimmerState& state() const { return state_; }

 private:
  Eigen::VectorXd Observe() const;

  std::shared_ptr<const SwimmerModel> model_;
  std::shared_ptr<Surrogate> f_;
  RewardSpec spec_;
  SwimmerEnvOptions options_;
  SwimmerState state_;
  int t_ = 0;
};

struct RolloutBatch {
  std::vector<Eigen::VectorXd> obs;
  std::vector<Eigen::VectorXd> actions;  // unclamped samples
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;  // episode ended after this transition
  double last_value = 0.0;  // bootstrap for an unfinished final episode
  std::vector<double> advantages;
  std::vector<double> returns;  // value targets

  std::vector<double> episode_returns;  // completed episodes
  std::int64_t exact_evals = 0;
  int size() const { return static_cast<int>(obs.size()); }
};

struct PpoOptions {
  int batch_size = 2048;
  int epochs = 10;
  int minibatch = 256;
  double clip = 0.2;
  double lr = 3e-4;
  double gamma = 0.99;
  double lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
};

// Learned baseline.
struct ValueFunction {
  Mlp net;
  double Predict(const Eigen::VectorXd& obs) const { return net.Forward(obs)[0]; }
};
ValueFunction MakeValueFunction(int obs_dim, std::uint64_t seed, int hidden = 32);

// B environment steps over fixed-horizon episodes; deterministic in seed.
RolloutBatch Collect(const Policy& policy, const ValueFunction& value, Environment& env, int steps,
                     std::uint64_t seed);

// Generalized advantage estimation; fills advantages and returns.
void ComputeAdvantages(RolloutBatch& batch, double gamma, double lambda);

// Gradient (to be ascended) of the clipped surrogate objective over the
// given transitions w.r.t. the mean-network parameters followed by log_std.
// Advantages are used as stored.
Eigen::VectorXd ClippedObjectiveGradient(const Policy& policy, const RolloutBatch& batch,
                                         const std::vector<int>& indices,
                                         const std::vector<double>& advantages, double clip,
                                         double entropy_coef = 0.0);

struct UpdateDiagnostics {
  double policy_objective = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  bool skipped = false;  // non-finite loss encountered
};

// Adam state for the policy and value parameters.
class PpoTrainer {
 public:
  PpoTrainer(Policy policy, ValueFunction value, PpoOptions options, std::uint64_t seed);

  UpdateDiagnostics Update(RolloutBatch& batch);
  const Policy& policy() const { return policy_; }
  const ValueFunction& value() const { return value_; }
  const PpoOptions& options() const { return options_; }

 private:
  struct Adam {
    Eigen::VectorXd m, v;
    int t = 0;
    void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  };
  Policy policy_;
  ValueFunction value_;
  PpoOptions options_;
  std::mt19937_64 rng_;
  Adam policy_adam_, value_adam_;
};

struct TrainRecord {
  int iteration = 0;
  double mean_return = 0.0;
  double return_stderr = 0.0;
  std::int64_t cumulative_exact_evals = 0;
  double policy_entropy = 0.0;
  int grid_level = -1;
};

}  // namespace hsid

#endif  // HSID_RL_CONTROL_H_
