// Copyright 2026 The SCAPE-Lite Authors
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

#ifndef SCAPE_LEARNER_H_
#define SCAPE_LEARNER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scape/common.h"
#include "scape/env.h"
#include "scape/nn.h"
#include "scape/replay.h"

namespace scape {

struct LearnerConfig {
  std::vector<int> hidden = {64, 64};
  int batch_size = 256;
  int imitation_batch_size = 128;
  double gamma = 0.98;
  double polyak = 0.95;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double bc_weight = 1.0;
  double action_l2 = 1.0;  // weight on the mean squared policy action
  double noise_scale = 0.2;
  double random_action_prob = 0.3;
  bool bc_enabled = true;
  bool q_filter_enabled = true;
  bool regulator_enabled = true;
  int updates_per_cycle = 40;
  int k_future = 4;
  double clip_obs = 5.0;
  double norm_eps = 0.01;
};

// Running per-dimension mean and standard deviation.
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(int size, double eps = 0.01, double clip = 5.0);

  void Update(std::span<const double> x);
  // (x - mean) / std, clipped to [-clip, clip].
  void Normalize(std::span<const double> x, double* out) const;

  int size() const { return static_cast<int>(sum_.size()); }
  const Vec& mean() const { return mean_; }
  const Vec& stddev() const { return std_; }
  std::int64_t count() const { return count_; }

  // Serialised state: sums, squared sums and count.
  Vec sum() const { return sum_; }
  Vec sum_sq() const { return sum_sq_; }
  void Restore(const Vec& sum, const Vec& sum_sq, std::int64_t count);

 private:
  void Refresh();

  Vec sum_, sum_sq_, mean_, std_;
  std::int64_t count_ = 0;
  double eps_ = 0.01;
  double clip_ = 5.0;
};

// Maps (observation, goal) to a normalized network input column.
struct Preprocessor {
  Normalizer obs;
  Normalizer goal;
  double k_max = 1.0;

  int input_size() const { return obs.size() + goal.size(); }
  void Update(const Transition& transition);
  void Fill(const Observation& o, const Goal& g, double* column) const;
};

// Column per transition: s (or s_next) with goal g.
Eigen::MatrixXd StateInputs(const Preprocessor& prep,
                            std::span<const Transition* const> batch,
                            bool next);
Eigen::MatrixXd ActionMatrix(std::span<const Transition* const> batch);

// [state; action] stacked row-wise.
Eigen::MatrixXd CriticInputs(const Eigen::MatrixXd& states,
                             const Eigen::MatrixXd& actions);

struct NetBundle {
  MlpParams actor;
  MlpParams critic;
  MlpParams target_actor;
  MlpParams target_critic;
  OptimizerState actor_opt;
  OptimizerState critic_opt;
};

NetBundle InitNets(int input_size, int action_dim, const LearnerConfig& config,
                   Rng& rng);

struct LearnerCounters {
  std::int64_t updates = 0;
  std::int64_t q_filter_evaluations = 0;
  std::int64_t demo_samples = 0;
  std::int64_t sil_samples = 0;
  std::int64_t sil_fallbacks = 0;
  std::int64_t nonfinite_faults = 0;
};

// -(1 + alpha * F_max + beta * qdot_max) / (1 - gamma).
double CriticTargetLowerBound(const EnvConfig& env, double gamma);

// Clipped one-step targets r + gamma * (1 - done) * Q'(s', pi'(s', g), g).
Eigen::VectorXd CriticTargets(const NetBundle& nets, const Preprocessor& prep,
                              std::span<const Transition* const> batch,
                              double gamma, double lower_bound);

// One Adam step on the mean squared Bellman error. A non-finite loss or
// gradient skips the step, counts a fault and returns NaN.
double CriticUpdate(NetBundle& nets, const Preprocessor& prep,
                    std::span<const Transition* const> batch,
                    const LearnerConfig& config, double lower_bound,
                    LearnerCounters* counters = nullptr);

// mask[i] = Q(s_i, a_i, g_i) > Q(s_i, pi(s_i, g_i), g_i) under the live
// critic.
std::vector<bool> QFilterMask(const NetBundle& nets, const Preprocessor& prep,
                              std::span<const Transition* const> batch);

struct ActorLosses {
  double policy = 0.0;     // -mean Q
  double action_l2 = 0.0;  // weighted
  double bc = 0.0;         // weighted
  int masked = 0;          // imitation samples entering the cloning term
};

// Loss and actor gradient without stepping. `mask` selects the imitation
// samples that are cloned; an empty imitation batch or bc_weight = 0 drops
// the cloning term.
ActorLosses ActorLossAndGradient(const NetBundle& nets,
                                 const Preprocessor& prep,
                                 std::span<const Transition* const> rl_batch,
                                 std::span<const Transition* const> imitation,
                                 const std::vector<bool>& mask,
                                 const LearnerConfig& config,
                                 MlpGradients* grads);

// Computes the Q-filter mask when enabled (all true otherwise), then takes
// one Adam step on the actor.
ActorLosses ActorUpdate(NetBundle& nets, const Preprocessor& prep,
                        std::span<const Transition* const> rl_batch,
                        std::span<const Transition* const> imitation,
                        const LearnerConfig& config,
                        LearnerCounters* counters = nullptr);

// One Adam step with a mask computed by the caller.
ActorLosses ActorStep(NetBundle& nets, const Preprocessor& prep,
                      std::span<const Transition* const> rl_batch,
                      std::span<const Transition* const> imitation,
                      const std::vector<bool>& mask,
                      const LearnerConfig& config,
                      LearnerCounters* counters = nullptr);

void TargetSoftUpdate(NetBundle& nets, double polyak);

// With probability random_action_prob a uniform action, otherwise Gaussian
// noise added per dimension; always clipped to [-1, 1].
Vec ExploreAction(std::span<const double> policy_out,
                  const LearnerConfig& config, Rng& rng);

// Deterministic policy output for one observation.
Vec PolicyAction(const NetBundle& nets, const Preprocessor& prep,
                 const Observation& obs, const Goal& goal);

// Live critic value of (obs, goal, action).
double CriticValue(const NetBundle& nets, const Preprocessor& prep,
                   const Observation& obs, const Goal& goal,
                   std::span<const double> action);

// One directory per checkpoint: actor.bin, critic.bin, target_actor.bin,
// target_critic.bin in the nn binary format, and meta.json with the
// normalizer state plus `metadata`.
void SaveCheckpoint(const std::string& dir, const NetBundle& nets,
                    const Preprocessor& prep, const std::string& metadata_json);
// Restores networks and normalizers into shapes already built by the caller.
// Returns the metadata JSON text.
std::string LoadCheckpoint(const std::string& dir, NetBundle& nets,
                           Preprocessor& prep);

}  // namespace scape

#endif  // SCAPE_LEARNER_H_
