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

#include "scape/learner.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scape {

Normalizer::Normalizer(int size, double eps, double clip)
    : sum_(size, 0.0),
      sum_sq_(size, 0.0),
      mean_(size, 0.0),
      std_(size, eps),
      eps_(eps),
      clip_(clip) {
  Refresh();
}

void Normalizer::Update(std::span<const double> x) {
  if (static_cast<int>(x.size()) != size()) {
    throw InvalidInput("normalizer input has the wrong size");
  }
  for (int i = 0; i < size(); ++i) {
    sum_[i] += x[i];
    sum_sq_[i] += x[i] * x[i];
  }
  ++count_;
  Refresh();
}

void Normalizer::Refresh() {
  const double n = std::max<double>(1.0, static_cast<double>(count_));
  for (int i = 0; i < size(); ++i) {
    mean_[i] = sum_[i] / n;
    const double var = sum_sq_[i] / n - mean_[i] * mean_[i];
    std_[i] = std::sqrt(std::max(eps_ * eps_, var));
  }
}

void Normalizer::Normalize(std::span<const double> x, double* out) const {
  if (static_cast<int>(x.size()) != size()) {
    throw InvalidInput("normalizer input has the wrong size");
  }
  for (int i = 0; i < size(); ++i) {
    out[i] = Clamp((x[i] - mean_[i]) / std_[i], -clip_, clip_);
  }
}

void Normalizer::Restore(const Vec& sum, const Vec& sum_sq,
                         std::int64_t count) {
  if (static_cast<int>(sum.size()) != size() ||
      static_cast<int>(sum_sq.size()) != size()) {
    throw InvalidInput("normalizer state has the wrong size");
  }
  sum_ = sum;
  sum_sq_ = sum_sq;
  count_ = count;
  Refresh();
}

void Preprocessor::Update(const Transition& tr) {
  obs.Update(tr.s.Features(k_max));
  goal.Update(tr.g.value);
}

void Preprocessor::Fill(const Observation& o, const Goal& g,
                        double* column) const {
  obs.Normalize(o.Features(k_max), column);
  goal.Normalize(g.value, column + obs.size());
}

Eigen::MatrixXd StateInputs(const Preprocessor& prep,
                            std::span<const Transition* const> batch,
                            bool next) {
  Eigen::MatrixXd x(prep.input_size(), static_cast<int>(batch.size()));
  for (int j = 0; j < x.cols(); ++j) {
    const Transition& tr = *batch[j];
    prep.Fill(next ? tr.s_next : tr.s, tr.g, x.col(j).data());
  }
  return x;
}

Eigen::MatrixXd ActionMatrix(std::span<const Transition* const> batch) {
  if (batch.empty()) return Eigen::MatrixXd();
  const int dim = static_cast<int>(batch[0]->a.size());
  Eigen::MatrixXd a(dim, static_cast<int>(batch.size()));
  for (int j = 0; j < a.cols(); ++j) {
    if (static_cast<int>(batch[j]->a.size()) != dim) {
      throw InvalidInput("batch mixes action dimensions");
    }
    for (int i = 0; i < dim; ++i) a(i, j) = batch[j]->a[i];
  }
  return a;
}

Eigen::MatrixXd CriticInputs(const Eigen::MatrixXd& states,
                             const Eigen::MatrixXd& actions) {
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x << states, actions;
  return x;
}

NetBundle InitNets(int input_size, int action_dim, const LearnerConfig& config,
                   Rng& rng) {
  NetBundle nets;
  std::vector<int> actor_sizes = {input_size};
  actor_sizes.insert(actor_sizes.end(), config.hidden.begin(),
                     config.hidden.end());
  actor_sizes.push_back(action_dim);
  std::vector<int> critic_sizes = {input_size + action_dim};
  critic_sizes.insert(critic_sizes.end(), config.hidden.begin(),
                      config.hidden.end());
  critic_sizes.push_back(1);
  nets.actor = InitMlp(actor_sizes, OutputActivation::kTanh, rng);
  nets.critic = InitMlp(critic_sizes, OutputActivation::kIdentity, rng);
  nets.target_actor = nets.actor;
  nets.target_critic = nets.critic;
  nets.actor_opt = InitOptimizer(nets.actor, config.actor_lr);
  nets.critic_opt = InitOptimizer(nets.critic, config.critic_lr);
  return nets;
}

double CriticTargetLowerBound(const EnvConfig& env, double gamma) {
  return -(1.0 + env.alpha * ForceBound(env) +
           env.beta * env.velocity_bound) /
         (1.0 - gamma);
}

Eigen::VectorXd CriticTargets(const NetBundle& nets, const Preprocessor& prep,
                              std::span<const Transition* const> batch,
                              double gamma, double lower_bound) {
  const Eigen::MatrixXd next = StateInputs(prep, batch, /*next=*/true);
  const Eigen::MatrixXd next_action = ForwardBatch(nets.target_actor, next);
  const Eigen::MatrixXd q_next =
      ForwardBatch(nets.target_critic, CriticInputs(next, next_action));
  Eigen::VectorXd y(static_cast<int>(batch.size()));
  for (int j = 0; j < y.size(); ++j) {
    const Transition& tr = *batch[j];
    const double bootstrap = tr.done ? 0.0 : gamma * q_next(0, j);
    y(j) = Clamp(tr.r + bootstrap, lower_bound, 0.0);
  }
  return y;
}

double CriticUpdate(NetBundle& nets, const Preprocessor& prep,
                    std::span<const Transition* const> batch,
                    const LearnerConfig& config, double lower_bound,
                    LearnerCounters* counters) {
  const Eigen::VectorXd y =
      CriticTargets(nets, prep, batch, config.gamma, lower_bound);
  const Eigen::MatrixXd x =
      CriticInputs(StateInputs(prep, batch, false), ActionMatrix(batch));
  ForwardCache cache;
  const Eigen::MatrixXd q = ForwardBatch(nets.critic, x, &cache);
  const Eigen::RowVectorXd err = q.row(0) - y.transpose();
  const double n = static_cast<double>(batch.size());
  const double loss = err.squaredNorm() / n;
  if (!std::isfinite(loss)) {
    if (counters != nullptr) ++counters->nonfinite_faults;
    return std::numeric_limits<double>::quiet_NaN();
  }
  MlpGradients grads = ZerosLike(nets.critic);
  BackwardBatch(nets.critic, cache, Eigen::MatrixXd(2.0 * err / n), &grads);
  try {
    AdamStep(nets.critic, grads, nets.critic_opt);
  } catch (const NonFiniteError&) {
    if (counters != nullptr) ++counters->nonfinite_faults;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return loss;
}

std::vector<bool> QFilterMask(const NetBundle& nets, const Preprocessor& prep,
                              std::span<const Transition* const> batch) {
  if (batch.empty()) return {};
  const Eigen::MatrixXd s = StateInputs(prep, batch, false);
  const Eigen::MatrixXd q_demo =
      ForwardBatch(nets.critic, CriticInputs(s, ActionMatrix(batch)));
  const Eigen::MatrixXd q_policy = ForwardBatch(
      nets.critic, CriticInputs(s, ForwardBatch(nets.actor, s)));
  std::vector<bool> mask(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    mask[j] = q_demo(0, j) > q_policy(0, j);
  }
  return mask;
}

ActorLosses ActorLossAndGradient(const NetBundle& nets,
                                 const Preprocessor& prep,
                                 std::span<const Transition* const> rl_batch,
                                 std::span<const Transition* const> imitation,
                                 const std::vector<bool>& mask,
                                 const LearnerConfig& config,
                                 MlpGradients* grads) {
  ActorLosses losses;
  if (!rl_batch.empty()) {
    const Eigen::MatrixXd s = StateInputs(prep, rl_batch, false);
    ForwardCache actor_cache;
    const Eigen::MatrixXd a = ForwardBatch(nets.actor, s, &actor_cache);
    ForwardCache critic_cache;
    const Eigen::MatrixXd q =
        ForwardBatch(nets.critic, CriticInputs(s, a), &critic_cache);
    const double n = static_cast<double>(rl_batch.size());
    losses.policy = -q.sum() / n;
    const double elements = static_cast<double>(a.size());
    losses.action_l2 = config.action_l2 * a.squaredNorm() / elements;
    const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, q.cols(), -1.0 / n);
    const Eigen::MatrixXd d_input =
        BackwardBatch(nets.critic, critic_cache, dq, nullptr);
    Eigen::MatrixXd da = d_input.bottomRows(a.rows());
    da += (2.0 * config.action_l2 / elements) * a;
    if (grads != nullptr) BackwardBatch(nets.actor, actor_cache, da, grads);
  }
  if (imitation.empty() || config.bc_weight == 0.0) return losses;
  if (mask.size() != imitation.size()) {
    throw InvalidInput("Q-filter mask does not match the imitation batch");
  }
  for (bool m : mask) losses.masked += m ? 1 : 0;
  if (losses.masked == 0) return losses;
  const Eigen::MatrixXd s = StateInputs(prep, imitation, false);
  ForwardCache cache;
  const Eigen::MatrixXd pi = ForwardBatch(nets.actor, s, &cache);
  const Eigen::MatrixXd demo = ActionMatrix(imitation);
  if (demo.rows() != pi.rows()) {
    throw InvalidInput("imitation actions do not match the policy output");
  }
  Eigen::MatrixXd diff = pi - demo;
  for (int j = 0; j < diff.cols(); ++j) {
    if (!mask[j]) diff.col(j).setZero();
  }
  const double scale = config.bc_weight / losses.masked;
  losses.bc = scale * diff.squaredNorm();
  if (grads != nullptr) {
    BackwardBatch(nets.actor, cache, Eigen::MatrixXd(2.0 * scale * diff),
                  grads);
  }
  return losses;
}

ActorLosses ActorUpdate(NetBundle& nets, const Preprocessor& prep,
                        std::span<const Transition* const> rl_batch,
                        std::span<const Transition* const> imitation,
                        const LearnerConfig& config,
                        LearnerCounters* counters) {
  std::vector<bool> mask;
  if (!imitation.empty()) {
    if (config.q_filter_enabled) {
      mask = QFilterMask(nets, prep, imitation);
      if (counters != nullptr) {
        counters->q_filter_evaluations +=
            static_cast<std::int64_t>(imitation.size());
      }
    } else {
      mask.assign(imitation.size(), true);
    }
  }
  return ActorStep(nets, prep, rl_batch, imitation, mask, config, counters);
}

ActorLosses ActorStep(NetBundle& nets, const Preprocessor& prep,
                      std::span<const Transition* const> rl_batch,
                      std::span<const Transition* const> imitation,
                      const std::vector<bool>& mask,
                      const LearnerConfig& config,
                      LearnerCounters* counters) {
  MlpGradients grads = ZerosLike(nets.actor);
  ActorLosses losses = ActorLossAndGradient(nets, prep, rl_batch, imitation,
                                            mask, config, &grads);
  try {
    AdamStep(nets.actor, grads, nets.actor_opt);
  } catch (const NonFiniteError&) {
    if (counters != nullptr) ++counters->nonfinite_faults;
  }
  return losses;
}

void TargetSoftUpdate(NetBundle& nets, double polyak) {
  if (!(polyak >= 0.0 && polyak <= 1.0)) {
    throw InvalidInput("polyak must lie in [0, 1]");
  }
  PolyakAverage(nets.target_actor, nets.actor, polyak);
  PolyakAverage(nets.target_critic, nets.critic, polyak);
}

Vec ExploreAction(std::span<const double> policy_out,
                  const LearnerConfig& config, Rng& rng) {
  Vec out(policy_out.begin(), policy_out.end());
  if (config.random_action_prob > 0.0 &&
      rng.Bernoulli(config.random_action_prob)) {
    for (double& v : out) v = rng.Uniform(-1.0, 1.0);
    return out;
  }
  for (double& v : out) {
    if (config.noise_scale > 0.0) v += rng.Normal(0.0, config.noise_scale);
    v = Clamp(v, -1.0, 1.0);
  }
  return out;
}

Vec PolicyAction(const NetBundle& nets, const Preprocessor& prep,
                 const Observation& obs, const Goal& goal) {
  Vec x(prep.input_size());
  prep.Fill(obs, goal, x.data());
  return MlpForward(nets.actor, x);
}

double CriticValue(const NetBundle& nets, const Preprocessor& prep,
                   const Observation& obs, const Goal& goal,
                   std::span<const double> action) {
  Vec x(prep.input_size() + action.size());
  prep.Fill(obs, goal, x.data());
  std::copy(action.begin(), action.end(), x.begin() + prep.input_size());
  return MlpForward(nets.critic, x)[0];
}

namespace {

void WriteNet(const std::filesystem::path& path, const MlpParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  WriteParams(out, params);
}

MlpParams ReadNet(const std::filesystem::path& path, const MlpParams& like) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  MlpParams params = ReadParams(in, like.output);
  if (!params.SameShape(like)) {
    throw InvalidInput(path.string() + " does not match the network shape");
  }
  return params;
}

nlohmann::json NormalizerJson(const Normalizer& n) {
  return {{"sum", n.sum()}, {"sum_sq", n.sum_sq()}, {"count", n.count()}};
}

void RestoreNormalizer(Normalizer& n, const nlohmann::json& j) {
  n.Restore(j.at("sum").get<Vec>(), j.at("sum_sq").get<Vec>(),
            j.at("count").get<std::int64_t>());
}

}  // namespace

void SaveCheckpoint(const std::string& dir, const NetBundle& nets,
                    const Preprocessor& prep,
                    const std::string& metadata_json) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  WriteNet(root / "actor.bin", nets.actor);
  WriteNet(root / "critic.bin", nets.critic);
  WriteNet(root / "target_actor.bin", nets.target_actor);
  WriteNet(root / "target_critic.bin", nets.target_critic);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(metadata_json.empty() ? "{}" : metadata_json);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("checkpoint metadata is not JSON: ") +
                       e.what());
  }
  meta["obs_normalizer"] = NormalizerJson(prep.obs);
  meta["goal_normalizer"] = NormalizerJson(prep.goal);
  meta["k_max"] = prep.k_max;
  std::ofstream out(root / "meta.json");
  if (!out) throw InvalidInput("cannot write checkpoint metadata in " + dir);
  out << meta.dump(2) << "\n";
}

std::string LoadCheckpoint(const std::string& dir, NetBundle& nets,
                           Preprocessor& prep) {
  const std::filesystem::path root(dir);
  nets.actor = ReadNet(root / "actor.bin", nets.actor);
  nets.critic = ReadNet(root / "critic.bin", nets.critic);
  nets.target_actor = ReadNet(root / "target_actor.bin", nets.target_actor);
  nets.target_critic = ReadNet(root / "target_critic.bin", nets.target_critic);
  std::ifstream in(root / "meta.json");
  if (!in) throw InvalidInput("cannot open checkpoint metadata in " + dir);
  try {
    const nlohmann::json meta = nlohmann::json::parse(in);
    RestoreNormalizer(prep.obs, meta.at("obs_normalizer"));
    RestoreNormalizer(prep.goal, meta.at("goal_normalizer"));
    prep.k_max = meta.at("k_max").get<double>();
    return meta.dump();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed checkpoint metadata: ") +
                       e.what());
  }
}

}  // namespace scape
