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

#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

namespace scape {
namespace {

constexpr int kActionDim = 5;

struct Fixture {
  LearnerConfig config;
  Preprocessor prep;
  NetBundle nets;
  std::vector<Transition> data;
  double lower_bound = -100.0;

  explicit Fixture(std::uint64_t seed, int n = 64) {
    Rng rng(seed);
    config.hidden = {16, 16};
    prep.k_max = 250.0;
    prep.obs = Normalizer(7);
    prep.goal = Normalizer(2);
    for (int i = 0; i < n; ++i) {
      Transition t;
      t.s = RandomObs(rng);
      t.s_next = RandomObs(rng);
      t.g.value = {rng.Uniform(-0.2, 0.2), rng.Uniform(0, 0.3)};
      t.a.resize(kActionDim);
      for (double& v : t.a) v = rng.Uniform(-1, 1);
      t.r = -rng.Uniform(0, 2);
      t.done = rng.Bernoulli(0.1);
      data.push_back(t);
      prep.Update(t);
    }
    nets = InitNets(prep.input_size(), kActionDim, config, rng);
  }

  static Observation RandomObs(Rng& rng) {
    Observation o;
    o.kinematics = {rng.Uniform(-0.2, 0.2), rng.Uniform(0, 0.3),
                    rng.Uniform(-1, 1)};
    o.estimated_force = {rng.Uniform(0, 200), rng.Uniform(0, 200)};
    o.joint_velocity = {0.0, 0.0};
    o.k = rng.Uniform(2.5, 250);
    o.k_lim = 250.0;
    o.achieved_goal = {o.kinematics[0], o.kinematics[1]};
    return o;
  }

  std::vector<const Transition*> Batch() const {
    std::vector<const Transition*> b;
    for (const Transition& t : data) b.push_back(&t);
    return b;
  }
};

void ExpectSame(const MlpParams& a, const MlpParams& b) {
  ASSERT_TRUE(a.SameShape(b));
  for (int l = 0; l < a.num_layers(); ++l) {
    EXPECT_EQ(a.weights[l], b.weights[l]);
    EXPECT_EQ(a.biases[l], b.biases[l]);
  }
}

TEST(Normalizer, TracksMeanAndStdAndClips) {
  Normalizer n(1, 0.01, 5.0);
  for (double x : {1.0, 3.0, 5.0, 7.0}) n.Update(Vec{x});
  EXPECT_DOUBLE_EQ(n.mean()[0], 4.0);
  EXPECT_DOUBLE_EQ(n.stddev()[0], std::sqrt(5.0));
  double out = 0.0;
  n.Normalize(Vec{1000.0}, &out);
  EXPECT_EQ(out, 5.0);
  Normalizer flat(1, 0.01, 5.0);
  flat.Update(Vec{2.0});
  EXPECT_DOUBLE_EQ(flat.stddev()[0], 0.01);
}

TEST(InitNets, TargetsAreExactCopies) {
  Fixture f(1);
  ExpectSame(f.nets.target_actor, f.nets.actor);
  ExpectSame(f.nets.target_critic, f.nets.critic);
  EXPECT_EQ(f.nets.actor.output, OutputActivation::kTanh);
  EXPECT_EQ(f.nets.critic.output_size(), 1);
}

TEST(CriticTargetLowerBound, Formula) {
  EnvConfig c = DefaultConfig(EnvId::kFingers);
  const double expected =
      -(1.0 + c.alpha * ForceBound(c) + c.beta * c.velocity_bound) / (1.0 - 0.98);
  EXPECT_DOUBLE_EQ(CriticTargetLowerBound(c, 0.98), expected);
}

TEST(CriticTargets, TerminalUsesRewardOnly) {
  Fixture f(2);
  for (Transition& t : f.data) t.done = true;
  const Eigen::VectorXd y =
      CriticTargets(f.nets, f.prep, f.Batch(), 0.98, f.lower_bound);
  for (int i = 0; i < y.size(); ++i) EXPECT_EQ(y(i), f.data[i].r);
}

TEST(CriticTargets, AlwaysWithinClipRange) {
  Fixture f(3);
  for (double bias : {-1e4, 1e4}) {
    f.nets.target_critic.biases.back()(0) = bias;
    const Eigen::VectorXd y =
        CriticTargets(f.nets, f.prep, f.Batch(), 0.98, f.lower_bound);
    EXPECT_GE(y.minCoeff(), f.lower_bound);
    EXPECT_LE(y.maxCoeff(), 0.0);
  }
}

TEST(CriticUpdate, PerfectCriticOnZeroRewardHasZeroLoss) {
  Fixture f(4);
  for (Transition& t : f.data) t.r = 0.0;
  f.nets.critic = ZerosLike(f.nets.critic);
  f.nets.target_critic = f.nets.critic;
  f.nets.critic_opt = InitOptimizer(f.nets.critic, 1e-3);
  EXPECT_EQ(CriticUpdate(f.nets, f.prep, f.Batch(), f.config, f.lower_bound),
            0.0);
}

TEST(CriticUpdate, ReducesLossOnFixedBatch) {
  Fixture f(5);
  const double first =
      CriticUpdate(f.nets, f.prep, f.Batch(), f.config, f.lower_bound);
  double last = first;
  for (int i = 0; i < 200; ++i) {
    last = CriticUpdate(f.nets, f.prep, f.Batch(), f.config, f.lower_bound);
  }
  EXPECT_LT(last, 0.5 * first);
}

TEST(CriticUpdate, NonFiniteLossIsSkippedAndCounted) {
  Fixture f(6);
  f.nets.critic.biases.back()(0) = std::numeric_limits<double>::quiet_NaN();
  const MlpParams before = f.nets.critic;
  LearnerCounters counters;
  const double loss = CriticUpdate(f.nets, f.prep, f.Batch(), f.config,
                                   f.lower_bound, &counters);
  EXPECT_TRUE(std::isnan(loss));
  EXPECT_EQ(counters.nonfinite_faults, 1);
  EXPECT_EQ(f.nets.critic_opt.step_count, 0);
  EXPECT_EQ(f.nets.critic.weights[0], before.weights[0]);
}

TEST(QFilterMask, ZeroCriticRejectsAll) {
  Fixture f(7);
  f.nets.critic = ZerosLike(f.nets.critic);
  for (bool m : QFilterMask(f.nets, f.prep, f.Batch())) EXPECT_FALSE(m);
}

TEST(QFilterMask, PolicyActionsAreNotPreferred) {
  Fixture f(8);
  // Batched forward pass, the same arithmetic path the filter uses.
  const Eigen::MatrixXd a =
      ForwardBatch(f.nets.actor, StateInputs(f.prep, f.Batch(), false));
  for (std::size_t j = 0; j < f.data.size(); ++j) {
    f.data[j].a.assign(a.col(j).data(), a.col(j).data() + a.rows());
  }
  for (bool m : QFilterMask(f.nets, f.prep, f.Batch())) EXPECT_FALSE(m);
}

TEST(QFilterMask, DominantDemoActionsPassAll) {
  // Critic = relu(100 (a0 - 0.99)): +1 on demo actions with a0 = 1, zero on
  // the policy's actions, which a zero actor pins at 0.
  Fixture f(9);
  for (Transition& t : f.data) t.a[0] = 1.0;
  f.nets.actor = ZerosLike(f.nets.actor);
  MlpParams& q = f.nets.critic;
  for (auto& w : q.weights) w.setZero();
  for (auto& b : q.biases) b.setZero();
  const int a0 = f.prep.input_size();
  q.weights[0](0, a0) = 100.0;
  q.biases[0](0) = -99.0;
  q.weights[1](0, 0) = 1.0;
  q.weights[2](0, 0) = 1.0;
  for (bool m : QFilterMask(f.nets, f.prep, f.Batch())) EXPECT_TRUE(m);
}

TEST(QFilterMask, AgreesWithBruteForce) {
  Fixture f(10);
  const auto batch = f.Batch();
  const std::vector<bool> mask = QFilterMask(f.nets, f.prep, batch);
  int passed = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    const double q_demo = CriticValue(f.nets, f.prep, t.s, t.g, t.a);
    const double q_pi = CriticValue(f.nets, f.prep, t.s, t.g,
                                    PolicyAction(f.nets, f.prep, t.s, t.g));
    EXPECT_EQ(mask[i], q_demo > q_pi);
    passed += mask[i];
  }
  EXPECT_GT(passed, 0);
  EXPECT_LT(passed, static_cast<int>(batch.size()));
}

TEST(ActorLoss, CloningGradientMatchesFiniteDifferences) {
  Fixture f(11, 16);
  f.config.bc_weight = 1.7;
  const auto batch = f.Batch();
  std::vector<bool> mask(batch.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = i % 3 != 0;
  MlpGradients g = ZerosLike(f.nets.actor);
  ActorLossAndGradient(f.nets, f.prep, {}, batch, mask, f.config, &g);
  auto loss = [&]() {
    return ActorLossAndGradient(f.nets, f.prep, {}, batch, mask, f.config,
                                nullptr)
        .bc;
  };
  const double h = 1e-5;
  double worst = 0.0;
  MlpParams& actor = f.nets.actor;
  for (int l = 0; l < actor.num_layers(); ++l) {
    for (int i = 0; i < actor.weights[l].size(); ++i) {
      double& w = actor.weights[l].data()[i];
      const double saved = w;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = g.weights[l].data()[i];
      worst = std::max(worst, std::abs(numeric - analytic) /
                                  std::max(1e-6, std::abs(numeric) +
                                                     std::abs(analytic)));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(ActorLoss, MaskAllFalseGivesZeroCloningGradient) {
  Fixture f(12);
  const auto batch = f.Batch();
  MlpGradients g = ZerosLike(f.nets.actor);
  const ActorLosses l = ActorLossAndGradient(
      f.nets, f.prep, {}, batch, std::vector<bool>(batch.size(), false),
      f.config, &g);
  EXPECT_EQ(l.bc, 0.0);
  EXPECT_EQ(l.masked, 0);
  for (int i = 0; i < g.num_layers(); ++i) {
    EXPECT_EQ(g.weights[i].cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ActorLoss, MatchingDemoActionContributesNothing) {
  Fixture f(13, 1);
  f.data[0].a = PolicyAction(f.nets, f.prep, f.data[0].s, f.data[0].g);
  MlpGradients g = ZerosLike(f.nets.actor);
  const ActorLosses l = ActorLossAndGradient(f.nets, f.prep, {}, f.Batch(),
                                             {true}, f.config, &g);
  EXPECT_EQ(l.masked, 1);
  EXPECT_NEAR(l.bc, 0.0, 1e-24);
  for (int i = 0; i < g.num_layers(); ++i) {
    EXPECT_LT(g.weights[i].cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ActorUpdate, ZeroCloningWeightMatchesPureUpdateBitwise) {
  Fixture a(14), b(14);
  a.config.bc_weight = 0.0;
  b.config.bc_weight = 0.0;
  b.config.q_filter_enabled = false;
  const auto rl_a = a.Batch(), rl_b = b.Batch();
  ActorUpdate(a.nets, a.prep, rl_a, rl_a, a.config);
  ActorUpdate(b.nets, b.prep, rl_b, {}, b.config);
  ExpectSame(a.nets.actor, b.nets.actor);
}

TEST(ActorUpdate, QFilterCounterTracksEvaluations) {
  Fixture f(15);
  LearnerCounters counters;
  const auto batch = f.Batch();
  ActorUpdate(f.nets, f.prep, batch, batch, f.config, &counters);
  EXPECT_EQ(counters.q_filter_evaluations, static_cast<long>(batch.size()));
  f.config.q_filter_enabled = false;
  ActorUpdate(f.nets, f.prep, batch, batch, f.config, &counters);
  EXPECT_EQ(counters.q_filter_evaluations, static_cast<long>(batch.size()));
}

TEST(ActorUpdate, RaisesCriticValueOfPolicy) {
  Fixture f(16);
  const auto batch = f.Batch();
  f.config.action_l2 = 0.0;
  auto mean_q = [&]() {
    double q = 0.0;
    for (const Transition* t : batch) {
      q += CriticValue(f.nets, f.prep, t->s, t->g,
                       PolicyAction(f.nets, f.prep, t->s, t->g));
    }
    return q / batch.size();
  };
  const double before = mean_q();
  for (int i = 0; i < 50; ++i) ActorUpdate(f.nets, f.prep, batch, {}, f.config);
  EXPECT_GT(mean_q(), before);
}

TEST(TargetSoftUpdate, EndpointsAndGeometricConvergence) {
  Fixture f(17);
  f.nets.actor.biases[0].setConstant(1.0);
  f.nets.target_actor.biases[0].setConstant(0.0);
  const MlpParams t0 = f.nets.target_actor;
  TargetSoftUpdate(f.nets, 1.0);
  ExpectSame(f.nets.target_actor, t0);
  double gap = 1.0;
  for (int i = 0; i < 10; ++i) {
    TargetSoftUpdate(f.nets, 0.9);
    gap *= 0.9;
    EXPECT_NEAR(1.0 - f.nets.target_actor.biases[0](0), gap, 1e-12);
  }
  TargetSoftUpdate(f.nets, 0.0);
  ExpectSame(f.nets.target_actor, f.nets.actor);
  EXPECT_THROW(TargetSoftUpdate(f.nets, 1.5), InvalidInput);
}

TEST(ExploreAction, IdentityWithoutNoise) {
  LearnerConfig c;
  c.noise_scale = 0.0;
  c.random_action_prob = 0.0;
  Rng rng(18);
  const Vec in = {0.3, -0.7, 1.0};
  EXPECT_EQ(ExploreAction(in, c, rng), in);
}

TEST(ExploreAction, ClipsAndMatchesNoiseScale) {
  LearnerConfig c;
  c.random_action_prob = 0.0;
  c.noise_scale = 0.2;
  Rng rng(19);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec out = ExploreAction(Vec{0.0, 0.95}, c, rng);
    ASSERT_LE(std::abs(out[1]), 1.0);
    sum += out[0];
    sum_sq += out[0] * out[0];
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(sd, 0.2, 0.01);
}

TEST(ExploreAction, RandomActionShare) {
  LearnerConfig c;
  c.noise_scale = 0.0;
  c.random_action_prob = 0.3;
  Rng rng(20);
  int changed = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vec out = ExploreAction(Vec{0.25}, c, rng);
    changed += out[0] != 0.25;
  }
  EXPECT_NEAR(static_cast<double>(changed) / n, 0.3, 0.015);
}

TEST(Checkpoint, RoundTrip) {
  Fixture f(21);
  const std::string dir =
      (std::filesystem::temp_directory_path() / "scape_ckpt_test").string();
  SaveCheckpoint(dir, f.nets, f.prep, R"({"epoch": 3, "sr": 0.5})");
  Fixture g(22);
  const std::string meta = LoadCheckpoint(dir, g.nets, g.prep);
  ExpectSame(g.nets.actor, f.nets.actor);
  ExpectSame(g.nets.target_critic, f.nets.target_critic);
  EXPECT_EQ(g.prep.obs.mean(), f.prep.obs.mean());
  EXPECT_NE(meta.find("\"epoch\":3"), std::string::npos);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(LoadCheckpoint(dir, g.nets, g.prep), InvalidInput);
}

}  // namespace
}  // namespace scape
