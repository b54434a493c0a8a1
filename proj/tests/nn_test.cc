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

#include "scape/nn.h"

#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

namespace scape {
namespace {

// Central differences of sum(w .* output) w.r.t. every parameter.
double MaxRelativeGradientError(MlpParams params, const Vec& input,
                                const Vec& weights) {
  auto loss = [&](const MlpParams& p) {
    const Vec out = MlpForward(p, input);
    double l = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) l += weights[i] * out[i];
    return l;
  };
  const MlpGradients g = MlpGradient(params, input, weights);
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + h;
    const double up = loss(params);
    slot = saved - h;
    const double down = loss(params);
    slot = saved;
    const double numeric = (up - down) / (2 * h);
    const double err =
        std::abs(numeric - analytic) /
        std::max(1e-6, std::abs(numeric) + std::abs(analytic));
    worst = std::max(worst, err);
  };
  for (int l = 0; l < params.num_layers(); ++l) {
    for (int i = 0; i < params.weights[l].size(); ++i) {
      check(params.weights[l].data()[i], g.weights[l].data()[i]);
    }
    for (int i = 0; i < params.biases[l].size(); ++i) {
      check(params.biases[l].data()[i], g.biases[l].data()[i]);
    }
  }
  return worst;
}

TEST(MlpForward, ZeroParametersGiveZeroOutput) {
  Rng rng(3);
  MlpParams p = ZerosLike(InitMlp({3, 5, 2}, OutputActivation::kTanh, rng));
  const Vec out = MlpForward(p, Vec{0.3, -7.0, 2.0});
  EXPECT_EQ(out, Vec({0.0, 0.0}));
}

TEST(MlpForward, IdentitySingleLayer) {
  Rng rng(0);
  MlpParams p = InitMlp({2, 2}, OutputActivation::kIdentity, rng);
  p.weights[0] = Eigen::MatrixXd::Identity(2, 2);
  p.biases[0].setZero();
  EXPECT_EQ(MlpForward(p, Vec{1.0, -2.0}), Vec({1.0, -2.0}));
}

TEST(MlpForward, MatchesHandEvaluatedChain) {
  Rng rng(0);
  const MlpParams p = InitMlp({2, 3, 1}, OutputActivation::kIdentity, rng);
  const double x[2] = {0.5, 0.5};
  double out = p.biases[1](0);
  for (int j = 0; j < 3; ++j) {
    double h = p.biases[0](j);
    for (int i = 0; i < 2; ++i) h += p.weights[0](j, i) * x[i];
    out += p.weights[1](0, j) * std::max(0.0, h);
  }
  EXPECT_DOUBLE_EQ(MlpForward(p, Vec{0.5, 0.5})[0], out);
}

TEST(MlpForward, RejectsWrongInputSize) {
  Rng rng(0);
  const MlpParams p = InitMlp({2, 3, 1}, OutputActivation::kIdentity, rng);
  EXPECT_THROW(MlpForward(p, Vec{1.0}), InvalidInput);
}

TEST(MlpForward, IsPure) {
  Rng rng(9);
  const MlpParams p = InitMlp({4, 8, 8, 3}, OutputActivation::kTanh, rng);
  const Vec x = {0.1, -0.2, 0.3, 0.9};
  EXPECT_EQ(MlpForward(p, x), MlpForward(p, x));
}

TEST(InitMlp, FanInBounds) {
  Rng rng(5);
  const MlpParams p = InitMlp({16, 32, 4}, OutputActivation::kTanh, rng);
  ASSERT_EQ(p.weights[0].rows(), 32);
  ASSERT_EQ(p.weights[0].cols(), 16);
  EXPECT_LE(p.weights[0].cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_LE(p.weights[1].cwiseAbs().maxCoeff(), 1.0 / std::sqrt(32.0));
  EXPECT_TRUE(p.AllFinite());
}

TEST(MlpGradient, ZeroUpstreamGivesZero) {
  Rng rng(1);
  const MlpParams p = InitMlp({3, 4, 2}, OutputActivation::kTanh, rng);
  const MlpGradients g = MlpGradient(p, Vec{0.1, 0.2, 0.3}, Vec{0.0, 0.0});
  for (int l = 0; l < g.num_layers(); ++l) {
    EXPECT_EQ(g.weights[l].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.biases[l].cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(MlpGradient, LinearCase) {
  Rng rng(1);
  MlpParams p = InitMlp({1, 1}, OutputActivation::kIdentity, rng);
  const MlpGradients g = MlpGradient(p, Vec{0.7}, Vec{1.0});
  EXPECT_DOUBLE_EQ(g.weights[0](0, 0), 0.7);
  EXPECT_DOUBLE_EQ(g.biases[0](0), 1.0);
}

TEST(MlpGradient, RejectsNonFiniteUpstream) {
  Rng rng(1);
  const MlpParams p = InitMlp({2, 2}, OutputActivation::kIdentity, rng);
  EXPECT_THROW(
      MlpGradient(p, Vec{1.0, 1.0}, Vec{std::numeric_limits<double>::quiet_NaN(), 0}),
      InvalidInput);
}

TEST(MlpGradient, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const OutputActivation act =
        seed % 2 ? OutputActivation::kTanh : OutputActivation::kIdentity;
    const MlpParams p = InitMlp({5, 16, 12, 3}, act, rng);
    Vec x(5), w(3);
    for (double& v : x) v = rng.Uniform(-1, 1);
    for (double& v : w) v = rng.Uniform(-1, 1);
    EXPECT_LT(MaxRelativeGradientError(p, x, w), 1e-4) << "seed " << seed;
  }
}

TEST(BackwardBatch, SumsPerSampleGradients) {
  Rng rng(4);
  const MlpParams p = InitMlp({3, 6, 2}, OutputActivation::kTanh, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  Eigen::MatrixXd up = Eigen::MatrixXd::Random(2, 5);
  ForwardCache cache;
  ForwardBatch(p, x, &cache);
  MlpGradients batch = ZerosLike(p);
  BackwardBatch(p, cache, up, &batch);
  MlpGradients sum = ZerosLike(p);
  for (int j = 0; j < 5; ++j) {
    const Vec xj(x.col(j).data(), x.col(j).data() + 3);
    const Vec uj(up.col(j).data(), up.col(j).data() + 2);
    const MlpGradients g = MlpGradient(p, xj, uj);
    for (int l = 0; l < p.num_layers(); ++l) {
      sum.weights[l] += g.weights[l];
      sum.biases[l] += g.biases[l];
    }
  }
  for (int l = 0; l < p.num_layers(); ++l) {
    EXPECT_LT((sum.weights[l] - batch.weights[l]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((sum.biases[l] - batch.biases[l]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BackwardBatch, InputGradientMatchesFiniteDifferences) {
  Rng rng(8);
  const MlpParams p = InitMlp({4, 10, 1}, OutputActivation::kIdentity, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 1);
  ForwardCache cache;
  ForwardBatch(p, x, &cache);
  const Eigen::MatrixXd dx =
      BackwardBatch(p, cache, Eigen::MatrixXd::Ones(1, 1), nullptr);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd up = x, down = x;
    up(i, 0) += h;
    down(i, 0) -= h;
    const double numeric =
        (ForwardBatch(p, up)(0, 0) - ForwardBatch(p, down)(0, 0)) / (2 * h);
    EXPECT_NEAR(dx(i, 0), numeric, 1e-6);
  }
}

TEST(AdamStep, ZeroGradientFromRestIsIdentity) {
  Rng rng(2);
  MlpParams p = InitMlp({2, 3, 1}, OutputActivation::kIdentity, rng);
  OptimizerState s = InitOptimizer(p, 1e-3);
  const MlpParams before = p;
  AdamStep(p, ZerosLike(p), s);
  EXPECT_EQ(s.step_count, 1);
  for (int l = 0; l < p.num_layers(); ++l) {
    EXPECT_EQ(p.weights[l], before.weights[l]);
    EXPECT_EQ(p.biases[l], before.biases[l]);
  }
}

TEST(AdamStep, ZeroGradientDecaysFirstMoment) {
  Rng rng(2);
  MlpParams p = InitMlp({2, 3, 1}, OutputActivation::kIdentity, rng);
  OptimizerState s = InitOptimizer(p, 1e-3);
  s.first_moment.weights[0].setConstant(1.0);
  AdamStep(p, ZerosLike(p), s);
  EXPECT_DOUBLE_EQ(s.first_moment.weights[0](0, 0), 0.9);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
  Rng rng(2);
  MlpParams p = InitMlp({1, 1}, OutputActivation::kIdentity, rng);
  p.weights[0](0, 0) = 0.5;
  OptimizerState s = InitOptimizer(p, 1e-3);
  MlpGradients g = ZerosLike(p);
  g.weights[0](0, 0) = 1.0;
  AdamStep(p, g, s);
  EXPECT_NEAR(p.weights[0](0, 0), 0.5 - 1e-3, 1e-8);
}

TEST(AdamStep, ConstantGradientMovesMonotonically) {
  Rng rng(2);
  MlpParams p = InitMlp({1, 1}, OutputActivation::kIdentity, rng);
  OptimizerState s = InitOptimizer(p, 1e-2);
  MlpGradients g = ZerosLike(p);
  g.weights[0](0, 0) = -0.3;
  double last = p.weights[0](0, 0);
  for (int i = 0; i < 20; ++i) {
    AdamStep(p, g, s);
    EXPECT_GT(p.weights[0](0, 0), last);
    last = p.weights[0](0, 0);
  }
}

TEST(AdamStep, NonFiniteGradientLeavesStateUntouched) {
  Rng rng(2);
  MlpParams p = InitMlp({2, 2}, OutputActivation::kIdentity, rng);
  OptimizerState s = InitOptimizer(p, 1e-3);
  MlpGradients g = ZerosLike(p);
  g.biases[0](1) = std::numeric_limits<double>::infinity();
  const MlpParams before = p;
  EXPECT_THROW(AdamStep(p, g, s), NonFiniteError);
  EXPECT_EQ(s.step_count, 0);
  EXPECT_EQ(p.weights[0], before.weights[0]);
}

TEST(PolyakAverage, Endpoints) {
  Rng rng(6);
  const MlpParams source = InitMlp({2, 3, 1}, OutputActivation::kIdentity, rng);
  MlpParams target = InitMlp({2, 3, 1}, OutputActivation::kIdentity, rng);
  const MlpParams original = target;
  PolyakAverage(target, source, 1.0);
  EXPECT_EQ(target.weights[0], original.weights[0]);
  PolyakAverage(target, source, 0.0);
  EXPECT_EQ(target.weights[0], source.weights[0]);
}

TEST(Serialization, RoundTripAndLayout) {
  Rng rng(7);
  const MlpParams p = InitMlp({3, 4, 2}, OutputActivation::kTanh, rng);
  std::stringstream buf;
  WriteParams(buf, p);
  const std::string bytes = buf.str();
  // 4 + 3 * 4 header bytes, then (4*3 + 4 + 2*4 + 2) doubles.
  EXPECT_EQ(bytes.size(), 16u + 8u * 26u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 3u);  // size count, LE
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3u);
  const MlpParams q = ReadParams(buf, OutputActivation::kTanh);
  ASSERT_TRUE(q.SameShape(p));
  for (int l = 0; l < p.num_layers(); ++l) {
    EXPECT_EQ(q.weights[l], p.weights[l]);
    EXPECT_EQ(q.biases[l], p.biases[l]);
  }
}

TEST(Serialization, TruncatedStreamIsRejected) {
  Rng rng(7);
  const MlpParams p = InitMlp({3, 4, 2}, OutputActivation::kTanh, rng);
  std::stringstream buf;
  WriteParams(buf, p);
  std::stringstream cut(buf.str().substr(0, 40));
  EXPECT_THROW(ReadParams(cut, OutputActivation::kTanh), InvalidInput);
}

}  // namespace
}  // namespace scape
