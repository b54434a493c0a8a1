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

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace scape {
namespace {

void CheckSizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw InvalidInput("an MLP needs at least an input and an output layer");
  }
  for (int s : sizes) {
    if (s <= 0) throw InvalidInput("layer sizes must be positive");
  }
}

Eigen::Map<const Eigen::VectorXd> AsVector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

void ApplyOutput(OutputActivation output, Eigen::MatrixXd& z) {
  if (output == OutputActivation::kTanh) z = z.array().tanh();
}

void WriteU32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void WriteF64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  out.write(bytes, 8);
}

std::uint32_t ReadU32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw InvalidInput("truncated parameter snapshot header");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

double ReadF64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw InvalidInput("truncated parameter snapshot body");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::size_t MlpParams::NumParameters() const {
  std::size_t n = 0;
  for (int i = 0; i < num_layers(); ++i) {
    n += static_cast<std::size_t>(weights[i].size() + biases[i].size());
  }
  return n;
}

bool MlpParams::AllFinite() const {
  for (int i = 0; i < num_layers(); ++i) {
    if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
  }
  return true;
}

bool MlpParams::SameShape(const MlpParams& other) const {
  return layer_sizes == other.layer_sizes &&
         weights.size() == other.weights.size();
}

MlpParams InitMlp(const std::vector<int>& layer_sizes, OutputActivation output,
                  Rng& rng) {
  CheckSizes(layer_sizes);
  MlpParams params;
  params.layer_sizes = layer_sizes;
  params.output = output;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const int fan_in = layer_sizes[i];
    const int fan_out = layer_sizes[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.Uniform(-bound, bound);
    }
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b(r) = rng.Uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

MlpParams ZerosLike(const MlpParams& like) {
  MlpParams zeros;
  zeros.layer_sizes = like.layer_sizes;
  zeros.output = like.output;
  for (int i = 0; i < like.num_layers(); ++i) {
    zeros.weights.push_back(
        Eigen::MatrixXd::Zero(like.weights[i].rows(), like.weights[i].cols()));
    zeros.biases.push_back(Eigen::VectorXd::Zero(like.biases[i].size()));
  }
  return zeros;
}

Eigen::MatrixXd ForwardBatch(const MlpParams& params,
                             const Eigen::MatrixXd& input,
                             ForwardCache* cache) {
  if (input.rows() != params.input_size()) {
    throw InvalidInput("input has " + std::to_string(input.rows()) +
                       " rows, network expects " +
                       std::to_string(params.input_size()));
  }
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd a = input;
  const int last = params.num_layers() - 1;
  for (int i = 0; i <= last; ++i) {
    Eigen::MatrixXd z = params.weights[i] * a;
    z.colwise() += params.biases[i];
    if (i < last) {
      a = z.cwiseMax(0.0);
    } else {
      ApplyOutput(params.output, z);
      a = std::move(z);
    }
    if (cache != nullptr) cache->activations.push_back(a);
  }
  return a;
}

Eigen::MatrixXd BackwardBatch(const MlpParams& params,
                              const ForwardCache& cache,
                              const Eigen::MatrixXd& grad_output,
                              MlpGradients* grads) {
  const int layers = params.num_layers();
  if (static_cast<int>(cache.activations.size()) != layers + 1) {
    throw InvalidInput("forward cache does not match the network");
  }
  if (grad_output.rows() != params.output_size() ||
      grad_output.cols() != cache.activations.back().cols()) {
    throw InvalidInput("upstream gradient shape does not match the output");
  }
  Eigen::MatrixXd delta = grad_output;
  if (params.output == OutputActivation::kTanh) {
    const Eigen::MatrixXd& y = cache.activations.back();
    delta.array() *= (1.0 - y.array().square());
  }
  for (int i = layers - 1; i >= 0; --i) {
    const Eigen::MatrixXd& a_in = cache.activations[i];
    if (grads != nullptr) {
      grads->weights[i].noalias() += delta * a_in.transpose();
      grads->biases[i] += delta.rowwise().sum();
    }
    Eigen::MatrixXd upstream = params.weights[i].transpose() * delta;
    if (i > 0) {
      // ReLU gate: the layer input is itself a rectified activation.
      upstream.array() *= (a_in.array() > 0.0).cast<double>();
    }
    delta = std::move(upstream);
  }
  return delta;
}

Vec MlpForward(const MlpParams& params, std::span<const double> input) {
  if (static_cast<int>(input.size()) != params.input_size()) {
    throw InvalidInput("input has " + std::to_string(input.size()) +
                       " entries, network expects " +
                       std::to_string(params.input_size()));
  }
  Eigen::MatrixXd x = AsVector(input);
  Eigen::MatrixXd y = ForwardBatch(params, x);
  return Vec(y.data(), y.data() + y.size());
}

MlpGradients MlpGradient(const MlpParams& params, std::span<const double> input,
                         std::span<const double> loss_grad_at_output) {
  if (static_cast<int>(loss_grad_at_output.size()) != params.output_size()) {
    throw InvalidInput("upstream gradient size does not match the output");
  }
  if (!scape::AllFinite(loss_grad_at_output)) {
    throw InvalidInput("upstream gradient is not finite");
  }
  if (static_cast<int>(input.size()) != params.input_size()) {
    throw InvalidInput("input size does not match the network");
  }
  ForwardCache cache;
  ForwardBatch(params, Eigen::MatrixXd(AsVector(input)), &cache);
  MlpGradients grads = ZerosLike(params);
  BackwardBatch(params, cache, Eigen::MatrixXd(AsVector(loss_grad_at_output)),
                &grads);
  return grads;
}

OptimizerState InitOptimizer(const MlpParams& params, double learning_rate) {
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be > 0");
  OptimizerState state;
  state.first_moment = ZerosLike(params);
  state.second_moment = ZerosLike(params);
  state.learning_rate = learning_rate;
  return state;
}

void AdamStep(MlpParams& params, const MlpGradients& grads,
              OptimizerState& state) {
  if (!params.SameShape(grads) || !params.SameShape(state.first_moment) ||
      !params.SameShape(state.second_moment)) {
    throw InvalidInput("optimizer shapes do not match the parameters");
  }
  if (!grads.AllFinite()) {
    throw NonFiniteError("non-finite gradient, Adam update skipped");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  const double step = state.learning_rate / correction1;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= step * m.array() /
                 ((v.array() / correction2).sqrt() + state.epsilon);
  };
  for (int i = 0; i < params.num_layers(); ++i) {
    update(params.weights[i], grads.weights[i], state.first_moment.weights[i],
           state.second_moment.weights[i]);
    update(params.biases[i], grads.biases[i], state.first_moment.biases[i],
           state.second_moment.biases[i]);
  }
}

void PolyakAverage(MlpParams& target, const MlpParams& source, double polyak) {
  if (!target.SameShape(source)) {
    throw InvalidInput("target and source networks differ in shape");
  }
  if (!(polyak >= 0.0 && polyak <= 1.0)) {
    throw InvalidInput("polyak coefficient must lie in [0, 1]");
  }
  for (int i = 0; i < target.num_layers(); ++i) {
    target.weights[i] = polyak * target.weights[i] + (1.0 - polyak) * source.weights[i];
    target.biases[i] = polyak * target.biases[i] + (1.0 - polyak) * source.biases[i];
  }
}

void WriteParams(std::ostream& out, const MlpParams& params) {
  WriteU32(out, static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (int s : params.layer_sizes) WriteU32(out, static_cast<std::uint32_t>(s));
  for (int i = 0; i < params.num_layers(); ++i) {
    const Eigen::MatrixXd& w = params.weights[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) WriteF64(out, w(r, c));
    }
    for (Eigen::Index r = 0; r < params.biases[i].size(); ++r) {
      WriteF64(out, params.biases[i](r));
    }
  }
}

MlpParams ReadParams(std::istream& in, OutputActivation output) {
  const std::uint32_t count = ReadU32(in);
  if (count < 2 || count > 1024) {
    throw InvalidInput("implausible layer count in parameter snapshot");
  }
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    sizes.push_back(static_cast<int>(ReadU32(in)));
  }
  CheckSizes(sizes);
  MlpParams params;
  params.layer_sizes = sizes;
  params.output = output;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Eigen::MatrixXd w(sizes[i + 1], sizes[i]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = ReadF64(in);
    }
    Eigen::VectorXd b(sizes[i + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = ReadF64(in);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  if (!params.AllFinite()) {
    throw InvalidInput("parameter snapshot contains non-finite values");
  }
  return params;
}

}  // namespace scape
