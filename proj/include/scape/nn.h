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

#ifndef SCAPE_NN_H_
#define SCAPE_NN_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scape/common.h"

namespace scape {

enum class OutputActivation { kIdentity, kTanh };

// Dense feed-forward network. Hidden layers use ReLU; the output layer uses
// `output`. weights[i] is layer_sizes[i + 1] x layer_sizes[i].
struct MlpParams {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  OutputActivation output = OutputActivation::kIdentity;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t NumParameters() const;
  bool AllFinite() const;
  bool SameShape(const MlpParams& other) const;
};

// Gradients share the parameter layout.
using MlpGradients = MlpParams;

// Uniform fan-in initialization: every weight and bias of layer i is drawn
// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
MlpParams InitMlp(const std::vector<int>& layer_sizes,
                  OutputActivation output, Rng& rng);

// All-zero parameters with the same shape as `like`.
MlpParams ZerosLike(const MlpParams& like);

// Single-sample evaluation. Throws InvalidInput on a size mismatch.
Vec MlpForward(const MlpParams& params, std::span<const double> input);

// d(loss)/d(params) for one sample by reverse accumulation, given
// d(loss)/d(output). Throws InvalidInput on size mismatch or a non-finite
// upstream gradient.
MlpGradients MlpGradient(const MlpParams& params, std::span<const double> input,
                         std::span<const double> loss_grad_at_output);

// Column-per-sample batched evaluation. `activations` keeps every layer's
// post-activation output (activations[0] is the input) for BackwardBatch.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
};

Eigen::MatrixXd ForwardBatch(const MlpParams& params,
                             const Eigen::MatrixXd& input,
                             ForwardCache* cache = nullptr);

// Back-propagates `grad_output` (output_size x batch). Parameter gradients are
// accumulated into `grads` when it is non-null. Returns d(loss)/d(input).
Eigen::MatrixXd BackwardBatch(const MlpParams& params,
                              const ForwardCache& cache,
                              const Eigen::MatrixXd& grad_output,
                              MlpGradients* grads);

struct OptimizerState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::int64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerState InitOptimizer(const MlpParams& params, double learning_rate);

// Bias-corrected Adam update. A non-finite gradient leaves both `params` and
// `state` untouched and throws NonFiniteError.
void AdamStep(MlpParams& params, const MlpGradients& grads,
              OptimizerState& state);

// target <- polyak * target + (1 - polyak) * source.
void PolyakAverage(MlpParams& target, const MlpParams& source, double polyak);

// Flat snapshot: uint32 layer count, uint32 layer sizes (little-endian), then
// for each layer the weight matrix row-major followed by the bias, as
// little-endian float64. The output activation is not stored.
void WriteParams(std::ostream& out, const MlpParams& params);
MlpParams ReadParams(std::istream& in, OutputActivation output);

}  // namespace scape

#endif  // SCAPE_NN_H_
