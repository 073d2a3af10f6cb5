// Copyright 2026 The fenn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fenn/rng.hpp"
#include "fenn/secure_conv.hpp"

namespace fenn::nn {

// Dense column-per-sample matrix: rows are features, cols are batch items.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
  bool empty() const { return v.empty(); }
  bool operator==(const Matrix&) const = default;
};

enum class LayerKind { kDense, kConv, kAvgPool, kSigmoid, kFlatten, kSoftmax };

std::string_view LayerKindName(LayerKind k);
std::optional<LayerKind> ParseLayerKind(std::string_view name);

// Spatial tensors are flattened as (y * width + x) * channels + c.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::size_t in = 0;   // input dimension
  std::size_t out = 0;  // output dimension
  secure_conv::ConvSpec conv;  // kConv
  // kAvgPool input geometry and window.
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t pool = 2;

  bool has_params() const { return kind == LayerKind::kDense || kind == LayerKind::kConv; }
  // Weight shape: dense out x in, conv filters x window_size.
  std::size_t weight_rows() const;
  std::size_t weight_cols() const;
  std::size_t bias_size() const;

  bool operator==(const LayerSpec&) const = default;
};

struct Network {
  std::vector<LayerSpec> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  bool softmax_output() const { return !layers.empty() && layers.back().kind == LayerKind::kSoftmax; }
  // Throws kShapeMismatch on inconsistent dims.
  void Validate() const;

  bool operator==(const Network&) const = default;
};

enum class OutputKind { kSoftmax, kSigmoid };

// dense + sigmoid stacks; the last dense layer feeds softmax (cross-entropy)
// or sigmoid (quadratic cost).
Network BuildMlp(std::span<const std::size_t> widths, OutputKind output = OutputKind::kSoftmax);
// C1 6@5x5 pad 2, S2 avg 2x2, C3 16@5x5, S4, C5 120, F6 84, output softmax.
Network BuildLenet5(std::size_t height = 28, std::size_t width = 28, std::size_t channels = 1,
                    std::size_t classes = 10);
// conv -> sigmoid -> avgpool -> flatten -> dense -> sigmoid -> dense -> softmax
Network BuildConvNet(const secure_conv::ConvSpec& conv, std::size_t pool, std::size_t hidden,
                     std::size_t classes);

struct LayerParams {
  std::vector<double> w;
  std::vector<double> b;

  bool operator==(const LayerParams&) const = default;
};

using Params = std::vector<LayerParams>;
using Grads = std::vector<LayerParams>;

struct Hyperparams {
  double lr = 0.1;
  std::size_t batch = 64;
  std::size_t epochs = 1;
  std::size_t max_iters = 0;  // 0: run every batch of every epoch
  std::uint64_t seed = 1;
  // Weights start uniform in gain * [-0.5, 0.5] / sqrt(fan_in); the last
  // parameterized layer uses output_init_gain.
  double init_gain = 1.0;
  double output_init_gain = 1.0;

  void Validate() const;
  bool operator==(const Hyperparams&) const = default;
};

Params InitParams(const Network& net, const Hyperparams& hp);

struct Cache {
  // acts[l] is the input of layer l; acts[size] is the network output.
  std::vector<Matrix> acts;
};

// Runs the network. When `first_product` is given it replaces the first
// layer's weight product (before bias), and `x` may be empty.
Cache Forward(const Network& net, const Params& params, const Matrix& x,
              const Matrix* first_product = nullptr);

struct Backprop {
  Grads grads;          // summed over the batch
  Matrix first_delta;   // gradient at the first layer's pre-bias output
};

// `output_grad` is dL/d(logits) when the network ends in softmax (P - Y for
// cross-entropy), and dL/d(output) otherwise. When acts[0] is empty the first
// layer's weight gradient is left zero for the caller to fill in.
Backprop Backward(const Network& net, const Params& params, const Cache& cache,
                  const Matrix& output_grad);

// Weight gradient of the first layer from its input and delta.
std::vector<double> FirstLayerWeightGrad(const LayerSpec& layer, const Matrix& x, const Matrix& delta);

double LossMse(std::span<const double> pred, std::span<const double> label);
double LossSoftmaxCe(std::span<const double> p, std::span<const double> y);
// Column-wise softmax.
Matrix Softmax(const Matrix& logits);
double Sigmoid(double z);

void SgdUpdate(Params& params, const Grads& grads, const Hyperparams& hp);

std::vector<std::size_t> Argmax(const Matrix& m);

// Conv layer layout helpers shared with the secure path: a (filters x
// batch*positions) product matrix is reordered to the layer's output layout
// and back.
Matrix ConvProductToLayer(const secure_conv::ConvSpec& spec, const Matrix& product, std::size_t batch);
Matrix LayerToConvProduct(const secure_conv::ConvSpec& spec, const Matrix& layer);

}  // namespace fenn::nn
