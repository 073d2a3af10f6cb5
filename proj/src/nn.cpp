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

#include "fenn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fenn/error.hpp"

namespace fenn::nn {
namespace {

using secure_conv::ConvSpec;

constexpr std::string_view kKindNames[] = {"dense", "conv", "avgpool", "sigmoid", "flatten", "softmax"};

std::string Dims(std::size_t a, std::size_t b) { return std::to_string(a) + " vs " + std::to_string(b); }

// Input value feeding window slot k at output position (oy, ox), or 0 for padding.
double WindowValue(const ConvSpec& s, const Matrix& x, std::size_t col, std::size_t oy, std::size_t ox,
                   std::size_t k) {
  const std::size_t c = k % s.channels;
  const std::size_t dx = (k / s.channels) % s.filter;
  const std::size_t dy = k / (s.channels * s.filter);
  const auto iy = static_cast<std::ptrdiff_t>(oy * s.stride + dy) - static_cast<std::ptrdiff_t>(s.padding);
  const auto ix = static_cast<std::ptrdiff_t>(ox * s.stride + dx) - static_cast<std::ptrdiff_t>(s.padding);
  if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(s.height) ||
      ix >= static_cast<std::ptrdiff_t>(s.width))
    return 0.0;
  return x((static_cast<std::size_t>(iy) * s.width + static_cast<std::size_t>(ix)) * s.channels + c, col);
}

Matrix DenseProduct(const LayerSpec& layer, const LayerParams& p, const Matrix& x) {
  Matrix z(layer.out, x.cols);
  for (std::size_t i = 0; i < layer.out; ++i) {
    const double* w = &p.w[i * layer.in];
    for (std::size_t k = 0; k < layer.in; ++k) {
      const double wk = w[k];
      if (wk == 0.0) continue;
      const double* xr = &x.v[k * x.cols];
      double* zr = &z.v[i * x.cols];
      for (std::size_t b = 0; b < x.cols; ++b) zr[b] += wk * xr[b];
    }
  }
  return z;
}

Matrix ConvProduct(const LayerSpec& layer, const LayerParams& p, const Matrix& x) {
  const ConvSpec& s = layer.conv;
  const std::size_t ws = s.window_size(), oh = s.out_height(), ow = s.out_width();
  Matrix z(layer.out, x.cols);
  std::vector<double> win(ws);
  for (std::size_t b = 0; b < x.cols; ++b)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t k = 0; k < ws; ++k) win[k] = WindowValue(s, x, b, oy, ox, k);
        for (std::size_t f = 0; f < s.filters; ++f) {
          double acc = 0.0;
          const double* kr = &p.w[f * ws];
          for (std::size_t k = 0; k < ws; ++k) acc += kr[k] * win[k];
          z((oy * ow + ox) * s.filters + f, b) = acc;
        }
      }
  return z;
}

void AddBias(const LayerSpec& layer, const LayerParams& p, Matrix& z) {
  const std::size_t groups = layer.kind == LayerKind::kConv ? layer.conv.filters : layer.out;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const double bias = p.b[i % groups];
    for (std::size_t b = 0; b < z.cols; ++b) z(i, b) += bias;
  }
}

Matrix AvgPoolForward(const LayerSpec& layer, const Matrix& x) {
  const std::size_t s = layer.pool, c = layer.channels;
  const std::size_t oh = layer.height / s, ow = layer.width / s;
  Matrix out(layer.out, x.cols);
  const double inv = 1.0 / static_cast<double>(s * s);
  for (std::size_t b = 0; b < x.cols; ++b)
    for (std::size_t iy = 0; iy < oh * s; ++iy)
      for (std::size_t ix = 0; ix < ow * s; ++ix)
        for (std::size_t ch = 0; ch < c; ++ch)
          out(((iy / s) * ow + ix / s) * c + ch, b) += x((iy * layer.width + ix) * c + ch, b) * inv;
  return out;
}

void RequireSameSize(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) Throw(ErrorCode::kShapeMismatch, "size mismatch " + Dims(a.size(), b.size()));
}

}  // namespace

std::string_view LayerKindName(LayerKind k) { return kKindNames[static_cast<int>(k)]; }

std::optional<LayerKind> ParseLayerKind(std::string_view name) {
  for (int i = 0; i < 6; ++i)
    if (kKindNames[i] == name) return static_cast<LayerKind>(i);
  return std::nullopt;
}

std::size_t LayerSpec::weight_rows() const {
  if (kind == LayerKind::kDense) return out;
  if (kind == LayerKind::kConv) return conv.filters;
  return 0;
}

std::size_t LayerSpec::weight_cols() const {
  if (kind == LayerKind::kDense) return in;
  if (kind == LayerKind::kConv) return conv.window_size();
  return 0;
}

std::size_t LayerSpec::bias_size() const { return weight_rows(); }

void Network::Validate() const {
  if (layers.empty()) Throw(ErrorCode::kShapeMismatch, "network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& s = layers[l];
    const std::string where = "layer " + std::to_string(l) + " (" + std::string(LayerKindName(s.kind)) + "): ";
    if (l > 0 && layers[l - 1].out != s.in)
      Throw(ErrorCode::kShapeMismatch, where + "input " + Dims(s.in, layers[l - 1].out));
    if (s.in == 0 || s.out == 0) Throw(ErrorCode::kShapeMismatch, where + "zero dimension");
    switch (s.kind) {
      case LayerKind::kDense: break;
      case LayerKind::kConv:
        s.conv.Validate();
        if (s.in != s.conv.height * s.conv.width * s.conv.channels ||
            s.out != s.conv.window_count() * s.conv.filters)
          Throw(ErrorCode::kShapeMismatch, where + "dims disagree with the convolution geometry");
        break;
      case LayerKind::kAvgPool:
        if (s.pool == 0 || s.height % s.pool != 0 || s.width % s.pool != 0 ||
            s.in != s.height * s.width * s.channels ||
            s.out != (s.height / s.pool) * (s.width / s.pool) * s.channels)
          Throw(ErrorCode::kShapeMismatch, where + "pool window does not tile the input");
        break;
      case LayerKind::kSigmoid:
      case LayerKind::kFlatten:
        if (s.in != s.out) Throw(ErrorCode::kShapeMismatch, where + "must preserve the dimension");
        break;
      case LayerKind::kSoftmax:
        if (s.in != s.out) Throw(ErrorCode::kShapeMismatch, where + "must preserve the dimension");
        if (l + 1 != layers.size()) Throw(ErrorCode::kShapeMismatch, where + "softmax must be last");
        break;
    }
  }
}

Network BuildMlp(std::span<const std::size_t> widths, OutputKind output) {
  if (widths.size() < 2) Throw(ErrorCode::kShapeMismatch, "an MLP needs at least two widths");
  Network net;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    net.layers.push_back(LayerSpec{.kind = LayerKind::kDense, .in = widths[i], .out = widths[i + 1]});
    const bool last = i + 2 == widths.size();
    const LayerKind act = last && output == OutputKind::kSoftmax ? LayerKind::kSoftmax : LayerKind::kSigmoid;
    net.layers.push_back(LayerSpec{.kind = act, .in = widths[i + 1], .out = widths[i + 1]});
  }
  net.Validate();
  return net;
}

namespace {

void PushConvBlock(Network& net, const ConvSpec& spec, std::size_t pool) {
  const std::size_t conv_out = spec.window_count() * spec.filters;
  net.layers.push_back(LayerSpec{.kind = LayerKind::kConv,
                                 .in = spec.height * spec.width * spec.channels,
                                 .out = conv_out,
                                 .conv = spec});
  net.layers.push_back(LayerSpec{.kind = LayerKind::kSigmoid, .in = conv_out, .out = conv_out});
  const std::size_t oh = spec.out_height(), ow = spec.out_width();
  net.layers.push_back(LayerSpec{.kind = LayerKind::kAvgPool,
                                 .in = conv_out,
                                 .out = (oh / pool) * (ow / pool) * spec.filters,
                                 .height = oh,
                                 .width = ow,
                                 .channels = spec.filters,
                                 .pool = pool});
}

void PushDense(Network& net, std::size_t out, LayerKind act) {
  const std::size_t in = net.layers.back().out;
  net.layers.push_back(LayerSpec{.kind = LayerKind::kDense, .in = in, .out = out});
  net.layers.push_back(LayerSpec{.kind = act, .in = out, .out = out});
}

}  // namespace

Network BuildLenet5(std::size_t height, std::size_t width, std::size_t channels, std::size_t classes) {
  Network net;
  ConvSpec c1{.height = height, .width = width, .channels = channels, .filter = 5, .padding = 2,
              .stride = 1, .filters = 6};
  PushConvBlock(net, c1, 2);
  const LayerSpec& s2 = net.layers.back();
  ConvSpec c3{.height = s2.height / 2, .width = s2.width / 2, .channels = 6, .filter = 5, .padding = 0,
              .stride = 1, .filters = 16};
  PushConvBlock(net, c3, 2);
  const std::size_t flat = net.layers.back().out;
  net.layers.push_back(LayerSpec{.kind = LayerKind::kFlatten, .in = flat, .out = flat});
  PushDense(net, 120, LayerKind::kSigmoid);
  PushDense(net, 84, LayerKind::kSigmoid);
  PushDense(net, classes, LayerKind::kSoftmax);
  net.Validate();
  return net;
}

Network BuildConvNet(const ConvSpec& conv, std::size_t pool, std::size_t hidden, std::size_t classes) {
  Network net;
  PushConvBlock(net, conv, pool);
  const std::size_t flat = net.layers.back().out;
  net.layers.push_back(LayerSpec{.kind = LayerKind::kFlatten, .in = flat, .out = flat});
  PushDense(net, hidden, LayerKind::kSigmoid);
  PushDense(net, classes, LayerKind::kSoftmax);
  net.Validate();
  return net;
}

void Hyperparams::Validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) Throw(ErrorCode::kDomainError, "learning rate must be >= 0");
  if (batch == 0) Throw(ErrorCode::kDomainError, "batch size must be at least 1");
  if (!(init_gain > 0.0) || !(output_init_gain > 0.0))
    Throw(ErrorCode::kDomainError, "init gains must be positive");
}

Params InitParams(const Network& net, const Hyperparams& hp) {
  net.Validate();
  Rng rng(hp.seed);
  std::size_t last = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    if (net.layers[l].has_params()) last = l;
  Params params(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerSpec& s = net.layers[l];
    if (!s.has_params()) continue;
    const double gain = l == last ? hp.output_init_gain : hp.init_gain;
    const double scale = gain / std::sqrt(static_cast<double>(s.weight_cols()));
    params[l].w.resize(s.weight_rows() * s.weight_cols());
    for (auto& w : params[l].w) {
      const double u = static_cast<double>(rng.NextU64() >> 11) * 0x1.0p-53;
      w = (u - 0.5) * scale;
    }
    params[l].b.assign(s.bias_size(), 0.0);
  }
  return params;
}

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix Softmax(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (std::size_t b = 0; b < logits.cols; ++b) {
    double mx = -INFINITY;
    for (std::size_t i = 0; i < logits.rows; ++i) mx = std::max(mx, logits(i, b));
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) sum += (p(i, b) = std::exp(logits(i, b) - mx));
    for (std::size_t i = 0; i < logits.rows; ++i) p(i, b) /= sum;
  }
  return p;
}

Cache Forward(const Network& net, const Params& params, const Matrix& x, const Matrix* first_product) {
  net.Validate();
  if (params.size() != net.layers.size()) Throw(ErrorCode::kShapeMismatch, "params do not match network");
  Cache cache;
  cache.acts.reserve(net.layers.size() + 1);
  if (first_product == nullptr && x.rows != net.input_dim())
    Throw(ErrorCode::kShapeMismatch, "input dimension " + Dims(x.rows, net.input_dim()));
  cache.acts.push_back(x);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerSpec& s = net.layers[l];
    const Matrix& in = cache.acts.back();
    Matrix out;
    switch (s.kind) {
      case LayerKind::kDense:
      case LayerKind::kConv:
        if (l == 0 && first_product != nullptr) {
          if (first_product->rows != s.out)
            Throw(ErrorCode::kShapeMismatch, "first layer product rows " + Dims(first_product->rows, s.out));
          out = *first_product;
        } else {
          out = s.kind == LayerKind::kDense ? DenseProduct(s, params[l], in) : ConvProduct(s, params[l], in);
        }
        AddBias(s, params[l], out);
        break;
      case LayerKind::kAvgPool: out = AvgPoolForward(s, in); break;
      case LayerKind::kSigmoid:
        out = in;
        for (auto& v : out.v) v = Sigmoid(v);
        break;
      case LayerKind::kFlatten: out = in; break;
      case LayerKind::kSoftmax: out = Softmax(in); break;
    }
    cache.acts.push_back(std::move(out));
  }
  return cache;
}

std::vector<double> FirstLayerWeightGrad(const LayerSpec& layer, const Matrix& x, const Matrix& delta) {
  std::vector<double> g(layer.weight_rows() * layer.weight_cols(), 0.0);
  if (layer.kind == LayerKind::kDense) {
    for (std::size_t i = 0; i < layer.out; ++i)
      for (std::size_t k = 0; k < layer.in; ++k) {
        double acc = 0.0;
        for (std::size_t b = 0; b < x.cols; ++b) acc += delta(i, b) * x(k, b);
        g[i * layer.in + k] = acc;
      }
    return g;
  }
  const ConvSpec& s = layer.conv;
  const std::size_t ws = s.window_size(), oh = s.out_height(), ow = s.out_width();
  std::vector<double> win(ws);
  for (std::size_t b = 0; b < x.cols; ++b)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t k = 0; k < ws; ++k) win[k] = WindowValue(s, x, b, oy, ox, k);
        for (std::size_t f = 0; f < s.filters; ++f) {
          const double d = delta((oy * ow + ox) * s.filters + f, b);
          if (d == 0.0) continue;
          for (std::size_t k = 0; k < ws; ++k) g[f * ws + k] += d * win[k];
        }
      }
  return g;
}

Backprop Backward(const Network& net, const Params& params, const Cache& cache, const Matrix& output_grad) {
  if (cache.acts.size() != net.layers.size() + 1) Throw(ErrorCode::kShapeMismatch, "cache does not match network");
  const Matrix& out = cache.acts.back();
  if (output_grad.rows != out.rows || output_grad.cols != out.cols)
    Throw(ErrorCode::kShapeMismatch, "output gradient shape does not match the network output");
  Backprop bp;
  bp.grads.resize(net.layers.size());
  Matrix g = output_grad;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const LayerSpec& s = net.layers[l];
    const Matrix& in = cache.acts[l];
    switch (s.kind) {
      case LayerKind::kSoftmax:
      case LayerKind::kFlatten: break;
      case LayerKind::kSigmoid: {
        const Matrix& a = cache.acts[l + 1];
        for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] *= a.v[i] * (1.0 - a.v[i]);
        break;
      }
      case LayerKind::kAvgPool: {
        const std::size_t ps = s.pool, c = s.channels, ow = s.width / ps;
        const double inv = 1.0 / static_cast<double>(ps * ps);
        Matrix gi(s.in, g.cols);
        for (std::size_t b = 0; b < g.cols; ++b)
          for (std::size_t iy = 0; iy < s.height; ++iy)
            for (std::size_t ix = 0; ix < s.width; ++ix)
              for (std::size_t ch = 0; ch < c; ++ch)
                gi((iy * s.width + ix) * c + ch, b) = g(((iy / ps) * ow + ix / ps) * c + ch, b) * inv;
        g = std::move(gi);
        break;
      }
      case LayerKind::kDense:
      case LayerKind::kConv: {
        LayerParams& gp = bp.grads[l];
        const std::size_t groups = s.bias_size();
        gp.b.assign(groups, 0.0);
        for (std::size_t i = 0; i < g.rows; ++i)
          for (std::size_t b = 0; b < g.cols; ++b) gp.b[i % groups] += g(i, b);
        if (in.empty())
          gp.w.assign(s.weight_rows() * s.weight_cols(), 0.0);
        else
          gp.w = FirstLayerWeightGrad(s, in, g);
        if (l == 0) {
          bp.first_delta = g;
          break;
        }
        Matrix gi(s.in, g.cols);
        const LayerParams& p = params[l];
        if (s.kind == LayerKind::kDense) {
          for (std::size_t i = 0; i < s.out; ++i)
            for (std::size_t k = 0; k < s.in; ++k) {
              const double w = p.w[i * s.in + k];
              for (std::size_t b = 0; b < g.cols; ++b) gi(k, b) += w * g(i, b);
            }
        } else {
          const ConvSpec& cs = s.conv;
          const std::size_t ws = cs.window_size(), oh = cs.out_height(), ow = cs.out_width();
          for (std::size_t b = 0; b < g.cols; ++b)
            for (std::size_t oy = 0; oy < oh; ++oy)
              for (std::size_t ox = 0; ox < ow; ++ox)
                for (std::size_t k = 0; k < ws; ++k) {
                  const std::size_t c = k % cs.channels;
                  const std::size_t dx = (k / cs.channels) % cs.filter;
                  const std::size_t dy = k / (cs.channels * cs.filter);
                  const auto iy = static_cast<std::ptrdiff_t>(oy * cs.stride + dy) -
                                  static_cast<std::ptrdiff_t>(cs.padding);
                  const auto ix = static_cast<std::ptrdiff_t>(ox * cs.stride + dx) -
                                  static_cast<std::ptrdiff_t>(cs.padding);
                  if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(cs.height) ||
                      ix >= static_cast<std::ptrdiff_t>(cs.width))
                    continue;
                  double acc = 0.0;
                  for (std::size_t f = 0; f < cs.filters; ++f)
                    acc += p.w[f * ws + k] * g((oy * ow + ox) * cs.filters + f, b);
                  gi((static_cast<std::size_t>(iy) * cs.width + static_cast<std::size_t>(ix)) * cs.channels + c,
                     b) += acc;
                }
        }
        g = std::move(gi);
        break;
      }
    }
  }
  return bp;
}

double LossMse(std::span<const double> pred, std::span<const double> label) {
  RequireSameSize(pred, label);
  double e = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) e += (pred[i] - label[i]) * (pred[i] - label[i]);
  return 0.5 * e;
}

double LossSoftmaxCe(std::span<const double> p, std::span<const double> y) {
  RequireSameSize(p, y);
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] == 0.0) continue;
    if (!(p[i] > 0.0)) Throw(ErrorCode::kDomainError, "probability of the true class is not positive");
    loss -= y[i] * std::log(p[i]);
  }
  return loss;
}

void SgdUpdate(Params& params, const Grads& grads, const Hyperparams& hp) {
  if (params.size() != grads.size()) Throw(ErrorCode::kShapeMismatch, "gradient count does not match params");
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (params[l].w.size() != grads[l].w.size() || params[l].b.size() != grads[l].b.size())
      Throw(ErrorCode::kShapeMismatch, "gradient shape mismatch at layer " + std::to_string(l));
    for (std::size_t i = 0; i < params[l].w.size(); ++i) params[l].w[i] -= hp.lr * grads[l].w[i];
    for (std::size_t i = 0; i < params[l].b.size(); ++i) params[l].b[i] -= hp.lr * grads[l].b[i];
  }
}

std::vector<std::size_t> Argmax(const Matrix& m) {
  std::vector<std::size_t> out(m.cols, 0);
  for (std::size_t b = 0; b < m.cols; ++b)
    for (std::size_t i = 1; i < m.rows; ++i)
      if (m(i, b) > m(out[b], b)) out[b] = i;
  return out;
}

Matrix ConvProductToLayer(const ConvSpec& spec, const Matrix& product, std::size_t batch) {
  const std::size_t positions = spec.window_count();
  if (product.rows != spec.filters || product.cols != batch * positions)
    Throw(ErrorCode::kShapeMismatch, "convolution product has the wrong shape");
  Matrix out(positions * spec.filters, batch);
  for (std::size_t f = 0; f < spec.filters; ++f)
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t pos = 0; pos < positions; ++pos)
        out(pos * spec.filters + f, b) = product(f, b * positions + pos);
  return out;
}

Matrix LayerToConvProduct(const ConvSpec& spec, const Matrix& layer) {
  const std::size_t positions = spec.window_count();
  if (layer.rows != positions * spec.filters)
    Throw(ErrorCode::kShapeMismatch, "layer output does not match the convolution geometry");
  Matrix out(spec.filters, layer.cols * positions);
  for (std::size_t f = 0; f < spec.filters; ++f)
    for (std::size_t b = 0; b < layer.cols; ++b)
      for (std::size_t pos = 0; pos < positions; ++pos)
        out(f, b * positions + pos) = layer(pos * spec.filters + f, b);
  return out;
}

}  // namespace fenn::nn
