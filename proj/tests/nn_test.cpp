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

#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fenn/error.hpp"
#include "fenn/nn.hpp"
#include "test_support.hpp"

namespace fenn::nn {
namespace {

Matrix RandomInput(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (auto& v : m.v) v = (static_cast<double>(rng.NextU64() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * scale;
  return m;
}

Matrix OneHot(std::span<const std::size_t> labels, std::size_t classes) {
  Matrix y(classes, labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) y(labels[j], j) = 1.0;
  return y;
}

// Total loss over the batch, with the output gradient Backward expects.
double BatchLoss(const Network& net, const Params& p, const Matrix& x, const Matrix& y, Matrix* grad) {
  auto cache = Forward(net, p, x);
  const Matrix& out = cache.acts.back();
  double loss = 0.0;
  std::vector<double> po(out.rows), yo(out.rows);
  for (std::size_t j = 0; j < out.cols; ++j) {
    for (std::size_t i = 0; i < out.rows; ++i) {
      po[i] = out(i, j);
      yo[i] = y(i, j);
    }
    loss += net.softmax_output() ? LossSoftmaxCe(po, yo) : LossMse(po, yo);
  }
  if (grad != nullptr) {
    *grad = out;
    for (std::size_t k = 0; k < grad->v.size(); ++k) grad->v[k] -= y.v[k];
  }
  return loss;
}

void GradientCheck(const Network& net, const Matrix& x, const Matrix& y, std::uint64_t seed) {
  Hyperparams hp;
  hp.seed = seed;
  hp.init_gain = 2.0;
  hp.output_init_gain = 2.0;
  Params p = InitParams(net, hp);
  Rng rng(seed);
  for (auto& lp : p)
    for (auto& b : lp.b) b = (static_cast<double>(rng.NextU64() % 1000) / 1000.0 - 0.5) * 0.2;
  Matrix g;
  BatchLoss(net, p, x, y, &g);
  const Backprop bp = Backward(net, p, Forward(net, p, x), g);
  const double eps = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    for (int which = 0; which < 2; ++which) {
      auto& vec = which == 0 ? p[l].w : p[l].b;
      const auto& an = which == 0 ? bp.grads[l].w : bp.grads[l].b;
      for (std::size_t i = 0; i < vec.size(); ++i) {
        const double save = vec[i];
        vec[i] = save + eps;
        const double up = BatchLoss(net, p, x, y, nullptr);
        vec[i] = save - eps;
        const double down = BatchLoss(net, p, x, y, nullptr);
        vec[i] = save;
        const double fd = (up - down) / (2 * eps);
        const double rel = std::fabs(fd - an[i]) / std::max(1e-6, std::fabs(fd) + std::fabs(an[i]));
        worst = std::max(worst, rel);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
  CHECK(worst < 1e-4);
}

TEST_SUITE("nn") {

TEST_CASE("zero parameters give half activations") {
  std::size_t widths[] = {4, 3, 2};
  auto net = BuildMlp(widths, OutputKind::kSigmoid);
  Hyperparams hp;
  Params p = InitParams(net, hp);
  for (auto& lp : p) std::fill(lp.w.begin(), lp.w.end(), 0.0);
  Rng rng(1);
  auto cache = Forward(net, p, RandomInput(rng, 4, 5));
  for (double v : cache.acts.back().v) CHECK(v == 0.5);
}

TEST_CASE("identity dense layer gives the sigmoid of the input") {
  Network net{{LayerSpec{.kind = LayerKind::kDense, .in = 3, .out = 3},
               LayerSpec{.kind = LayerKind::kSigmoid, .in = 3, .out = 3}}};
  Params p(2);
  p[0].w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  p[0].b = {0, 0, 0};
  Rng rng(2);
  auto x = RandomInput(rng, 3, 4, 3.0);
  auto out = Forward(net, p, x).acts.back();
  for (std::size_t k = 0; k < x.v.size(); ++k) CHECK(out.v[k] == doctest::Approx(1.0 / (1.0 + std::exp(-x.v[k]))));
}

TEST_CASE("forward pass matches a hand-rolled reference") {
  std::size_t widths[] = {5, 4, 3};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  hp.seed = 3;
  Params p = InitParams(net, hp);
  p[0].b = {0.1, -0.2, 0.3, 0.0};
  p[2].b = {0.05, 0.0, -0.05};
  Rng rng(3);
  auto x = RandomInput(rng, 5, 6);
  auto out = Forward(net, p, x).acts.back();
  for (std::size_t j = 0; j < 6; ++j) {
    double h[4], z[3], zmax = -1e300, sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      double a = p[0].b[i];
      for (int k = 0; k < 5; ++k) a += p[0].w[i * 5 + k] * x(k, j);
      h[i] = 1.0 / (1.0 + std::exp(-a));
    }
    for (int i = 0; i < 3; ++i) {
      z[i] = p[2].b[i];
      for (int k = 0; k < 4; ++k) z[i] += p[2].w[i * 4 + k] * h[k];
      zmax = std::max(zmax, z[i]);
    }
    for (double v : z) sum += std::exp(v - zmax);
    for (int i = 0; i < 3; ++i) CHECK(out(i, j) == doctest::Approx(std::exp(z[i] - zmax) / sum).epsilon(1e-12));
  }
}

TEST_CASE("quadratic cost") {
  std::vector<double> a{0.3, 0.7}, b{1.0, 0.0}, c{0.0, 1.0};
  CHECK(LossMse(a, a) == 0.0);
  CHECK(LossMse(b, c) == 1.0);
  CHECK(LossMse(a, b) == doctest::Approx(0.5 * (0.49 + 0.49)));
  std::vector<double> short_v{1.0};
  CHECK_THROWS_AS(LossMse(a, short_v), Error);
}

TEST_CASE("cross-entropy cost") {
  std::vector<double> y{0, 0, 1};
  std::vector<double> exact{0, 0, 1};
  CHECK(LossSoftmaxCe(exact, y) == 0.0);
  std::vector<double> uniform(10, 0.1), y10(10, 0.0);
  y10[4] = 1.0;
  CHECK(LossSoftmaxCe(uniform, y10) == doctest::Approx(std::log(10.0)));
  std::vector<double> p{0.2, 0.5, 0.3};
  CHECK(LossSoftmaxCe(p, y) == doctest::Approx(-std::log(0.3)));
  std::vector<double> dead{0.5, 0.5, 0.0};
  try {
    LossSoftmaxCe(dead, y);
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomainError);
  }
}

TEST_CASE("softmax normalizes and ignores constant shifts") {
  Rng rng(4);
  auto logits = RandomInput(rng, 10, 8, 20.0);
  auto p = Softmax(logits);
  auto shifted = logits;
  for (auto& v : shifted.v) v += 123.0;
  auto q = Softmax(shifted);
  for (std::size_t j = 0; j < 8; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      s += p(i, j);
      CHECK(q(i, j) == doctest::Approx(p(i, j)).epsilon(1e-12));
    }
    CHECK(std::fabs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("perfect predictions give zero output-layer gradient") {
  std::size_t widths[] = {3, 2};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  Params p = InitParams(net, hp);
  Rng rng(5);
  auto x = RandomInput(rng, 3, 4);
  auto cache = Forward(net, p, x);
  Matrix zero(2, 4);
  auto bp = Backward(net, p, cache, zero);
  for (double g : bp.grads[0].w) CHECK(g == 0.0);
  for (double g : bp.grads[0].b) CHECK(g == 0.0);
}

TEST_CASE("single sigmoid unit matches the hand-derived chain rule") {
  Network net{{LayerSpec{.kind = LayerKind::kDense, .in = 2, .out = 1},
               LayerSpec{.kind = LayerKind::kSigmoid, .in = 1, .out = 1}}};
  Params p(2);
  p[0].w = {0.4, -0.3};
  p[0].b = {0.1};
  Matrix x(2, 1);
  x.v = {1.5, 2.0};
  auto cache = Forward(net, p, x);
  const double z = 0.4 * 1.5 - 0.3 * 2.0 + 0.1;
  const double a = 1.0 / (1.0 + std::exp(-z));
  CHECK(cache.acts.back().v[0] == doctest::Approx(a));
  const double label = 1.0;
  Matrix g(1, 1);
  g.v[0] = a - label;  // dE/dA for E = 1/2 (a - y)^2
  auto bp = Backward(net, p, cache, g);
  const double dz = (a - label) * a * (1.0 - a);
  CHECK(bp.grads[0].w[0] == doctest::Approx(dz * 1.5));
  CHECK(bp.grads[0].w[1] == doctest::Approx(dz * 2.0));
  CHECK(bp.grads[0].b[0] == doctest::Approx(dz));
  CHECK(bp.first_delta.v[0] == doctest::Approx(dz));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(6);
  std::size_t labels[] = {0, 2, 1, 2};
  SUBCASE("softmax MLP") {
    std::size_t widths[] = {5, 4, 3};
    GradientCheck(BuildMlp(widths), RandomInput(rng, 5, 4), OneHot(labels, 3), 11);
  }
  SUBCASE("sigmoid MLP with quadratic cost") {
    std::size_t widths[] = {4, 6, 5, 3};
    GradientCheck(BuildMlp(widths, OutputKind::kSigmoid), RandomInput(rng, 4, 4), OneHot(labels, 3), 12);
  }
  SUBCASE("conv, pool, flatten") {
    secure_conv::ConvSpec conv{.height = 6, .width = 6, .channels = 2, .filter = 3, .padding = 1, .stride = 1,
                               .filters = 3};
    GradientCheck(BuildConvNet(conv, 2, 4, 3), RandomInput(rng, 72, 4), OneHot(labels, 3), 13);
  }
  SUBCASE("strided conv without padding") {
    secure_conv::ConvSpec conv{.height = 7, .width = 7, .channels = 1, .filter = 3, .padding = 0, .stride = 2,
                               .filters = 2};
    Network net = BuildConvNet(conv, 1, 3, 3);
    GradientCheck(net, RandomInput(rng, 49, 4), OneHot(labels, 3), 14);
  }
  SUBCASE("two conv blocks") {
    secure_conv::ConvSpec c1{.height = 8, .width = 8, .channels = 1, .filter = 3, .padding = 1, .stride = 1,
                             .filters = 2};
    Network net;
    net.layers.push_back(LayerSpec{.kind = LayerKind::kConv, .in = 64, .out = 128, .conv = c1});
    net.layers.push_back(LayerSpec{.kind = LayerKind::kSigmoid, .in = 128, .out = 128});
    net.layers.push_back(
        LayerSpec{.kind = LayerKind::kAvgPool, .in = 128, .out = 32, .height = 8, .width = 8, .channels = 2, .pool = 2});
    secure_conv::ConvSpec c2{.height = 4, .width = 4, .channels = 2, .filter = 3, .padding = 0, .stride = 1,
                             .filters = 2};
    net.layers.push_back(LayerSpec{.kind = LayerKind::kConv, .in = 32, .out = 8, .conv = c2});
    net.layers.push_back(LayerSpec{.kind = LayerKind::kSigmoid, .in = 8, .out = 8});
    net.layers.push_back(LayerSpec{.kind = LayerKind::kFlatten, .in = 8, .out = 8});
    net.layers.push_back(LayerSpec{.kind = LayerKind::kDense, .in = 8, .out = 3});
    net.layers.push_back(LayerSpec{.kind = LayerKind::kSoftmax, .in = 3, .out = 3});
    GradientCheck(net, RandomInput(rng, 64, 4), OneHot(labels, 3), 15);
  }
}

TEST_CASE("first-layer weight gradient from input and delta") {
  secure_conv::ConvSpec conv{.height = 5, .width = 5, .channels = 1, .filter = 3, .padding = 1, .stride = 2,
                             .filters = 2};
  auto net = BuildConvNet(conv, 1, 3, 2);
  Hyperparams hp;
  Params p = InitParams(net, hp);
  Rng rng(7);
  auto x = RandomInput(rng, 25, 3);
  auto cache = Forward(net, p, x);
  auto g = RandomInput(rng, 2, 3);
  auto full = Backward(net, p, cache, g);
  auto blind_cache = cache;
  blind_cache.acts[0] = Matrix{};
  auto blind = Backward(net, p, blind_cache, g);
  for (double v : blind.grads[0].w) CHECK(v == 0.0);
  CHECK(blind.grads[0].b == full.grads[0].b);
  CHECK(FirstLayerWeightGrad(net.layers[0], x, blind.first_delta) == full.grads[0].w);
}

TEST_CASE("first product override reproduces the ordinary forward pass") {
  std::size_t widths[] = {6, 4, 2};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  Params p = InitParams(net, hp);
  p[0].b = {0.5, -0.5, 0.25, 0.0};
  Rng rng(8);
  auto x = RandomInput(rng, 6, 3);
  Matrix product(4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 6; ++k) product(i, j) += p[0].w[i * 6 + k] * x(k, j);
  auto a = Forward(net, p, x).acts.back();
  auto b = Forward(net, p, Matrix{}, &product).acts.back();
  for (std::size_t k = 0; k < a.v.size(); ++k) CHECK(a.v[k] == doctest::Approx(b.v[k]).epsilon(1e-14));
}

TEST_CASE("SGD update") {
  std::size_t widths[] = {3, 2};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  hp.lr = 0.5;
  Params p = InitParams(net, hp);
  Grads zero = p;
  for (auto& g : zero) {
    std::fill(g.w.begin(), g.w.end(), 0.0);
    std::fill(g.b.begin(), g.b.end(), 0.0);
  }
  Params same = p;
  SgdUpdate(same, zero, hp);
  CHECK(same == p);

  Params q = p;
  Hyperparams one = hp;
  one.lr = 1.0;
  SgdUpdate(q, p, one);
  for (auto& lp : q) {
    for (double v : lp.w) CHECK(v == 0.0);
    for (double v : lp.b) CHECK(v == 0.0);
  }

  Rng rng(9);
  Grads g = p;
  for (auto& lp : g)
    for (auto& v : lp.w) v = static_cast<double>(rng.NextU64() % 100) / 50.0 - 1.0;
  Params r = p;
  SgdUpdate(r, g, hp);
  for (std::size_t l = 0; l < r.size(); ++l)
    for (std::size_t i = 0; i < r[l].w.size(); ++i) CHECK(r[l].w[i] == p[l].w[i] - 0.5 * g[l].w[i]);
}

TEST_CASE("builders") {
  std::size_t widths[] = {784, 32, 10};
  auto mlp = BuildMlp(widths);
  int dense = 0;
  for (const auto& l : mlp.layers) dense += l.kind == LayerKind::kDense;
  CHECK(dense == 2);
  CHECK(mlp.input_dim() == 784);
  CHECK(mlp.output_dim() == 10);
  CHECK(mlp.softmax_output());

  auto lenet = BuildLenet5();
  CHECK(lenet.input_dim() == 784);
  CHECK(lenet.output_dim() == 10);
  std::vector<std::size_t> dims;
  for (const auto& l : lenet.layers) dims.push_back(l.out);
  // C1 28x28x6, sigmoid, S2 14x14x6, C3 10x10x16, sigmoid, S4 5x5x16, flatten,
  // C5 120, sigmoid, F6 84, sigmoid, output 10, softmax
  CHECK(dims == std::vector<std::size_t>{4704, 4704, 1176, 1600, 1600, 400, 400, 120, 120, 84, 84, 10, 10});
  CHECK(lenet.layers[0].conv.filters == 6);
  CHECK(lenet.layers[0].conv.padding == 2);
  CHECK(lenet.layers[3].conv.filters == 16);
  CHECK(lenet.layers[3].conv.padding == 0);

  Hyperparams hp;
  Params p = InitParams(lenet, hp);
  Rng rng(10);
  auto out = Forward(lenet, p, RandomInput(rng, 784, 2)).acts.back();
  CHECK(out.rows == 10);
  CHECK(out.cols == 2);
}

TEST_CASE("validation") {
  Network bad{{LayerSpec{.kind = LayerKind::kDense, .in = 3, .out = 2},
               LayerSpec{.kind = LayerKind::kSigmoid, .in = 3, .out = 3}}};
  CHECK_THROWS_AS(bad.Validate(), Error);
  Network early_softmax{{LayerSpec{.kind = LayerKind::kSoftmax, .in = 3, .out = 3},
                         LayerSpec{.kind = LayerKind::kDense, .in = 3, .out = 2}}};
  CHECK_THROWS_AS(early_softmax.Validate(), Error);
  std::size_t widths[] = {3, 2};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  auto p = InitParams(net, hp);
  CHECK_THROWS_AS(Forward(net, p, Matrix(4, 1)), Error);
  hp.batch = 0;
  CHECK_THROWS_AS(hp.Validate(), Error);
}

TEST_CASE("init is deterministic and scaled by fan-in") {
  std::size_t widths[] = {100, 20, 5};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  hp.seed = 77;
  CHECK(InitParams(net, hp) == InitParams(net, hp));
  Hyperparams other = hp;
  other.seed = 78;
  CHECK_FALSE(InitParams(net, other) == InitParams(net, hp));
  auto p = InitParams(net, hp);
  for (double w : p[0].w) CHECK(std::fabs(w) <= 0.5 / 10.0);
  for (double w : p[2].w) CHECK(std::fabs(w) <= 0.5 / std::sqrt(20.0));
  hp.output_init_gain = 4.0;
  auto q = InitParams(net, hp);
  CHECK(q[0].w == p[0].w);
  for (std::size_t i = 0; i < q[2].w.size(); ++i) CHECK(q[2].w[i] == doctest::Approx(4.0 * p[2].w[i]));
}

TEST_CASE("tiny MLP separates linearly separable data") {
  Rng rng(11);
  const std::size_t n = 40;
  Matrix x(2, n);
  std::vector<std::size_t> labels(n);
  for (std::size_t j = 0; j < n; ++j) {
    labels[j] = j % 2;
    const double sign = labels[j] == 0 ? -1.0 : 1.0;
    x(0, j) = sign * (0.5 + static_cast<double>(rng.NextU64() % 100) / 100.0);
    x(1, j) = static_cast<double>(rng.NextU64() % 200) / 100.0 - 1.0;
  }
  const Matrix y = OneHot(labels, 2);
  std::size_t widths[] = {2, 4, 2};
  auto net = BuildMlp(widths);
  Hyperparams hp;
  hp.lr = 0.5;
  hp.seed = 3;
  Params p = InitParams(net, hp);
  double acc = 0.0;
  int iter = 0;
  for (; iter < 500 && acc < 1.0; ++iter) {
    Matrix g;
    BatchLoss(net, p, x, y, &g);
    auto bp = Backward(net, p, Forward(net, p, x), g);
    for (auto& lp : bp.grads) {
      for (auto& v : lp.w) v /= static_cast<double>(n);
      for (auto& v : lp.b) v /= static_cast<double>(n);
    }
    SgdUpdate(p, bp.grads, hp);
    auto pred = Argmax(Forward(net, p, x).acts.back());
    std::size_t hits = 0;
    for (std::size_t j = 0; j < n; ++j) hits += pred[j] == labels[j];
    acc = static_cast<double>(hits) / n;
  }
  CHECK(acc == 1.0);
  MESSAGE("separable data reached 100% after " << iter << " iterations");
}

TEST_CASE("conv layout helpers are inverse") {
  secure_conv::ConvSpec s{.height = 4, .width = 4, .channels = 1, .filter = 3, .padding = 1, .stride = 1,
                          .filters = 3};
  Rng rng(12);
  auto layer = RandomInput(rng, 16 * 3, 5);
  auto product = LayerToConvProduct(s, layer);
  CHECK(product.rows == 3);
  CHECK(product.cols == 5 * 16);
  CHECK(ConvProductToLayer(s, product, 5) == layer);
}

}  // TEST_SUITE

}  // namespace
}  // namespace fenn::nn
