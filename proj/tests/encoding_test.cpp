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
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "fenn/encoding.hpp"
#include "fenn/error.hpp"
#include "test_support.hpp"

namespace fenn {
namespace {

TEST_SUITE("encoding") {

TEST_CASE("quantization rounds half away from zero") {
  FixedPointCodec codec;
  CHECK(codec.scale_factor() == 100);
  CHECK(QuantizeValue(3.14159, codec) == 314);
  CHECK(QuantizeValue(0.0, codec) == 0);
  CHECK(QuantizeValue(-0.005, codec) == -1);
  CHECK(QuantizeValue(0.005, codec) == 1);
  CHECK(QuantizeValue(-0.125, codec) == -13);
  CHECK(QuantizeValue(0.125, codec) == 13);
  CHECK(QuantizeValue(255.0, codec) == 25500);
  CHECK(QuantizeValue(1.5, codec, 2) == 15000);
  FixedPointCodec three{3, 1000000};
  CHECK(QuantizeValue(3.14159, three) == 3142);
}

TEST_CASE("out of range values are rejected") {
  FixedPointCodec codec;
  CHECK_THROWS_AS(QuantizeValue(255.01, codec), Error);
  CHECK_THROWS_AS(QuantizeValue(-300.0, codec), Error);
  CHECK_THROWS_AS(QuantizeValue(NAN, codec), Error);
  CHECK_THROWS_AS(QuantizeValue(3.0, codec, 2), Error);
  try {
    QuantizeValue(1e9, codec);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfRange);
  }
  std::vector<double> v{1.0, 2.0};
  CHECK_THROWS_AS(Quantize(v, {3}, codec), Error);
}

TEST_CASE("dequantization") {
  FixedPointCodec codec;
  QuantTensor t{{1}, {314}, 1};
  CHECK(Dequantize(t, codec)[0] == doctest::Approx(3.14));
  QuantTensor u{{1}, {10000}, 2};
  CHECK(Dequantize(u, codec)[0] == 1.0);

  Rng rng(1);
  auto ints = testing::RandomVector(rng, 200, -25500, 25500);
  std::vector<double> grid;
  for (auto q : ints) grid.push_back(static_cast<double>(q) / 100.0);
  auto q = Quantize(grid, {10, 20}, codec);
  CHECK(q.data == ints);
  CHECK(Quantize(Dequantize(q, codec), q.shape, codec).data == ints);
}

TEST_CASE("quantization error is at most half a step") {
  FixedPointCodec codec;
  Rng rng(2);
  for (int i = 0; i < 5000; ++i) {
    const double v = (static_cast<double>(rng.NextU64() % 2000001) - 1000000.0) / 4000.0;
    const double back = static_cast<double>(QuantizeValue(v, codec)) / 100.0;
    REQUIRE(std::fabs(back - v) <= 0.5 / 100.0 + 1e-12);
  }
}

TEST_CASE("dot bound") {
  FixedPointCodec codec;
  CHECK(DotBound(784, codec) == 784ull * 25500ull * 25500ull);
  CHECK(DotBound(1, FixedPointCodec{2, 1}) == 1);
  CHECK_THROWS_AS(DotBound(1u << 30, FixedPointCodec{2, 1ll << 20}), Error);

  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t eta = 1 + rng.NextU64() % 32;
    auto x = testing::RandomVector(rng, eta, -25500, 25500);
    auto y = testing::RandomVector(rng, eta, -25500, 25500);
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < eta; ++i) dot += x[i] * y[i];
    REQUIRE(static_cast<std::uint64_t>(std::llabs(dot)) <= DotBound(eta, codec));
  }
}

TEST_CASE("scale powers track a real-valued shadow computation") {
  FixedPointCodec codec;
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = static_cast<double>(rng.NextU64() % 2001) / 1000.0 - 1.0;
    for (auto& v : b) v = static_cast<double>(rng.NextU64() % 2001) / 1000.0 - 1.0;
    auto qa = Quantize(a, {8}, codec), qb = Quantize(b, {8}, codec);
    QuantTensor dot{{1}, {0}, qa.scale_power + qb.scale_power};
    double shadow = 0.0;
    for (int i = 0; i < 8; ++i) {
      dot.data[0] += qa.data[i] * qb.data[i];
      shadow += a[i] * b[i];
    }
    CHECK(dot.scale_power == 2);
    // each product is off by at most |a|e + |b|e + e^2 with e = 0.005
    CHECK(std::fabs(Dequantize(dot, codec)[0] - shadow) <= 8 * (0.01 + 0.000025));
    QuantTensor sum{{8}, {}, 1};
    for (int i = 0; i < 8; ++i) sum.data.push_back(qa.data[i] + qb.data[i]);
    auto back = Dequantize(sum, codec);
    for (int i = 0; i < 8; ++i) CHECK(std::fabs(back[i] - (a[i] + b[i])) <= 0.01 + 1e-12);
  }
}

TEST_CASE("transpose and validation") {
  QuantTensor t{{2, 3}, {1, 2, 3, 4, 5, 6}, 1};
  auto tt = Transpose(t);
  CHECK(tt.shape == std::vector<std::size_t>{3, 2});
  CHECK(tt.data == std::vector<std::int64_t>{1, 4, 2, 5, 3, 6});
  CHECK(Transpose(tt) == t);
  CHECK_THROWS_AS((FixedPointCodec{-1, 10}.Validate()), Error);
  CHECK_THROWS_AS((FixedPointCodec{2, 0}.Validate()), Error);
  CHECK_NOTHROW(FixedPointCodec{}.Validate());
}

}  // TEST_SUITE

}  // namespace
}  // namespace fenn
