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

#include <cstdint>
#include <vector>

#include "doctest.h"
#include "fenn/error.hpp"
#include "fenn/secure_matrix.hpp"
#include "test_support.hpp"

namespace fenn::secure_matrix {
namespace {

using testing::MakeAuthority;
using testing::MatMulOracle;
using testing::RandomMatrix;

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kIo;
}

QuantTensor ElementwiseOracle(Function f, const QuantTensor& x, const QuantTensor& y) {
  QuantTensor z = y;
  for (std::size_t k = 0; k < z.data.size(); ++k) {
    switch (f) {
      case Function::kAdd: z.data[k] = x.data[k] + y.data[k]; break;
      case Function::kSub: z.data[k] = x.data[k] - y.data[k]; break;
      case Function::kMul: z.data[k] = x.data[k] * y.data[k]; break;
      case Function::kDiv: z.data[k] = x.data[k] / y.data[k]; break;
      default: break;
    }
  }
  return z;
}

struct Fixture {
  std::unique_ptr<training::Authority> authority = MakeAuthority();
  PublicKeys mpk = authority->public_keys();
  FixedPointCodec codec;
  Rng rng{17};

  QuantTensor Run(const QuantTensor& x, const QuantTensor& y, Function f, unsigned workers = 1,
                  DotSide side = DotSide::kColumns) {
    Views views;
    views.rows = side == DotSide::kRows;
    auto enc = PreProcessEncryption(x, mpk, rng, views);
    auto keys = PreProcessKeyDerive(y, f, FunctionSet::All(), *authority, &enc, side);
    return SecureComputation(enc, f, keys, y, mpk, codec, workers);
  }
};

TEST_SUITE("secure_matrix") {

TEST_CASE("encryption produces both views with the right shapes") {
  Fixture fx;
  QuantTensor x{{3, 2}, {1, 2, 3, 4, 5, 6}, 1};
  auto enc = PreProcessEncryption(x, fx.mpk, fx.rng);
  CHECK(enc.col_cts.size() == 2);
  for (const auto& c : enc.col_cts) CHECK(c.eta() == 3);
  CHECK(enc.elem_cts.size() == 6);
  CHECK(enc.row_cts.empty());
  auto only_rows = PreProcessEncryption(x, fx.mpk, fx.rng, {.columns = false, .elements = false, .rows = true});
  CHECK(only_rows.col_cts.empty());
  CHECK(only_rows.elem_cts.empty());
  REQUIRE(only_rows.row_cts.size() == 3);
  CHECK(only_rows.row_cts[0].eta() == 2);
}

TEST_CASE("zero matrix decrypts to zeros") {
  Fixture fx;
  QuantTensor x{{3, 3}, std::vector<std::int64_t>(9, 0), 1};
  Rng rng(1);
  auto y = RandomMatrix(rng, 2, 3, -50, 50);
  auto z = fx.Run(x, y, Function::kDotProduct);
  for (auto v : z.data) CHECK(v == 0);
  auto w = RandomMatrix(rng, 3, 3, -50, 50);
  auto m = fx.Run(x, w, Function::kMul);
  for (auto v : m.data) CHECK(v == 0);
}

TEST_CASE("identity probe returns the scaled matrix") {
  Fixture fx;
  Rng rng(2);
  auto x = RandomMatrix(rng, 4, 4, -100, 100);
  QuantTensor id{{4, 4}, std::vector<std::int64_t>(16, 0), 1};
  for (int i = 0; i < 4; ++i) id.data[i * 4 + i] = 100;
  auto z = fx.Run(x, id, Function::kDotProduct);
  CHECK(z.scale_power == 2);
  for (std::size_t k = 0; k < 16; ++k) CHECK(z.data[k] == 100 * x.data[k]);
}

TEST_CASE("worked examples against integer oracles") {
  Fixture fx;
  Rng rng(3);
  auto x = RandomMatrix(rng, 3, 2, -50, 50);
  auto y = RandomMatrix(rng, 2, 3, -50, 50);
  auto z = fx.Run(x, y, Function::kDotProduct);
  CHECK(z.shape == std::vector<std::size_t>{2, 2});
  CHECK(z.data == MatMulOracle(y, x).data);

  auto a = RandomMatrix(rng, 3, 3, -50, 50);
  auto b = RandomMatrix(rng, 3, 3, -50, 50);
  auto s = fx.Run(a, b, Function::kSub);
  CHECK(s.data == ElementwiseOracle(Function::kSub, a, b).data);
  CHECK(s.scale_power == 1);
  auto m = fx.Run(a, b, Function::kMul);
  CHECK(m.data == ElementwiseOracle(Function::kMul, a, b).data);
  CHECK(m.scale_power == 2);
}

TEST_CASE("randomized oracle equivalence") {
  Fixture fx;
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.NextU64() % 8, m = 1 + rng.NextU64() % 8, k = 1 + rng.NextU64() % 8;
    auto x = RandomMatrix(rng, n, m, -100, 100);
    auto y = RandomMatrix(rng, k, n, -100, 100);
    REQUIRE(fx.Run(x, y, Function::kDotProduct).data == MatMulOracle(y, x).data);
    auto e = RandomMatrix(rng, n, m, -100, 100);
    for (Function f : {Function::kAdd, Function::kSub, Function::kMul})
      REQUIRE(fx.Run(x, e, f).data == ElementwiseOracle(f, x, e).data);
    // exact division: x = q * d
    auto d = RandomMatrix(rng, n, m, 1, 20);
    auto q = RandomMatrix(rng, n, m, -20, 20);
    QuantTensor prod = ElementwiseOracle(Function::kMul, q, d);
    prod.scale_power = 2;
    REQUIRE(fx.Run(prod, d, Function::kDiv).data == q.data);
  }
}

TEST_CASE("row view computes the product with the transpose") {
  Fixture fx;
  Rng rng(5);
  auto x = RandomMatrix(rng, 5, 3, -100, 100);
  auto y = RandomMatrix(rng, 2, 3, -100, 100);
  auto z = fx.Run(x, y, Function::kDotProduct, 1, DotSide::kRows);
  CHECK(z.shape == std::vector<std::size_t>{2, 5});
  CHECK(z.data == MatMulOracle(y, Transpose(x)).data);
}

TEST_CASE("inner-product and element-wise products agree") {
  Fixture fx;
  Rng rng(6);
  auto x = RandomMatrix(rng, 4, 3, -100, 100);
  auto y = RandomMatrix(rng, 2, 4, -100, 100);
  auto enc = PreProcessEncryption(x, fx.mpk, fx.rng);
  auto keys = PreProcessKeyDerive(y, Function::kDotProduct, FunctionSet::All(), *fx.authority, &enc);
  auto dot = SecureComputation(enc, Function::kDotProduct, keys, y, fx.mpk, fx.codec);
  for (std::size_t i = 0; i < 2; ++i) {
    // Row i of y broadcast against every column, one FEBO key per element.
    QuantTensor b{{4, 3}, std::vector<std::int64_t>(12), 1};
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 3; ++c) b.data[r * 3 + c] = y.data[i * 4 + r];
    auto mk = PreProcessKeyDerive(b, Function::kMul, FunctionSet::All(), *fx.authority, &enc);
    auto prod = SecureComputation(enc, Function::kMul, mk, b, fx.mpk, fx.codec);
    for (std::size_t c = 0; c < 3; ++c) {
      std::int64_t sum = 0;
      for (std::size_t r = 0; r < 4; ++r) sum += prod.data[r * 3 + c];
      CHECK(sum == dot.data[i * 3 + c]);
    }
  }
}

TEST_CASE("parallel and serial decryption agree") {
  Fixture fx;
  Rng rng(7);
  auto x = RandomMatrix(rng, 16, 16, -100, 100);
  auto y = RandomMatrix(rng, 12, 16, -100, 100);
  auto enc = PreProcessEncryption(x, fx.mpk, fx.rng);
  auto keys = PreProcessKeyDerive(y, Function::kDotProduct, FunctionSet::All(), *fx.authority, &enc);
  auto serial = SecureComputation(enc, Function::kDotProduct, keys, y, fx.mpk, fx.codec, 1);
  for (unsigned w : {2u, 4u, 8u})
    CHECK(SecureComputation(enc, Function::kDotProduct, keys, y, fx.mpk, fx.codec, w) == serial);

  Rng a(9), b(9);
  CHECK(PreProcessEncryption(x, fx.mpk, a, {}, 1) == PreProcessEncryption(x, fx.mpk, b, {}, 4));
}

TEST_CASE("key batches are bound to their encrypted matrix") {
  Fixture fx;
  Rng rng(8);
  auto x = RandomMatrix(rng, 3, 3, -50, 50);
  auto y = RandomMatrix(rng, 3, 3, -50, 50);
  auto enc1 = PreProcessEncryption(x, fx.mpk, fx.rng);
  auto enc2 = PreProcessEncryption(x, fx.mpk, fx.rng);
  auto keys = PreProcessKeyDerive(y, Function::kSub, FunctionSet::All(), *fx.authority, &enc1);
  CHECK(keys.elem_keys.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) CHECK(keys.elem_keys[k].cmt == enc1.elem_cts[k].cmt);
  CHECK(CodeOf([&] { SecureComputation(enc2, Function::kSub, keys, y, fx.mpk, fx.codec); }) ==
        ErrorCode::kKeyMismatch);
  CHECK(CodeOf([&] { SecureComputation(enc1, Function::kAdd, keys, y, fx.mpk, fx.codec); }) ==
        ErrorCode::kKeyMismatch);
}

TEST_CASE("key derivation counts and shape checks") {
  Fixture fx;
  Rng rng(9);
  auto x = RandomMatrix(rng, 3, 4, -50, 50);
  auto enc = PreProcessEncryption(x, fx.mpk, fx.rng);
  auto y = RandomMatrix(rng, 2, 3, -50, 50);
  CHECK(PreProcessKeyDerive(y, Function::kDotProduct, FunctionSet::All(), *fx.authority, &enc).row_keys.size() == 2);
  auto bad = RandomMatrix(rng, 2, 4, -50, 50);
  CHECK(CodeOf([&] { PreProcessKeyDerive(bad, Function::kDotProduct, FunctionSet::All(), *fx.authority, &enc); }) ==
        ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { PreProcessKeyDerive(y, Function::kSub, FunctionSet::All(), *fx.authority, &enc); }) ==
        ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { PreProcessKeyDerive(y, Function::kSub, FunctionSet::All(), *fx.authority, nullptr); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("functions outside the permitted set are refused") {
  Fixture fx;
  Rng rng(10);
  auto x = RandomMatrix(rng, 2, 2, -50, 50);
  auto enc = PreProcessEncryption(x, fx.mpk, fx.rng);
  FunctionSet dot_only{Function::kDotProduct};
  CHECK(CodeOf([&] { PreProcessKeyDerive(x, Function::kMul, dot_only, *fx.authority, &enc); }) ==
        ErrorCode::kUnsupportedFunction);
  auto strict = MakeAuthority(16, 1, dot_only);
  auto enc2 = PreProcessEncryption(x, strict->public_keys(), fx.rng);
  CHECK(CodeOf([&] { PreProcessKeyDerive(x, Function::kMul, FunctionSet::All(), *strict, &enc2); }) ==
        ErrorCode::kUnsupportedFunction);
}

TEST_CASE("results beyond the decryption bound are reported, never wrong") {
  Fixture fx;
  FixedPointCodec tight{2, 10};
  QuantTensor x{{1, 1}, {50}, 1};
  QuantTensor y{{1, 1}, {50}, 1};
  auto enc = PreProcessEncryption(x, fx.mpk, fx.rng);
  auto keys = PreProcessKeyDerive(y, Function::kMul, FunctionSet::All(), *fx.authority, &enc);
  CHECK(CodeOf([&] { SecureComputation(enc, Function::kMul, keys, y, fx.mpk, tight); }) == ErrorCode::kNotInRange);
}

}  // TEST_SUITE

}  // namespace
}  // namespace fenn::secure_matrix
