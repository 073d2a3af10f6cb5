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

#include "fenn/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>

#include "fenn/error.hpp"
#include "fenn/secure_matrix.hpp"

namespace fenn::bench {
namespace {

constexpr std::array<std::string_view, 5> kNames = {"enc", "keyderive", "dec-add", "dec-mul", "dec-dot"};

QuantTensor RandomTensor(Rng& rng, std::size_t rows, std::size_t cols, std::int64_t lo, std::int64_t hi) {
  QuantTensor t;
  t.shape = {rows, cols};
  t.scale_power = 1;
  t.data.resize(rows * cols);
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  for (auto& v : t.data) v = lo + static_cast<std::int64_t>(rng.NextU64() % span);
  return t;
}

// One untimed run first so cached tables do not land in the first sample.
template <class F>
double Best(unsigned reps, F&& fn) {
  fn();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned i = 0; i < std::max(1u, reps); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

std::string_view OpName(Op op) { return kNames.at(static_cast<std::size_t>(op)); }

std::optional<Op> ParseOp(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<Op>(i);
  return std::nullopt;
}

double TimeOp(Op op, std::size_t size, unsigned workers, training::Authority& authority, Rng& rng,
              unsigned reps) {
  if (size == 0) return 0.0;
  if (workers == 0) Throw(ErrorCode::kDomainError, "workers must be at least 1");
  const auto& mpk = authority.public_keys();
  const FixedPointCodec codec;
  const FunctionSet all = FunctionSet::All();
  const secure_matrix::Views elements{.columns = false, .elements = true, .rows = false};

  switch (op) {
    case Op::kEnc: {
      const auto x = RandomTensor(rng, 1, size, -100, 100);
      return Best(reps, [&] { secure_matrix::PreProcessEncryption(x, mpk, rng, elements, workers); });
    }
    case Op::kKeyDerive: {
      const auto x = RandomTensor(rng, 1, size, -100, 100);
      const auto enc = secure_matrix::PreProcessEncryption(x, mpk, rng, elements, workers);
      const auto y = RandomTensor(rng, 1, size, -100, 100);
      return Best(reps, [&] { secure_matrix::PreProcessKeyDerive(y, Function::kAdd, all, authority, &enc); });
    }
    case Op::kDecAdd:
    case Op::kDecMul: {
      const Function f = op == Op::kDecAdd ? Function::kAdd : Function::kMul;
      const auto x = RandomTensor(rng, 1, size, -100, 100);
      const auto enc = secure_matrix::PreProcessEncryption(x, mpk, rng, elements, workers);
      auto y = RandomTensor(rng, 1, size, -100, 100);
      const auto keys = secure_matrix::PreProcessKeyDerive(y, f, all, authority, &enc);
      return Best(reps, [&] { secure_matrix::SecureComputation(enc, f, keys, y, mpk, codec, workers); });
    }
    case Op::kDecDot: {
      const auto x = RandomTensor(rng, kDotEta, size, -100, 100);
      const auto enc = secure_matrix::PreProcessEncryption(
          x, mpk, rng, {.columns = true, .elements = false, .rows = false}, workers);
      const auto y = RandomTensor(rng, 1, kDotEta, -100, 100);
      const auto keys = secure_matrix::PreProcessKeyDerive(y, Function::kDotProduct, all, authority, &enc);
      return Best(reps, [&] {
        secure_matrix::SecureComputation(enc, Function::kDotProduct, keys, y, mpk, codec, workers);
      });
    }
  }
  return 0.0;
}

LinearFit FitLine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) Throw(ErrorCode::kLengthMismatch, "a line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace fenn::bench
