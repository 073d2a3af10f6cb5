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
#include <optional>
#include <span>
#include <string_view>

#include "fenn/training.hpp"
#include "fenn/rng.hpp"

// Timings for the secure matrix primitives. Sizes count matrix elements for
// encryption, key derivation and element-wise decryption, and output cells
// for dot-product decryption.
namespace fenn::bench {

enum class Op { kEnc, kKeyDerive, kDecAdd, kDecMul, kDecDot };

std::string_view OpName(Op op);
std::optional<Op> ParseOp(std::string_view name);

// Inner dimension of the dot-product benchmark.
inline constexpr std::size_t kDotEta = 16;

// Best of `reps` wall-clock runs of one operation, in milliseconds. Setup
// work (encrypting inputs, deriving keys for decryption) is not timed.
double TimeOp(Op op, std::size_t size, unsigned workers, training::Authority& authority, Rng& rng,
              unsigned reps = 1);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares y = slope * x + intercept.
LinearFit FitLine(std::span<const double> x, std::span<const double> y);

}  // namespace fenn::bench
