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
#include <array>

#include <gmpxx.h>

namespace fenn {

// Random byte source. Unseeded instances draw from the operating system
// CSPRNG; seeded instances expand the seed with ChaCha20 so that every run
// with the same seed sees the same stream. Not thread-safe: give each thread
// its own instance or pre-draw values serially.
class Rng {
 public:
  // OS-backed CSPRNG.
  Rng();
  explicit Rng(std::uint64_t seed);

  static Rng FromOptionalSeed(std::optional<std::uint64_t> seed) {
    return seed ? Rng(*seed) : Rng();
  }

  bool seeded() const noexcept { return seeded_; }

  void Fill(std::span<std::uint8_t> out);
  std::uint64_t NextU64();

  // Uniform in [0, bound). bound must be positive.
  mpz_class UniformBelow(const mpz_class& bound);
  // Uniform integer with exactly `bits` bits (top bit set).
  mpz_class UniformBits(unsigned bits);

  // Independent child stream; deterministic when this Rng is seeded.
  Rng Fork();

 private:
  void Refill();

  bool seeded_ = false;
  std::array<std::uint8_t, 32> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 512> buffer_{};
  std::size_t used_ = 512;
};

}  // namespace fenn
