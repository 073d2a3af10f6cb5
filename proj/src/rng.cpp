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

#include "fenn/rng.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <sodium.h>

namespace fenn {
namespace {

void EnsureSodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  });
}

}  // namespace

Rng::Rng() { EnsureSodium(); }

Rng::Rng(std::uint64_t seed) : seeded_(true) {
  EnsureSodium();
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  crypto_hash_sha256(key_.data(), bytes, sizeof(bytes));
}

void Rng::Refill() {
  std::uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
  ++counter_;
  crypto_stream_chacha20_ietf(buffer_.data(), buffer_.size(), nonce, key_.data());
  used_ = 0;
}

void Rng::Fill(std::span<std::uint8_t> out) {
  if (!seeded_) {
    randombytes_buf(out.data(), out.size());
    return;
  }
  std::size_t done = 0;
  while (done < out.size()) {
    if (used_ == buffer_.size()) Refill();
    const std::size_t n = std::min(out.size() - done, buffer_.size() - used_);
    std::memcpy(out.data() + done, buffer_.data() + used_, n);
    used_ += n;
    done += n;
  }
}

std::uint64_t Rng::NextU64() {
  std::uint8_t b[8];
  Fill(b);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

mpz_class Rng::UniformBelow(const mpz_class& bound) {
  if (sgn(bound) <= 0) throw std::invalid_argument("UniformBelow: bound must be positive");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t nbytes = (bits + 7) / 8;
  std::vector<std::uint8_t> buf(nbytes);
  const unsigned top_bits = static_cast<unsigned>(bits - 8 * (nbytes - 1));
  const std::uint8_t mask = static_cast<std::uint8_t>((1u << top_bits) - 1u);
  mpz_class v;
  for (;;) {
    Fill(buf);
    buf[0] &= mask;
    mpz_import(v.get_mpz_t(), nbytes, 1, 1, 1, 0, buf.data());
    if (v < bound) return v;
  }
}

mpz_class Rng::UniformBits(unsigned bits) {
  if (bits == 0) return 0;
  mpz_class limit = 1;
  limit <<= bits - 1;
  mpz_class v = UniformBelow(limit);
  return v + limit;
}

Rng Rng::Fork() {
  if (!seeded_) return Rng();
  Rng child(NextU64());
  return child;
}

}  // namespace fenn
