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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fenn/dlog.hpp"
#include "fenn/group.hpp"
#include "fenn/rng.hpp"

// Functional encryption for inner products over a DDH group.
//
//   Setup:     s <- Z_p^eta, mpk = (g, h_i = g^s_i), msk = s
//   KeyDerive: sk_y = <y, s> mod p
//   Encrypt:   ct_0 = g^r, ct_i = h_i^r * g^x_i
//   Decrypt:   dlog_g( prod_i ct_i^y_i / ct_0^sk_y ) = <x, y>
//
// Plaintexts and key vectors are signed; negative values live as exponents
// mod p and come back through the signed dlog range.
namespace fenn::feip {

struct Mpk {
  GroupPtr group;
  std::vector<GroupElement> h;

  std::size_t eta() const { return h.size(); }
  // Public key for the first `eta` coordinates. Encrypting a short vector
  // under a prefix is the same as encrypting it zero-padded and discarding
  // the tail.
  Mpk Prefix(std::size_t eta) const;
};

struct Msk {
  GroupPtr group;
  std::vector<Scalar> s;

  std::size_t eta() const { return s.size(); }
  Msk Prefix(std::size_t eta) const;
};

struct FunctionKey {
  Scalar sk;
  std::vector<std::int64_t> y;
};

struct Ciphertext {
  GroupElement ct0;
  std::vector<GroupElement> ct;

  std::size_t eta() const { return ct.size(); }
  bool operator==(const Ciphertext&) const = default;
};

std::pair<Mpk, Msk> Setup(GroupPtr group, std::size_t eta, Rng& rng);

FunctionKey KeyDerive(const Msk& msk, std::span<const std::int64_t> y);

Ciphertext Encrypt(const Mpk& mpk, std::span<const std::int64_t> x, Rng& rng);
// Encryption with a caller-chosen nonce; lets batch encryption draw all
// nonces serially and then run the exponentiations in parallel.
Ciphertext EncryptWithNonce(const Mpk& mpk, std::span<const std::int64_t> x,
                            const Scalar& r);

// Returns <x, y>. Throws kKeyMismatch when fk was derived for another
// vector, kLengthMismatch on size disagreement and kNotInRange when the
// result is not within [-bound, bound].
std::int64_t Decrypt(const Mpk& mpk, const Ciphertext& ct, const FunctionKey& fk,
                     std::span<const std::int64_t> y, std::uint64_t bound);
std::int64_t Decrypt(const Mpk& mpk, const Ciphertext& ct, const FunctionKey& fk,
                     std::span<const std::int64_t> y, std::uint64_t bound,
                     const DlogTable& dlog);

}  // namespace fenn::feip
