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
#include <optional>
#include <string_view>
#include <utility>

#include "fenn/dlog.hpp"
#include "fenn/group.hpp"
#include "fenn/rng.hpp"

// Functional encryption for one basic arithmetic operation x (op) y where x
// is encrypted and y is the key holder's plaintext operand.
//
//   Setup:     msk = s, mpk = (h = g^s, g)
//   Encrypt:   cmt = g^r, ct = h^r * g^x
//   KeyDerive: add  cmt^s * g^-y
//              sub  cmt^s * g^y
//              mul  (cmt^s)^y
//              div  (cmt^s)^(y^-1 mod p)
//   Decrypt:   ct / sk (add, sub), ct^y / sk (mul), ct^(y^-1) / sk (div)
//
// Keys are bound to the commitment of one ciphertext. Division is exact
// division only: when y does not divide x the recovered exponent is
// x * y^-1 mod p, which falls outside any practical dlog bound.
namespace fenn::febo {

enum class Op { kAdd, kSub, kMul, kDiv };

std::string_view OpName(Op op);
std::optional<Op> ParseOp(std::string_view name);

struct Mpk {
  GroupPtr group;
  GroupElement h;
};

struct Msk {
  GroupPtr group;
  Scalar s;
};

struct Ciphertext {
  GroupElement cmt;
  GroupElement ct;

  bool operator==(const Ciphertext&) const = default;
};

struct FunctionKey {
  GroupElement sk;
  Op op = Op::kAdd;
  std::int64_t y = 0;
  GroupElement cmt;  // commitment this key is bound to
};

std::pair<Mpk, Msk> Setup(GroupPtr group, Rng& rng);

Ciphertext Encrypt(const Mpk& mpk, std::int64_t x, Rng& rng);
Ciphertext EncryptWithNonce(const Mpk& mpk, std::int64_t x, const Scalar& r);

// Throws kDivisorZero for division by y == 0 mod p.
FunctionKey KeyDerive(const Msk& msk, const GroupElement& cmt, Op op, std::int64_t y);

// Returns x (op) y. Throws kKeyMismatch when fk is bound to another
// commitment, operation or operand (checked before any group work) and
// kNotInRange when the result is outside [-bound, bound].
std::int64_t Decrypt(const Mpk& mpk, const FunctionKey& fk, const Ciphertext& ct, Op op,
                     std::int64_t y, std::uint64_t bound);
std::int64_t Decrypt(const Mpk& mpk, const FunctionKey& fk, const Ciphertext& ct, Op op,
                     std::int64_t y, std::uint64_t bound, const DlogTable& dlog);

}  // namespace fenn::febo
