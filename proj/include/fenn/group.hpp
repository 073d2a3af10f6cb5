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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "fenn/rng.hpp"

namespace fenn {

// Description of a cyclic group of prime order `order` inside Z*_modulus.
// The default instantiation is the quadratic-residue subgroup of a safe
// prime, modulus = 2 * order + 1.
struct GroupParams {
  mpz_class modulus;
  mpz_class order;
  mpz_class generator;
  unsigned lambda = 0;

  bool operator==(const GroupParams&) const = default;
};

// Samples a safe-prime group whose order has exactly `lambda` bits. The search
// consumes randomness from `rng` only, so a seeded Rng yields a fixed triple.
// Sizes below 128 bits are for tests and offer no security.
GroupParams GroupGen(unsigned lambda, Rng& rng);

// Throws kDomainError when any invariant of GroupParams is violated.
void ValidateGroupParams(const GroupParams& params);

// Element of the prime-order subgroup, stored as its residue mod modulus.
class GroupElement {
 public:
  GroupElement() : value_(1) {}
  explicit GroupElement(mpz_class value) : value_(std::move(value)) {}

  const mpz_class& value() const { return value_; }
  mpz_class& mutable_value() { return value_; }

  bool operator==(const GroupElement& other) const {
    return cmp(value_, other.value_) == 0;
  }

 private:
  mpz_class value_;
};

// Exponent, always reduced into [0, order).
class Scalar {
 public:
  Scalar() = default;
  explicit Scalar(mpz_class value) : value_(std::move(value)) {}

  const mpz_class& value() const { return value_; }

  bool operator==(const Scalar& other) const {
    return cmp(value_, other.value_) == 0;
  }

 private:
  mpz_class value_{0};
};

class Group;
using GroupPtr = std::shared_ptr<const Group>;

// Arithmetic over one set of GroupParams. Immutable after construction and
// safe to share between threads.
class Group {
 public:
  explicit Group(GroupParams params);

  static GroupPtr Create(GroupParams params) {
    return std::make_shared<const Group>(std::move(params));
  }

  const GroupParams& params() const { return params_; }
  const mpz_class& modulus() const { return params_.modulus; }
  const mpz_class& order() const { return params_.order; }

  GroupElement Generator() const { return GroupElement(params_.generator); }
  GroupElement Identity() const { return GroupElement(mpz_class(1)); }

  GroupElement Mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement Div(const GroupElement& a, const GroupElement& b) const;
  GroupElement Inverse(const GroupElement& a) const;

  // base^e with e taken mod order; negative exponents are allowed.
  GroupElement Pow(const GroupElement& base, const mpz_class& e) const;
  GroupElement Pow(const GroupElement& base, std::int64_t e) const;
  GroupElement Pow(const GroupElement& base, const Scalar& e) const;

  // Generator powers through a precomputed fixed-base table.
  GroupElement PowG(const mpz_class& e) const;
  GroupElement PowG(std::int64_t e) const;
  GroupElement PowG(const Scalar& e) const { return PowG(e.value()); }

  // prod_i bases[i]^exps[i] for small signed exponents.
  GroupElement MultiPow(std::span<const GroupElement> bases,
                        std::span<const std::int64_t> exps) const;

  // Subgroup membership: 1 <= v < modulus and v^order == 1.
  bool Contains(const GroupElement& e) const;

  Scalar SampleScalar(Rng& rng) const;
  Scalar ToScalar(const mpz_class& v) const;
  Scalar ToScalar(std::int64_t v) const;
  Scalar Add(const Scalar& a, const Scalar& b) const;
  Scalar Mul(const Scalar& a, const Scalar& b) const;
  // Throws kDivisorZero for the zero scalar.
  Scalar Invert(const Scalar& a) const;

 private:
  GroupParams params_;
  // generator_table_[k][d] = g^(d * 16^k)
  std::vector<std::vector<mpz_class>> generator_table_;
};

// Lowercase big-endian hex, no prefix.
std::string ToHex(const mpz_class& v);
// Throws kMalformedInput on anything that is not a non-empty hex string.
mpz_class FromHex(const std::string& hex);

}  // namespace fenn
