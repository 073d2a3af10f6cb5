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

#include "fenn/group.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <limits>

#include "fenn/error.hpp"

namespace fenn {
namespace {

constexpr unsigned kWindowBits = 4;
constexpr int kPrimeReps = 30;

inline void MulModInto(mpz_class& out, const mpz_class& a, const mpz_class& b,
                       const mpz_class& m, mpz_class& tmp) {
  mpz_mul(tmp.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  mpz_tdiv_r(out.get_mpz_t(), tmp.get_mpz_t(), m.get_mpz_t());
}

std::uint64_t Magnitude(std::int64_t v) {
  return v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1u
               : static_cast<std::uint64_t>(v);
}

// Bucket-method multi-exponentiation for unsigned exponents.
mpz_class BucketMultiPow(const mpz_class& modulus,
                         std::span<const GroupElement> bases,
                         std::span<const std::size_t> which,
                         std::span<const std::uint64_t> mags) {
  std::uint64_t max_mag = 0;
  for (std::size_t k = 0; k < which.size(); ++k) max_mag = std::max(max_mag, mags[k]);
  if (max_mag == 0) return 1;
  const unsigned bits = 64u - static_cast<unsigned>(std::countl_zero(max_mag));
  const std::size_t n = which.size();

  unsigned best_c = 1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (unsigned c = 1; c <= std::min(bits, 16u); ++c) {
    const double windows = (bits + c - 1) / c;
    const double cost = windows * (static_cast<double>(n) + std::ldexp(1.0, c + 1));
    if (cost < best_cost) {
      best_cost = cost;
      best_c = c;
    }
  }
  const unsigned c = best_c;
  const unsigned windows = (bits + c - 1) / c;
  const std::size_t nbuckets = (std::size_t{1} << c) - 1;
  const std::uint64_t mask = (std::uint64_t{1} << c) - 1;

  std::vector<mpz_class> bucket(nbuckets);
  std::vector<char> used(nbuckets);
  mpz_class acc, running, total, tmp;
  bool acc_set = false;

  for (int w = static_cast<int>(windows) - 1; w >= 0; --w) {
    if (acc_set) {
      for (unsigned s = 0; s < c; ++s) MulModInto(acc, acc, acc, modulus, tmp);
    }
    std::fill(used.begin(), used.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint64_t d = (mags[k] >> (static_cast<unsigned>(w) * c)) & mask;
      if (d == 0) continue;
      const mpz_class& base = bases[which[k]].value();
      if (used[d - 1]) {
        MulModInto(bucket[d - 1], bucket[d - 1], base, modulus, tmp);
      } else {
        bucket[d - 1] = base;
        used[d - 1] = 1;
      }
    }
    bool running_set = false;
    bool total_set = false;
    for (std::size_t d = nbuckets; d >= 1; --d) {
      if (used[d - 1]) {
        if (running_set) {
          MulModInto(running, running, bucket[d - 1], modulus, tmp);
        } else {
          running = bucket[d - 1];
          running_set = true;
        }
      }
      if (running_set) {
        if (total_set) {
          MulModInto(total, total, running, modulus, tmp);
        } else {
          total = running;
          total_set = true;
        }
      }
    }
    if (total_set) {
      if (acc_set) {
        MulModInto(acc, acc, total, modulus, tmp);
      } else {
        acc = total;
        acc_set = true;
      }
    }
  }
  return acc_set ? acc : mpz_class(1);
}

}  // namespace

GroupParams GroupGen(unsigned lambda, Rng& rng) {
  if (lambda < 16) Throw(ErrorCode::kDomainError, "lambda must be at least 16 bits");
  GroupParams params;
  params.lambda = lambda;
  mpz_class p, r;
  for (;;) {
    p = rng.UniformBits(lambda);
    mpz_setbit(p.get_mpz_t(), 0);
    // r = 2p + 1 is divisible by 3 when p = 1 mod 3.
    if (mpz_fdiv_ui(p.get_mpz_t(), 3) == 1) continue;
    r = 2 * p + 1;
    if (mpz_probab_prime_p(p.get_mpz_t(), kPrimeReps) == 0) continue;
    if (mpz_probab_prime_p(r.get_mpz_t(), kPrimeReps) == 0) continue;
    break;
  }
  params.order = p;
  params.modulus = r;
  const mpz_class upper = r - 3;  // h in [2, r-2]
  for (;;) {
    mpz_class h = rng.UniformBelow(upper) + 2;
    mpz_class g;
    mpz_powm_ui(g.get_mpz_t(), h.get_mpz_t(), 2, r.get_mpz_t());
    if (g != 1) {
      params.generator = g;
      break;
    }
  }
  return params;
}

void ValidateGroupParams(const GroupParams& params) {
  const auto& p = params.order;
  const auto& r = params.modulus;
  const auto& g = params.generator;
  if (sgn(p) <= 0 || mpz_probab_prime_p(p.get_mpz_t(), kPrimeReps) == 0)
    Throw(ErrorCode::kDomainError, "group order is not prime");
  if (mpz_sizeinbase(p.get_mpz_t(), 2) != params.lambda)
    Throw(ErrorCode::kDomainError, "group order does not have lambda bits");
  if (r != 2 * p + 1 || mpz_probab_prime_p(r.get_mpz_t(), kPrimeReps) == 0)
    Throw(ErrorCode::kDomainError, "modulus is not the safe prime 2p+1");
  if (g <= 1 || g >= r) Throw(ErrorCode::kDomainError, "generator out of range");
  mpz_class t;
  mpz_powm(t.get_mpz_t(), g.get_mpz_t(), p.get_mpz_t(), r.get_mpz_t());
  if (t != 1) Throw(ErrorCode::kDomainError, "generator does not have order p");
}

Group::Group(GroupParams params) : params_(std::move(params)) {
  const std::size_t bits = mpz_sizeinbase(params_.order.get_mpz_t(), 2);
  const std::size_t digits = (bits + kWindowBits - 1) / kWindowBits;
  generator_table_.resize(digits);
  mpz_class base = params_.generator;
  mpz_class tmp;
  for (std::size_t k = 0; k < digits; ++k) {
    auto& row = generator_table_[k];
    row.resize(std::size_t{1} << kWindowBits);
    row[0] = 1;
    for (std::size_t d = 1; d < row.size(); ++d)
      MulModInto(row[d], row[d - 1], base, params_.modulus, tmp);
    // next base = base^16
    MulModInto(base, row.back(), base, params_.modulus, tmp);
  }
}

GroupElement Group::Mul(const GroupElement& a, const GroupElement& b) const {
  mpz_class out, tmp;
  MulModInto(out, a.value(), b.value(), params_.modulus, tmp);
  return GroupElement(std::move(out));
}

GroupElement Group::Inverse(const GroupElement& a) const {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.value().get_mpz_t(), params_.modulus.get_mpz_t()) == 0)
    Throw(ErrorCode::kDomainError, "element has no inverse");
  return GroupElement(std::move(out));
}

GroupElement Group::Div(const GroupElement& a, const GroupElement& b) const {
  return Mul(a, Inverse(b));
}

GroupElement Group::Pow(const GroupElement& base, const mpz_class& e) const {
  mpz_class reduced;
  mpz_mod(reduced.get_mpz_t(), e.get_mpz_t(), params_.order.get_mpz_t());
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.value().get_mpz_t(), reduced.get_mpz_t(),
           params_.modulus.get_mpz_t());
  return GroupElement(std::move(out));
}

GroupElement Group::Pow(const GroupElement& base, std::int64_t e) const {
  const std::uint64_t mag = Magnitude(e);
  mpz_class exp;
  mpz_import(exp.get_mpz_t(), 1, 1, sizeof(mag), 0, 0, &mag);
  if (e < 0) exp = -exp;
  return Pow(base, exp);
}

GroupElement Group::Pow(const GroupElement& base, const Scalar& e) const {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.value().get_mpz_t(), e.value().get_mpz_t(),
           params_.modulus.get_mpz_t());
  return GroupElement(std::move(out));
}

GroupElement Group::PowG(const mpz_class& e) const {
  mpz_class reduced;
  mpz_mod(reduced.get_mpz_t(), e.get_mpz_t(), params_.order.get_mpz_t());
  mpz_class acc = 1, tmp;
  const std::size_t bits = mpz_sizeinbase(reduced.get_mpz_t(), 2);
  const std::size_t digits = std::min(generator_table_.size(), (bits + kWindowBits - 1) / kWindowBits);
  for (std::size_t k = 0; k < digits; ++k) {
    unsigned d = 0;
    for (unsigned b = 0; b < kWindowBits; ++b)
      d |= static_cast<unsigned>(mpz_tstbit(reduced.get_mpz_t(), k * kWindowBits + b)) << b;
    if (d != 0) MulModInto(acc, acc, generator_table_[k][d], params_.modulus, tmp);
  }
  return GroupElement(std::move(acc));
}

GroupElement Group::PowG(std::int64_t e) const {
  const std::uint64_t mag = Magnitude(e);
  mpz_class exp;
  mpz_import(exp.get_mpz_t(), 1, 1, sizeof(mag), 0, 0, &mag);
  if (e < 0) exp = -exp;
  return PowG(exp);
}

GroupElement Group::MultiPow(std::span<const GroupElement> bases,
                             std::span<const std::int64_t> exps) const {
  if (bases.size() != exps.size())
    Throw(ErrorCode::kLengthMismatch, "MultiPow: bases and exponents differ in length");
  std::vector<std::size_t> pos_idx, neg_idx;
  std::vector<std::uint64_t> pos_mag, neg_mag;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] > 0) {
      pos_idx.push_back(i);
      pos_mag.push_back(Magnitude(exps[i]));
    } else if (exps[i] < 0) {
      neg_idx.push_back(i);
      neg_mag.push_back(Magnitude(exps[i]));
    }
  }
  GroupElement pos(BucketMultiPow(params_.modulus, bases, pos_idx, pos_mag));
  if (neg_idx.empty()) return pos;
  GroupElement neg(BucketMultiPow(params_.modulus, bases, neg_idx, neg_mag));
  return Div(pos, neg);
}

bool Group::Contains(const GroupElement& e) const {
  const auto& v = e.value();
  if (v < 1 || v >= params_.modulus) return false;
  mpz_class t;
  mpz_powm(t.get_mpz_t(), v.get_mpz_t(), params_.order.get_mpz_t(), params_.modulus.get_mpz_t());
  return t == 1;
}

Scalar Group::SampleScalar(Rng& rng) const { return Scalar(rng.UniformBelow(params_.order)); }

Scalar Group::ToScalar(const mpz_class& v) const {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), params_.order.get_mpz_t());
  return Scalar(std::move(r));
}

Scalar Group::ToScalar(std::int64_t v) const {
  const std::uint64_t mag = Magnitude(v);
  mpz_class x;
  mpz_import(x.get_mpz_t(), 1, 1, sizeof(mag), 0, 0, &mag);
  if (v < 0) x = -x;
  return ToScalar(x);
}

Scalar Group::Add(const Scalar& a, const Scalar& b) const {
  return ToScalar(mpz_class(a.value() + b.value()));
}

Scalar Group::Mul(const Scalar& a, const Scalar& b) const {
  return ToScalar(mpz_class(a.value() * b.value()));
}

Scalar Group::Invert(const Scalar& a) const {
  mpz_class out;
  if (sgn(a.value()) == 0 ||
      mpz_invert(out.get_mpz_t(), a.value().get_mpz_t(), params_.order.get_mpz_t()) == 0)
    Throw(ErrorCode::kDivisorZero, "scalar has no inverse modulo the group order");
  return Scalar(std::move(out));
}

std::string ToHex(const mpz_class& v) { return v.get_str(16); }

mpz_class FromHex(const std::string& hex) {
  if (hex.empty()) Throw(ErrorCode::kMalformedInput, "empty hex string");
  for (char ch : hex) {
    const bool ok = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f') || (ch >= 'A' && ch <= 'F');
    if (!ok) Throw(ErrorCode::kMalformedInput, "invalid hex digit in '" + hex + "'");
  }
  return mpz_class(hex, 16);
}

}  // namespace fenn
