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

#include "fenn/feip.hpp"

#include <algorithm>
#include <string>

#include "fenn/error.hpp"

namespace fenn::feip {

Mpk Mpk::Prefix(std::size_t n) const {
  if (n > h.size())
    Throw(ErrorCode::kLengthMismatch, "public key supports eta=" + std::to_string(h.size()) +
                                          ", requested " + std::to_string(n));
  return Mpk{group, std::vector<GroupElement>(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(n))};
}

Msk Msk::Prefix(std::size_t n) const {
  if (n > s.size())
    Throw(ErrorCode::kLengthMismatch, "master key supports eta=" + std::to_string(s.size()) +
                                          ", requested " + std::to_string(n));
  return Msk{group, std::vector<Scalar>(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n))};
}

std::pair<Mpk, Msk> Setup(GroupPtr group, std::size_t eta, Rng& rng) {
  if (eta == 0) Throw(ErrorCode::kLengthMismatch, "eta must be at least 1");
  Mpk mpk{group, {}};
  Msk msk{group, {}};
  mpk.h.reserve(eta);
  msk.s.reserve(eta);
  for (std::size_t i = 0; i < eta; ++i) {
    msk.s.push_back(group->SampleScalar(rng));
    mpk.h.push_back(group->PowG(msk.s.back()));
  }
  return {std::move(mpk), std::move(msk)};
}

FunctionKey KeyDerive(const Msk& msk, std::span<const std::int64_t> y) {
  if (y.size() != msk.eta())
    Throw(ErrorCode::kLengthMismatch, "key vector length " + std::to_string(y.size()) +
                                          " != eta " + std::to_string(msk.eta()));
  mpz_class acc = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) continue;
    acc += msk.group->ToScalar(y[i]).value() * msk.s[i].value();
  }
  return FunctionKey{msk.group->ToScalar(acc), std::vector<std::int64_t>(y.begin(), y.end())};
}

Ciphertext EncryptWithNonce(const Mpk& mpk, std::span<const std::int64_t> x, const Scalar& r) {
  if (x.size() != mpk.eta())
    Throw(ErrorCode::kLengthMismatch, "plaintext length " + std::to_string(x.size()) +
                                          " != eta " + std::to_string(mpk.eta()));
  const Group& grp = *mpk.group;
  Ciphertext out;
  out.ct0 = grp.PowG(r);
  out.ct.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    GroupElement mask = grp.Pow(mpk.h[i], r);
    out.ct.push_back(x[i] == 0 ? std::move(mask) : grp.Mul(mask, grp.PowG(x[i])));
  }
  return out;
}

Ciphertext Encrypt(const Mpk& mpk, std::span<const std::int64_t> x, Rng& rng) {
  return EncryptWithNonce(mpk, x, mpk.group->SampleScalar(rng));
}

std::int64_t Decrypt(const Mpk& mpk, const Ciphertext& ct, const FunctionKey& fk,
                     std::span<const std::int64_t> y, std::uint64_t bound,
                     const DlogTable& dlog) {
  if (ct.eta() != y.size() || fk.y.size() != y.size())
    Throw(ErrorCode::kLengthMismatch, "ciphertext eta " + std::to_string(ct.eta()) +
                                          ", key eta " + std::to_string(fk.y.size()) +
                                          ", vector length " + std::to_string(y.size()));
  if (!std::equal(y.begin(), y.end(), fk.y.begin()))
    Throw(ErrorCode::kKeyMismatch, "function key was derived for a different vector");
  const Group& grp = *mpk.group;
  GroupElement num = grp.MultiPow(ct.ct, y);
  GroupElement den = grp.Pow(ct.ct0, fk.sk);
  return dlog.Solve(grp.Div(num, den), bound);
}

std::int64_t Decrypt(const Mpk& mpk, const Ciphertext& ct, const FunctionKey& fk,
                     std::span<const std::int64_t> y, std::uint64_t bound) {
  return Decrypt(mpk, ct, fk, y, bound, *DlogTable::ForBound(mpk.group, bound));
}

}  // namespace fenn::feip
