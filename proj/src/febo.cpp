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

#include "fenn/febo.hpp"

#include "fenn/error.hpp"

namespace fenn::febo {

std::string_view OpName(Op op) {
  switch (op) {
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
  }
  return "?";
}

std::optional<Op> ParseOp(std::string_view name) {
  if (name == "add") return Op::kAdd;
  if (name == "sub") return Op::kSub;
  if (name == "mul") return Op::kMul;
  if (name == "div") return Op::kDiv;
  return std::nullopt;
}

std::pair<Mpk, Msk> Setup(GroupPtr group, Rng& rng) {
  Scalar s = group->SampleScalar(rng);
  GroupElement h = group->PowG(s);
  return {Mpk{group, std::move(h)}, Msk{group, std::move(s)}};
}

Ciphertext EncryptWithNonce(const Mpk& mpk, std::int64_t x, const Scalar& r) {
  const Group& grp = *mpk.group;
  GroupElement mask = grp.Pow(mpk.h, r);
  return Ciphertext{grp.PowG(r), x == 0 ? std::move(mask) : grp.Mul(mask, grp.PowG(x))};
}

Ciphertext Encrypt(const Mpk& mpk, std::int64_t x, Rng& rng) {
  return EncryptWithNonce(mpk, x, mpk.group->SampleScalar(rng));
}

FunctionKey KeyDerive(const Msk& msk, const GroupElement& cmt, Op op, std::int64_t y) {
  const Group& grp = *msk.group;
  GroupElement shared = grp.Pow(cmt, msk.s);  // cmt^s = h^r
  GroupElement sk;
  switch (op) {
    case Op::kAdd:
      sk = grp.Div(shared, grp.PowG(y));
      break;
    case Op::kSub:
      sk = grp.Mul(shared, grp.PowG(y));
      break;
    case Op::kMul:
      sk = grp.Pow(shared, grp.ToScalar(y));
      break;
    case Op::kDiv: {
      Scalar y_scalar = grp.ToScalar(y);
      if (sgn(y_scalar.value()) == 0) Throw(ErrorCode::kDivisorZero, "division by zero");
      sk = grp.Pow(shared, grp.Invert(y_scalar));
      break;
    }
  }
  return FunctionKey{std::move(sk), op, y, cmt};
}

std::int64_t Decrypt(const Mpk& mpk, const FunctionKey& fk, const Ciphertext& ct, Op op,
                     std::int64_t y, std::uint64_t bound, const DlogTable& dlog) {
  if (!(fk.cmt == ct.cmt))
    Throw(ErrorCode::kKeyMismatch, "function key is bound to a different commitment");
  if (fk.op != op || fk.y != y)
    Throw(ErrorCode::kKeyMismatch, "function key was derived for a different operation");
  const Group& grp = *mpk.group;
  GroupElement lifted;
  switch (op) {
    case Op::kAdd:
    case Op::kSub:
      lifted = ct.ct;
      break;
    case Op::kMul:
      lifted = grp.Pow(ct.ct, grp.ToScalar(y));
      break;
    case Op::kDiv:
      lifted = grp.Pow(ct.ct, grp.Invert(grp.ToScalar(y)));
      break;
  }
  return dlog.Solve(grp.Div(lifted, fk.sk), bound);
}

std::int64_t Decrypt(const Mpk& mpk, const FunctionKey& fk, const Ciphertext& ct, Op op,
                     std::int64_t y, std::uint64_t bound) {
  return Decrypt(mpk, fk, ct, op, y, bound, *DlogTable::ForBound(mpk.group, bound));
}

}  // namespace fenn::febo
