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

#include "fenn/dlog.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "fenn/error.hpp"

namespace fenn {

DlogTable::DlogTable(GroupPtr group, std::uint64_t table_size)
    : group_(std::move(group)), m_(std::max<std::uint64_t>(1, table_size)) {
  if (m_ > (std::uint64_t{1} << 31)) Throw(ErrorCode::kDomainError, "dlog table too large");
  const std::uint64_t capacity = std::bit_ceil(2 * m_);
  slots_.resize(capacity);
  slot_mask_ = capacity - 1;

  const auto& mod = group_->modulus();
  const auto& g = group_->params().generator;
  mpz_class cur = 1, tmp;
  for (std::uint64_t j = 0; j < m_; ++j) {
    Insert(KeyOf(cur), static_cast<std::uint32_t>(j));
    mpz_mul(tmp.get_mpz_t(), cur.get_mpz_t(), g.get_mpz_t());
    mpz_tdiv_r(cur.get_mpz_t(), tmp.get_mpz_t(), mod.get_mpz_t());
  }
  // cur == g^m now
  giant_ = group_->Inverse(GroupElement(cur));
}

std::uint64_t DlogTable::KeyOf(const mpz_class& v) {
  static_assert(sizeof(mp_limb_t) == 8, "64-bit limbs expected");
  return static_cast<std::uint64_t>(mpz_getlimbn(v.get_mpz_t(), 0));
}

void DlogTable::Insert(std::uint64_t key, std::uint32_t index) {
  std::uint64_t pos = (key * 0x9E3779B97F4A7C15ull) & slot_mask_;
  while (slots_[pos].index_plus_one != 0) pos = (pos + 1) & slot_mask_;
  slots_[pos] = Slot{key, index + 1};
}

std::optional<std::uint64_t> DlogTable::Lookup(const mpz_class& value) const {
  const std::uint64_t key = KeyOf(value);
  std::uint64_t pos = (key * 0x9E3779B97F4A7C15ull) & slot_mask_;
  while (slots_[pos].index_plus_one != 0) {
    if (slots_[pos].key == key) {
      const std::uint64_t j = slots_[pos].index_plus_one - 1;
      // Low limbs can collide; confirm against the full residue.
      if (group_->PowG(static_cast<std::int64_t>(j)).value() == value) return j;
    }
    pos = (pos + 1) & slot_mask_;
  }
  return std::nullopt;
}

std::optional<std::int64_t> DlogTable::TrySolve(const GroupElement& target,
                                                std::uint64_t bound) const {
  if (bound > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    Throw(ErrorCode::kDomainError, "dlog bound exceeds int64 range");
  // The symmetric range must not wrap around the group order.
  if (mpz_class(2) * mpz_class(std::to_string(bound)) + 1 >= group_->order())
    Throw(ErrorCode::kDomainError, "dlog bound too large for the group order");

  const auto& mod = group_->modulus();
  mpz_class pos = target.value();
  mpz_class neg = group_->Inverse(target).value();
  mpz_class tmp;
  const std::uint64_t steps = bound / m_;
  for (std::uint64_t i = 0; i <= steps; ++i) {
    if (auto j = Lookup(pos)) {
      const std::uint64_t z = i * m_ + *j;
      if (z <= bound) return static_cast<std::int64_t>(z);
    }
    if (auto j = Lookup(neg)) {
      const std::uint64_t z = i * m_ + *j;
      if (z <= bound) return -static_cast<std::int64_t>(z);
    }
    mpz_mul(tmp.get_mpz_t(), pos.get_mpz_t(), giant_.value().get_mpz_t());
    mpz_tdiv_r(pos.get_mpz_t(), tmp.get_mpz_t(), mod.get_mpz_t());
    mpz_mul(tmp.get_mpz_t(), neg.get_mpz_t(), giant_.value().get_mpz_t());
    mpz_tdiv_r(neg.get_mpz_t(), tmp.get_mpz_t(), mod.get_mpz_t());
  }
  return std::nullopt;
}

std::int64_t DlogTable::Solve(const GroupElement& target, std::uint64_t bound) const {
  if (auto z = TrySolve(target, bound)) return *z;
  Throw(ErrorCode::kNotInRange,
        "no exponent within [-" + std::to_string(bound) + ", " + std::to_string(bound) + "]");
}

std::shared_ptr<const DlogTable> DlogTable::ForBound(const GroupPtr& group,
                                                     std::uint64_t bound) {
  const double root = std::ceil(std::sqrt(static_cast<double>(bound) + 1.0));
  std::uint64_t m = std::bit_ceil(static_cast<std::uint64_t>(std::max(1.0, root)));
  m = std::min(m, kMaxTableSize);

  static std::mutex mu;
  static std::map<std::tuple<std::string, std::string, std::uint64_t>,
                  std::shared_ptr<const DlogTable>> cache;
  auto key = std::make_tuple(ToHex(group->modulus()), ToHex(group->params().generator), m);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const DlogTable>(group, m);
  cache.emplace(std::move(key), table);
  return table;
}

std::int64_t DlogBsgs(const GroupPtr& group, const GroupElement& target, std::uint64_t bound) {
  return DlogTable::ForBound(group, bound)->Solve(target, bound);
}

}  // namespace fenn
