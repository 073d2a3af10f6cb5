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
#include <optional>
#include <vector>

#include "fenn/group.hpp"

namespace fenn {

// Baby-step giant-step solver for exponents in a symmetric range [-B, B].
//
// The baby-step table holds g^j for j in [0, m). A lookup walks giant steps
// target * g^(-i*m) and target^-1 * g^(-i*m) in lockstep, so small
// magnitudes resolve after a few steps regardless of how loose B is. The
// table depends only on the group and m; the bound is a per-call argument.
class DlogTable {
 public:
  DlogTable(GroupPtr group, std::uint64_t table_size);

  // Shared table sized for `bound`, built on first use and cached for the
  // lifetime of the process. Sizes are rounded to a power of two and capped
  // at kMaxTableSize.
  static std::shared_ptr<const DlogTable> ForBound(const GroupPtr& group,
                                                   std::uint64_t bound);

  static constexpr std::uint64_t kMaxTableSize = std::uint64_t{1} << 20;

  // The unique z with |z| <= bound and g^z == target, if any.
  std::optional<std::int64_t> TrySolve(const GroupElement& target,
                                       std::uint64_t bound) const;
  // As TrySolve, throwing kNotInRange when nothing is found.
  std::int64_t Solve(const GroupElement& target, std::uint64_t bound) const;

  std::uint64_t table_size() const { return m_; }
  const GroupPtr& group() const { return group_; }

 private:
  struct Slot {
    std::uint64_t key = 0;
    std::uint32_t index_plus_one = 0;  // 0 marks an empty slot
  };

  static std::uint64_t KeyOf(const mpz_class& v);
  void Insert(std::uint64_t key, std::uint32_t index);
  // Returns j when g^j == value for some j < m.
  std::optional<std::uint64_t> Lookup(const mpz_class& value) const;

  GroupPtr group_;
  std::uint64_t m_;
  std::vector<Slot> slots_;
  std::uint64_t slot_mask_;
  GroupElement giant_;  // g^(-m)
};

// One-shot convenience over DlogTable::ForBound.
std::int64_t DlogBsgs(const GroupPtr& group, const GroupElement& target,
                      std::uint64_t bound);

}  // namespace fenn
