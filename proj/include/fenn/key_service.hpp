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
#include <vector>

#include "fenn/encoding.hpp"
#include "fenn/febo.hpp"
#include "fenn/group.hpp"

namespace fenn {

// Functions a server may compute over encrypted matrices.
enum class Function { kDotProduct, kAdd, kSub, kMul, kDiv };

std::string_view FunctionName(Function f);
std::optional<Function> ParseFunction(std::string_view name);
febo::Op ElementwiseOp(Function f);  // throws for kDotProduct

class FunctionSet {
 public:
  FunctionSet() = default;
  FunctionSet(std::initializer_list<Function> fs) {
    for (auto f : fs) Insert(f);
  }
  static FunctionSet All() {
    return {Function::kDotProduct, Function::kAdd, Function::kSub, Function::kMul, Function::kDiv};
  }

  void Insert(Function f) { bits_ |= Bit(f); }
  bool Contains(Function f) const { return (bits_ & Bit(f)) != 0; }
  std::vector<Function> Members() const;

  bool operator==(const FunctionSet&) const = default;

 private:
  static unsigned Bit(Function f) { return 1u << static_cast<unsigned>(f); }
  unsigned bits_ = 0;
};

// What a key request asks for. kConvKernel is an inner-product key for a
// flattened filter and is governed by the dot-product permission.
enum class KeyKind { kDotProduct, kAdd, kSub, kMul, kDiv, kConvKernel };

std::string_view KeyKindName(KeyKind k);
std::optional<KeyKind> ParseKeyKind(std::string_view name);
Function KeyKindFunction(KeyKind k);
KeyKind KeyKindFor(Function f);

// Server -> authority. The operand is plaintext on purpose: the authority
// sees the function it is keying.
struct KeyRequest {
  KeyKind kind = KeyKind::kDotProduct;
  // Inner-product kinds: one key per row. Element-wise kinds: one key per
  // element, bound to cmts[i] (row-major).
  QuantTensor operand;
  std::vector<GroupElement> cmts;
};

// Authority -> server. Exactly one of the two lists is populated.
struct KeyResponse {
  KeyKind kind = KeyKind::kDotProduct;
  std::vector<Scalar> inner_product_keys;
  std::vector<GroupElement> elementwise_keys;
};

class KeyService {
 public:
  virtual ~KeyService() = default;
  virtual KeyResponse Serve(const KeyRequest& request) = 0;
};

}  // namespace fenn
