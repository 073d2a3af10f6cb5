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

#include "fenn/key_service.hpp"

#include "fenn/error.hpp"

namespace fenn {

std::string_view FunctionName(Function f) {
  switch (f) {
    case Function::kDotProduct: return "dot-product";
    case Function::kAdd: return "add";
    case Function::kSub: return "sub";
    case Function::kMul: return "mul";
    case Function::kDiv: return "div";
  }
  return "?";
}

std::optional<Function> ParseFunction(std::string_view name) {
  for (auto f : FunctionSet::All().Members())
    if (FunctionName(f) == name) return f;
  return std::nullopt;
}

febo::Op ElementwiseOp(Function f) {
  switch (f) {
    case Function::kAdd: return febo::Op::kAdd;
    case Function::kSub: return febo::Op::kSub;
    case Function::kMul: return febo::Op::kMul;
    case Function::kDiv: return febo::Op::kDiv;
    case Function::kDotProduct: break;
  }
  Throw(ErrorCode::kUnsupportedFunction, "dot-product is not an element-wise operation");
}

std::vector<Function> FunctionSet::Members() const {
  std::vector<Function> out;
  for (auto f : {Function::kDotProduct, Function::kAdd, Function::kSub, Function::kMul, Function::kDiv})
    if (Contains(f)) out.push_back(f);
  return out;
}

std::string_view KeyKindName(KeyKind k) {
  switch (k) {
    case KeyKind::kDotProduct: return "dot-product";
    case KeyKind::kAdd: return "add";
    case KeyKind::kSub: return "sub";
    case KeyKind::kMul: return "mul";
    case KeyKind::kDiv: return "div";
    case KeyKind::kConvKernel: return "conv-kernel";
  }
  return "?";
}

std::optional<KeyKind> ParseKeyKind(std::string_view name) {
  for (auto k : {KeyKind::kDotProduct, KeyKind::kAdd, KeyKind::kSub, KeyKind::kMul, KeyKind::kDiv,
                 KeyKind::kConvKernel})
    if (KeyKindName(k) == name) return k;
  return std::nullopt;
}

Function KeyKindFunction(KeyKind k) {
  switch (k) {
    case KeyKind::kDotProduct:
    case KeyKind::kConvKernel: return Function::kDotProduct;
    case KeyKind::kAdd: return Function::kAdd;
    case KeyKind::kSub: return Function::kSub;
    case KeyKind::kMul: return Function::kMul;
    case KeyKind::kDiv: return Function::kDiv;
  }
  return Function::kDotProduct;
}

KeyKind KeyKindFor(Function f) {
  switch (f) {
    case Function::kDotProduct: return KeyKind::kDotProduct;
    case Function::kAdd: return KeyKind::kAdd;
    case Function::kSub: return KeyKind::kSub;
    case Function::kMul: return KeyKind::kMul;
    case Function::kDiv: return KeyKind::kDiv;
  }
  return KeyKind::kDotProduct;
}

}  // namespace fenn
