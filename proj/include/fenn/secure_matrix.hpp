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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fenn/encoding.hpp"
#include "fenn/febo.hpp"
#include "fenn/feip.hpp"
#include "fenn/key_service.hpp"
#include "fenn/rng.hpp"

// Secure matrix computation: the client encrypts a matrix once, the server
// obtains function keys for its own plaintext matrix from the authority and
// decrypts only the function result.
namespace fenn::secure_matrix {

struct PublicKeys {
  feip::Mpk feip;
  febo::Mpk febo;
};

// Which ciphertext views of X to produce. Columns serve Y * X, rows serve
// Y * X^T and elements serve element-wise operations.
struct Views {
  bool columns = true;
  bool elements = true;
  bool rows = false;
};

// Ciphertext views of one n x m integer matrix. Views that were not
// requested are left empty.
struct EncryptedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int scale_power = 1;
  std::vector<feip::Ciphertext> col_cts;   // cols entries, eta = rows
  std::vector<feip::Ciphertext> row_cts;   // rows entries, eta = cols
  std::vector<febo::Ciphertext> elem_cts;  // rows * cols, row-major

  std::vector<GroupElement> Commitments() const;
  bool operator==(const EncryptedMatrix&) const = default;
};

// Which side of the encrypted matrix a dot-product contracts over.
enum class DotSide {
  kColumns,  // Z = Y * X   (Y is k x rows)
  kRows,     // Z = Y * X^T (Y is k x cols)
};

struct FunctionKeyBatch {
  Function function = Function::kDotProduct;
  DotSide side = DotSide::kColumns;
  std::size_t rows = 0;  // operand shape
  std::size_t cols = 0;
  std::vector<feip::FunctionKey> row_keys;
  std::vector<febo::FunctionKey> elem_keys;
};

// Nonces are drawn from `rng` serially before the exponentiations are
// spread over `workers` threads, so the output depends only on the rng.
EncryptedMatrix PreProcessEncryption(const QuantTensor& x, const PublicKeys& mpk, Rng& rng,
                                     Views views = {}, unsigned workers = 1);

// Requests keys for operand y. Element-wise functions need `enc` for the
// commitments the keys are bound to.
FunctionKeyBatch PreProcessKeyDerive(const QuantTensor& y, Function f, const FunctionSet& permitted,
                                     KeyService& authority, const EncryptedMatrix* enc,
                                     DotSide side = DotSide::kColumns);

// Decrypts f(X, Y). Dot-products come back at scale power
// y.scale_power + enc.scale_power; element-wise results at the power the
// operation implies.
QuantTensor SecureComputation(const EncryptedMatrix& enc, Function f, const FunctionKeyBatch& keys,
                              const QuantTensor& y, const PublicKeys& mpk,
                              const FixedPointCodec& codec, unsigned workers = 1);

std::uint64_t ElementwiseBound(Function f, const FixedPointCodec& codec);

}  // namespace fenn::secure_matrix
