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

#include "fenn/secure_matrix.hpp"

#include <string>

#include "fenn/dlog.hpp"
#include "fenn/error.hpp"
#include "fenn/parallel.hpp"

namespace fenn::secure_matrix {
namespace {

std::string ShapeString(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void RequireMatrix(const QuantTensor& t, const char* what) {
  if (t.shape.size() != 2 || t.shape[0] * t.shape[1] != t.data.size())
    Throw(ErrorCode::kShapeMismatch, std::string(what) + " must be a 2-D tensor");
}

}  // namespace

std::vector<GroupElement> EncryptedMatrix::Commitments() const {
  std::vector<GroupElement> out;
  out.reserve(elem_cts.size());
  for (const auto& c : elem_cts) out.push_back(c.cmt);
  return out;
}

EncryptedMatrix PreProcessEncryption(const QuantTensor& x, const PublicKeys& mpk, Rng& rng,
                                     Views views, unsigned workers) {
  RequireMatrix(x, "plaintext matrix");
  const std::size_t n = x.shape[0], m = x.shape[1];
  const Group& grp = *mpk.feip.group;
  EncryptedMatrix out;
  out.rows = n;
  out.cols = m;
  out.scale_power = x.scale_power;

  std::vector<Scalar> col_nonces, elem_nonces, row_nonces;
  if (views.columns)
    for (std::size_t j = 0; j < m; ++j) col_nonces.push_back(grp.SampleScalar(rng));
  if (views.elements)
    for (std::size_t i = 0; i < n * m; ++i) elem_nonces.push_back(grp.SampleScalar(rng));
  if (views.rows)
    for (std::size_t i = 0; i < n; ++i) row_nonces.push_back(grp.SampleScalar(rng));

  if (views.columns) {
    const feip::Mpk col_mpk = mpk.feip.Prefix(n);
    out.col_cts.resize(m);
    ParallelFor(m, workers, [&](std::size_t j) {
      std::vector<std::int64_t> column(n);
      for (std::size_t i = 0; i < n; ++i) column[i] = x.at(i, j);
      out.col_cts[j] = feip::EncryptWithNonce(col_mpk, column, col_nonces[j]);
    });
  }
  if (views.elements) {
    out.elem_cts.resize(n * m);
    ParallelFor(n * m, workers, [&](std::size_t k) {
      out.elem_cts[k] = febo::EncryptWithNonce(mpk.febo, x.data[k], elem_nonces[k]);
    });
  }
  if (views.rows) {
    const feip::Mpk row_mpk = mpk.feip.Prefix(m);
    out.row_cts.resize(n);
    ParallelFor(n, workers, [&](std::size_t i) {
      out.row_cts[i] = feip::EncryptWithNonce(row_mpk, x.row(i), row_nonces[i]);
    });
  }
  return out;
}

FunctionKeyBatch PreProcessKeyDerive(const QuantTensor& y, Function f, const FunctionSet& permitted,
                                     KeyService& authority, const EncryptedMatrix* enc, DotSide side) {
  RequireMatrix(y, "operand matrix");
  if (!permitted.Contains(f))
    Throw(ErrorCode::kUnsupportedFunction,
          std::string(FunctionName(f)) + " is not in the permitted function set");
  FunctionKeyBatch batch;
  batch.function = f;
  batch.side = side;
  batch.rows = y.shape[0];
  batch.cols = y.shape[1];

  KeyRequest request;
  request.kind = KeyKindFor(f);
  request.operand = y;

  if (f == Function::kDotProduct) {
    if (enc != nullptr) {
      const std::size_t inner = side == DotSide::kColumns ? enc->rows : enc->cols;
      if (y.shape[1] != inner)
        Throw(ErrorCode::kShapeMismatch, "operand " + ShapeString(y.shape[0], y.shape[1]) +
                                             " cannot multiply encrypted " +
                                             ShapeString(enc->rows, enc->cols));
    }
    KeyResponse resp = authority.Serve(request);
    if (resp.inner_product_keys.size() != batch.rows)
      Throw(ErrorCode::kMalformedRequest, "authority returned the wrong number of keys");
    batch.row_keys.reserve(batch.rows);
    for (std::size_t i = 0; i < batch.rows; ++i) {
      auto row = y.row(i);
      batch.row_keys.push_back(
          feip::FunctionKey{resp.inner_product_keys[i], std::vector<std::int64_t>(row.begin(), row.end())});
    }
    return batch;
  }

  if (enc == nullptr || enc->elem_cts.empty())
    Throw(ErrorCode::kShapeMismatch, "element-wise keys need the encrypted matrix commitments");
  if (enc->rows != batch.rows || enc->cols != batch.cols)
    Throw(ErrorCode::kShapeMismatch, "operand " + ShapeString(batch.rows, batch.cols) +
                                         " does not match encrypted " + ShapeString(enc->rows, enc->cols));
  request.cmts = enc->Commitments();
  KeyResponse resp = authority.Serve(request);
  if (resp.elementwise_keys.size() != y.data.size())
    Throw(ErrorCode::kMalformedRequest, "authority returned the wrong number of keys");
  const febo::Op op = ElementwiseOp(f);
  batch.elem_keys.reserve(y.data.size());
  for (std::size_t k = 0; k < y.data.size(); ++k)
    batch.elem_keys.push_back(febo::FunctionKey{resp.elementwise_keys[k], op, y.data[k], request.cmts[k]});
  return batch;
}

std::uint64_t ElementwiseBound(Function f, const FixedPointCodec& codec) {
  const auto vb = static_cast<std::uint64_t>(codec.value_bound);
  switch (f) {
    case Function::kAdd:
    case Function::kSub: return 2 * vb;
    case Function::kMul: return DotBound(1, codec);
    case Function::kDiv: return vb;
    case Function::kDotProduct: break;
  }
  Throw(ErrorCode::kUnsupportedFunction, "not an element-wise function");
}

QuantTensor SecureComputation(const EncryptedMatrix& enc, Function f, const FunctionKeyBatch& keys,
                              const QuantTensor& y, const PublicKeys& mpk,
                              const FixedPointCodec& codec, unsigned workers) {
  RequireMatrix(y, "operand matrix");
  if (keys.function != f)
    Throw(ErrorCode::kKeyMismatch, "key batch was derived for " + std::string(FunctionName(keys.function)));
  if (keys.rows != y.shape[0] || keys.cols != y.shape[1])
    Throw(ErrorCode::kKeyMismatch, "key batch was derived for a different operand shape");

  QuantTensor z;
  if (f == Function::kDotProduct) {
    const bool by_columns = keys.side == DotSide::kColumns;
    const auto& cts = by_columns ? enc.col_cts : enc.row_cts;
    const std::size_t eta = by_columns ? enc.rows : enc.cols;
    const std::size_t out_cols = by_columns ? enc.cols : enc.rows;
    if (cts.size() != out_cols)
      Throw(ErrorCode::kShapeMismatch, by_columns ? "encrypted matrix has no column view"
                                                  : "encrypted matrix has no row view");
    if (y.shape[1] != eta)
      Throw(ErrorCode::kShapeMismatch, "operand inner dimension does not match the encrypted matrix");
    if (keys.row_keys.size() != y.shape[0])
      Throw(ErrorCode::kKeyMismatch, "one inner-product key per operand row expected");
    const std::uint64_t bound = DotBound(eta, codec);
    auto dlog = DlogTable::ForBound(mpk.feip.group, bound);
    const std::size_t k = y.shape[0];
    z.shape = {k, out_cols};
    z.scale_power = y.scale_power + enc.scale_power;
    z.data.resize(k * out_cols);
    ParallelFor(k * out_cols, workers, [&](std::size_t cell) {
      const std::size_t i = cell / out_cols, j = cell % out_cols;
      z.data[cell] = feip::Decrypt(mpk.feip, cts[j], keys.row_keys[i], y.row(i), bound, *dlog);
    });
    return z;
  }

  const febo::Op op = ElementwiseOp(f);
  if (y.shape[0] != enc.rows || y.shape[1] != enc.cols)
    Throw(ErrorCode::kShapeMismatch, "element-wise operand shape differs from the encrypted matrix");
  if (enc.elem_cts.size() != enc.rows * enc.cols)
    Throw(ErrorCode::kShapeMismatch, "encrypted matrix has no element view");
  if (keys.elem_keys.size() != y.data.size())
    Throw(ErrorCode::kKeyMismatch, "one element-wise key per operand element expected");
  switch (f) {
    case Function::kAdd:
    case Function::kSub:
      if (y.scale_power != enc.scale_power)
        Throw(ErrorCode::kDomainError, "add/sub operands must share a scale power");
      z.scale_power = enc.scale_power;
      break;
    case Function::kMul: z.scale_power = enc.scale_power + y.scale_power; break;
    default: z.scale_power = enc.scale_power - y.scale_power; break;
  }
  const std::uint64_t bound = ElementwiseBound(f, codec);
  auto dlog = DlogTable::ForBound(mpk.febo.group, bound);
  z.shape = y.shape;
  z.data.resize(y.data.size());
  ParallelFor(y.data.size(), workers, [&](std::size_t k) {
    z.data[k] = febo::Decrypt(mpk.febo, keys.elem_keys[k], enc.elem_cts[k], op, y.data[k], bound, *dlog);
  });
  return z;
}

}  // namespace fenn::secure_matrix
