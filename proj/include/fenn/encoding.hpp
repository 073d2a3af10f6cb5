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
#include <span>
#include <vector>

namespace fenn {

// Decimal fixed-point view of real-valued data. A value v is carried as
// round(v * 10^(digits * k)) at scale power k; every integer handed to the
// encryption layer must satisfy |q| <= value_bound.
struct FixedPointCodec {
  int scale_digits = 2;
  std::int64_t value_bound = 25500;

  std::int64_t scale_factor() const;
  // scale_factor()^power as a double.
  double Scale(int power) const;
  // Throws kDomainError unless 0 <= scale_digits <= 9 and value_bound >= 1.
  void Validate() const;

  bool operator==(const FixedPointCodec&) const = default;
};

// Integer tensor with its fixed-point scale power. Row-major.
struct QuantTensor {
  std::vector<std::size_t> shape;
  std::vector<std::int64_t> data;
  int scale_power = 1;

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::int64_t at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }
  std::span<const std::int64_t> row(std::size_t i) const {
    return std::span<const std::int64_t>(data).subspan(i * cols(), cols());
  }

  bool operator==(const QuantTensor&) const = default;
};

std::size_t ShapeSize(std::span<const std::size_t> shape);

// Rounds half away from zero. Throws kOutOfRange when the rounded value
// exceeds value_bound or the input is not finite.
std::int64_t QuantizeValue(double v, const FixedPointCodec& codec, int scale_power = 1);

QuantTensor Quantize(std::span<const double> values, std::vector<std::size_t> shape,
                     const FixedPointCodec& codec, int scale_power = 1);

std::vector<double> Dequantize(const QuantTensor& t, const FixedPointCodec& codec);

// Bound on |<x, y>| for two eta-vectors of in-range integers:
// eta * value_bound^2. Throws kDomainError on overflow.
std::uint64_t DotBound(std::size_t eta, const FixedPointCodec& codec);

// Transposed copy of a 2-D tensor.
QuantTensor Transpose(const QuantTensor& t);

}  // namespace fenn
