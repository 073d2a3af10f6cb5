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

#include "fenn/encoding.hpp"

#include <cmath>
#include <string>

#include "fenn/error.hpp"

namespace fenn {

std::int64_t FixedPointCodec::scale_factor() const {
  std::int64_t f = 1;
  for (int i = 0; i < scale_digits; ++i) f *= 10;
  return f;
}

double FixedPointCodec::Scale(int power) const {
  return std::pow(static_cast<double>(scale_factor()), power);
}

void FixedPointCodec::Validate() const {
  if (scale_digits < 0 || scale_digits > 9)
    Throw(ErrorCode::kDomainError, "scale_digits must be in [0, 9]");
  if (value_bound < 1) Throw(ErrorCode::kDomainError, "value_bound must be at least 1");
}

std::size_t ShapeSize(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::int64_t QuantizeValue(double v, const FixedPointCodec& codec, int scale_power) {
  if (!std::isfinite(v)) Throw(ErrorCode::kOutOfRange, "cannot quantize a non-finite value");
  const double scaled = std::round(v * codec.Scale(scale_power));
  if (std::fabs(scaled) > static_cast<double>(codec.value_bound))
    Throw(ErrorCode::kOutOfRange, "value " + std::to_string(v) + " at scale power " +
                                      std::to_string(scale_power) + " exceeds bound " +
                                      std::to_string(codec.value_bound));
  return static_cast<std::int64_t>(scaled);
}

QuantTensor Quantize(std::span<const double> values, std::vector<std::size_t> shape,
                     const FixedPointCodec& codec, int scale_power) {
  if (ShapeSize(shape) != values.size())
    Throw(ErrorCode::kShapeMismatch, "shape does not match value count");
  QuantTensor out;
  out.shape = std::move(shape);
  out.scale_power = scale_power;
  out.data.reserve(values.size());
  for (double v : values) out.data.push_back(QuantizeValue(v, codec, scale_power));
  return out;
}

std::vector<double> Dequantize(const QuantTensor& t, const FixedPointCodec& codec) {
  const double scale = codec.Scale(t.scale_power);
  std::vector<double> out;
  out.reserve(t.data.size());
  for (auto q : t.data) out.push_back(static_cast<double>(q) / scale);
  return out;
}

std::uint64_t DotBound(std::size_t eta, const FixedPointCodec& codec) {
  std::uint64_t sq = 0, out = 0;
  const auto vb = static_cast<std::uint64_t>(codec.value_bound);
  if (__builtin_mul_overflow(vb, vb, &sq) || __builtin_mul_overflow(sq, std::uint64_t{eta}, &out) ||
      out > static_cast<std::uint64_t>(INT64_MAX))
    Throw(ErrorCode::kDomainError, "dot-product bound overflows 63 bits");
  return out;
}

QuantTensor Transpose(const QuantTensor& t) {
  if (t.shape.size() != 2) Throw(ErrorCode::kShapeMismatch, "transpose expects a 2-D tensor");
  QuantTensor out;
  out.shape = {t.shape[1], t.shape[0]};
  out.scale_power = t.scale_power;
  out.data.resize(t.data.size());
  for (std::size_t i = 0; i < t.shape[0]; ++i)
    for (std::size_t j = 0; j < t.shape[1]; ++j) out.data[j * t.shape[0] + i] = t.data[i * t.shape[1] + j];
  return out;
}

}  // namespace fenn
