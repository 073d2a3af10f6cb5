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

#include "fenn/secure_conv.hpp"

#include <string>

#include "fenn/dlog.hpp"
#include "fenn/error.hpp"
#include "fenn/parallel.hpp"

namespace fenn::secure_conv {
namespace {

void RequireImage(const QuantTensor& image, const ConvSpec& spec) {
  const bool hw = image.shape.size() == 2 && spec.channels == 1 &&
                  image.shape[0] == spec.height && image.shape[1] == spec.width;
  const bool hwc = image.shape.size() == 3 && image.shape[0] == spec.height &&
                   image.shape[1] == spec.width && image.shape[2] == spec.channels;
  if (!(hw || hwc) || image.data.size() != spec.height * spec.width * spec.channels)
    Throw(ErrorCode::kShapeMismatch, "image shape does not match the convolution spec");
}

void RequireKernel(const QuantTensor& kernel, const ConvSpec& spec) {
  if (kernel.data.size() != spec.window_size())
    Throw(ErrorCode::kShapeMismatch, "kernel has " + std::to_string(kernel.data.size()) +
                                         " entries, window has " + std::to_string(spec.window_size()));
}

}  // namespace

void ConvSpec::Validate() const {
  if (filter == 0 || stride == 0 || channels == 0 || filters == 0)
    Throw(ErrorCode::kShapeMismatch, "filter, stride, channels and filters must be positive");
  if (height + 2 * padding < filter || width + 2 * padding < filter)
    Throw(ErrorCode::kShapeMismatch, "filter larger than the padded input");
  if ((height + 2 * padding - filter) % stride != 0 || (width + 2 * padding - filter) % stride != 0)
    Throw(ErrorCode::kShapeMismatch, "stride does not tile the padded input");
}

std::vector<std::int64_t> ExtractWindow(const QuantTensor& image, const ConvSpec& spec,
                                        std::size_t oy, std::size_t ox) {
  std::vector<std::int64_t> window(spec.window_size(), 0);
  const auto pad = static_cast<std::ptrdiff_t>(spec.padding);
  for (std::size_t dy = 0; dy < spec.filter; ++dy) {
    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * spec.stride + dy) - pad;
    if (y < 0 || y >= static_cast<std::ptrdiff_t>(spec.height)) continue;
    for (std::size_t dx = 0; dx < spec.filter; ++dx) {
      const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * spec.stride + dx) - pad;
      if (x < 0 || x >= static_cast<std::ptrdiff_t>(spec.width)) continue;
      for (std::size_t c = 0; c < spec.channels; ++c)
        window[(dy * spec.filter + dx) * spec.channels + c] =
            image.data[(static_cast<std::size_t>(y) * spec.width + static_cast<std::size_t>(x)) * spec.channels + c];
    }
  }
  return window;
}

EncryptedWindowList PreProcessEncryption(const QuantTensor& image, const ConvSpec& spec,
                                         const feip::Mpk& mpk, Rng& rng, unsigned workers) {
  spec.Validate();
  RequireImage(image, spec);
  const feip::Mpk window_mpk = mpk.Prefix(spec.window_size());
  const std::size_t count = spec.window_count();
  std::vector<Scalar> nonces;
  nonces.reserve(count);
  for (std::size_t i = 0; i < count; ++i) nonces.push_back(mpk.group->SampleScalar(rng));
  EncryptedWindowList out{spec, image.scale_power, std::vector<feip::Ciphertext>(count)};
  const std::size_t ow = spec.out_width();
  ParallelFor(count, workers, [&](std::size_t k) {
    out.windows[k] = feip::EncryptWithNonce(window_mpk, ExtractWindow(image, spec, k / ow, k % ow), nonces[k]);
  });
  return out;
}

feip::FunctionKey PreProcessKeyDerive(const QuantTensor& kernel, const ConvSpec& spec,
                                      const FunctionSet& permitted, KeyService& authority) {
  RequireKernel(kernel, spec);
  if (!permitted.Contains(Function::kDotProduct))
    Throw(ErrorCode::kUnsupportedFunction, "convolution needs the dot-product permission");
  KeyRequest request;
  request.kind = KeyKind::kConvKernel;
  request.operand.shape = {1, kernel.data.size()};
  request.operand.data = kernel.data;
  request.operand.scale_power = kernel.scale_power;
  KeyResponse resp = authority.Serve(request);
  if (resp.inner_product_keys.size() != 1)
    Throw(ErrorCode::kMalformedRequest, "expected exactly one kernel key");
  return feip::FunctionKey{resp.inner_product_keys[0], kernel.data};
}

QuantTensor SecureConvolution(const EncryptedWindowList& windows, const feip::FunctionKey& fk,
                              const QuantTensor& kernel, const feip::Mpk& mpk,
                              const FixedPointCodec& codec, unsigned workers) {
  const ConvSpec& spec = windows.spec;
  RequireKernel(kernel, spec);
  if (windows.windows.size() != spec.window_count())
    Throw(ErrorCode::kShapeMismatch, "window list length does not match the spec");
  const std::uint64_t bound = DotBound(spec.window_size(), codec);
  auto dlog = DlogTable::ForBound(mpk.group, bound);
  QuantTensor out;
  out.shape = {spec.out_height(), spec.out_width()};
  out.scale_power = kernel.scale_power + windows.scale_power;
  out.data.resize(spec.window_count());
  ParallelFor(out.data.size(), workers, [&](std::size_t k) {
    out.data[k] = feip::Decrypt(mpk, windows.windows[k], fk, kernel.data, bound, *dlog);
  });
  return out;
}

QuantTensor PlainConvolution(const QuantTensor& image, const QuantTensor& kernel, const ConvSpec& spec) {
  spec.Validate();
  RequireImage(image, spec);
  RequireKernel(kernel, spec);
  QuantTensor out;
  out.shape = {spec.out_height(), spec.out_width()};
  out.scale_power = image.scale_power + kernel.scale_power;
  for (std::size_t oy = 0; oy < spec.out_height(); ++oy)
    for (std::size_t ox = 0; ox < spec.out_width(); ++ox) {
      auto w = ExtractWindow(image, spec, oy, ox);
      std::int64_t acc = 0;
      for (std::size_t t = 0; t < w.size(); ++t) acc += w[t] * kernel.data[t];
      out.data.push_back(acc);
    }
  return out;
}

}  // namespace fenn::secure_conv
