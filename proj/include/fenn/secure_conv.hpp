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
#include "fenn/feip.hpp"
#include "fenn/key_service.hpp"
#include "fenn/rng.hpp"

// Secure convolution: every stride-placed window of the zero-padded input is
// flattened and FEIP-encrypted by the client; the server decrypts one inner
// product per window with a single key for the flattened filter.
namespace fenn::secure_conv {

// Windows and kernels flatten row-major over (dy, dx) with the channel
// index varying fastest: index = (dy * filter + dx) * channels + c.
struct ConvSpec {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::size_t filter = 1;
  std::size_t padding = 0;
  std::size_t stride = 1;
  std::size_t filters = 1;

  std::size_t out_height() const { return (height + 2 * padding - filter) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - filter) / stride + 1; }
  std::size_t window_size() const { return filter * filter * channels; }
  std::size_t window_count() const { return out_height() * out_width(); }

  // Throws kShapeMismatch unless the filter fits and the stride tiles the
  // padded input exactly.
  void Validate() const;

  bool operator==(const ConvSpec&) const = default;
};

struct EncryptedWindowList {
  ConvSpec spec;
  int scale_power = 1;
  std::vector<feip::Ciphertext> windows;  // row-major over output positions

  bool operator==(const EncryptedWindowList&) const = default;
};

// Flattened window at output position (oy, ox); padding cells are zero.
// `image` has shape {H, W, C} (or {H, W} when C == 1).
std::vector<std::int64_t> ExtractWindow(const QuantTensor& image, const ConvSpec& spec,
                                        std::size_t oy, std::size_t ox);

EncryptedWindowList PreProcessEncryption(const QuantTensor& image, const ConvSpec& spec,
                                         const feip::Mpk& mpk, Rng& rng, unsigned workers = 1);

// One key for the flattened filter (shape {f, f, C} or {f, f}), reusable
// for every window of every image.
feip::FunctionKey PreProcessKeyDerive(const QuantTensor& kernel, const ConvSpec& spec,
                                      const FunctionSet& permitted, KeyService& authority);

// out_height x out_width map at scale power image + kernel.
QuantTensor SecureConvolution(const EncryptedWindowList& windows, const feip::FunctionKey& fk,
                              const QuantTensor& kernel, const feip::Mpk& mpk,
                              const FixedPointCodec& codec, unsigned workers = 1);

// Plaintext integer convolution with the same geometry and flattening.
QuantTensor PlainConvolution(const QuantTensor& image, const QuantTensor& kernel, const ConvSpec& spec);

}  // namespace fenn::secure_conv
