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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fenn/nn.hpp"

namespace fenn::data {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major

  bool operator==(const IdxImages&) const = default;
};

// Big-endian IDX; errors are kMalformedInput naming the byte offset.
IdxImages ParseIdxImages(std::string_view bytes);
std::vector<std::uint8_t> ParseIdxLabels(std::string_view bytes);
std::string EncodeIdxImages(const IdxImages& images);
std::string EncodeIdxLabels(const std::vector<std::uint8_t>& labels);

struct Dataset {
  nn::Matrix features;  // one column per sample
  std::vector<std::size_t> labels;
  std::size_t height = 0;  // image geometry, 0 for tabular data
  std::size_t width = 0;

  std::size_t size() const { return labels.size(); }
};

// Pixels are mapped to [0, 1]. limit = 0 keeps every sample.
Dataset FromIdx(const IdxImages& images, const std::vector<std::uint8_t>& labels, std::size_t limit = 0);
Dataset LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t limit = 0);

// Numeric CSV, one sample per line, label in the last column. A first line
// that does not parse as numbers is treated as a header.
Dataset ParseCsv(std::string_view text, std::size_t limit = 0);

}  // namespace fenn::data
