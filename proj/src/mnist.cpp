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

#include "fenn/mnist.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>

#include "fenn/error.hpp"
#include "fenn/serialize.hpp"

namespace fenn::data {
namespace {

std::uint32_t ReadBe32(std::string_view bytes, std::size_t offset, const char* what) {
  if (bytes.size() < offset + 4)
    Throw(ErrorCode::kMalformedInput, std::string("truncated IDX header: ") + what + " at offset " +
                                          std::to_string(offset));
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  return v;
}

void AppendBe32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

std::string Hex(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void CheckMagic(std::string_view bytes, std::uint32_t expect) {
  const std::uint32_t magic = ReadBe32(bytes, 0, "magic");
  if (magic != expect)
    Throw(ErrorCode::kMalformedInput, "bad IDX magic " + Hex(magic) + " at offset 0, expected " + Hex(expect));
}

void CheckPayload(std::string_view bytes, std::size_t header, std::size_t payload) {
  if (bytes.size() != header + payload)
    Throw(ErrorCode::kMalformedInput, "IDX payload at offset " + std::to_string(header) + " has " +
                                          std::to_string(bytes.size() - header) + " bytes, expected " +
                                          std::to_string(payload));
}

}  // namespace

IdxImages ParseIdxImages(std::string_view bytes) {
  CheckMagic(bytes, kIdxImagesMagic);
  IdxImages img;
  img.count = ReadBe32(bytes, 4, "image count");
  img.rows = ReadBe32(bytes, 8, "row count");
  img.cols = ReadBe32(bytes, 12, "column count");
  CheckPayload(bytes, 16, img.count * img.rows * img.cols);
  img.pixels.assign(bytes.begin() + 16, bytes.end());
  return img;
}

std::vector<std::uint8_t> ParseIdxLabels(std::string_view bytes) {
  CheckMagic(bytes, kIdxLabelsMagic);
  const std::size_t count = ReadBe32(bytes, 4, "label count");
  CheckPayload(bytes, 8, count);
  return std::vector<std::uint8_t>(bytes.begin() + 8, bytes.end());
}

std::string EncodeIdxImages(const IdxImages& images) {
  std::string out;
  AppendBe32(out, kIdxImagesMagic);
  AppendBe32(out, static_cast<std::uint32_t>(images.count));
  AppendBe32(out, static_cast<std::uint32_t>(images.rows));
  AppendBe32(out, static_cast<std::uint32_t>(images.cols));
  out.append(images.pixels.begin(), images.pixels.end());
  return out;
}

std::string EncodeIdxLabels(const std::vector<std::uint8_t>& labels) {
  std::string out;
  AppendBe32(out, kIdxLabelsMagic);
  AppendBe32(out, static_cast<std::uint32_t>(labels.size()));
  out.append(labels.begin(), labels.end());
  return out;
}

Dataset FromIdx(const IdxImages& images, const std::vector<std::uint8_t>& labels, std::size_t limit) {
  if (images.count != labels.size())
    Throw(ErrorCode::kMalformedInput, std::to_string(images.count) + " images but " +
                                          std::to_string(labels.size()) + " labels");
  const std::size_t n = limit == 0 ? images.count : std::min(limit, images.count);
  const std::size_t dim = images.rows * images.cols;
  Dataset ds;
  ds.height = images.rows;
  ds.width = images.cols;
  ds.features = nn::Matrix(dim, n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < dim; ++i) ds.features(i, s) = images.pixels[s * dim + i] / 255.0;
  ds.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
  return ds;
}

Dataset LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t limit) {
  return FromIdx(ParseIdxImages(io::ReadFile(images)), ParseIdxLabels(io::ReadFile(labels)), limit);
}

Dataset ParseCsv(std::string_view text, std::size_t limit) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size() && (limit == 0 || rows.size() < limit)) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_start = pos;
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> values;
    bool ok = true;
    std::size_t fpos = 0, col = 0;
    while (true) {
      std::size_t comma = line.find(',', fpos);
      std::string_view field = line.substr(fpos, comma == std::string_view::npos ? line.size() - fpos : comma - fpos);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        if (line_no == 1 && rows.empty()) {
          ok = false;
          break;
        }
        Throw(ErrorCode::kMalformedInput, "CSV line " + std::to_string(line_no) + ", column " +
                                              std::to_string(col + 1) + " (byte offset " +
                                              std::to_string(line_start + fpos) + "): not a number");
      }
      values.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      fpos = comma + 1;
    }
    if (!ok) continue;  // header
    if (values.size() < 2)
      Throw(ErrorCode::kMalformedInput, "CSV line " + std::to_string(line_no) + " needs features and a label");
    if (!rows.empty() && values.size() != rows.front().size())
      Throw(ErrorCode::kMalformedInput, "CSV line " + std::to_string(line_no) + " has " +
                                            std::to_string(values.size()) + " columns, expected " +
                                            std::to_string(rows.front().size()));
    const double label = values.back();
    if (label < 0 || label != std::floor(label))
      Throw(ErrorCode::kMalformedInput, "CSV line " + std::to_string(line_no) + ": label must be a class id");
    rows.push_back(std::move(values));
  }
  Dataset ds;
  if (rows.empty()) return ds;
  const std::size_t dim = rows.front().size() - 1;
  ds.features = nn::Matrix(dim, rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t i = 0; i < dim; ++i) ds.features(i, s) = rows[s][i];
    ds.labels.push_back(static_cast<std::size_t>(rows[s].back()));
  }
  return ds;
}

}  // namespace fenn::data
