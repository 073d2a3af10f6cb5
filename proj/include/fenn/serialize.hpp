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

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fenn/training.hpp"
#include "fenn/error.hpp"
#include "fenn/encoding.hpp"
#include "fenn/febo.hpp"
#include "fenn/feip.hpp"
#include "fenn/group.hpp"
#include "fenn/key_service.hpp"
#include "fenn/nn.hpp"
#include "fenn/secure_conv.hpp"
#include "fenn/secure_matrix.hpp"

namespace fenn {

using Json = nlohmann::json;

// Big integers are lowercase hex strings.
void to_json(Json& j, const GroupParams& v);
void from_json(const Json& j, GroupParams& v);
void to_json(Json& j, const GroupElement& v);
void from_json(const Json& j, GroupElement& v);
void to_json(Json& j, const Scalar& v);
void from_json(const Json& j, Scalar& v);
void to_json(Json& j, const FixedPointCodec& v);
void from_json(const Json& j, FixedPointCodec& v);
void to_json(Json& j, const QuantTensor& v);
void from_json(const Json& j, QuantTensor& v);
void to_json(Json& j, const FunctionSet& v);
void from_json(const Json& j, FunctionSet& v);
void to_json(Json& j, const KeyRequest& v);
void from_json(const Json& j, KeyRequest& v);
void to_json(Json& j, const KeyResponse& v);
void from_json(const Json& j, KeyResponse& v);

namespace feip {
void to_json(Json& j, const Ciphertext& v);
void from_json(const Json& j, Ciphertext& v);
}  // namespace feip

namespace febo {
void to_json(Json& j, const Ciphertext& v);
void from_json(const Json& j, Ciphertext& v);
}  // namespace febo

namespace secure_matrix {
void to_json(Json& j, const EncryptedMatrix& v);
void from_json(const Json& j, EncryptedMatrix& v);
// Group parameters are stored once, alongside both public keys.
void to_json(Json& j, const PublicKeys& v);
void from_json(const Json& j, PublicKeys& v);
}  // namespace secure_matrix

namespace secure_conv {
void to_json(Json& j, const ConvSpec& v);
void from_json(const Json& j, ConvSpec& v);
void to_json(Json& j, const EncryptedWindowList& v);
void from_json(const Json& j, EncryptedWindowList& v);
}  // namespace secure_conv

namespace nn {
void to_json(Json& j, const LayerSpec& v);
void from_json(const Json& j, LayerSpec& v);
void to_json(Json& j, const Network& v);
void from_json(const Json& j, Network& v);
void to_json(Json& j, const LayerParams& v);
void from_json(const Json& j, LayerParams& v);
void to_json(Json& j, const Hyperparams& v);
void from_json(const Json& j, Hyperparams& v);
}  // namespace nn

namespace training {
void to_json(Json& j, const EncryptedBatch& v);
void from_json(const Json& j, EncryptedBatch& v);
void to_json(Json& j, const ClientBundle& v);
void from_json(const Json& j, ClientBundle& v);
void to_json(Json& j, const Standardizer& v);
void from_json(const Json& j, Standardizer& v);
void to_json(Json& j, const IterationRecord& v);
void from_json(const Json& j, IterationRecord& v);
}  // namespace training

namespace io {

inline constexpr int kFormatVersion = 1;

struct Checkpoint {
  nn::Network network;
  nn::Params params;
  nn::Hyperparams hyperparams;
  FixedPointCodec codec;

  bool operator==(const Checkpoint&) const = default;
};

struct AuthorityFile {
  training::AuthorityState state;
  FunctionSet permitted;
};

// Parses text; syntax errors become kMalformedInput with the byte offset.
Json Parse(std::string_view text, std::string_view what);

// Converts, turning schema errors into kMalformedInput naming the JSON path.
template <class T>
T Decode(const Json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    Throw(ErrorCode::kMalformedInput, std::string(what) + ": " + e.what());
  }
}

// Top-level documents carry {"format": kind, "version": 1}.
Json Wrap(std::string_view kind, Json body);
const Json& Unwrap(const Json& doc, std::string_view kind);

std::string ReadFile(const std::filesystem::path& path);
// private_file: create with mode 0600.
void WriteFile(const std::filesystem::path& path, std::string_view contents, bool private_file = false);

std::string EncodeBundle(const training::ClientBundle& bundle);
training::ClientBundle DecodeBundle(std::string_view text);

std::string EncodePublicKeys(const secure_matrix::PublicKeys& mpk);
secure_matrix::PublicKeys DecodePublicKeys(std::string_view text);

std::string EncodeAuthority(const AuthorityFile& file);
AuthorityFile DecodeAuthority(std::string_view text);

std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(std::string_view text);

std::string EncodeRunLogLine(const training::IterationRecord& rec);

}  // namespace io
}  // namespace fenn
