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

#include "fenn/serialize.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fenn {
namespace {

template <class T>
std::vector<T> VectorAt(const Json& j, const char* key) {
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

void to_json(Json& j, const GroupParams& v) {
  j = Json{{"modulus", ToHex(v.modulus)},
           {"order", ToHex(v.order)},
           {"generator", ToHex(v.generator)},
           {"lambda", v.lambda}};
}

void from_json(const Json& j, GroupParams& v) {
  v.modulus = FromHex(j.at("modulus").get<std::string>());
  v.order = FromHex(j.at("order").get<std::string>());
  v.generator = FromHex(j.at("generator").get<std::string>());
  v.lambda = j.at("lambda").get<unsigned>();
}

void to_json(Json& j, const GroupElement& v) { j = ToHex(v.value()); }
void from_json(const Json& j, GroupElement& v) { v = GroupElement(FromHex(j.get<std::string>())); }
void to_json(Json& j, const Scalar& v) { j = ToHex(v.value()); }
void from_json(const Json& j, Scalar& v) { v = Scalar(FromHex(j.get<std::string>())); }

void to_json(Json& j, const FixedPointCodec& v) {
  j = Json{{"scale_digits", v.scale_digits}, {"value_bound", v.value_bound}};
}

void from_json(const Json& j, FixedPointCodec& v) {
  v.scale_digits = j.at("scale_digits").get<int>();
  v.value_bound = j.at("value_bound").get<std::int64_t>();
  v.Validate();
}

void to_json(Json& j, const QuantTensor& v) {
  j = Json{{"shape", v.shape}, {"scale_power", v.scale_power}, {"data", v.data}};
}

void from_json(const Json& j, QuantTensor& v) {
  v.shape = VectorAt<std::size_t>(j, "shape");
  v.scale_power = j.at("scale_power").get<int>();
  v.data = VectorAt<std::int64_t>(j, "data");
  if (ShapeSize(v.shape) != v.data.size())
    Throw(ErrorCode::kMalformedInput, "tensor data length does not match its shape");
}

void to_json(Json& j, const FunctionSet& v) {
  j = Json::array();
  for (Function f : v.Members()) j.push_back(std::string(FunctionName(f)));
}

void from_json(const Json& j, FunctionSet& v) {
  v = FunctionSet();
  for (const auto& name : j) {
    auto f = ParseFunction(name.get<std::string>());
    if (!f) Throw(ErrorCode::kMalformedInput, "unknown function '" + name.get<std::string>() + "'");
    v.Insert(*f);
  }
}

void to_json(Json& j, const KeyRequest& v) {
  j = Json{{"kind", std::string(KeyKindName(v.kind))}, {"operand", v.operand}};
  if (!v.cmts.empty()) j["cmts"] = v.cmts;
}

void from_json(const Json& j, KeyRequest& v) {
  const auto name = j.at("kind").get<std::string>();
  auto kind = ParseKeyKind(name);
  if (!kind) Throw(ErrorCode::kMalformedRequest, "unknown key kind '" + name + "'");
  v.kind = *kind;
  v.operand = j.at("operand").get<QuantTensor>();
  v.cmts = j.contains("cmts") ? VectorAt<GroupElement>(j, "cmts") : std::vector<GroupElement>{};
}

void to_json(Json& j, const KeyResponse& v) {
  j = Json{{"kind", std::string(KeyKindName(v.kind))}};
  if (!v.inner_product_keys.empty()) j["inner_product_keys"] = v.inner_product_keys;
  if (!v.elementwise_keys.empty()) j["elementwise_keys"] = v.elementwise_keys;
}

void from_json(const Json& j, KeyResponse& v) {
  const auto name = j.at("kind").get<std::string>();
  auto kind = ParseKeyKind(name);
  if (!kind) Throw(ErrorCode::kMalformedInput, "unknown key kind '" + name + "'");
  v.kind = *kind;
  v.inner_product_keys =
      j.contains("inner_product_keys") ? VectorAt<Scalar>(j, "inner_product_keys") : std::vector<Scalar>{};
  v.elementwise_keys =
      j.contains("elementwise_keys") ? VectorAt<GroupElement>(j, "elementwise_keys") : std::vector<GroupElement>{};
}

namespace feip {
void to_json(Json& j, const Ciphertext& v) { j = Json{{"ct0", v.ct0}, {"ct", v.ct}}; }
void from_json(const Json& j, Ciphertext& v) {
  v.ct0 = j.at("ct0").get<GroupElement>();
  v.ct = VectorAt<GroupElement>(j, "ct");
}
}  // namespace feip

namespace febo {
void to_json(Json& j, const Ciphertext& v) { j = Json::array({v.cmt, v.ct}); }
void from_json(const Json& j, Ciphertext& v) {
  if (!j.is_array() || j.size() != 2)
    Throw(ErrorCode::kMalformedInput, "element ciphertext must be a [cmt, ct] pair");
  v.cmt = j[0].get<GroupElement>();
  v.ct = j[1].get<GroupElement>();
}
}  // namespace febo

namespace secure_matrix {

void to_json(Json& j, const EncryptedMatrix& v) {
  j = Json{{"shape", {v.rows, v.cols}}, {"scale_power", v.scale_power}};
  if (!v.col_cts.empty()) j["col_cts"] = v.col_cts;
  if (!v.row_cts.empty()) j["row_cts"] = v.row_cts;
  if (!v.elem_cts.empty()) j["elem_cts"] = v.elem_cts;
}

void from_json(const Json& j, EncryptedMatrix& v) {
  auto shape = VectorAt<std::size_t>(j, "shape");
  if (shape.size() != 2) Throw(ErrorCode::kMalformedInput, "encrypted matrix shape must have two dims");
  v.rows = shape[0];
  v.cols = shape[1];
  v.scale_power = j.at("scale_power").get<int>();
  v.col_cts = j.contains("col_cts") ? VectorAt<feip::Ciphertext>(j, "col_cts") : std::vector<feip::Ciphertext>{};
  v.row_cts = j.contains("row_cts") ? VectorAt<feip::Ciphertext>(j, "row_cts") : std::vector<feip::Ciphertext>{};
  v.elem_cts =
      j.contains("elem_cts") ? VectorAt<febo::Ciphertext>(j, "elem_cts") : std::vector<febo::Ciphertext>{};
  if ((!v.col_cts.empty() && v.col_cts.size() != v.cols) || (!v.row_cts.empty() && v.row_cts.size() != v.rows) ||
      (!v.elem_cts.empty() && v.elem_cts.size() != v.rows * v.cols))
    Throw(ErrorCode::kMalformedInput, "ciphertext counts do not match the matrix shape");
  for (const auto& c : v.col_cts)
    if (c.eta() != v.rows) Throw(ErrorCode::kMalformedInput, "column ciphertext has the wrong length");
  for (const auto& c : v.row_cts)
    if (c.eta() != v.cols) Throw(ErrorCode::kMalformedInput, "row ciphertext has the wrong length");
}

void to_json(Json& j, const PublicKeys& v) {
  j = Json{{"group", v.feip.group->params()}, {"feip_h", v.feip.h}, {"febo_h", v.febo.h}};
}

void from_json(const Json& j, PublicKeys& v) {
  auto params = j.at("group").get<GroupParams>();
  ValidateGroupParams(params);
  auto group = Group::Create(std::move(params));
  v.feip = feip::Mpk{group, VectorAt<GroupElement>(j, "feip_h")};
  v.febo = febo::Mpk{group, j.at("febo_h").get<GroupElement>()};
  if (v.feip.h.empty()) Throw(ErrorCode::kMalformedInput, "public key has no inner-product components");
  for (const auto& h : v.feip.h)
    if (!group->Contains(h)) Throw(ErrorCode::kMalformedInput, "public key element outside the group");
  if (!group->Contains(v.febo.h)) Throw(ErrorCode::kMalformedInput, "public key element outside the group");
}

}  // namespace secure_matrix

namespace secure_conv {

void to_json(Json& j, const ConvSpec& v) {
  j = Json{{"height", v.height},   {"width", v.width},   {"channels", v.channels}, {"filter", v.filter},
           {"padding", v.padding}, {"stride", v.stride}, {"filters", v.filters}};
}

void from_json(const Json& j, ConvSpec& v) {
  v.height = j.at("height").get<std::size_t>();
  v.width = j.at("width").get<std::size_t>();
  v.channels = j.at("channels").get<std::size_t>();
  v.filter = j.at("filter").get<std::size_t>();
  v.padding = j.at("padding").get<std::size_t>();
  v.stride = j.at("stride").get<std::size_t>();
  v.filters = j.at("filters").get<std::size_t>();
  v.Validate();
}

void to_json(Json& j, const EncryptedWindowList& v) {
  j = Json{{"spec", v.spec}, {"scale_power", v.scale_power}, {"windows", v.windows}};
}

void from_json(const Json& j, EncryptedWindowList& v) {
  v.spec = j.at("spec").get<ConvSpec>();
  v.scale_power = j.at("scale_power").get<int>();
  v.windows = VectorAt<feip::Ciphertext>(j, "windows");
  if (v.windows.size() != v.spec.window_count())
    Throw(ErrorCode::kMalformedInput, "window count does not match the convolution geometry");
}

}  // namespace secure_conv

namespace nn {

void to_json(Json& j, const LayerSpec& v) {
  j = Json{{"kind", std::string(LayerKindName(v.kind))}, {"in", v.in}, {"out", v.out}};
  if (v.kind == LayerKind::kConv) j["conv"] = v.conv;
  if (v.kind == LayerKind::kAvgPool) {
    j["height"] = v.height;
    j["width"] = v.width;
    j["channels"] = v.channels;
    j["pool"] = v.pool;
  }
}

void from_json(const Json& j, LayerSpec& v) {
  const auto name = j.at("kind").get<std::string>();
  auto kind = ParseLayerKind(name);
  if (!kind) Throw(ErrorCode::kMalformedInput, "unknown layer kind '" + name + "'");
  v = LayerSpec{};
  v.kind = *kind;
  v.in = j.at("in").get<std::size_t>();
  v.out = j.at("out").get<std::size_t>();
  if (v.kind == LayerKind::kConv) v.conv = j.at("conv").get<secure_conv::ConvSpec>();
  if (v.kind == LayerKind::kAvgPool) {
    v.height = j.at("height").get<std::size_t>();
    v.width = j.at("width").get<std::size_t>();
    v.channels = j.at("channels").get<std::size_t>();
    v.pool = j.at("pool").get<std::size_t>();
  }
}

void to_json(Json& j, const Network& v) { j = v.layers; }

void from_json(const Json& j, Network& v) {
  v.layers = j.get<std::vector<LayerSpec>>();
  v.Validate();
}

void to_json(Json& j, const LayerParams& v) { j = Json{{"w", v.w}, {"b", v.b}}; }

void from_json(const Json& j, LayerParams& v) {
  v.w = VectorAt<double>(j, "w");
  v.b = VectorAt<double>(j, "b");
}

void to_json(Json& j, const Hyperparams& v) {
  j = Json{{"lr", v.lr},     {"batch", v.batch},         {"epochs", v.epochs},
           {"max_iters", v.max_iters}, {"seed", v.seed}, {"init_gain", v.init_gain},
           {"output_init_gain", v.output_init_gain}};
}

void from_json(const Json& j, Hyperparams& v) {
  v.lr = j.at("lr").get<double>();
  v.batch = j.at("batch").get<std::size_t>();
  v.epochs = j.at("epochs").get<std::size_t>();
  v.max_iters = j.at("max_iters").get<std::size_t>();
  v.seed = j.at("seed").get<std::uint64_t>();
  v.init_gain = j.at("init_gain").get<double>();
  v.output_init_gain = j.at("output_init_gain").get<double>();
  v.Validate();
}

}  // namespace nn

namespace training {

void to_json(Json& j, const EncryptedBatch& v) {
  j = Json{{"size", v.size}, {"labels", v.labels}};
  if (v.features.rows > 0) j["features"] = v.features;
  if (!v.windows.empty()) j["windows"] = v.windows;
  if (v.window_rows.rows > 0) j["window_rows"] = v.window_rows;
}

void from_json(const Json& j, EncryptedBatch& v) {
  v = EncryptedBatch{};
  v.size = j.at("size").get<std::size_t>();
  v.labels = j.at("labels").get<EncryptedMatrix>();
  if (j.contains("features")) v.features = j.at("features").get<EncryptedMatrix>();
  if (j.contains("windows")) v.windows = VectorAt<secure_conv::EncryptedWindowList>(j, "windows");
  if (j.contains("window_rows")) v.window_rows = j.at("window_rows").get<EncryptedMatrix>();
  if (v.labels.cols != v.size) Throw(ErrorCode::kMalformedInput, "label matrix does not match the batch size");
}

void to_json(Json& j, const ClientBundle& v) {
  j = Json{{"codec", v.codec},
           {"feature_dim", v.feature_dim},
           {"num_classes", v.num_classes},
           {"samples", v.samples},
           {"batches", v.batches}};
  if (v.conv) j["conv"] = *v.conv;
}

void from_json(const Json& j, ClientBundle& v) {
  v.codec = j.at("codec").get<FixedPointCodec>();
  v.feature_dim = j.at("feature_dim").get<std::size_t>();
  v.num_classes = j.at("num_classes").get<std::size_t>();
  v.samples = j.at("samples").get<std::size_t>();
  v.conv = j.contains("conv") ? std::optional(j.at("conv").get<secure_conv::ConvSpec>()) : std::nullopt;
  v.batches = VectorAt<EncryptedBatch>(j, "batches");
  std::size_t total = 0;
  for (const auto& b : v.batches) {
    total += b.size;
    if (b.labels.rows != v.num_classes)
      Throw(ErrorCode::kMalformedInput, "label matrix does not match the class count");
  }
  if (total != v.samples) Throw(ErrorCode::kMalformedInput, "batch sizes do not add up to the sample count");
}

void to_json(Json& j, const Standardizer& v) { j = Json{{"mean", v.mean}, {"scale", v.scale}}; }

void from_json(const Json& j, Standardizer& v) {
  v.mean = VectorAt<double>(j, "mean");
  v.scale = VectorAt<double>(j, "scale");
  if (v.mean.size() != v.scale.size()) Throw(ErrorCode::kMalformedInput, "standardizer vectors differ in length");
}

void to_json(Json& j, const IterationRecord& v) {
  j = Json{{"iter", v.iter},        {"epoch", v.epoch},         {"batch", v.batch},
           {"cost", v.cost},        {"batch_acc", v.batch_acc}, {"timing_ms", v.timing_ms}};
}

void from_json(const Json& j, IterationRecord& v) {
  v.iter = j.at("iter").get<std::size_t>();
  v.epoch = j.at("epoch").get<std::size_t>();
  v.batch = j.at("batch").get<std::size_t>();
  v.cost = j.at("cost").get<double>();
  v.batch_acc = j.at("batch_acc").get<double>();
  v.timing_ms = j.at("timing_ms").get<double>();
}

}  // namespace training

namespace io {

Json Parse(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Throw(ErrorCode::kMalformedInput,
          std::string(what) + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

Json Wrap(std::string_view kind, Json body) {
  return Json{{"format", std::string(kind)}, {"version", kFormatVersion}, {"body", std::move(body)}};
}

const Json& Unwrap(const Json& doc, std::string_view kind) {
  if (!doc.is_object() || !doc.contains("format") || !doc.contains("version") || !doc.contains("body"))
    Throw(ErrorCode::kMalformedInput, std::string(kind) + ": missing format header");
  if (doc["format"] != std::string(kind))
    Throw(ErrorCode::kMalformedInput, "expected a " + std::string(kind) + " file, found " + doc["format"].dump());
  if (doc["version"] != kFormatVersion)
    Throw(ErrorCode::kMalformedInput, std::string(kind) + ": unsupported version " + doc["version"].dump());
  return doc["body"];
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Throw(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) Throw(ErrorCode::kIo, "read failed: " + path.string());
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents, bool private_file) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, private_file ? 0600 : 0644);
  if (fd < 0) Throw(ErrorCode::kIo, "cannot write " + path.string() + ": " + std::strerror(errno));
  if (private_file) ::fchmod(fd, 0600);
  std::size_t done = 0;
  while (done < contents.size()) {
    const ssize_t n = ::write(fd, contents.data() + done, contents.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      Throw(ErrorCode::kIo, "write failed for " + path.string() + ": " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::close(fd) != 0) Throw(ErrorCode::kIo, "close failed for " + path.string());
}

std::string EncodeBundle(const training::ClientBundle& bundle) { return Wrap("fenn.bundle", bundle).dump(); }

training::ClientBundle DecodeBundle(std::string_view text) {
  auto doc = Parse(text, "bundle");
  return Decode<training::ClientBundle>(Unwrap(doc, "fenn.bundle"), "bundle");
}

std::string EncodePublicKeys(const secure_matrix::PublicKeys& mpk) {
  return Wrap("fenn.public", mpk).dump(1);
}

secure_matrix::PublicKeys DecodePublicKeys(std::string_view text) {
  auto doc = Parse(text, "public key");
  return Decode<secure_matrix::PublicKeys>(Unwrap(doc, "fenn.public"), "public key");
}

std::string EncodeAuthority(const AuthorityFile& file) {
  const auto& st = file.state;
  Json body{{"public", st.mpk},
            {"feip_s", st.feip_msk.s},
            {"febo_s", st.febo_msk.s},
            {"permitted", file.permitted}};
  return Wrap("fenn.authority", std::move(body)).dump(1);
}

namespace {

template <class F>
auto Guarded(std::string_view what, F&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    Throw(ErrorCode::kMalformedInput, std::string(what) + ": " + e.what());
  }
}

}  // namespace

AuthorityFile DecodeAuthority(std::string_view text) {
  auto doc = Parse(text, "authority key");
  return Guarded("authority key", [&] {
    const Json& body = Unwrap(doc, "fenn.authority");
    AuthorityFile file;
    auto& st = file.state;
    st.mpk = body.at("public").get<secure_matrix::PublicKeys>();
    const auto& grp = st.mpk.feip.group;
    st.feip_msk = feip::Msk{grp, body.at("feip_s").get<std::vector<Scalar>>()};
    st.febo_msk = febo::Msk{grp, body.at("febo_s").get<Scalar>()};
    file.permitted = body.at("permitted").get<FunctionSet>();
    if (st.feip_msk.eta() != st.mpk.feip.eta())
      Throw(ErrorCode::kMalformedInput, "authority key: secret and public lengths differ");
    for (std::size_t i = 0; i < st.feip_msk.eta(); ++i)
      if (!(grp->PowG(st.feip_msk.s[i]) == st.mpk.feip.h[i]))
        Throw(ErrorCode::kMalformedInput, "authority key: secret does not match public key");
    if (!(grp->PowG(st.febo_msk.s) == st.mpk.febo.h))
      Throw(ErrorCode::kMalformedInput, "authority key: secret does not match public key");
    return file;
  });
}

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  Json body{{"network", ckpt.network},
            {"params", ckpt.params},
            {"hyperparams", ckpt.hyperparams},
            {"codec", ckpt.codec}};
  return Wrap("fenn.checkpoint", std::move(body)).dump(1);
}

Checkpoint DecodeCheckpoint(std::string_view text) {
  auto doc = Parse(text, "checkpoint");
  return Guarded("checkpoint", [&] {
    const Json& body = Unwrap(doc, "fenn.checkpoint");
    Checkpoint c;
    c.network = body.at("network").get<nn::Network>();
    c.params = body.at("params").get<nn::Params>();
    c.hyperparams = body.at("hyperparams").get<nn::Hyperparams>();
    c.codec = body.at("codec").get<FixedPointCodec>();
    if (c.params.size() != c.network.layers.size())
      Throw(ErrorCode::kMalformedInput, "checkpoint: params do not match the network");
    for (std::size_t l = 0; l < c.params.size(); ++l) {
      const auto& s = c.network.layers[l];
      if (c.params[l].w.size() != s.weight_rows() * s.weight_cols() || c.params[l].b.size() != s.bias_size())
        Throw(ErrorCode::kMalformedInput, "checkpoint: parameter shape mismatch at layer " + std::to_string(l));
    }
    return c;
  });
}

std::string EncodeRunLogLine(const training::IterationRecord& rec) { return Json(rec).dump(); }

}  // namespace io
}  // namespace fenn
