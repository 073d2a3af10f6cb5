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

#include <filesystem>
#include <string>
#include <sys/stat.h>

#include "doctest.h"
#include "fenn/error.hpp"
#include "fenn/serialize.hpp"
#include "test_support.hpp"

namespace fenn::io {
namespace {

using fenn::testing::MakeAuthority;
using fenn::testing::TestGroup;

ErrorCode CodeOf(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message != nullptr) *message = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

training::ClientBundle SmallBundle(std::optional<secure_conv::ConvSpec> conv = std::nullopt) {
  auto authority = MakeAuthority(64);
  Rng rng(3);
  const std::size_t dim = conv ? conv->height * conv->width * conv->channels : 5;
  nn::Matrix x(dim, 5);
  for (auto& v : x.v) v = static_cast<double>(rng.NextU64() % 200) / 100.0 - 1.0;
  std::size_t labels[] = {0, 1, 2, 1, 0};
  training::ClientOptions opt;
  opt.batch = 3;
  opt.conv = conv;
  return training::ClientPrepare(x, labels, 3, authority->public_keys(), FixedPointCodec{}, opt, rng);
}

std::filesystem::path TempPath(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fenn_io_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST_SUITE("serialize") {

TEST_CASE("bundles round-trip") {
  for (auto conv : {std::optional<secure_conv::ConvSpec>{},
                    std::optional<secure_conv::ConvSpec>{secure_conv::ConvSpec{
                        .height = 4, .width = 4, .channels = 1, .filter = 3, .padding = 1, .stride = 1,
                        .filters = 2}}}) {
    const auto bundle = SmallBundle(conv);
    const std::string text = EncodeBundle(bundle);
    const auto back = DecodeBundle(text);
    CHECK(back == bundle);
    CHECK(EncodeBundle(back) == text);
  }
}

TEST_CASE("truncated and mistyped input is rejected with a position") {
  const std::string text = EncodeBundle(SmallBundle());
  std::string msg;
  CHECK(CodeOf([&] { DecodeBundle(text.substr(0, text.size() / 2)); }, &msg) == ErrorCode::kMalformedInput);
  CHECK(msg.find("byte") != std::string::npos);
  CHECK(CodeOf([&] { DecodeBundle(""); }) == ErrorCode::kMalformedInput);
  CHECK(CodeOf([&] { DecodeBundle(R"({"format":"fenn.bundle","version":1,"body":{}})"); }, &msg) ==
        ErrorCode::kMalformedInput);
  CHECK(CodeOf([&] { DecodeBundle(R"({"format":"fenn.bundle","version":7,"body":{}})"); }, &msg) ==
        ErrorCode::kMalformedInput);
  CHECK(msg.find("version") != std::string::npos);
  auto pk = EncodePublicKeys(MakeAuthority(8)->public_keys());
  CHECK(CodeOf([&] { DecodeBundle(pk); }, &msg) == ErrorCode::kMalformedInput);
  CHECK(msg.find("fenn.public") != std::string::npos);
  auto doc = Parse(text, "bundle");
  doc["body"]["batches"][0]["labels"]["col_cts"][0]["ct0"] = "zz";
  CHECK(CodeOf([&] { DecodeBundle(doc.dump()); }) == ErrorCode::kMalformedInput);
}

TEST_CASE("public keys round-trip and are validated") {
  auto authority = MakeAuthority(16);
  const auto mpk = authority->public_keys();
  const auto back = DecodePublicKeys(EncodePublicKeys(mpk));
  CHECK(back.feip.h == mpk.feip.h);
  CHECK(back.febo.h == mpk.febo.h);
  CHECK(back.feip.group->params() == mpk.feip.group->params());
  auto doc = Parse(EncodePublicKeys(mpk), "public");
  doc["body"]["feip_h"][0] = "0";
  CHECK(CodeOf([&] { DecodePublicKeys(doc.dump()); }) == ErrorCode::kMalformedInput);
}

TEST_CASE("authority files round-trip and check the key pair") {
  Rng rng(5);
  AuthorityFile file{training::AuthoritySetup(TestGroup(), 8, rng), FunctionSet{Function::kDotProduct, Function::kSub}};
  const auto back = DecodeAuthority(EncodeAuthority(file));
  CHECK(back.permitted == file.permitted);
  CHECK(back.state.feip_msk.s == file.state.feip_msk.s);
  CHECK(back.state.febo_msk.s == file.state.febo_msk.s);
  auto doc = Parse(EncodeAuthority(file), "authority");
  doc["body"]["febo_s"] = "1";
  CHECK(CodeOf([&] { DecodeAuthority(doc.dump()); }) == ErrorCode::kMalformedInput);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  auto net = nn::BuildLenet5();
  nn::Hyperparams hp;
  hp.lr = 0.37;
  hp.seed = 99;
  hp.init_gain = 1.7;
  Checkpoint c{net, nn::InitParams(net, hp), hp, FixedPointCodec{.scale_digits = 3, .value_bound = 99999}};
  c.params[0].w[0] = 0.1 + 0.2;
  c.params[0].w[1] = -1e-300;
  const auto back = DecodeCheckpoint(EncodeCheckpoint(c));
  CHECK(back == c);
}

TEST_CASE("run log lines") {
  training::IterationRecord rec{.iter = 3, .epoch = 1, .batch = 2, .cost = 0.5, .batch_acc = 0.75, .timing_ms = 12.5};
  const std::string line = EncodeRunLogLine(rec);
  CHECK(line.find('\n') == std::string::npos);
  auto j = Parse(line, "log");
  CHECK(j["iter"] == 3);
  CHECK(j["cost"] == 0.5);
  CHECK(j["batch_acc"] == 0.75);
  CHECK(j["timing_ms"] == 12.5);
}

TEST_CASE("key wire messages round-trip") {
  auto authority = MakeAuthority(8);
  Rng rng(6);
  auto x = fenn::testing::RandomMatrix(rng, 2, 3, -9, 9);
  auto enc = secure_matrix::PreProcessEncryption(x, authority->public_keys(), rng);
  KeyRequest req{.kind = KeyKind::kMul, .operand = fenn::testing::RandomMatrix(rng, 2, 3, -9, 9),
                 .cmts = enc.Commitments()};
  const auto rq = Json(req).get<KeyRequest>();
  CHECK(rq.kind == req.kind);
  CHECK(rq.operand == req.operand);
  CHECK(rq.cmts == req.cmts);
  const auto resp = authority->Serve(req);
  const auto rp = Json(resp).get<KeyResponse>();
  CHECK(rp.kind == resp.kind);
  CHECK(rp.elementwise_keys == resp.elementwise_keys);
}

TEST_CASE("private files are created owner-only") {
  const auto path = TempPath("secret.json");
  std::filesystem::remove(path);
  WriteFile(path, "{}", true);
  struct stat st {};
  REQUIRE(::stat(path.c_str(), &st) == 0);
  CHECK((st.st_mode & 0777) == 0600);
  CHECK(ReadFile(path) == "{}");
  CHECK(CodeOf([&] { ReadFile(TempPath("missing.json")); }) == ErrorCode::kIo);
  std::filesystem::remove_all(path.parent_path());
}

}  // TEST_SUITE

}  // namespace
}  // namespace fenn::io
