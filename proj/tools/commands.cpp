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

#include <sodium.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cli.hpp"
#include "fenn/bench.hpp"
#include "fenn/training.hpp"
#include "fenn/mnist.hpp"
#include "fenn/serialize.hpp"

namespace fenn::cli {
namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotInRange:
    case ErrorCode::kKeyMismatch:
    case ErrorCode::kDivisorZero:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kUnsupportedFunction:
    case ErrorCode::kMalformedRequest:
      return kExitCrypto;
    default:
      return kExitUsage;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double Ms(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(data.data()), data.size());
  char hex[2 * crypto_hash_sha256_BYTES + 1];
  sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
  return hex;
}

FunctionSet ParseFunctions(const std::vector<std::string>& names) {
  if (names.empty()) return FunctionSet::All();
  FunctionSet set;
  for (const auto& n : names) {
    auto f = ParseFunction(n == "dot" ? "dot-product" : n);
    if (!f) throw UsageError("unknown function '" + n + "' (expected dot, add, sub, mul or div)");
    set.Insert(*f);
  }
  return set;
}

constexpr std::string_view kStandardizerFormat = "fenn.standardizer";

nn::Network PresetNetwork(const std::string& preset, std::size_t dim, std::size_t hidden, std::size_t classes) {
  if (preset == "lenet5") {
    if (dim != 28 * 28) throw UsageError("the lenet5 preset needs 28x28 single-channel images");
    return nn::BuildLenet5(28, 28, 1, classes);
  }
  const std::size_t widths[] = {dim, hidden, classes};
  return nn::BuildMlp(widths);
}

std::string Bytes(std::size_t n) {
  char buf[32];
  if (n >= (1u << 20))
    std::snprintf(buf, sizeof buf, "%.1f MiB", static_cast<double>(n) / (1 << 20));
  else
    std::snprintf(buf, sizeof buf, "%.1f KiB", static_cast<double>(n) / 1024);
  return buf;
}

struct LoadedAuthority {
  io::AuthorityFile file;
  std::string text;
};

LoadedAuthority LoadAuthority(const std::string& path) {
  LoadedAuthority a;
  a.text = io::ReadFile(path);
  a.file = io::DecodeAuthority(a.text);
  return a;
}

training::ClientBundle LoadBundle(const std::string& path) {
  const std::string text = io::ReadFile(path);
  std::printf("bundle %s sha256 %s\n", path.c_str(), Sha256Hex(text).c_str());
  auto bundle = io::DecodeBundle(text);
  if (bundle.batches.empty()) throw UsageError("bundle " + path + " holds no samples");
  return bundle;
}

// Cheap check that a bundle was produced under this authority's group.
void CheckBundleGroup(const training::ClientBundle& bundle, const secure_matrix::PublicKeys& mpk) {
  const auto& labels = bundle.batches.front().labels;
  const GroupElement* probe = !labels.col_cts.empty()    ? &labels.col_cts.front().ct0
                              : !labels.elem_cts.empty() ? &labels.elem_cts.front().cmt
                                                         : nullptr;
  if (probe != nullptr && !mpk.feip.group->Contains(*probe))
    throw UsageError("the bundle was not encrypted under this authority's public key");
  if (bundle.num_classes > mpk.feip.eta() || bundle.batches.front().size > mpk.feip.eta())
    throw UsageError("the authority's inner-product key is shorter than the bundle needs (rerun setup with a larger "
                     "--max-eta)");
}

}  // namespace

int RunSetup(const SetupOptions& o) {
  const FunctionSet permitted = ParseFunctions(o.functions);
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path msk_path = dir / "authority.msk.json", pk_path = dir / "public.mpk.json";
  if (!o.force) {
    for (const auto& p : {msk_path, pk_path})
      if (fs::exists(p)) throw UsageError(p.string() + " already exists; pass --force to overwrite");
  }
  Rng rng = Rng::FromOptionalSeed(o.seed);
  const auto t0 = Clock::now();
  auto group = Group::Create(GroupGen(o.lambda, rng));
  auto state = training::AuthoritySetup(group, o.max_eta, rng);
  io::WriteFile(msk_path, io::EncodeAuthority({state, permitted}), true);
  io::WriteFile(pk_path, io::EncodePublicKeys(state.mpk));
  std::string fns;
  for (auto f : permitted.Members()) fns += (fns.empty() ? "" : ",") + std::string(FunctionName(f));
  std::printf("lambda %u, max eta %zu, permitted {%s}, %.0f ms\n", o.lambda, o.max_eta, fns.c_str(), Ms(t0));
  std::printf("wrote %s (mode 0600)\nwrote %s\n", msk_path.c_str(), pk_path.c_str());
  return kExitOk;
}

int RunEncrypt(const EncryptOptions& o) {
  if (o.csv.empty() && o.images.empty()) throw UsageError("give --images/--labels or --csv");
  const auto mpk = io::DecodePublicKeys(io::ReadFile(o.mpk));
  data::Dataset ds = o.csv.empty() ? data::LoadIdx(o.images, o.labels, o.limit)
                                   : data::ParseCsv(io::ReadFile(o.csv), o.limit);
  if (ds.size() == 0) throw UsageError("the input holds no samples");
  nn::Matrix x = std::move(ds.features);
  if (!o.fit_standardizer.empty()) {
    const auto st = training::Standardizer::Fit(x);
    io::WriteFile(o.fit_standardizer, io::Wrap(kStandardizerFormat, st).dump(), true);
    x = st.Apply(x);
    std::printf("wrote %s (client-side statistics, mode 0600)\n", o.fit_standardizer.c_str());
  } else if (!o.standardizer.empty()) {
    const auto doc = io::Parse(io::ReadFile(o.standardizer), "standardizer");
    const auto st = io::Decode<training::Standardizer>(io::Unwrap(doc, kStandardizerFormat), "standardizer");
    x = st.Apply(x);
  }

  const FixedPointCodec codec{.scale_digits = o.scale_digits, .value_bound = o.value_bound};
  training::ClientOptions opt;
  opt.batch = o.batch;
  opt.feature_elements = !o.no_feature_elements;
  opt.gradient_view = !o.no_gradient_view;
  opt.workers = o.workers;
  if (o.preset == "lenet5") opt.conv = PresetNetwork(o.preset, x.rows, 1, o.classes).layers.front().conv;

  std::size_t need = std::max({x.rows, o.classes, std::min(o.batch, x.cols)});
  if (opt.conv) {
    need = std::max(need, opt.conv->window_size());
    if (opt.gradient_view) need = std::max(need, std::min(o.batch, x.cols) * opt.conv->window_count());
  }
  if (need > mpk.feip.eta())
    throw UsageError("this bundle needs inner-product keys of length " + std::to_string(need) + " but " + o.mpk +
                     " covers " + std::to_string(mpk.feip.eta()) + "; rerun setup with --max-eta " +
                     std::to_string(need) + " or use a smaller --batch");

  Rng rng = Rng::FromOptionalSeed(o.seed);
  const auto t0 = Clock::now();
  const auto bundle = training::ClientPrepare(x, ds.labels, o.classes, mpk, codec, opt, rng);
  const double enc_ms = Ms(t0);
  const std::string text = io::EncodeBundle(bundle);
  io::WriteFile(o.out, text);

  std::size_t ip = 0, bo = 0;
  std::string sizes;
  for (const auto& b : bundle.batches) {
    ip += b.features.col_cts.size() + b.features.row_cts.size() + b.windows.size() * (b.windows.empty() ? 0 :
          b.windows.front().windows.size()) + b.window_rows.row_cts.size() + b.labels.col_cts.size();
    bo += b.features.elem_cts.size() + b.labels.elem_cts.size();
    sizes += (sizes.empty() ? "" : ",") + std::to_string(b.size);
  }
  std::printf("%zu samples, %zu features, %zu classes, %zu batches (%s)\n", bundle.samples, bundle.feature_dim,
              bundle.num_classes, bundle.batches.size(), sizes.c_str());
  std::printf("%zu inner-product ciphertexts, %zu element ciphertexts, %.0f ms\n", ip, bo, enc_ms);
  std::printf("wrote %s (%s) sha256 %s\n", o.out.c_str(), Bytes(text.size()).c_str(), Sha256Hex(text).c_str());
  return kExitOk;
}

int RunTrain(const TrainOptions& o) {
  const auto bundle = LoadBundle(o.bundle);
  auto auth = LoadAuthority(o.authority);
  const auto& state = auth.file.state;
  if (!o.mpk.empty() &&
      io::EncodePublicKeys(io::DecodePublicKeys(io::ReadFile(o.mpk))) != io::EncodePublicKeys(state.mpk))
    throw UsageError(o.mpk + " is not the public key of " + o.authority);
  CheckBundleGroup(bundle, state.mpk);

  const auto net = PresetNetwork(o.preset, bundle.feature_dim, o.hidden, bundle.num_classes);
  const bool conv_net = net.layers.front().kind == nn::LayerKind::kConv;
  if (conv_net != bundle.conv.has_value() || (conv_net && net.layers.front().conv != *bundle.conv))
    throw UsageError("the bundle was encrypted for a different first layer (check --preset at encrypt time)");
  const std::size_t batch = bundle.batches.front().size;
  if (o.batch && *o.batch != batch)
    throw UsageError("--batch " + std::to_string(*o.batch) + " does not match the bundle's batch size " +
                     std::to_string(batch) + "; batches are fixed at encryption time");

  nn::Hyperparams hp;
  hp.lr = o.lr;
  hp.batch = batch;
  hp.epochs = o.epochs;
  hp.max_iters = o.iters;
  hp.seed = o.seed;
  hp.init_gain = o.init_gain;
  hp.output_init_gain = o.output_init_gain;
  hp.Validate();
  const auto p0 = nn::InitParams(net, hp);

  const std::string log_path =
      o.log.empty() ? fs::path(o.out).replace_extension(".log.jsonl").string() : o.log;
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) Throw(ErrorCode::kIo, "cannot write " + log_path);

  training::Authority authority(state, auth.file.permitted);
  training::WireTransport wire(authority);
  training::EncryptedBackend backend(bundle, state.mpk, wire, auth.file.permitted, o.workers);
  training::TrainOptions to;
  to.secure_loss = o.secure_loss;
  to.record_trajectory = o.reference_check;
  to.on_iteration = [&](const training::IterationRecord& rec, const nn::Params&) {
    log << io::EncodeRunLogLine(rec) << '\n';
    log.flush();
    std::printf("iter %zu epoch %zu batch %zu cost %.4f acc %.3f %.0f ms\n", rec.iter, rec.epoch, rec.batch,
                rec.cost, rec.batch_acc, rec.timing_ms);
    std::fflush(stdout);
  };
  const auto t0 = Clock::now();
  const auto result = training::Train(net, p0, hp, bundle.codec, backend, to);
  const double train_ms = Ms(t0);

  io::WriteFile(o.out, io::EncodeCheckpoint({net, result.params, hp, bundle.codec}));
  const auto il = authority.log();
  std::printf("%zu iterations in %.1f s; %llu keys (%llu inner-product, %llu element-wise), wire %s sent / %s "
              "received\n",
              result.log.size(), train_ms / 1000.0, static_cast<unsigned long long>(il.total_keys()),
              static_cast<unsigned long long>(il.keys(KeyKind::kDotProduct) + il.keys(KeyKind::kConvKernel)),
              static_cast<unsigned long long>(il.total_keys() - il.keys(KeyKind::kDotProduct) -
                                              il.keys(KeyKind::kConvKernel)),
              Bytes(wire.bytes_sent()).c_str(), Bytes(wire.bytes_received()).c_str());
  std::printf("wrote %s and %s\n", o.out.c_str(), log_path.c_str());

  if (o.reference_check) {
    training::PlainBackend plain(training::RecoverBundle(bundle, state, o.workers), bundle.codec, bundle.conv);
    const auto ref = training::Train(net, p0, hp, bundle.codec, plain, to.secure_loss ? training::TrainOptions{
        .secure_loss = true, .record_trajectory = true} : training::TrainOptions{.record_trajectory = true});
    std::size_t first_diff = result.trajectory.size();
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
      if (i >= ref.trajectory.size() || !(ref.trajectory[i] == result.trajectory[i]) ||
          ref.log[i].cost != result.log[i].cost || ref.log[i].batch_acc != result.log[i].batch_acc) {
        first_diff = i;
        break;
      }
    }
    if (first_diff != result.trajectory.size() || ref.trajectory.size() != result.trajectory.size()) {
      std::printf("reference check: MISMATCH at iteration %zu\n", first_diff);
      return kExitVerifyFailed;
    }
    std::printf("reference check: EXACT MATCH (%zu iterations)\n", result.trajectory.size());
  }
  return kExitOk;
}

int RunPredict(const PredictOptions& o) {
  const auto ckpt = io::DecodeCheckpoint(io::ReadFile(o.checkpoint));
  const auto bundle = LoadBundle(o.bundle);
  auto auth = LoadAuthority(o.authority);
  const auto& state = auth.file.state;
  CheckBundleGroup(bundle, state.mpk);
  if (!(ckpt.codec == bundle.codec)) throw UsageError("the bundle and the checkpoint use different codecs");
  if (bundle.feature_dim != ckpt.network.input_dim())
    throw UsageError("the bundle's feature dimension does not match the model input");

  training::Authority authority(state, auth.file.permitted);
  training::WireTransport wire(authority);
  training::EncryptedBackend backend(bundle, state.mpk, wire, FunctionSet{Function::kDotProduct}, o.workers);
  const auto t0 = Clock::now();
  const auto pred = training::Predict(ckpt.network, ckpt.params, ckpt.codec, backend);
  const double ms = Ms(t0);

  std::string lines;
  for (auto c : pred) lines += std::to_string(c) + "\n";
  if (o.out.empty()) {
    std::fwrite(lines.data(), 1, lines.size(), stdout);
  } else {
    io::WriteFile(o.out, lines);
    std::printf("wrote %zu predictions to %s\n", pred.size(), o.out.c_str());
  }
  std::fprintf(stderr, "%zu samples in %.1f s\n", pred.size(), ms / 1000.0);
  if (!o.labels.empty()) {
    const auto raw = data::ParseIdxLabels(io::ReadFile(o.labels));
    if (raw.size() < pred.size()) throw UsageError("the label file has fewer entries than the bundle");
    const std::vector<std::size_t> labels(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(pred.size()));
    std::printf("accuracy %.4f\n", training::Accuracy(pred, labels));
  }
  if (o.reference_check) {
    training::PlainBackend plain(training::RecoverBundle(bundle, state, o.workers), bundle.codec, bundle.conv);
    const auto ref = training::Predict(ckpt.network, ckpt.params, ckpt.codec, plain);
    if (ref != pred) {
      std::printf("reference check: MISMATCH\n");
      return kExitVerifyFailed;
    }
    std::printf("reference check: EXACT MATCH (%zu predictions)\n", pred.size());
  }
  return kExitOk;
}

int RunBench(const BenchOptions& o) {
  std::vector<bench::Op> ops;
  if (o.ops.empty()) {
    ops = {bench::Op::kEnc, bench::Op::kKeyDerive, bench::Op::kDecAdd, bench::Op::kDecMul, bench::Op::kDecDot};
  } else {
    for (const auto& n : o.ops) {
      auto op = bench::ParseOp(n);
      if (!op) throw UsageError("unknown bench op '" + n + "'");
      ops.push_back(*op);
    }
  }
  std::string csv = "op,size,workers,ms,serial_ms,speedup\n";
  bool any = false;
  for (auto s : o.sizes) any = any || s > 0;
  if (any) {
    Rng rng = Rng::FromOptionalSeed(o.seed);
    auto group = Group::Create(GroupGen(o.lambda, rng));
    training::Authority authority(training::AuthoritySetup(group, bench::kDotEta, rng), FunctionSet::All());
    for (auto op : ops) {
      for (auto size : o.sizes) {
        if (size == 0) continue;
        const double serial = bench::TimeOp(op, size, 1, authority, rng, o.reps);
        for (auto w : o.workers) {
          const double ms = w == 1 ? serial : bench::TimeOp(op, size, w, authority, rng, o.reps);
          char row[160];
          std::snprintf(row, sizeof row, "%s,%zu,%u,%.3f,%.3f,%.3f\n", std::string(bench::OpName(op)).c_str(), size,
                        w, ms, serial, ms > 0 ? serial / ms : 0.0);
          csv += row;
          if (!o.out.empty()) std::fprintf(stderr, "%s", row);
        }
      }
    }
  }
  if (o.out.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    io::WriteFile(o.out, csv);
  }
  if (!o.gnuplot.empty()) {
    const std::string data = o.out.empty() ? "bench.csv" : o.out;
    std::string script =
        "# gnuplot " + o.gnuplot + "\n"
        "set datafile separator ','\n"
        "set key left top\n"
        "set xlabel 'elements'\n"
        "set ylabel 'ms'\n"
        "set terminal pngcairo size 900,600\n"
        "set output 'bench.png'\n"
        "ops = '";
    for (std::size_t i = 0; i < ops.size(); ++i) script += (i ? " " : "") + std::string(bench::OpName(ops[i]));
    script += "'\nplot for [op in ops] '" + data +
              "' every ::1 using (strcol(1) eq op && $3 == 1 ? $2 : NaN):4 with linespoints title op\n";
    io::WriteFile(o.gnuplot, script);
  }
  return kExitOk;
}

}  // namespace fenn::cli
