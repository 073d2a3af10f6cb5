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

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "fenn/encoding.hpp"
#include "fenn/febo.hpp"
#include "fenn/feip.hpp"
#include "fenn/key_service.hpp"
#include "fenn/nn.hpp"
#include "fenn/rng.hpp"
#include "fenn/secure_conv.hpp"
#include "fenn/secure_matrix.hpp"

namespace fenn::training {

using secure_matrix::EncryptedMatrix;
using secure_matrix::PublicKeys;

// ---------------------------------------------------------------------------
// Authority

struct AuthorityState {
  PublicKeys mpk;
  feip::Msk feip_msk;
  febo::Msk febo_msk;
};

// FEIP keys are generated for vectors up to max_eta; shorter vectors use a
// prefix of the key.
AuthorityState AuthoritySetup(GroupPtr group, std::size_t max_eta, Rng& rng);

struct IssuanceLog {
  std::array<std::uint64_t, 6> keys_by_kind{};  // indexed by KeyKind
  std::uint64_t requests = 0;
  std::uint64_t request_bytes = 0;   // operand values at 8 bytes plus commitments
  std::uint64_t response_bytes = 0;  // keys at the group element width

  std::uint64_t keys(KeyKind k) const { return keys_by_kind[static_cast<std::size_t>(k)]; }
  std::uint64_t total_keys() const;
};

class Authority : public KeyService {
 public:
  Authority(AuthorityState state, FunctionSet permitted);

  // Safe to call concurrently.
  KeyResponse Serve(const KeyRequest& request) override;

  const PublicKeys& public_keys() const { return state_.mpk; }
  const FunctionSet& permitted() const { return permitted_; }
  IssuanceLog log() const;
  void ResetLog();

 private:
  AuthorityState state_;
  FunctionSet permitted_;
  std::size_t element_bytes_;
  mutable std::mutex mu_;
  IssuanceLog log_;
};

// Forwards requests through their JSON wire encoding, the way a remote
// authority would see them.
class WireTransport : public KeyService {
 public:
  explicit WireTransport(KeyService& remote) : remote_(remote) {}

  KeyResponse Serve(const KeyRequest& request) override;

  std::uint64_t bytes_sent() const { return sent_; }
  std::uint64_t bytes_received() const { return received_; }
  std::uint64_t messages() const { return messages_; }

 private:
  KeyService& remote_;
  std::mutex mu_;
  std::uint64_t sent_ = 0;
  std::uint64_t received_ = 0;
  std::uint64_t messages_ = 0;
};

// ---------------------------------------------------------------------------
// Client

// Per-feature (x - mean) / (std + eps) with statistics the client keeps.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer Fit(const nn::Matrix& features, double eps = 0.1);
  nn::Matrix Apply(const nn::Matrix& features) const;
  bool operator==(const Standardizer&) const = default;
};

// Quantized plaintext of one batch: features (dim x size) and one-hot labels
// (classes x size), both at scale power 1.
struct QuantizedBatch {
  QuantTensor features;
  QuantTensor labels;
};

std::vector<QuantizedBatch> QuantizeDataset(const nn::Matrix& features, std::span<const std::size_t> labels,
                                            std::size_t classes, const FixedPointCodec& codec,
                                            std::size_t batch);

struct EncryptedBatch {
  std::size_t size = 0;
  EncryptedMatrix features;  // dense first layer: dim x size
  std::vector<secure_conv::EncryptedWindowList> windows;  // conv first layer: one per sample
  EncryptedMatrix window_rows;  // conv: window_size x (size * positions), row view
  EncryptedMatrix labels;       // classes x size: element and column views

  bool operator==(const EncryptedBatch&) const = default;
};

struct ClientBundle {
  FixedPointCodec codec;
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::size_t samples = 0;
  std::optional<secure_conv::ConvSpec> conv;
  std::vector<EncryptedBatch> batches;

  bool operator==(const ClientBundle&) const = default;
};

struct ClientOptions {
  std::size_t batch = 64;
  std::optional<secure_conv::ConvSpec> conv;
  // Element-wise view of the features (unused by training).
  bool feature_elements = true;
  // Encrypted views the server needs for first-layer weight gradients.
  bool gradient_view = true;
  unsigned workers = 1;
};

ClientBundle ClientPrepare(const nn::Matrix& features, std::span<const std::size_t> labels,
                           std::size_t classes, const PublicKeys& mpk, const FixedPointCodec& codec,
                           const ClientOptions& options, Rng& rng);

// Authority side: decrypts the quantized features and one-hot labels of a
// bundle with the master secret. Lets an auditor rerun a job on the
// plaintext reference without a second copy of the data. Conv pixels that
// no window covers come back as zero.
std::vector<QuantizedBatch> RecoverBundle(const ClientBundle& bundle, const AuthorityState& state,
                                          unsigned workers = 1);

// ---------------------------------------------------------------------------
// Server

// The first-layer and label-dependent steps of one training batch. The
// encrypted backend computes them from ciphertexts and function keys; the
// plain backend computes the same integers directly.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::size_t batch_count() const = 0;
  virtual std::size_t batch_size(std::size_t b) const = 0;

  // Dense: W (out x dim) times X, out x size. Conv: one row per filter,
  // filters x (size * positions). Scale power of w plus one.
  virtual QuantTensor FirstLayerProduct(std::size_t b, const QuantTensor& w) = 0;
  // delta times X^T (dense, out x dim) or times the window matrix transposed
  // (conv, filters x window_size).
  virtual QuantTensor FirstLayerGradient(std::size_t b, const QuantTensor& delta) = 0;
  // Y - pred element-wise, classes x size.
  virtual QuantTensor LabelResidual(std::size_t b, const QuantTensor& pred) = 0;
  // <y_j, v_j> for every sample column j.
  virtual std::vector<std::int64_t> LabelInnerProducts(std::size_t b, const QuantTensor& v) = 0;
};

class EncryptedBackend : public Backend {
 public:
  EncryptedBackend(const ClientBundle& bundle, const PublicKeys& mpk, KeyService& authority,
                   FunctionSet permitted, unsigned workers = 1);

  std::size_t batch_count() const override { return bundle_.batches.size(); }
  std::size_t batch_size(std::size_t b) const override { return bundle_.batches.at(b).size; }
  QuantTensor FirstLayerProduct(std::size_t b, const QuantTensor& w) override;
  QuantTensor FirstLayerGradient(std::size_t b, const QuantTensor& delta) override;
  QuantTensor LabelResidual(std::size_t b, const QuantTensor& pred) override;
  std::vector<std::int64_t> LabelInnerProducts(std::size_t b, const QuantTensor& v) override;

 private:
  const ClientBundle& bundle_;
  PublicKeys mpk_;
  KeyService& authority_;
  FunctionSet permitted_;
  unsigned workers_;
};

class PlainBackend : public Backend {
 public:
  PlainBackend(std::vector<QuantizedBatch> batches, const FixedPointCodec& codec,
               std::optional<secure_conv::ConvSpec> conv = std::nullopt);

  std::size_t batch_count() const override { return batches_.size(); }
  std::size_t batch_size(std::size_t b) const override { return batches_.at(b).features.cols(); }
  QuantTensor FirstLayerProduct(std::size_t b, const QuantTensor& w) override;
  QuantTensor FirstLayerGradient(std::size_t b, const QuantTensor& delta) override;
  QuantTensor LabelResidual(std::size_t b, const QuantTensor& pred) override;
  std::vector<std::int64_t> LabelInnerProducts(std::size_t b, const QuantTensor& v) override;

 private:
  // Conv only: window_size x (size * positions) matrix of batch b.
  const QuantTensor& Windows(std::size_t b);

  std::vector<QuantizedBatch> batches_;
  FixedPointCodec codec_;
  std::optional<secure_conv::ConvSpec> conv_;
  std::vector<QuantTensor> windows_;
};

// Window matrix of a quantized image batch (dim x size): column b*positions+pos
// holds the flattened window at output position pos of sample b.
QuantTensor WindowMatrix(const QuantTensor& images, const secure_conv::ConvSpec& spec);

struct IterationRecord {
  std::size_t iter = 0;
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double cost = 0.0;
  double batch_acc = 0.0;
  double timing_ms = 0.0;
};

struct TrainOptions {
  // Cost and accuracy through inner-product keys on the encrypted labels
  // instead of reading labels back from the residual.
  bool secure_loss = false;
  bool record_trajectory = false;
  std::function<void(const IterationRecord&, const nn::Params&)> on_iteration;
};

struct TrainResult {
  nn::Params params;
  std::vector<IterationRecord> log;
  std::vector<nn::Params> trajectory;  // params after each iteration
};

TrainResult Train(const nn::Network& net, nn::Params params, const nn::Hyperparams& hp,
                  const FixedPointCodec& codec, Backend& backend, const TrainOptions& options = {});

// Class ids for every sample of every batch, in order.
std::vector<std::size_t> Predict(const nn::Network& net, const nn::Params& params,
                                 const FixedPointCodec& codec, Backend& backend);

// Accuracy of predictions against labels.
double Accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels);

}  // namespace fenn::training
