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

#include "fenn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fenn/dlog.hpp"
#include "fenn/error.hpp"
#include "fenn/parallel.hpp"
#include "fenn/serialize.hpp"

namespace fenn::training {
namespace {

std::string Str(std::size_t v) { return std::to_string(v); }

// Every decrypted quantity is bounded; the plain backend applies the same
// bounds so both backends fail in the same places.
void CheckBound(std::int64_t v, std::uint64_t bound) {
  if (static_cast<std::uint64_t>(std::llabs(v)) > bound)
    Throw(ErrorCode::kNotInRange, "no exponent within [-" + std::to_string(bound) + ", " +
                                      std::to_string(bound) + "]");
}

// a (n x k) times b (k x m), or times b^T when b is (m x k).
QuantTensor IntMatMul(const QuantTensor& a, const QuantTensor& b, bool transpose_b, std::uint64_t bound) {
  const std::size_t n = a.rows(), k = a.cols();
  const std::size_t m = transpose_b ? b.rows() : b.cols();
  if ((transpose_b ? b.cols() : b.rows()) != k) Throw(ErrorCode::kShapeMismatch, "inner dimensions differ");
  QuantTensor z;
  z.shape = {n, m};
  z.scale_power = a.scale_power + b.scale_power;
  z.data.assign(n * m, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      const std::int64_t av = a.data[i * k + t];
      if (av == 0) continue;
      for (std::size_t j = 0; j < m; ++j)
        z.data[i * m + j] += av * (transpose_b ? b.data[j * k + t] : b.data[t * m + j]);
    }
  for (auto v : z.data) CheckBound(v, bound);
  return z;
}

QuantTensor Columns(const nn::Matrix& m, std::size_t begin, std::size_t end, const FixedPointCodec& codec) {
  std::vector<double> values;
  values.reserve(m.rows * (end - begin));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = begin; j < end; ++j) values.push_back(m(i, j));
  return Quantize(values, {m.rows, end - begin}, codec, 1);
}

nn::Matrix ToMatrix(const QuantTensor& t, const FixedPointCodec& codec) {
  nn::Matrix m(t.rows(), t.cols());
  m.v = Dequantize(t, codec);
  return m;
}

QuantTensor Image(const QuantTensor& images, std::size_t col, const secure_conv::ConvSpec& spec) {
  QuantTensor img;
  img.shape = {spec.height, spec.width, spec.channels};
  img.scale_power = images.scale_power;
  img.data.resize(images.rows());
  for (std::size_t i = 0; i < images.rows(); ++i) img.data[i] = images.at(i, col);
  return img;
}

}  // namespace

// ---------------------------------------------------------------------------
// Authority

AuthorityState AuthoritySetup(GroupPtr group, std::size_t max_eta, Rng& rng) {
  AuthorityState st;
  auto [fpk, fsk] = feip::Setup(group, max_eta, rng);
  auto [bpk, bsk] = febo::Setup(group, rng);
  st.mpk = PublicKeys{std::move(fpk), std::move(bpk)};
  st.feip_msk = std::move(fsk);
  st.febo_msk = std::move(bsk);
  return st;
}

std::uint64_t IssuanceLog::total_keys() const {
  std::uint64_t n = 0;
  for (auto k : keys_by_kind) n += k;
  return n;
}

Authority::Authority(AuthorityState state, FunctionSet permitted)
    : state_(std::move(state)),
      permitted_(permitted),
      element_bytes_((mpz_sizeinbase(state_.mpk.feip.group->modulus().get_mpz_t(), 2) + 7) / 8) {}

KeyResponse Authority::Serve(const KeyRequest& request) {
  const Function f = KeyKindFunction(request.kind);
  if (!permitted_.Contains(f))
    Throw(ErrorCode::kUnsupportedFunction,
          std::string(KeyKindName(request.kind)) + " keys are not in the permitted function set");
  const QuantTensor& operand = request.operand;
  if (operand.shape.size() != 2 || ShapeSize(operand.shape) != operand.data.size() || operand.data.empty())
    Throw(ErrorCode::kMalformedRequest, "operand must be a non-empty 2-D tensor");

  const Group& grp = *state_.mpk.feip.group;
  KeyResponse resp;
  resp.kind = request.kind;
  if (f == Function::kDotProduct) {
    if (!request.cmts.empty()) Throw(ErrorCode::kMalformedRequest, "inner-product requests carry no commitments");
    const std::size_t eta = operand.cols();
    if (eta > state_.feip_msk.eta())
      Throw(ErrorCode::kMalformedRequest,
            "operand rows of length " + Str(eta) + " exceed the key length " + Str(state_.feip_msk.eta()));
    const feip::Msk msk = state_.feip_msk.Prefix(eta);
    resp.inner_product_keys.reserve(operand.rows());
    for (std::size_t i = 0; i < operand.rows(); ++i)
      resp.inner_product_keys.push_back(feip::KeyDerive(msk, operand.row(i)).sk);
  } else {
    if (request.cmts.size() != operand.data.size())
      Throw(ErrorCode::kMalformedRequest, "element-wise requests need one commitment per operand element");
    const febo::Op op = ElementwiseOp(f);
    resp.elementwise_keys.reserve(operand.data.size());
    for (std::size_t k = 0; k < operand.data.size(); ++k) {
      if (!grp.Contains(request.cmts[k]))
        Throw(ErrorCode::kMalformedRequest, "commitment " + Str(k) + " is not a group element");
      resp.elementwise_keys.push_back(febo::KeyDerive(state_.febo_msk, request.cmts[k], op, operand.data[k]).sk);
    }
  }

  const std::size_t issued = resp.inner_product_keys.size() + resp.elementwise_keys.size();
  std::lock_guard<std::mutex> lock(mu_);
  log_.keys_by_kind[static_cast<std::size_t>(request.kind)] += issued;
  log_.requests += 1;
  log_.request_bytes += operand.data.size() * 8 + request.cmts.size() * element_bytes_;
  log_.response_bytes += issued * element_bytes_;
  return resp;
}

IssuanceLog Authority::log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

void Authority::ResetLog() {
  std::lock_guard<std::mutex> lock(mu_);
  log_ = IssuanceLog{};
}

KeyResponse WireTransport::Serve(const KeyRequest& request) {
  const std::string request_text = Json(request).dump();
  const KeyRequest received = io::Decode<KeyRequest>(io::Parse(request_text, "key request"), "key request");
  const std::string response_text = Json(remote_.Serve(received)).dump();
  KeyResponse out = io::Decode<KeyResponse>(io::Parse(response_text, "key response"), "key response");
  std::lock_guard<std::mutex> lock(mu_);
  sent_ += request_text.size();
  received_ += response_text.size();
  messages_ += 1;
  return out;
}

// ---------------------------------------------------------------------------
// Client

Standardizer Standardizer::Fit(const nn::Matrix& features, double eps) {
  if (features.cols == 0) Throw(ErrorCode::kShapeMismatch, "cannot fit a standardizer on zero samples");
  Standardizer s;
  s.mean.resize(features.rows);
  s.scale.resize(features.rows);
  const auto n = static_cast<double>(features.cols);
  for (std::size_t i = 0; i < features.rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < features.cols; ++j) sum += features(i, j);
    const double mean = sum / n;
    double var = 0.0;
    for (std::size_t j = 0; j < features.cols; ++j) var += (features(i, j) - mean) * (features(i, j) - mean);
    s.mean[i] = mean;
    s.scale[i] = std::sqrt(var / n) + eps;
  }
  return s;
}

nn::Matrix Standardizer::Apply(const nn::Matrix& features) const {
  if (features.rows != mean.size()) Throw(ErrorCode::kShapeMismatch, "standardizer dimension mismatch");
  nn::Matrix out = features;
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) = (out(i, j) - mean[i]) / scale[i];
  return out;
}

std::vector<QuantizedBatch> QuantizeDataset(const nn::Matrix& features, std::span<const std::size_t> labels,
                                            std::size_t classes, const FixedPointCodec& codec,
                                            std::size_t batch) {
  if (labels.size() != features.cols)
    Throw(ErrorCode::kShapeMismatch, Str(labels.size()) + " labels for " + Str(features.cols) + " samples");
  if (batch == 0) Throw(ErrorCode::kDomainError, "batch size must be at least 1");
  if (classes == 0) Throw(ErrorCode::kDomainError, "need at least one class");
  std::vector<QuantizedBatch> out;
  for (std::size_t begin = 0; begin < features.cols; begin += batch) {
    const std::size_t end = std::min(features.cols, begin + batch);
    QuantizedBatch qb;
    qb.features = Columns(features, begin, end, codec);
    nn::Matrix onehot(classes, end - begin);
    for (std::size_t j = begin; j < end; ++j) {
      if (labels[j] >= classes)
        Throw(ErrorCode::kOutOfRange, "label " + Str(labels[j]) + " of sample " + Str(j) + " exceeds class count");
      onehot(labels[j], j - begin) = 1.0;
    }
    qb.labels = Quantize(onehot.v, {classes, end - begin}, codec, 1);
    out.push_back(std::move(qb));
  }
  return out;
}

QuantTensor WindowMatrix(const QuantTensor& images, const secure_conv::ConvSpec& spec) {
  const std::size_t positions = spec.window_count(), ws = spec.window_size(), n = images.cols();
  if (images.rows() != spec.height * spec.width * spec.channels)
    Throw(ErrorCode::kShapeMismatch, "images do not match the convolution input shape");
  QuantTensor out;
  out.shape = {ws, n * positions};
  out.scale_power = images.scale_power;
  out.data.resize(ws * n * positions);
  const std::size_t ow = spec.out_width();
  for (std::size_t b = 0; b < n; ++b) {
    const QuantTensor img = Image(images, b, spec);
    for (std::size_t pos = 0; pos < positions; ++pos) {
      const auto win = secure_conv::ExtractWindow(img, spec, pos / ow, pos % ow);
      for (std::size_t k = 0; k < ws; ++k) out.data[k * n * positions + b * positions + pos] = win[k];
    }
  }
  return out;
}

ClientBundle ClientPrepare(const nn::Matrix& features, std::span<const std::size_t> labels, std::size_t classes,
                           const PublicKeys& mpk, const FixedPointCodec& codec, const ClientOptions& options,
                           Rng& rng) {
  codec.Validate();
  if (options.conv) {
    options.conv->Validate();
    if (features.rows != options.conv->height * options.conv->width * options.conv->channels)
      Throw(ErrorCode::kShapeMismatch, "feature dimension does not match the convolution input");
  }
  ClientBundle bundle;
  bundle.codec = codec;
  bundle.feature_dim = features.rows;
  bundle.num_classes = classes;
  bundle.samples = features.cols;
  bundle.conv = options.conv;
  for (auto& qb : QuantizeDataset(features, labels, classes, codec, options.batch)) {
    EncryptedBatch eb;
    eb.size = qb.features.cols();
    if (options.conv) {
      for (std::size_t b = 0; b < eb.size; ++b)
        eb.windows.push_back(
            secure_conv::PreProcessEncryption(Image(qb.features, b, *options.conv), *options.conv, mpk.feip, rng,
                                              options.workers));
      if (options.gradient_view)
        eb.window_rows = secure_matrix::PreProcessEncryption(WindowMatrix(qb.features, *options.conv), mpk, rng,
                                                             {.columns = false, .elements = false, .rows = true},
                                                             options.workers);
    } else {
      eb.features = secure_matrix::PreProcessEncryption(
          qb.features, mpk, rng,
          {.columns = true, .elements = options.feature_elements, .rows = options.gradient_view}, options.workers);
    }
    eb.labels = secure_matrix::PreProcessEncryption(qb.labels, mpk, rng,
                                                    {.columns = true, .elements = true, .rows = false},
                                                    options.workers);
    bundle.batches.push_back(std::move(eb));
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Recovery

namespace {

// x_i from one FEIP ciphertext: ct_i / ct0^s_i = g^x_i.
std::int64_t RecoverCoordinate(const feip::Ciphertext& ct, std::size_t i, const feip::Msk& msk,
                               const DlogTable& dlog, std::uint64_t bound) {
  const auto& grp = *msk.group;
  if (i >= ct.eta() || i >= msk.eta()) Throw(ErrorCode::kShapeMismatch, "ciphertext longer than the master key");
  return dlog.Solve(grp.Div(ct.ct[i], grp.Pow(ct.ct0, msk.s[i])), bound);
}

// rows x cols plaintext from whichever view is present.
QuantTensor RecoverMatrix(const EncryptedMatrix& enc, const AuthorityState& state, const DlogTable& dlog,
                          std::uint64_t bound, unsigned workers) {
  QuantTensor out;
  out.shape = {enc.rows, enc.cols};
  out.scale_power = enc.scale_power;
  out.data.assign(enc.rows * enc.cols, 0);
  const auto& grp = *state.febo_msk.group;
  if (!enc.col_cts.empty()) {
    ParallelFor(enc.cols, workers, [&](std::size_t j) {
      for (std::size_t i = 0; i < enc.rows; ++i)
        out.data[i * enc.cols + j] = RecoverCoordinate(enc.col_cts.at(j), i, state.feip_msk, dlog, bound);
    });
  } else if (!enc.row_cts.empty()) {
    ParallelFor(enc.rows, workers, [&](std::size_t i) {
      for (std::size_t j = 0; j < enc.cols; ++j)
        out.data[i * enc.cols + j] = RecoverCoordinate(enc.row_cts.at(i), j, state.feip_msk, dlog, bound);
    });
  } else if (!enc.elem_cts.empty()) {
    ParallelFor(enc.rows * enc.cols, workers, [&](std::size_t k) {
      const auto& ct = enc.elem_cts.at(k);
      out.data[k] = dlog.Solve(grp.Div(ct.ct, grp.Pow(ct.cmt, state.febo_msk.s)), bound);
    });
  } else if (enc.rows * enc.cols != 0) {
    Throw(ErrorCode::kShapeMismatch, "encrypted matrix has no ciphertexts");
  }
  return out;
}

}  // namespace

std::vector<QuantizedBatch> RecoverBundle(const ClientBundle& bundle, const AuthorityState& state,
                                          unsigned workers) {
  const auto bound = static_cast<std::uint64_t>(bundle.codec.value_bound);
  const auto dlog = DlogTable::ForBound(state.feip_msk.group, bound);
  std::vector<QuantizedBatch> out;
  for (const auto& eb : bundle.batches) {
    QuantizedBatch qb;
    qb.labels = RecoverMatrix(eb.labels, state, *dlog, bound, workers);
    if (!bundle.conv) {
      qb.features = RecoverMatrix(eb.features, state, *dlog, bound, workers);
    } else {
      const auto& spec = *bundle.conv;
      if (eb.windows.size() != eb.size) Throw(ErrorCode::kShapeMismatch, "batch has no encrypted windows");
      const std::size_t dim = spec.height * spec.width * spec.channels;
      qb.features.shape = {dim, eb.size};
      qb.features.scale_power = 1;
      qb.features.data.assign(dim * eb.size, 0);
      ParallelFor(eb.size, workers, [&](std::size_t b) {
        const auto& wl = eb.windows[b];
        for (std::size_t oy = 0; oy < spec.out_height(); ++oy)
          for (std::size_t ox = 0; ox < spec.out_width(); ++ox) {
            const auto& ct = wl.windows.at(oy * spec.out_width() + ox);
            for (std::size_t dy = 0; dy < spec.filter; ++dy)
              for (std::size_t dx = 0; dx < spec.filter; ++dx) {
                const std::size_t py = oy * spec.stride + dy, px = ox * spec.stride + dx;
                if (py < spec.padding || px < spec.padding) continue;
                const std::size_t y = py - spec.padding, x = px - spec.padding;
                if (y >= spec.height || x >= spec.width) continue;
                for (std::size_t c = 0; c < spec.channels; ++c) {
                  const std::size_t pixel = (y * spec.width + x) * spec.channels + c;
                  qb.features.data[pixel * eb.size + b] = RecoverCoordinate(
                      ct, (dy * spec.filter + dx) * spec.channels + c, state.feip_msk, *dlog, bound);
                }
              }
          }
      });
    }
    out.push_back(std::move(qb));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backends

EncryptedBackend::EncryptedBackend(const ClientBundle& bundle, const PublicKeys& mpk, KeyService& authority,
                                   FunctionSet permitted, unsigned workers)
    : bundle_(bundle), mpk_(mpk), authority_(authority), permitted_(permitted), workers_(workers) {}

QuantTensor EncryptedBackend::FirstLayerProduct(std::size_t b, const QuantTensor& w) {
  const EncryptedBatch& eb = bundle_.batches.at(b);
  if (!bundle_.conv) {
    auto keys = secure_matrix::PreProcessKeyDerive(w, Function::kDotProduct, permitted_, authority_, &eb.features);
    return secure_matrix::SecureComputation(eb.features, Function::kDotProduct, keys, w, mpk_, bundle_.codec,
                                            workers_);
  }
  const auto& spec = *bundle_.conv;
  const std::size_t positions = spec.window_count(), filters = w.rows();
  if (eb.windows.size() != eb.size) Throw(ErrorCode::kShapeMismatch, "batch has no encrypted windows");
  QuantTensor out;
  out.shape = {filters, eb.size * positions};
  out.data.resize(filters * eb.size * positions);
  for (std::size_t f = 0; f < filters; ++f) {
    QuantTensor kernel;
    kernel.shape = {1, w.cols()};
    kernel.scale_power = w.scale_power;
    kernel.data.assign(w.row(f).begin(), w.row(f).end());
    const auto fk = secure_conv::PreProcessKeyDerive(kernel, spec, permitted_, authority_);
    for (std::size_t s = 0; s < eb.size; ++s) {
      auto map = secure_conv::SecureConvolution(eb.windows[s], fk, kernel, mpk_.feip, bundle_.codec, workers_);
      out.scale_power = map.scale_power;
      std::copy(map.data.begin(), map.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(
                                                                         f * eb.size * positions + s * positions));
    }
  }
  return out;
}

QuantTensor EncryptedBackend::FirstLayerGradient(std::size_t b, const QuantTensor& delta) {
  const EncryptedBatch& eb = bundle_.batches.at(b);
  const EncryptedMatrix& view = bundle_.conv ? eb.window_rows : eb.features;
  if (view.row_cts.empty()) Throw(ErrorCode::kShapeMismatch, "bundle has no encrypted gradient view");
  auto keys = secure_matrix::PreProcessKeyDerive(delta, Function::kDotProduct, permitted_, authority_, &view,
                                                 secure_matrix::DotSide::kRows);
  return secure_matrix::SecureComputation(view, Function::kDotProduct, keys, delta, mpk_, bundle_.codec, workers_);
}

QuantTensor EncryptedBackend::LabelResidual(std::size_t b, const QuantTensor& pred) {
  const EncryptedMatrix& labels = bundle_.batches.at(b).labels;
  auto keys = secure_matrix::PreProcessKeyDerive(pred, Function::kSub, permitted_, authority_, &labels);
  return secure_matrix::SecureComputation(labels, Function::kSub, keys, pred, mpk_, bundle_.codec, workers_);
}

std::vector<std::int64_t> EncryptedBackend::LabelInnerProducts(std::size_t b, const QuantTensor& v) {
  const EncryptedMatrix& labels = bundle_.batches.at(b).labels;
  if (v.rows() != labels.rows || v.cols() != labels.cols)
    Throw(ErrorCode::kShapeMismatch, "operand does not match the label matrix");
  const QuantTensor vt = Transpose(v);
  auto keys = secure_matrix::PreProcessKeyDerive(vt, Function::kDotProduct, permitted_, authority_, &labels);
  const feip::Mpk mpk = mpk_.feip.Prefix(labels.rows);
  const std::uint64_t bound = DotBound(labels.rows, bundle_.codec);
  auto dlog = DlogTable::ForBound(mpk.group, bound);
  std::vector<std::int64_t> out(labels.cols);
  ParallelFor(labels.cols, workers_, [&](std::size_t j) {
    out[j] = feip::Decrypt(mpk, labels.col_cts[j], keys.row_keys[j], vt.row(j), bound, *dlog);
  });
  return out;
}

PlainBackend::PlainBackend(std::vector<QuantizedBatch> batches, const FixedPointCodec& codec,
                           std::optional<secure_conv::ConvSpec> conv)
    : batches_(std::move(batches)), codec_(codec), conv_(conv), windows_(batches_.size()) {}

const QuantTensor& PlainBackend::Windows(std::size_t b) {
  if (windows_.at(b).data.empty()) windows_[b] = WindowMatrix(batches_[b].features, *conv_);
  return windows_[b];
}

QuantTensor PlainBackend::FirstLayerProduct(std::size_t b, const QuantTensor& w) {
  const QuantTensor& x = conv_ ? Windows(b) : batches_.at(b).features;
  return IntMatMul(w, x, false, DotBound(x.rows(), codec_));
}

QuantTensor PlainBackend::FirstLayerGradient(std::size_t b, const QuantTensor& delta) {
  const QuantTensor& x = conv_ ? Windows(b) : batches_.at(b).features;
  return IntMatMul(delta, x, true, DotBound(x.cols(), codec_));
}

QuantTensor PlainBackend::LabelResidual(std::size_t b, const QuantTensor& pred) {
  const QuantTensor& y = batches_.at(b).labels;
  if (pred.shape != y.shape) Throw(ErrorCode::kShapeMismatch, "operand does not match the label matrix");
  if (pred.scale_power != y.scale_power) Throw(ErrorCode::kDomainError, "add/sub operands must share a scale power");
  QuantTensor r = y;
  const std::uint64_t bound = secure_matrix::ElementwiseBound(Function::kSub, codec_);
  for (std::size_t k = 0; k < r.data.size(); ++k) {
    r.data[k] -= pred.data[k];
    CheckBound(r.data[k], bound);
  }
  return r;
}

std::vector<std::int64_t> PlainBackend::LabelInnerProducts(std::size_t b, const QuantTensor& v) {
  const QuantTensor& y = batches_.at(b).labels;
  if (v.shape != y.shape) Throw(ErrorCode::kShapeMismatch, "operand does not match the label matrix");
  const std::uint64_t bound = DotBound(y.rows(), codec_);
  std::vector<std::int64_t> out(y.cols(), 0);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) out[j] += y.at(i, j) * v.at(i, j);
  for (auto x : out) CheckBound(x, bound);
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

void CheckTrainable(const nn::Network& net) {
  net.Validate();
  if (!net.layers.front().has_params())
    Throw(ErrorCode::kShapeMismatch, "the first layer must be dense or convolutional");
  const auto last = net.layers.back().kind;
  if (last != nn::LayerKind::kSoftmax && last != nn::LayerKind::kSigmoid)
    Throw(ErrorCode::kShapeMismatch, "the output layer must be softmax or sigmoid");
}

nn::Matrix FirstLayerProductMatrix(const nn::Network& net, const nn::Params& params,
                                   const FixedPointCodec& codec, Backend& backend, std::size_t b) {
  const nn::LayerSpec& first = net.layers.front();
  const QuantTensor wq = Quantize(params[0].w, {first.weight_rows(), first.weight_cols()}, codec, 1);
  const QuantTensor zq = backend.FirstLayerProduct(b, wq);
  nn::Matrix product = ToMatrix(zq, codec);
  if (first.kind == nn::LayerKind::kConv)
    product = nn::ConvProductToLayer(first.conv, product, backend.batch_size(b));
  return product;
}

IterationRecord Step(const nn::Network& net, nn::Params& params, const nn::Hyperparams& hp,
                     const FixedPointCodec& codec, Backend& backend, std::size_t b, const TrainOptions& options) {
  const std::size_t n = backend.batch_size(b);
  const std::size_t classes = net.output_dim();
  const double scale = codec.Scale(1);
  const nn::LayerSpec& first = net.layers.front();

  // Secure feed-forward.
  const nn::Matrix product = FirstLayerProductMatrix(net, params, codec, backend, b);
  const nn::Cache cache = nn::Forward(net, params, nn::Matrix{}, &product);
  const nn::Matrix& out = cache.acts.back();

  // Secure evaluation: Y - P per element, negated into the output gradient.
  const QuantTensor pq = Quantize(out.v, {classes, n}, codec, 1);
  const QuantTensor residual = backend.LabelResidual(b, pq);
  nn::Matrix grad(classes, n);
  for (std::size_t k = 0; k < grad.v.size(); ++k) grad.v[k] = -static_cast<double>(residual.data[k]) / scale;

  IterationRecord rec;
  rec.batch = b;
  const auto predicted = nn::Argmax(out);
  if (options.secure_loss) {
    QuantTensor probe;
    if (net.softmax_output()) {
      // -<y, log p>; log p is clipped to the codec range.
      const double floor = -static_cast<double>(codec.value_bound) / scale;
      std::vector<double> logp(out.v.size());
      for (std::size_t k = 0; k < logp.size(); ++k) logp[k] = std::max(floor, std::log(out.v[k]));
      probe = Quantize(logp, {classes, n}, codec, 1);
    } else {
      probe = pq;
    }
    const auto ip = backend.LabelInnerProducts(b, probe);
    QuantTensor hit;
    hit.shape = {classes, n};
    hit.scale_power = 0;
    hit.data.assign(classes * n, 0);
    for (std::size_t j = 0; j < n; ++j) hit.data[predicted[j] * n + j] = 1;
    const auto hits = backend.LabelInnerProducts(b, hit);
    double cost = 0.0, correct = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double yp = static_cast<double>(ip[j]) / (scale * scale);
      if (net.softmax_output()) {
        cost -= yp;
      } else {
        double sq = 0.0;
        for (std::size_t i = 0; i < classes; ++i) sq += out(i, j) * out(i, j);
        cost += 0.5 * (sq - 2.0 * yp + 1.0);
      }
      if (2 * hits[j] > static_cast<std::int64_t>(scale)) correct += 1.0;
    }
    rec.cost = cost / static_cast<double>(n);
    rec.batch_acc = correct / static_cast<double>(n);
  } else {
    // The residual plus the prediction is the label itself.
    double cost = 0.0, correct = 0.0;
    std::vector<double> p(classes), y(classes);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t label = 0;
      for (std::size_t i = 0; i < classes; ++i) {
        const std::int64_t yq = residual.data[i * n + j] + pq.data[i * n + j];
        y[i] = static_cast<double>(yq) / scale;
        if (y[i] > y[label]) label = i;
        p[i] = out(i, j);
      }
      if (net.softmax_output()) {
        for (auto& v : p) v = std::max(v, 1e-300);
        cost += nn::LossSoftmaxCe(p, y);
      } else {
        cost += nn::LossMse(p, y);
      }
      if (predicted[j] == label) correct += 1.0;
    }
    rec.cost = cost / static_cast<double>(n);
    rec.batch_acc = correct / static_cast<double>(n);
  }

  // Back-propagation; the first layer's weight gradient comes from the
  // encrypted inputs.
  nn::Backprop bp = nn::Backward(net, params, cache, grad);
  nn::Matrix delta = bp.first_delta;
  if (first.kind == nn::LayerKind::kConv) delta = nn::LayerToConvProduct(first.conv, delta);
  const QuantTensor dq = Quantize(delta.v, {delta.rows, delta.cols}, codec, 2);
  const QuantTensor gq = backend.FirstLayerGradient(b, dq);
  bp.grads[0].w = Dequantize(gq, codec);

  const double inv = 1.0 / static_cast<double>(n);
  for (auto& g : bp.grads) {
    for (auto& v : g.w) v *= inv;
    for (auto& v : g.b) v *= inv;
  }
  nn::SgdUpdate(params, bp.grads, hp);
  return rec;
}

}  // namespace

TrainResult Train(const nn::Network& net, nn::Params params, const nn::Hyperparams& hp,
                  const FixedPointCodec& codec, Backend& backend, const TrainOptions& options) {
  CheckTrainable(net);
  hp.Validate();
  codec.Validate();
  if (params.size() != net.layers.size()) Throw(ErrorCode::kShapeMismatch, "params do not match the network");
  TrainResult result;
  std::size_t iter = 0;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    for (std::size_t b = 0; b < backend.batch_count(); ++b) {
      if (hp.max_iters != 0 && iter >= hp.max_iters) break;
      const auto t0 = std::chrono::steady_clock::now();
      IterationRecord rec;
      try {
        rec = Step(net, params, hp, codec, backend, b, options);
      } catch (const Error& e) {
        Throw(e.code(), "iteration " + Str(iter) + " (epoch " + Str(epoch) + ", batch " + Str(b) + "): " + e.what());
      }
      rec.iter = iter;
      rec.epoch = epoch;
      rec.timing_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      result.log.push_back(rec);
      if (options.record_trajectory) result.trajectory.push_back(params);
      if (options.on_iteration) options.on_iteration(rec, params);
      ++iter;
    }
  }
  result.params = std::move(params);
  return result;
}

std::vector<std::size_t> Predict(const nn::Network& net, const nn::Params& params, const FixedPointCodec& codec,
                                 Backend& backend) {
  CheckTrainable(net);
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < backend.batch_count(); ++b) {
    const nn::Matrix product = FirstLayerProductMatrix(net, params, codec, backend, b);
    const nn::Cache cache = nn::Forward(net, params, nn::Matrix{}, &product);
    for (auto c : nn::Argmax(cache.acts.back())) out.push_back(c);
  }
  return out;
}

double Accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels) {
  if (predicted.size() != labels.size()) Throw(ErrorCode::kShapeMismatch, "prediction and label counts differ");
  if (predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace fenn::training
