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

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "cli.hpp"
#include "fenn/training.hpp"
#include "fenn/febo.hpp"
#include "fenn/feip.hpp"
#include "fenn/secure_conv.hpp"
#include "fenn/secure_matrix.hpp"

namespace fenn::cli {
namespace {

std::int64_t Uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.NextU64() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::vector<std::int64_t> Vec(Rng& rng, std::size_t n, std::int64_t lo = -100, std::int64_t hi = 100) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = Uniform(rng, lo, hi);
  return v;
}

QuantTensor Mat(Rng& rng, std::size_t rows, std::size_t cols) {
  return QuantTensor{{rows, cols}, Vec(rng, rows * cols), 1};
}

void Flip(GroupElement& e) {
  mpz_class v = e.value();
  v ^= 1;
  e = GroupElement(v);
}

struct Suite {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;

  // A trial fails on a wrong answer or on any library error.
  void Run(const std::function<bool()>& trial) {
    ++checks;
    try {
      failures += !trial();
    } catch (const Error&) {
      ++failures;
    }
  }
};

}  // namespace

int RunVerify(const VerifyOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(o.seed);
  const std::size_t n = o.max_size;
  const std::size_t max_eta = std::max<std::size_t>(n * n, 2 * 9);
  auto group = Group::Create(GroupGen(o.lambda, rng));
  auto state = training::AuthoritySetup(group, max_eta, rng);
  const auto feip_msk = state.feip_msk;
  const auto febo_msk = state.febo_msk;
  training::Authority authority(state, FunctionSet::All());
  const auto& mpk = authority.public_keys();
  const FixedPointCodec codec;
  const bool fault = o.inject_fault;

  Suite feip_suite{"feip"};
  for (std::size_t t = 0; t < o.trials; ++t) {
    feip_suite.Run([&] {
      const auto eta = static_cast<std::size_t>(Uniform(rng, 1, static_cast<std::int64_t>(n * n)));
      const auto x = Vec(rng, eta), y = Vec(rng, eta);
      std::int64_t expect = 0;
      for (std::size_t i = 0; i < eta; ++i) expect += x[i] * y[i];
      const auto pk = mpk.feip.Prefix(eta);
      auto ct = feip::Encrypt(pk, x, rng);
      if (fault && t == 0) Flip(ct.ct[0]);
      const auto fk = feip::KeyDerive(feip_msk.Prefix(eta), y);
      return feip::Decrypt(pk, ct, fk, y, eta * 100 * 100) == expect;
    });
  }

  Suite febo_suite{"febo"};
  for (std::size_t t = 0; t < o.trials; ++t) {
    for (auto op : {febo::Op::kAdd, febo::Op::kSub, febo::Op::kMul, febo::Op::kDiv}) {
      febo_suite.Run([&] {
        std::int64_t y = Uniform(rng, -100, 100);
        std::int64_t x = Uniform(rng, -10000, 10000);
        if (op == febo::Op::kDiv) {
          if (y == 0) y = 7;
          x = Uniform(rng, -100, 100) * y;
        }
        const std::int64_t expect = op == febo::Op::kAdd   ? x + y
                                    : op == febo::Op::kSub ? x - y
                                    : op == febo::Op::kMul ? x * y
                                                           : x / y;
        auto ct = febo::Encrypt(mpk.febo, x, rng);
        const auto fk = febo::KeyDerive(febo_msk, ct.cmt, op, y);
        if (fault && t == 0 && op == febo::Op::kAdd) Flip(ct.ct);
        return febo::Decrypt(mpk.febo, fk, ct, op, y, 1000000) == expect;
      });
    }
  }

  Suite matrix_suite{"secure_matrix"};
  const Function fns[] = {Function::kDotProduct, Function::kAdd, Function::kSub, Function::kMul, Function::kDiv};
  for (std::size_t t = 0; t < o.trials; ++t) {
    const Function f = fns[t % 5];
    matrix_suite.Run([&] {
      const auto rows = static_cast<std::size_t>(Uniform(rng, 1, static_cast<std::int64_t>(n)));
      const auto cols = static_cast<std::size_t>(Uniform(rng, 1, static_cast<std::int64_t>(n)));
      const bool dot = f == Function::kDotProduct;
      auto x = Mat(rng, rows, cols);
      QuantTensor y = dot ? Mat(rng, static_cast<std::size_t>(Uniform(rng, 1, static_cast<std::int64_t>(n))), rows)
                          : Mat(rng, rows, cols);
      if (f == Function::kDiv) {
        for (std::size_t k = 0; k < x.data.size(); ++k) {
          if (y.data[k] == 0) y.data[k] = 3;
          x.data[k] = Uniform(rng, -50, 50) * y.data[k];
        }
      }
      auto enc = secure_matrix::PreProcessEncryption(x, mpk, rng, {.columns = dot, .elements = !dot});
      if (fault && t == 0) Flip(dot ? enc.col_cts[0].ct[0] : enc.elem_cts[0].ct);
      const auto keys = secure_matrix::PreProcessKeyDerive(y, f, FunctionSet::All(), authority, &enc);
      const auto z = secure_matrix::SecureComputation(enc, f, keys, y, mpk, codec, o.workers);
      if (dot) {
        for (std::size_t i = 0; i < y.rows(); ++i)
          for (std::size_t j = 0; j < cols; ++j) {
            std::int64_t acc = 0;
            for (std::size_t k = 0; k < rows; ++k) acc += y.at(i, k) * x.at(k, j);
            if (z.at(i, j) != acc) return false;
          }
        return true;
      }
      for (std::size_t k = 0; k < x.data.size(); ++k) {
        const std::int64_t a = x.data[k], b = y.data[k];
        const std::int64_t expect = f == Function::kAdd   ? a + b
                                    : f == Function::kSub ? a - b
                                    : f == Function::kMul ? a * b
                                                          : a / b;
        if (z.data[k] != expect) return false;
      }
      return true;
    });
  }

  Suite conv_suite{"secure_conv"};
  for (std::size_t t = 0; t < o.trials; ++t) {
    conv_suite.Run([&] {
      secure_conv::ConvSpec s;
      for (;;) {
        s.height = static_cast<std::size_t>(Uniform(rng, 3, static_cast<std::int64_t>(n) + 2));
        s.width = static_cast<std::size_t>(Uniform(rng, 3, static_cast<std::int64_t>(n) + 2));
        s.channels = static_cast<std::size_t>(Uniform(rng, 1, 2));
        s.filter = static_cast<std::size_t>(Uniform(rng, 1, 3));
        s.padding = static_cast<std::size_t>(Uniform(rng, 0, 1));
        s.stride = static_cast<std::size_t>(Uniform(rng, 1, 2));
        if ((s.height + 2 * s.padding - s.filter) % s.stride == 0 &&
            (s.width + 2 * s.padding - s.filter) % s.stride == 0)
          break;
      }
      const QuantTensor img{{s.height, s.width, s.channels}, Vec(rng, s.height * s.width * s.channels), 1};
      const QuantTensor kernel{{s.filter, s.filter, s.channels}, Vec(rng, s.window_size()), 1};
      auto windows = secure_conv::PreProcessEncryption(img, s, mpk.feip, rng, o.workers);
      if (fault && t == 0) Flip(windows.windows[0].ct[0]);
      const auto fk = secure_conv::PreProcessKeyDerive(kernel, s, FunctionSet::All(), authority);
      const auto z = secure_conv::SecureConvolution(windows, fk, kernel, mpk.feip, codec, o.workers);
      return z == secure_conv::PlainConvolution(img, kernel, s);
    });
  }

  bool ok = true;
  for (const auto* suite : {&feip_suite, &febo_suite, &matrix_suite, &conv_suite}) {
    std::printf("%-14s %5zu checks  %5zu failures  %s\n", suite->name.c_str(), suite->checks, suite->failures,
                suite->failures == 0 ? "ok" : "FAILED");
    ok = ok && suite->failures == 0;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s in %.2f s (lambda %u%s)\n", ok ? "all suites passed" : "verification FAILED", secs, o.lambda,
              fault ? ", fault injected" : "");
  return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace fenn::cli
