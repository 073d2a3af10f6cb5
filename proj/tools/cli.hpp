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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fenn/error.hpp"

namespace fenn::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitUsage = 2,
  kExitCrypto = 3,
};

// Thrown for bad flag combinations after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int ExitCodeFor(ErrorCode code);

struct SetupOptions {
  std::string out_dir = ".";
  unsigned lambda = 256;
  std::size_t max_eta = 4096;
  std::vector<std::string> functions;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

struct EncryptOptions {
  std::string mpk;
  std::string images, labels, csv;
  std::size_t limit = 0;
  std::size_t classes = 10;
  std::size_t batch = 64;
  int scale_digits = 2;
  std::int64_t value_bound = 25500;
  std::string preset = "mlp";
  std::string fit_standardizer, standardizer;
  bool no_feature_elements = false;
  bool no_gradient_view = false;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct TrainOptions {
  std::string bundle, authority, mpk;
  std::string preset = "mlp";
  std::size_t hidden = 32;
  double lr = 0.1;
  std::size_t epochs = 1;
  std::size_t iters = 0;
  std::optional<std::size_t> batch;
  double init_gain = 1.0;
  double output_init_gain = 1.0;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  bool secure_loss = false;
  bool reference_check = false;
  std::string out;
  std::string log;
};

struct PredictOptions {
  std::string checkpoint, bundle, authority, out, labels;
  unsigned workers = 1;
  bool reference_check = false;
};

struct BenchOptions {
  std::vector<std::string> ops;
  std::vector<std::size_t> sizes{100, 500, 1000, 2000};
  std::vector<unsigned> workers{1, 4};
  unsigned lambda = 256;
  unsigned reps = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string gnuplot;
};

struct VerifyOptions {
  std::size_t trials = 100;
  std::size_t max_size = 8;
  unsigned lambda = 64;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  bool inject_fault = false;
};

int RunSetup(const SetupOptions& o);
int RunEncrypt(const EncryptOptions& o);
int RunTrain(const TrainOptions& o);
int RunPredict(const PredictOptions& o);
int RunBench(const BenchOptions& o);
int RunVerify(const VerifyOptions& o);

}  // namespace fenn::cli
