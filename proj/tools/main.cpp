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

#include <cstdio>
#include <exception>
#include <thread>

#include "CLI11.hpp"
#include "cli.hpp"

namespace {

unsigned DefaultWorkers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main(int argc, char** argv) {
  using namespace fenn::cli;
  CLI::App app{"Training and inference over functionally encrypted data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fenn 0.1.0");

  SetupOptions setup;
  auto* s = app.add_subcommand("setup", "Generate authority and public key files");
  s->add_option("--out", setup.out_dir, "Output directory")->capture_default_str();
  s->add_option("--lambda", setup.lambda, "Security parameter in bits")->capture_default_str()
      ->check(CLI::Range(16u, 4096u));
  s->add_option("--max-eta", setup.max_eta, "Longest vector the inner-product key covers")->capture_default_str()
      ->check(CLI::PositiveNumber);
  s->add_option("--functions", setup.functions, "Permitted functions (dot,add,sub,mul,div); default all")
      ->delimiter(',');
  s->add_option("--seed", setup.seed, "Deterministic randomness");
  s->add_flag("--force", setup.force, "Overwrite existing key files");

  EncryptOptions enc;
  enc.workers = DefaultWorkers();
  auto* e = app.add_subcommand("encrypt", "Quantize and encrypt a labelled dataset");
  e->add_option("--mpk", enc.mpk, "Public key file")->required();
  auto* img = e->add_option("--images", enc.images, "IDX image file");
  auto* lbl = e->add_option("--labels", enc.labels, "IDX label file");
  auto* csv = e->add_option("--csv", enc.csv, "CSV file, label in the last column");
  img->needs(lbl);
  lbl->needs(img);
  csv->excludes(img)->excludes(lbl);
  e->add_option("--limit", enc.limit, "Use only the first N samples (0 = all)");
  e->add_option("--classes", enc.classes, "Number of classes")->capture_default_str()->check(CLI::Range(2, 1000));
  e->add_option("--batch", enc.batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--scale-digits", enc.scale_digits, "Decimal digits per fixed-point scale")->capture_default_str()
      ->check(CLI::Range(0, 9));
  e->add_option("--value-bound", enc.value_bound, "Largest plaintext magnitude")->capture_default_str()
      ->check(CLI::PositiveNumber);
  e->add_option("--preset", enc.preset, "Model the bundle is for (mlp or lenet5)")->capture_default_str()
      ->check(CLI::IsMember({"mlp", "lenet5"}));
  auto* fit = e->add_option("--fit-standardizer", enc.fit_standardizer,
                            "Standardize features and write the statistics here (client-only file)");
  e->add_option("--standardizer", enc.standardizer, "Standardize with previously written statistics")
      ->excludes(fit);
  e->add_flag("--no-feature-elements", enc.no_feature_elements, "Skip the element-wise view of the features");
  e->add_flag("--no-gradient-view", enc.no_gradient_view,
              "Skip the row view used for weight gradients (prediction-only bundles)");
  e->add_option("--workers", enc.workers, "Encryption threads")->check(CLI::PositiveNumber);
  e->add_option("--seed", enc.seed, "Deterministic randomness");
  e->add_option("--out", enc.out, "Bundle file")->required();

  TrainOptions train;
  train.workers = DefaultWorkers();
  auto* t = app.add_subcommand("train", "Train on an encrypted bundle");
  t->add_option("--bundle", train.bundle, "Bundle file")->required();
  t->add_option("--authority", train.authority, "Authority key file (serves function keys)")->required();
  t->add_option("--mpk", train.mpk, "Public key file; checked against the authority");
  t->add_option("--preset", train.preset, "mlp or lenet5")->capture_default_str()
      ->check(CLI::IsMember({"mlp", "lenet5"}));
  t->add_option("--hidden", train.hidden, "Hidden width of the mlp preset")->capture_default_str()
      ->check(CLI::PositiveNumber);
  t->add_option("--lr", train.lr, "Learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  t->add_option("--epochs", train.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--iters", train.iters, "Stop after N iterations (0 = no limit)");
  t->add_option("--batch", train.batch, "Expected batch size; must match the bundle");
  t->add_option("--init-gain", train.init_gain, "Hidden-layer init multiplier")->capture_default_str();
  t->add_option("--output-init-gain", train.output_init_gain, "Output-layer init multiplier")
      ->capture_default_str();
  t->add_option("--workers", train.workers, "Decryption threads")->check(CLI::PositiveNumber);
  t->add_option("--seed", train.seed, "Parameter init seed")->capture_default_str();
  t->add_flag("--secure-loss", train.secure_loss, "Compute cost and accuracy through inner-product keys");
  t->add_flag("--reference-check", train.reference_check,
              "Rerun on the decrypted plaintext and require an identical trajectory");
  t->add_option("--out", train.out, "Checkpoint file")->required();
  t->add_option("--log", train.log, "Run log (JSON lines); default <checkpoint>.log.jsonl");

  PredictOptions pred;
  pred.workers = DefaultWorkers();
  auto* p = app.add_subcommand("predict", "Classify an encrypted bundle");
  p->add_option("--checkpoint", pred.checkpoint, "Checkpoint file")->required();
  p->add_option("--bundle", pred.bundle, "Bundle file")->required();
  p->add_option("--authority", pred.authority, "Authority key file")->required();
  p->add_option("--out", pred.out, "Write one class id per line here instead of stdout");
  p->add_option("--labels", pred.labels, "IDX label file to score against");
  p->add_option("--workers", pred.workers, "Decryption threads")->check(CLI::PositiveNumber);
  p->add_flag("--reference-check", pred.reference_check, "Compare with the plaintext path");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Time encryption, key derivation and decryption");
  b->add_option("--ops", bench.ops, "enc,keyderive,dec-add,dec-mul,dec-dot (default all)")->delimiter(',');
  b->add_option("--sizes", bench.sizes, "Element counts")->delimiter(',')->capture_default_str();
  b->add_option("--workers", bench.workers, "Worker counts")->delimiter(',')->capture_default_str()
      ->check(CLI::PositiveNumber);
  b->add_option("--lambda", bench.lambda, "Security parameter in bits")->capture_default_str()
      ->check(CLI::Range(16u, 4096u));
  b->add_option("--reps", bench.reps, "Best of N runs")->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "Deterministic randomness");
  b->add_option("--out", bench.out, "CSV file (default stdout)");
  b->add_option("--gnuplot", bench.gnuplot, "Also write a gnuplot script for the CSV");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Check every secure primitive against plaintext arithmetic");
  v->add_option("--trials", verify.trials, "Trials per suite")->capture_default_str()->check(CLI::PositiveNumber);
  v->add_option("--max-size", verify.max_size, "Largest vector, matrix or image side")->capture_default_str()
      ->check(CLI::Range(2, 64));
  v->add_option("--lambda", verify.lambda, "Security parameter in bits")->capture_default_str()
      ->check(CLI::Range(16u, 4096u));
  v->add_option("--workers", verify.workers, "Decryption threads")->check(CLI::PositiveNumber);
  v->add_option("--seed", verify.seed, "Seed")->capture_default_str();
  v->add_flag("--inject-fault", verify.inject_fault, "Corrupt one ciphertext per suite; verify must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return RunSetup(setup);
    if (*e) return RunEncrypt(enc);
    if (*t) return RunTrain(train);
    if (*p) return RunPredict(pred);
    if (*b) return RunBench(bench);
    if (*v) return RunVerify(verify);
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const fenn::Error& err) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(fenn::ErrorCodeName(err.code())).c_str(), err.what());
    return ExitCodeFor(err.code());
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  }
  return kExitUsage;
}
