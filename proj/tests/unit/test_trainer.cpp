/* Copyright 2026 The pgi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"
#include "pgi/data/toy_corpus.hpp"
#include "pgi/nets/archive.hpp"
#include "pgi/trainer/trainer.hpp"
#include "support.hpp"

namespace pgi {
namespace {

ExperimentConfig tiny_config(const std::filesystem::path& dataset, const std::filesystem::path& out) {
  auto c = ExperimentConfig::preset(Profile::desk);
  c.dataset = dataset.string();
  c.output_dir = out.string();
  c.resolution = 32;
  c.batch_size = 2;
  c.total_iterations = 40;
  c.stage_length_k = 10;
  return c;
}

Tensor<float> toy_images(int n, std::uint64_t key) {
  Tensor<float> t({n, 3, 32, 32});
  for (int i = 0; i < n; ++i) image_to_tensor(render_toy_image(i % 4, 32, key + i), 32, t, i);
  return t;
}

std::vector<Mask> center_masks(int n, double f) {
  return std::vector<Mask>(static_cast<std::size_t>(n), mask_for_fraction(f, 32, ModelFamily::custom, 0));
}

template <typename P>
void expect_params_equal(const P& a, const P& b) {
  const auto sa = a.snapshot(), sb = b.snapshot();
  ASSERT_EQ(sa.size(), sb.size());
  for (const auto& [name, t] : sa) EXPECT_TRUE(t == sb.at(name)) << name;
}

std::vector<std::string> lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> column(const std::vector<std::string>& csv, int col) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < csv.size(); ++i) {
    std::stringstream ss(csv[i]);
    std::string field;
    for (int c = 0; c <= col; ++c) std::getline(ss, field, ',');
    out.push_back(field);
  }
  return out;
}

TEST(Config, PresetsMatchProfiles) {
  const auto d = ExperimentConfig::preset(Profile::desk);
  EXPECT_EQ(d.resolution, 64);
  EXPECT_EQ(d.total_iterations, 10000);
  EXPECT_EQ(d.stage_length_k, 1000);
  EXPECT_EQ(d.batch_size, 8);
  const auto f = ExperimentConfig::preset(Profile::full);
  EXPECT_EQ(f.total_iterations, 1000000);
  EXPECT_EQ(f.stage_length_k, 100000);
  EXPECT_EQ(f.batch_size, 4);
  EXPECT_EQ(f.learning_rate, 2e-4);
  EXPECT_EQ(ExperimentConfig::preset(Profile::desk, ModelFamily::context_encoder).weights.w_hole_l1, 0.999);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  auto c = ExperimentConfig::preset(Profile::desk, ModelFamily::free_form);
  c.setup = TrainingSetup::d;
  c.seed = 77;
  c.dataset = "/data/x";
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
  EXPECT_EQ(back.hash(), c.hash());
  auto j = c.to_json();
  j["momentum"] = 0.9;
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigurationError);
}

TEST(Config, HashIgnoresPlumbing) {
  auto a = ExperimentConfig::preset(Profile::desk), b = a;
  b.output_dir = "elsewhere";
  b.halt_at = 5;
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 2;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, ValidationErrors) {
  auto c = ExperimentConfig::preset(Profile::desk);
  c.total_iterations = 1500;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = ExperimentConfig::preset(Profile::desk);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = ExperimentConfig::preset(Profile::desk);
  c.start_fraction = 0.6;
  EXPECT_THROW(c.validate(), ConfigurationError);
}

TEST(Config, SchedulePerSetup) {
  auto c = ExperimentConfig::preset(Profile::desk);
  c.total_iterations = 2000;
  c.stage_length_k = 200;
  c.setup = TrainingSetup::b;
  EXPECT_NEAR(mask_fraction_for_stage(c.schedule(), 0), 0.1, 1e-12);
  EXPECT_EQ(mask_fraction_for_stage(c.schedule(), 9), 0.5);
  for (auto s : {TrainingSetup::a, TrainingSetup::c, TrainingSetup::d}) {
    c.setup = s;
    EXPECT_EQ(mask_fraction_for_stage(c.schedule(), 0), 0.5);
  }
}

class Step : public ::testing::Test {
 protected:
  ExperimentConfig config() const {
    auto c = ExperimentConfig::preset(Profile::desk);
    c.resolution = 32;
    c.batch_size = 2;
    return c;
  }
  Tensor<float> images_ = toy_images(2, 5);
  std::vector<Mask> masks_ = center_masks(2, 0.25);
};

TEST_F(Step, ZeroAdversarialWeightEqualsReconstructionOnly) {
  auto a = make_train_state(config()), b = make_train_state(config());
  auto w = config().weights;
  w.w_adversarial = 0;
  training_step(a, images_, masks_, w);
  training_step(b, images_, masks_, config().weights, StepOptions{false});
  expect_params_equal(a.generator->params(), b.generator->params());
  expect_params_equal(a.discriminator->params(), b.discriminator->params());
}

TEST_F(Step, SmallStepReducesReconstructionLoss) {
  auto c = config();
  c.learning_rate = 1e-5;
  auto s = make_train_state(c);
  const auto one = images_.reshaped(images_.shape());
  const Tensor<float> single = slice_batch(one, 0, 1);
  const std::vector<Mask> m1{masks_[0]};
  auto recon = [&](const LossBreakdown& br) {
    double r = 0;
    for (const auto& t : br.terms)
      if (t.name != "adversarial") r += t.weight * t.value;
    return r;
  };
  const double before = recon(training_step(s, single, m1, c.weights, StepOptions{false}));
  const double after = recon(training_step(s, single, m1, c.weights, StepOptions{false}));
  EXPECT_LT(after, before);
}

TEST_F(Step, DiscriminatorFrozenAtZeroLearningRate) {
  auto c = config();
  c.d_learning_rate = 0;
  auto s = make_train_state(c);
  const auto before = s.discriminator->params().snapshot();
  const auto g_before = s.generator->params().snapshot();
  training_step(s, images_, masks_, c.weights);
  for (const auto& [name, t] : s.discriminator->params().snapshot()) EXPECT_TRUE(t == before.at(name)) << name;
  EXPECT_FALSE(s.generator->params().snapshot() == g_before);
  EXPECT_EQ(s.iteration, 1);
}

TEST_F(Step, BreakdownTotalIsWeightedSum) {
  auto s = make_train_state(config());
  const auto br = training_step(s, images_, masks_, config().weights);
  EXPECT_NEAR(br.total, br.weighted_sum(), 1e-12 * std::abs(br.total));
  EXPECT_GT(br.term("hole_l1"), 0.0);
}

TEST_F(Step, CheckpointRoundTripIsBitExact) {
  test::TempDir dir("ckpt");
  auto a = make_train_state(config());
  training_step(a, images_, masks_, config().weights);
  save_checkpoint(a, dir / "s.pgi");
  auto b = load_checkpoint(dir / "s.pgi");
  EXPECT_EQ(b.iteration, 1);
  const auto other = toy_images(2, 11);
  const auto m2 = center_masks(2, 0.4);
  const auto ba = training_step(a, other, m2, config().weights);
  const auto bb = training_step(b, other, m2, config().weights);
  EXPECT_EQ(ba.total, bb.total);
  EXPECT_EQ(ba.discriminator, bb.discriminator);
  expect_params_equal(a.generator->params(), b.generator->params());
  expect_params_equal(a.discriminator->params(), b.discriminator->params());
}

TEST_F(Step, CheckpointRejectsMismatchAndCorruption) {
  test::TempDir dir("ckpt");
  auto a = make_train_state(config());
  save_checkpoint(a, dir / "s.pgi");
  auto other = config();
  other.seed = 9;
  EXPECT_THROW(load_checkpoint(dir / "s.pgi", other), ConfigurationError);
  EXPECT_NO_THROW(load_checkpoint(dir / "s.pgi", config()));
  std::string bytes = test::slurp(dir / "s.pgi");
  bytes[bytes.size() / 2] ^= 0x5a;
  std::ofstream(dir / "bad.pgi", std::ios::binary) << bytes;
  EXPECT_THROW(load_checkpoint(dir / "bad.pgi"), IntegrityError);
  EXPECT_THROW(load_checkpoint(dir / "missing.pgi"), ConfigurationError);
}

TEST_F(Step, NonFiniteInputAborts) {
  auto s = make_train_state(config());
  Tensor<float> bad = images_;
  bad[5] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(training_step(s, bad, masks_, config().weights), NumericalError);
}

class Run : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new test::TempDir("runcorpus");
    ToyCorpusSpec spec;
    spec.train_count = 12;
    spec.test_count = 4;
    spec.resolution = 32;
    generate_toy_corpus(corpus_->path(), spec);
  }
  static void TearDownTestSuite() { delete corpus_; }
  static inline test::TempDir* corpus_ = nullptr;
};

TEST_F(Run, DeterministicLogsAndStageCheckpoints) {
  test::TempDir a("runa"), b("runb");
  const auto ca = tiny_config(corpus_->path(), a.path()), cb = tiny_config(corpus_->path(), b.path());
  const auto sa = run_training(ca);
  run_training(cb);
  EXPECT_EQ(sa.final_iteration, 40);
  EXPECT_EQ(sa.stage_events, 4);
  const auto log = lines(a / "loss_log.csv");
  ASSERT_EQ(log.size(), 41u);
  EXPECT_EQ(log[0], kLossLogHeader);
  EXPECT_EQ(test::slurp(a / "loss_log.csv"), test::slurp(b / "loss_log.csv"));
  EXPECT_EQ(lines(a / "stage_events.jsonl").size(), 4u);
  const auto schedule = ca.schedule();
  for (long long it : {10LL, 20LL, 30LL}) {
    const auto ar = read_archive(a.path() / "checkpoints" / ("ckpt_" + std::to_string(it) + ".pgi"));
    EXPECT_EQ(ar.manifest.at("iteration").get<long long>(), it);
    EXPECT_EQ(ar.manifest.at("stage").get<int>(), stage_for_iteration(schedule, it));
  }
  EXPECT_TRUE(std::filesystem::exists(a / "checkpoints/final.pgi"));
  EXPECT_EQ(load_checkpoint(a / "checkpoints/final.pgi").iteration, 40);
}

TEST_F(Run, ResumeMatchesUninterruptedRun) {
  test::TempDir full("full"), part("part");
  run_training(tiny_config(corpus_->path(), full.path()));
  auto c = tiny_config(corpus_->path(), part.path());
  c.halt_at = 20;
  const auto halted = run_training(c);
  EXPECT_EQ(halted.final_iteration, 20);
  EXPECT_FALSE(std::filesystem::exists(part / "checkpoints/final.pgi"));
  c.halt_at = 0;
  c.resume_from = (part / "checkpoints/ckpt_20.pgi").string();
  run_training(c);
  EXPECT_EQ(test::slurp(full / "loss_log.csv"), test::slurp(part / "loss_log.csv"));
  EXPECT_EQ(test::slurp(full / "stage_events.jsonl"), test::slurp(part / "stage_events.jsonl"));
}

TEST_F(Run, SetupsShareImageOrder) {
  test::TempDir a("seta"), b("setb");
  auto ca = tiny_config(corpus_->path(), a.path()), cb = tiny_config(corpus_->path(), b.path());
  ca.setup = TrainingSetup::a;
  cb.setup = TrainingSetup::b;
  run_training(ca);
  run_training(cb);
  const auto la = lines(a / "loss_log.csv"), lb = lines(b / "loss_log.csv");
  EXPECT_EQ(column(la, 12), column(lb, 12));
  EXPECT_NE(column(la, 11), column(lb, 11));
}

TEST_F(Run, DivergenceDumpsCheckpoint) {
  test::TempDir out("nan");
  auto c = tiny_config(corpus_->path(), out.path());
  c.learning_rate = 1e30;
  c.d_learning_rate = 1e30;
  EXPECT_THROW(run_training(c), NumericalError);
  EXPECT_TRUE(std::filesystem::exists(out / "checkpoints/nan_abort.pgi"));
}

TEST_F(Run, EmptyDatasetRejected) {
  test::TempDir empty("empty"), out("out");
  EXPECT_THROW(run_training(tiny_config(empty.path(), out.path())), ConfigurationError);
}

}  // namespace
}  // namespace pgi
