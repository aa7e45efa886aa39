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

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "pgi/losses/losses.hpp"
#include "pgi/nets/discriminator.hpp"
#include "pgi/nets/generator.hpp"

namespace pgi {

enum class Profile { desk, full };

std::string to_string(Profile profile);
Profile parse_profile(const std::string& name);

/// "fixed" unless the build enables fast-math.
std::string math_profile();

struct ExperimentConfig {
  Profile profile = Profile::desk;
  std::string dataset;
  int resolution = 64;
  ModelFamily family = ModelFamily::custom;
  TrainingSetup setup = TrainingSetup::b;
  long long total_iterations = 10000;
  long long stage_length_k = 1000;
  int batch_size = 8;
  double learning_rate = 2e-4;
  double d_learning_rate = 2e-4;
  std::uint64_t seed = 1;
  int base_filters = 8;
  double start_fraction = 0.1;
  double fixed_fraction = 0.5;
  LossWeights weights;
  /// "random" selects the frozen random-conv extractor; anything else is an archive path.
  std::string extractor = "random";
  std::size_t max_images = 0;

  // Run plumbing; not part of the configuration hash.
  std::string output_dir = "runs/default";
  long long eval_every = 0;
  long long halt_at = 0;
  std::string resume_from;

  /// Profile defaults with family-specific learning rates and loss weights.
  static ExperimentConfig preset(Profile profile, ModelFamily family = ModelFamily::custom);

  void validate() const;
  CurriculumSchedule schedule() const;
  GeneratorConfig generator_config() const;
  DiscriminatorConfig discriminator_config() const;

  nlohmann::json to_json() const;
  /// Rejects unknown keys; missing keys keep the preset of the stored profile.
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// FNV-1a of the canonical JSON without the plumbing fields.
  std::uint64_t hash() const;
};

struct TrainState {
  ExperimentConfig config;
  std::unique_ptr<Generator<float>> generator;
  std::unique_ptr<Discriminator<float>> discriminator;
  std::unique_ptr<Adam<float>> g_optimizer;
  std::unique_ptr<Adam<float>> d_optimizer;
  std::shared_ptr<const FeatureExtractor<float>> extractor;
  long long iteration = 0;
  std::deque<double> loss_window;
};

inline constexpr std::size_t kLossWindow = 100;

/// Fresh state: networks initialized from the seed, optimizers empty.
TrainState make_train_state(const ExperimentConfig& config);

struct StepOptions {
  /// When false the adversarial term is left out of the generator objective.
  bool adversarial_term = true;
};

/// One discriminator update on (ground truth, detached composed output),
/// then one generator update. Increments state.iteration.
/// Throws NumericalError on non-finite losses or gradients.
LossBreakdown training_step(TrainState& state, const Tensor<float>& images, std::span<const Mask> masks,
                            const LossWeights& weights, const StepOptions& options = {});

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);
/// Also rejects checkpoints whose configuration hash differs from `expected`.
TrainState load_checkpoint(const std::filesystem::path& path, const ExperimentConfig& expected);

struct LoadedGenerator {
  ExperimentConfig config;
  std::unique_ptr<Generator<float>> generator;
};
LoadedGenerator load_generator(const std::filesystem::path& checkpoint);

struct RunSummary {
  long long final_iteration = 0;
  std::filesystem::path last_checkpoint;
  int stage_events = 0;
};

/// Full training loop. Writes under config.output_dir:
///   loss_log.csv, stage_events.jsonl, run_meta.json, eval_log.csv (when
///   eval_every > 0) and checkpoints/ckpt_<iteration>.pgi + final.pgi.
RunSummary run_training(const ExperimentConfig& config);

inline constexpr const char* kLossLogHeader =
    "iteration,setup,stage,mask_fraction,w_adversarial,d_loss,valid_l1,hole_l1,perceptual,adversarial,total,mask_hash,batch_hash";

}  // namespace pgi
