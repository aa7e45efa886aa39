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

#include <cmath>
#include <set>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"
#include "pgi/trainer/trainer.hpp"

namespace pgi {

std::string to_string(Profile profile) { return profile == Profile::desk ? "desk" : "full"; }

Profile parse_profile(const std::string& name) {
  if (name == "desk") return Profile::desk;
  if (name == "full") return Profile::full;
  throw ParameterError("unknown profile '" + name + "' (expected desk or full)");
}

std::string math_profile() {
#ifdef __FAST_MATH__
  return "fast";
#else
  return "fixed";
#endif
}

ExperimentConfig ExperimentConfig::preset(Profile profile, ModelFamily family) {
  ExperimentConfig c;
  c.profile = profile;
  c.family = family;
  if (profile == Profile::full) {
    c.resolution = 128;
    c.total_iterations = 1000000;
    c.stage_length_k = 100000;
    c.batch_size = 4;
    c.base_filters = 32;
    c.extractor = "";
  }
  c.weights = LossWeights::preset(family);
  // Family presets follow the defaults of the respective original releases.
  if (family == ModelFamily::free_form) c.learning_rate = c.d_learning_rate = 1e-4;
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigurationError("config field '" + field + "': " + why);
  };
  if (total_iterations <= 0) fail("total_iterations", "must be positive");
  if (stage_length_k <= 0) fail("stage_length_k", "must be positive");
  if (total_iterations % stage_length_k != 0)
    fail("total_iterations", "must be divisible by stage_length_k (" + std::to_string(total_iterations) + " % " +
                                 std::to_string(stage_length_k) + " != 0)");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0) fail("learning_rate", "must be finite and >= 0");
  if (!std::isfinite(d_learning_rate) || d_learning_rate < 0) fail("d_learning_rate", "must be finite and >= 0");
  if (!(start_fraction >= 0 && start_fraction <= 0.5)) fail("start_fraction", "must lie in [0, 0.5]");
  if (!(fixed_fraction >= 0 && fixed_fraction <= 0.5)) fail("fixed_fraction", "must lie in [0, 0.5]");
  if (halt_at < 0 || halt_at > total_iterations) fail("halt_at", "must lie in [0, total_iterations]");
  if (eval_every < 0) fail("eval_every", "must be >= 0");
  try {
    weights.validate();
    generator_config().validate();
    discriminator_config().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(e.what());
  }
}

CurriculumSchedule ExperimentConfig::schedule() const {
  if (setup == TrainingSetup::b) return CurriculumSchedule::growing(total_iterations, stage_length_k, start_fraction);
  return CurriculumSchedule::fixed(total_iterations, stage_length_k, fixed_fraction);
}

GeneratorConfig ExperimentConfig::generator_config() const {
  GeneratorConfig g;
  g.family = family;
  g.base_filters = base_filters;
  g.resolution = resolution;
  return g;
}

DiscriminatorConfig ExperimentConfig::discriminator_config() const {
  DiscriminatorConfig d;
  d.family = family;
  d.base_filters = base_filters;
  d.resolution = resolution;
  return d;
}

namespace {

const std::set<std::string> kPlumbing{"output_dir", "eval_every", "halt_at", "resume_from"};

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  return {{"profile", to_string(profile)},
          {"dataset", dataset},
          {"resolution", resolution},
          {"model", pgi::to_string(family)},
          {"setup", pgi::to_string(setup)},
          {"total_iterations", total_iterations},
          {"stage_length_k", stage_length_k},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"d_learning_rate", d_learning_rate},
          {"seed", seed},
          {"base_filters", base_filters},
          {"start_fraction", start_fraction},
          {"fixed_fraction", fixed_fraction},
          {"w_valid_l1", weights.w_valid_l1},
          {"w_hole_l1", weights.w_hole_l1},
          {"w_perceptual", weights.w_perceptual},
          {"w_adversarial", weights.w_adversarial},
          {"extractor", extractor},
          {"max_images", max_images},
          {"output_dir", output_dir},
          {"eval_every", eval_every},
          {"halt_at", halt_at},
          {"resume_from", resume_from}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigurationError("experiment config must be a JSON object");
  const Profile profile = parse_profile(j.value("profile", std::string("desk")));
  const ModelFamily family = parse_model_family(j.value("model", std::string("custom")));
  ExperimentConfig c = preset(profile, family);
  const std::set<std::string> known = [&] {
    std::set<std::string> k;
    const nlohmann::json defaults = c.to_json();
    for (const auto& [key, _] : defaults.items()) k.insert(key);
    return k;
  }();
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigurationError("unknown config key '" + key + "'");
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("dataset", c.dataset);
    get("resolution", c.resolution);
    if (j.contains("setup")) c.setup = parse_setup(j.at("setup").get<std::string>());
    get("total_iterations", c.total_iterations);
    get("stage_length_k", c.stage_length_k);
    get("batch_size", c.batch_size);
    get("learning_rate", c.learning_rate);
    get("d_learning_rate", c.d_learning_rate);
    get("seed", c.seed);
    get("base_filters", c.base_filters);
    get("start_fraction", c.start_fraction);
    get("fixed_fraction", c.fixed_fraction);
    get("w_valid_l1", c.weights.w_valid_l1);
    get("w_hole_l1", c.weights.w_hole_l1);
    get("w_perceptual", c.weights.w_perceptual);
    get("w_adversarial", c.weights.w_adversarial);
    get("extractor", c.extractor);
    get("max_images", c.max_images);
    get("output_dir", c.output_dir);
    get("eval_every", c.eval_every);
    get("halt_at", c.halt_at);
    get("resume_from", c.resume_from);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

std::uint64_t ExperimentConfig::hash() const {
  nlohmann::json j = to_json();
  for (const auto& k : kPlumbing) j.erase(k);
  return fnv1a64(j.dump());
}

}  // namespace pgi
