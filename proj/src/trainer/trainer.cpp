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

#include "pgi/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"
#include "pgi/data/dataset.hpp"
#include "pgi/eval/metrics.hpp"
#include "pgi/nets/archive.hpp"

namespace pgi {

namespace {

using V = ag::Var<float>;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

V d_adversarial(ModelFamily f, std::span<const V> real, std::span<const V> fake) {
  switch (f) {
    case ModelFamily::custom: return lsgan_d_loss(real, fake);
    case ModelFamily::free_form: return hinge_d_loss(real, fake);
    case ModelFamily::context_encoder: return bce_d_loss(real, fake);
  }
  throw ParameterError("unknown model family");
}

V g_adversarial(ModelFamily f, std::span<const V> fake) {
  switch (f) {
    case ModelFamily::custom: return lsgan_g_loss(fake);
    case ModelFamily::free_form: return hinge_g_loss(fake);
    case ModelFamily::context_encoder: return bce_g_loss(fake);
  }
  throw ParameterError("unknown model family");
}

void require_finite(double v, const char* what, long long iteration) {
  if (!std::isfinite(v))
    throw NumericalError(std::string(what) + " is non-finite at iteration " + std::to_string(iteration));
}

std::uint64_t batch_mask_hash(std::span<const Mask> masks) {
  std::vector<std::uint8_t> bytes;
  for (const auto& m : masks) {
    const std::uint64_t f = m.fingerprint();
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(f >> (8 * b)));
  }
  return fnv1a64(bytes);
}

constexpr const char* kGen = "generator/";
constexpr const char* kDisc = "discriminator/";

template <typename Map>
void put_prefixed(std::map<std::string, Tensor<float>>& out, const char* prefix, const Map& m) {
  for (const auto& [name, t] : m) out.emplace(prefix + name, t);
}

std::map<std::string, Tensor<float>> take_prefixed(const std::map<std::string, Tensor<float>>& all, const char* prefix,
                                                   bool moments) {
  std::map<std::string, Tensor<float>> out;
  const std::string p = prefix;
  for (const auto& [name, t] : all) {
    if (name.rfind(p, 0) != 0) continue;
    const std::string rest = name.substr(p.size());
    const bool is_moment = rest.ends_with(".adam_m") || rest.ends_with(".adam_v");
    if (is_moment == moments) out.emplace(rest, t);
  }
  return out;
}

// Images for batch positions it·B … it·B+B−1 of the epoch-ordered stream.
class ImageSource {
 public:
  static constexpr std::size_t kCacheLimit = 4096;

  ImageSource(DatasetManifest manifest, int resolution, std::uint64_t seed)
      : manifest_(std::move(manifest)), resolution_(resolution), seed_(seed) {
    if (manifest_.size() <= kCacheLimit) {
      std::vector<std::size_t> all(manifest_.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      cache_ = load_batch(manifest_, all, resolution_);
    }
  }

  std::vector<std::size_t> indices(long long iteration, int batch_size) {
    const std::size_t n = manifest_.size();
    std::vector<std::size_t> idx;
    for (int i = 0; i < batch_size; ++i) {
      const auto p = static_cast<std::uint64_t>(iteration) * static_cast<std::uint64_t>(batch_size) +
                     static_cast<std::uint64_t>(i);
      idx.push_back(order(p / n)[p % n]);
    }
    return idx;
  }

  Tensor<float> batch(std::span<const std::size_t> idx) {
    if (cache_.size() == 0) return load_batch(manifest_, idx, resolution_);
    const std::size_t per = static_cast<std::size_t>(3) * resolution_ * resolution_;
    Tensor<float> out({static_cast<int>(idx.size()), 3, resolution_, resolution_});
    for (std::size_t i = 0; i < idx.size(); ++i)
      std::copy_n(cache_.ptr() + idx[i] * per, per, out.ptr() + i * per);
    return out;
  }

  // FNV over the content checksums of the selected images, in batch order.
  std::uint64_t batch_hash(std::span<const std::size_t> idx) const {
    std::vector<std::uint8_t> bytes;
    for (std::size_t i : idx) {
      const std::uint64_t c = manifest_.records[i].checksum;
      for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(c >> (8 * b)));
    }
    return fnv1a64(bytes);
  }

  const DatasetManifest& manifest() const { return manifest_; }

 private:
  const std::vector<std::size_t>& order(std::uint64_t epoch) {
    if (epoch != epoch_ || perm_.empty()) {
      perm_ = epoch_order(seed_, epoch, manifest_.size());
      epoch_ = epoch;
    }
    return perm_;
  }

  DatasetManifest manifest_;
  int resolution_;
  std::uint64_t seed_;
  Tensor<float> cache_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> perm_;
};

// Keeps the header and every row whose leading integer field is below
// `iteration`, so a resumed run continues the log of the interrupted one.
void truncate_log(const std::filesystem::path& path, long long iteration, bool has_header,
                  const std::string& key = "") {
  std::ifstream in(path);
  if (!in) return;
  std::vector<std::string> keep;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && has_header) {
      keep.push_back(line);
      first = false;
      continue;
    }
    first = false;
    long long it = -1;
    if (key.empty()) {
      it = std::atoll(line.c_str());
    } else {
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_object() && j.contains(key)) it = j.at(key).get<long long>();
    }
    if (it >= 0 && it < iteration) keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

}  // namespace

TrainState make_train_state(const ExperimentConfig& config) {
  config.validate();
  TrainState s;
  s.config = config;
  s.generator = make_generator<float>(config.generator_config(), derive_key(config.seed, {stream::kInitG}));
  s.discriminator = make_discriminator<float>(config.discriminator_config(), derive_key(config.seed, {stream::kInitD}));
  s.g_optimizer = std::make_unique<Adam<float>>(s.generator->params(), AdamOptions{config.learning_rate, 0.5, 0.999, 1e-8});
  s.d_optimizer =
      std::make_unique<Adam<float>>(s.discriminator->params(), AdamOptions{config.d_learning_rate, 0.5, 0.999, 1e-8});
  if (config.weights.w_perceptual > 0) {
    if (config.extractor == "random")
      s.extractor = make_random_conv_extractor<float>(derive_key(config.seed, {stream::kExtractor}));
    else
      s.extractor = load_conv_extractor<float>(config.extractor);
  }
  return s;
}

LossBreakdown training_step(TrainState& state, const Tensor<float>& images, std::span<const Mask> masks,
                            const LossWeights& weights, const StepOptions& options) {
  if (images.rank() != 4 || images.dim(0) != static_cast<int>(masks.size()))
    throw ParameterError("training_step: batch " + to_string(images.shape()) + " does not match " +
                         std::to_string(masks.size()) + " masks");
  weights.validate();
  const ModelFamily family = state.config.family;
  auto& G = *state.generator;
  auto& D = *state.discriminator;
  const long long it = state.iteration;

  const Tensor<float> m = masks_to_tensor<float>(masks);
  const V gt = V::constant(images);
  G.params().zero_grad();
  const auto gen = G.forward(V::constant(apply_holes(images, m)), V::constant(m));
  const V composed = compose_output(gen.output, gt, m);

  // Discriminator update on the detached composition.
  D.params().zero_grad();
  const auto real = D.forward(gt);
  const auto fake = D.forward(ag::detach(composed));
  const V d_loss = d_adversarial(family, real.scores, fake.scores);
  require_finite(d_loss.item(), "discriminator loss", it);
  ag::backward(d_loss);
  if (!D.params().grads_finite())
    throw NumericalError("non-finite discriminator gradient at iteration " + std::to_string(it));
  state.d_optimizer->step();

  // Generator update against the freshly updated discriminator.
  D.params().zero_grad();
  const auto fake_g = D.forward(composed);
  const V adv = g_adversarial(family, fake_g.scores);
  // The context-encoder hole term is a squared error; the others are L1.
  auto hole_term = [&](const V& pred) {
    return family == ModelFamily::context_encoder ? region_l2(gt, pred, m, Region::hole)
                                                  : region_l1(gt, pred, m, Region::hole);
  };
  V valid = region_l1(gt, gen.output, m, Region::valid);
  V hole = hole_term(gen.output);
  if (gen.coarse.defined()) {
    valid = valid + region_l1(gt, gen.coarse, m, Region::valid);
    hole = hole + hole_term(gen.coarse);
  }
  V perceptual;
  if (weights.w_perceptual > 0) perceptual = perceptual_loss(gt, gen.output, state.extractor.get());

  const double w_adv = options.adversarial_term ? weights.w_adversarial : 0.0;
  V objective = ag::scale(valid, static_cast<float>(weights.w_valid_l1)) +
                 ag::scale(hole, static_cast<float>(weights.w_hole_l1));
  if (perceptual.defined()) objective = objective + ag::scale(perceptual, static_cast<float>(weights.w_perceptual));
  if (options.adversarial_term) objective = objective + ag::scale(adv, static_cast<float>(w_adv));
  require_finite(objective.item(), "generator loss", it);
  ag::backward(objective);
  if (!G.params().grads_finite())
    throw NumericalError("non-finite generator gradient at iteration " + std::to_string(it));
  state.g_optimizer->step();
  D.params().zero_grad();

  LossBreakdown br;
  br.terms = {{"valid_l1", weights.w_valid_l1, valid.item()},
              {"hole_l1", weights.w_hole_l1, hole.item()},
              {"perceptual", weights.w_perceptual, perceptual.defined() ? perceptual.item() : 0.0},
              {"adversarial", w_adv, adv.item()}};
  br.total = br.weighted_sum();
  br.discriminator = d_loss.item();

  state.loss_window.push_back(br.total);
  while (state.loss_window.size() > kLossWindow) state.loss_window.pop_front();
  ++state.iteration;
  return br;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  Archive a;
  const auto& cfg = state.config;
  const long long last = cfg.total_iterations - 1;
  a.manifest = {{"format", "pgi-checkpoint"},
                {"version", 1},
                {"config", cfg.to_json()},
                {"config_hash", hex64(cfg.hash())},
                {"iteration", state.iteration},
                {"stage", stage_for_iteration(cfg.schedule(), std::min(state.iteration, last))},
                {"generator_steps", state.g_optimizer->steps()},
                {"discriminator_steps", state.d_optimizer->steps()},
                {"loss_window", std::vector<double>(state.loss_window.begin(), state.loss_window.end())},
                {"math_profile", math_profile()},
                {"rng", {{"kind", "counter-keyed"}, {"seed", cfg.seed}}}};
  put_prefixed(a.tensors, kGen, state.generator->params().snapshot());
  put_prefixed(a.tensors, kGen, state.g_optimizer->state());
  put_prefixed(a.tensors, kDisc, state.discriminator->params().snapshot());
  put_prefixed(a.tensors, kDisc, state.d_optimizer->state());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_archive(path, a);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigurationError("checkpoint not found: " + path.string());
  const Archive a = read_archive(path);
  if (a.manifest.value("format", "") != "pgi-checkpoint")
    throw IntegrityError(path.string() + " is not a training checkpoint");
  const ExperimentConfig cfg = ExperimentConfig::from_json(a.manifest.at("config"));
  const std::string stored = a.manifest.value("config_hash", "");
  if (stored != hex64(cfg.hash()))
    throw IntegrityError("checkpoint " + path.string() + " config hash " + stored + " does not match its config (" +
                         hex64(cfg.hash()) + ")");
  TrainState s = make_train_state(cfg);
  try {
    s.generator->params().restore(take_prefixed(a.tensors, kGen, false));
    s.g_optimizer->load_state(take_prefixed(a.tensors, kGen, true), a.manifest.at("generator_steps").get<long long>());
    s.discriminator->params().restore(take_prefixed(a.tensors, kDisc, false));
    s.d_optimizer->load_state(take_prefixed(a.tensors, kDisc, true),
                              a.manifest.at("discriminator_steps").get<long long>());
  } catch (const ParameterError& e) {
    throw IntegrityError("checkpoint " + path.string() + ": " + e.what());
  } catch (const ConfigurationError& e) {
    throw IntegrityError("checkpoint " + path.string() + ": " + e.what());
  }
  s.iteration = a.manifest.at("iteration").get<long long>();
  for (double v : a.manifest.value("loss_window", std::vector<double>{})) s.loss_window.push_back(v);
  return s;
}

TrainState load_checkpoint(const std::filesystem::path& path, const ExperimentConfig& expected) {
  TrainState s = load_checkpoint(path);
  if (s.config.hash() != expected.hash()) {
    nlohmann::json want = expected.to_json(), got = s.config.to_json();
    throw ConfigurationError("checkpoint " + path.string() + " was written by a different configuration (hash " +
                             hex64(s.config.hash()) + " vs " + hex64(expected.hash()) + "):\n" +
                             manifest_diff(want, got));
  }
  return s;
}

LoadedGenerator load_generator(const std::filesystem::path& checkpoint) {
  if (!std::filesystem::exists(checkpoint)) throw ConfigurationError("checkpoint not found: " + checkpoint.string());
  const Archive a = read_archive(checkpoint);
  if (a.manifest.value("format", "") != "pgi-checkpoint")
    throw IntegrityError(checkpoint.string() + " is not a training checkpoint");
  LoadedGenerator out;
  out.config = ExperimentConfig::from_json(a.manifest.at("config"));
  out.generator = make_generator<float>(out.config.generator_config(), derive_key(out.config.seed, {stream::kInitG}));
  out.generator->params().restore(take_prefixed(a.tensors, kGen, false));
  return out;
}

RunSummary run_training(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  config.validate();
  if (config.dataset.empty()) throw ConfigurationError("config field 'dataset': required for training");
  const bool resumed = !config.resume_from.empty();
  TrainState state = resumed ? load_checkpoint(config.resume_from, config) : make_train_state(config);
  state.config = config;
  const long long start = state.iteration;

  ImageSource source(index_dataset(config.dataset, Split::train, {config.max_images, kSubsampleSeed}),
                     config.resolution, config.seed);

  const fs::path out = config.output_dir;
  fs::create_directories(out / "checkpoints");
  nlohmann::json meta = {{"config", config.to_json()},
                         {"config_hash", hex64(config.hash())},
                         {"math_profile", math_profile()},
                         {"started_at", timestamp()},
                         {"start_iteration", start},
                         {"dataset_images", source.manifest().size()},
                         {"dataset_skipped", source.manifest().skipped.size()}};
  auto write_meta = [&] {
    std::ofstream(out / "run_meta.json") << meta.dump(2) << '\n';
  };
  write_meta();

  const fs::path log_path = out / "loss_log.csv", events_path = out / "stage_events.jsonl",
                 eval_path = out / "eval_log.csv";
  if (resumed) {
    truncate_log(log_path, start, true);
    truncate_log(events_path, start, false, "iteration");
    truncate_log(eval_path, start + 1, true);
  }
  const bool fresh_log = !resumed || !fs::exists(log_path);
  std::ofstream log(log_path, fresh_log ? std::ios::trunc : std::ios::app);
  if (fresh_log) log << kLossLogHeader << '\n';
  std::ofstream events(events_path, resumed ? std::ios::app : std::ios::trunc);
  std::ofstream eval_log;
  if (config.eval_every > 0) {
    const bool fresh = !resumed || !fs::exists(eval_path);
    eval_log.open(eval_path, fresh ? std::ios::trunc : std::ios::app);
    if (fresh) eval_log << "iteration,mask_fraction,l1,psnr\n";
  }

  const CurriculumSchedule schedule = config.schedule();
  const long long k = config.stage_length_k;
  RunSummary summary;
  auto checkpoint = [&](const fs::path& p) {
    save_checkpoint(state, p);
    summary.last_checkpoint = p;
  };
  auto ckpt_name = [&](long long it) { return out / "checkpoints" / ("ckpt_" + std::to_string(it) + ".pgi"); };

  // Fixed held-out probe for the eval cadence: first images, deterministic masks.
  Tensor<float> probe;
  if (config.eval_every > 0) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < std::min<std::size_t>(16, source.manifest().size()); ++i) idx.push_back(i);
    probe = load_batch(source.manifest(), idx, config.resolution);
  }

  char row[512];
  bool halted = false;
  for (long long it = start; it < config.total_iterations; ++it) {
    const bool boundary = it > 0 && it % k == 0;
    const bool halt = config.halt_at > 0 && it == config.halt_at;
    if (boundary || halt) checkpoint(ckpt_name(it));
    if (halt) {
      halted = true;
      break;
    }
    const int stage = stage_for_iteration(schedule, it);
    const double fraction = mask_fraction_for_stage(schedule, stage);
    LossWeights w = config.weights;
    w.w_adversarial = adversarial_weight_for_iteration(config.setup, schedule, it, config.weights.w_adversarial);
    if (it % k == 0) {
      events << nlohmann::json{{"event", "stage"}, {"iteration", it},       {"stage", stage},
                               {"mask_fraction", fraction}, {"w_adversarial", w.w_adversarial}}
                    .dump()
             << '\n';
      events.flush();
      ++summary.stage_events;
    }
    const auto masks = masks_for_batch(schedule, it, config.batch_size, config.resolution, config.family, config.seed);
    const auto idx = source.indices(it, config.batch_size);
    const Tensor<float> images = source.batch(idx);
    LossBreakdown br;
    try {
      br = training_step(state, images, masks, w);
    } catch (const NumericalError&) {
      checkpoint(out / "checkpoints" / "nan_abort.pgi");
      throw;
    }
    std::snprintf(row, sizeof row, "%lld,%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%s,%s", it,
                  to_string(config.setup).c_str(), stage, fraction, w.w_adversarial, br.discriminator,
                  br.term("valid_l1"), br.term("hole_l1"), br.term("perceptual"), br.term("adversarial"), br.total,
                  hex64(batch_mask_hash(masks)).c_str(), hex64(source.batch_hash(idx)).c_str());
    log << row << '\n';

    if (config.eval_every > 0 && (it + 1) % config.eval_every == 0) {
      std::vector<Mask> pm;
      for (int i = 0; i < probe.dim(0); ++i)
        pm.push_back(mask_for_fraction(fraction, config.resolution, config.family,
                                       derive_key(config.seed, {stream::kEval, static_cast<std::uint64_t>(i)})));
      const Tensor<float> mt = masks_to_tensor<float>(pm);
      const auto g = state.generator->forward(V::constant(apply_holes(probe, mt)), V::constant(mt));
      const Tensor<double> pred = to_metric_space(compose_output(g.output, V::constant(probe), mt).value());
      const Tensor<double> ref = to_metric_space(probe);
      std::snprintf(row, sizeof row, "%lld,%.9g,%.9g,%.9g", it + 1, fraction, l1_metric(ref, pred),
                    mean_psnr(ref, pred));
      eval_log << row << '\n';
    }
  }
  log.flush();
  if (!halted) checkpoint(out / "checkpoints" / "final.pgi");
  summary.final_iteration = state.iteration;
  meta["finished_at"] = timestamp();
  meta["final_iteration"] = state.iteration;
  write_meta();
  return summary;
}

}  // namespace pgi
