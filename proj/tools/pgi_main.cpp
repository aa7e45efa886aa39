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

// Command-line front end: training, evaluation, single-image inpainting,
// mask export, plotting and corpus utilities.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pgi/common/error.hpp"
#include "pgi/data/dataset.hpp"
#include "pgi/data/image_io.hpp"
#include "pgi/data/toy_corpus.hpp"
#include "pgi/eval/classifier.hpp"
#include "pgi/eval/evaluate.hpp"
#include "pgi/mask_engine/mask_io.hpp"
#include "pgi/mask_engine/schedule.hpp"
#include "pgi/plot/plot.hpp"
#include "pgi/trainer/trainer.hpp"

namespace {

using pgi::ExperimentConfig;

constexpr int kOk = 0, kRuntime = 1, kUsage = 2;

// Usage-level failure detected after CLI11 parsing (bad config values).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentFlags {
  std::optional<std::string> profile, model, setup, dataset, output_dir, extractor, resume_from;
  std::optional<int> resolution, batch_size, base_filters;
  std::optional<long long> total_iterations, stage_length_k, eval_every, halt_at;
  std::optional<double> learning_rate, d_learning_rate, start_fraction, fixed_fraction;
  std::optional<double> w_valid_l1, w_hole_l1, w_perceptual, w_adversarial;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_images;
};

std::string env_name(const std::string& key) {
  std::string e = "PGI_";
  for (char c : key) e += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return e;
}

template <typename T>
CLI::Option* add_key(CLI::App& app, const std::string& key, const std::string& extra_names, std::optional<T>& target,
                     const std::string& help) {
  std::string names = "--" + key;
  if (!extra_names.empty()) names += "," + extra_names;
  return app.add_option(names, target, help)->envname(env_name(key));
}

void register_experiment(CLI::App& app, ExperimentFlags& f) {
  add_key(app, "profile", "", f.profile, "Default set: desk (CPU, minutes) or full (paper scale)")
      ->check(CLI::IsMember({"desk", "full"}));
  add_key(app, "model", "", f.model, "Model family")->check(CLI::IsMember({"custom", "ce", "gated"}));
  add_key(app, "setup", "", f.setup, "Training setup")->check(CLI::IsMember({"a", "b", "c", "d"}));
  add_key(app, "dataset", "", f.dataset, "Image directory (with train/ and test/ splits)");
  add_key(app, "output_dir", "--out", f.output_dir, "Output location (directory or file, per command)");
  add_key(app, "seed", "", f.seed, "Base random seed");
  add_key(app, "resolution", "", f.resolution, "Training resolution in pixels");
  add_key(app, "total_iterations", "--iterations", f.total_iterations, "Total training iterations");
  add_key(app, "stage_length_k", "--stage-length", f.stage_length_k, "Iterations per curriculum stage (k)");
  add_key(app, "batch_size", "--batch", f.batch_size, "Batch size");
  add_key(app, "learning_rate", "--lr", f.learning_rate, "Generator learning rate");
  add_key(app, "d_learning_rate", "", f.d_learning_rate, "Discriminator learning rate");
  add_key(app, "base_filters", "", f.base_filters, "Width of the first conv layer");
  add_key(app, "start_fraction", "", f.start_fraction, "Initial mask fraction of the growing schedule");
  add_key(app, "fixed_fraction", "", f.fixed_fraction, "Mask fraction of the fixed setups");
  add_key(app, "w_valid_l1", "", f.w_valid_l1, "Valid-region reconstruction weight");
  add_key(app, "w_hole_l1", "", f.w_hole_l1, "Hole reconstruction weight");
  add_key(app, "w_perceptual", "", f.w_perceptual, "Perceptual loss weight");
  add_key(app, "w_adversarial", "", f.w_adversarial, "Base adversarial weight");
  add_key(app, "extractor", "", f.extractor, "Perceptual extractor: 'random' or an archive path");
  add_key(app, "max_images", "", f.max_images, "Use a seeded subset of at most this many images (0 = all)");
  add_key(app, "eval_every", "", f.eval_every, "Probe-set evaluation cadence in iterations (0 = off)");
  add_key(app, "halt_at", "", f.halt_at, "Stop (with a checkpoint) at this iteration");
  add_key(app, "resume_from", "--resume", f.resume_from, "Checkpoint to resume from");
}

ExperimentConfig effective_config(const ExperimentFlags& f) {
  try {
    ExperimentConfig c = ExperimentConfig::preset(pgi::parse_profile(f.profile.value_or("desk")),
                                                  pgi::parse_model_family(f.model.value_or("custom")));
    if (f.setup) c.setup = pgi::parse_setup(*f.setup);
    auto set = [](const auto& opt, auto& field) {
      if (opt) field = *opt;
    };
    set(f.dataset, c.dataset);
    set(f.output_dir, c.output_dir);
    set(f.seed, c.seed);
    set(f.resolution, c.resolution);
    set(f.total_iterations, c.total_iterations);
    set(f.stage_length_k, c.stage_length_k);
    set(f.batch_size, c.batch_size);
    set(f.learning_rate, c.learning_rate);
    set(f.d_learning_rate, c.d_learning_rate);
    set(f.base_filters, c.base_filters);
    set(f.start_fraction, c.start_fraction);
    set(f.fixed_fraction, c.fixed_fraction);
    set(f.w_valid_l1, c.weights.w_valid_l1);
    set(f.w_hole_l1, c.weights.w_hole_l1);
    set(f.w_perceptual, c.weights.w_perceptual);
    set(f.w_adversarial, c.weights.w_adversarial);
    set(f.extractor, c.extractor);
    set(f.max_images, c.max_images);
    set(f.eval_every, c.eval_every);
    set(f.halt_at, c.halt_at);
    set(f.resume_from, c.resume_from);
    c.validate();
    return c;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const pgi::ConfigurationError& e) {
    throw UsageError(e.what());
  }
}

std::string toml_value(const nlohmann::json& v) {
  // nlohmann prints the shortest round-trip form, with ".0" on integral doubles.
  return v.dump();
}

std::string show_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "# pgi experiment configuration (profile " << pgi::to_string(c.profile) << ")\n";
  const auto j = c.to_json();
  // Profile and model first: they select the defaults everything else overrides.
  for (const char* key : {"profile", "model"}) out << key << " = " << toml_value(j.at(key)) << '\n';
  for (const auto& [key, value] : j.items())
    if (key != "profile" && key != "model") out << key << " = " << toml_value(value) << '\n';
  return out.str();
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
      if (!(v >= 0 && v <= 0.5)) throw UsageError("fraction " + item + " outside [0, 0.5]");
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw UsageError("cannot parse fraction '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--fractions needs at least one value");
  return out;
}

std::string fraction_tag(double f) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", f);
  return b;
}

// --mask-spec forms: center:<f>, freeform:<f>[:<seed>]
pgi::Mask mask_from_spec(const std::string& spec, int resolution) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2) throw UsageError("mask spec '" + spec + "' should look like center:0.5 or freeform:0.3[:seed]");
  double f;
  try {
    f = std::stod(parts[1]);
  } catch (const std::logic_error&) {
    throw UsageError("mask spec '" + spec + "': bad fraction");
  }
  if (parts[0] == "center") return pgi::generate_center_rect_mask(resolution, f);
  if (parts[0] == "freeform") {
    const std::uint64_t seed = parts.size() > 2 ? std::stoull(parts[2]) : 0;
    return pgi::generate_freeform_mask(resolution, pgi::MaskSpec::free_form_for_fraction(f, resolution), seed);
  }
  throw UsageError("mask spec '" + spec + "': unknown kind '" + parts[0] + "'");
}

std::string out_or(const ExperimentFlags& f, const std::string& fallback) { return f.output_dir.value_or(fallback); }

int cmd_train(const ExperimentFlags& f) {
  const ExperimentConfig c = effective_config(f);
  if (c.dataset.empty()) throw UsageError("config field 'dataset': required for training");
  const auto summary = pgi::run_training(c);
  std::cout << "trained " << pgi::to_string(c.family) << " setup " << pgi::to_string(c.setup) << " to iteration "
            << summary.final_iteration << " (" << summary.stage_events << " stage events)\n"
            << "checkpoint: " << summary.last_checkpoint.string() << '\n';
  return kOk;
}

struct EvalFlags {
  std::string checkpoint, split = "test", fractions = "0.1,0.2,0.3,0.4,0.5", classifier;
  bool identity = false, raw = false;
  int is_splits = 1, batch = 16;
  std::uint64_t eval_seed = pgi::kEvalSeed;
};

int cmd_eval(const ExperimentFlags& f, const EvalFlags& e) {
  const ExperimentConfig base = effective_config(f);
  const auto fractions = parse_fractions(e.fractions);
  if (base.dataset.empty()) throw UsageError("eval needs --dataset");
  if (!e.identity && e.checkpoint.empty()) throw UsageError("eval needs --checkpoint or --identity");

  std::unique_ptr<pgi::InpaintingModel> model;
  pgi::EvalOptions opts;
  opts.batch_size = e.batch;
  opts.seed = e.eval_seed;
  opts.composed = !e.raw;
  opts.is_splits = e.is_splits;
  if (e.identity) {
    model = std::make_unique<pgi::IdentityModel>();
    opts.resolution = base.resolution;
    opts.mask_family = base.family;
    opts.model_label = "identity";
    opts.setup_label = f.setup.value_or("-");
  } else {
    auto loaded = pgi::load_generator(e.checkpoint);
    opts.resolution = loaded.config.resolution;
    opts.mask_family = loaded.config.family;
    opts.model_label = pgi::to_string(loaded.config.family);
    opts.setup_label = pgi::to_string(loaded.config.setup);
    model = std::make_unique<pgi::GeneratorModel>(std::move(loaded.generator), opts.model_label);
  }
  std::optional<pgi::ConvClassifier> classifier;
  if (!e.classifier.empty())
    classifier.emplace(pgi::ConvClassifier::load(e.classifier));
  else if (base.profile == pgi::Profile::full)
    throw pgi::ConfigurationError("the full profile needs --classifier for IS/FID features");
  else
    std::cerr << "note: no --classifier given; IS and FID are reported as nan\n";

  const auto split = pgi::index_dataset(base.dataset, pgi::parse_split(e.split), {base.max_images, pgi::kSubsampleSeed});
  const auto report =
      pgi::evaluate_by_mask_size(*model, split, fractions, classifier ? &*classifier : nullptr, opts);
  const std::filesystem::path out = out_or(f, "runs/eval");
  pgi::write_report_csv(report, out / "report.csv");
  std::ofstream(out / "report.json") << pgi::to_json(report).dump(2) << '\n';
  for (const auto& r : report.rows)
    std::printf("%s/%s f=%.3f  L1 %.4f  PSNR %.3f  IS %.4f  FID %.4f  (n=%lld)\n", r.model.c_str(), r.setup.c_str(),
                r.mask_fraction, r.l1, r.psnr, r.is_score, r.fid, r.n_images);
  std::cout << "report: " << (out / "report.csv").string() << '\n';
  return kOk;
}

struct InpaintFlags {
  std::string checkpoint, image, mask;
  std::vector<std::string> specs;
  bool identity = false;
};

int cmd_inpaint(const ExperimentFlags& f, const InpaintFlags& in) {
  const ExperimentConfig base = effective_config(f);
  if (!in.identity && in.checkpoint.empty()) throw UsageError("inpaint needs --checkpoint or --identity");
  if (in.mask.empty() == in.specs.empty()) throw UsageError("give exactly one of --mask or --mask-spec");
  std::unique_ptr<pgi::InpaintingModel> model;
  int resolution = base.resolution;
  if (in.identity) {
    model = std::make_unique<pgi::IdentityModel>();
  } else {
    auto loaded = pgi::load_generator(in.checkpoint);
    resolution = loaded.config.resolution;
    model = std::make_unique<pgi::GeneratorModel>(std::move(loaded.generator), "generator");
  }
  const pgi::RgbImage image = pgi::read_image(in.image);
  pgi::Mask mask;
  if (!in.mask.empty()) {
    mask = pgi::read_mask_png(in.mask);
    if (mask.height != resolution || mask.width != resolution)
      throw pgi::ConfigurationError("mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                                    " but the model works at " + std::to_string(resolution) + "x" +
                                    std::to_string(resolution) + " (image " + std::to_string(image.height) + "x" +
                                    std::to_string(image.width) + ")");
  } else {
    mask = pgi::Mask(resolution, resolution);
    for (const auto& s : in.specs) {
      const pgi::Mask part = mask_from_spec(s, resolution);
      for (std::size_t i = 0; i < mask.grid.size(); ++i) mask.grid[i] |= part.grid[i];
    }
  }
  pgi::Tensor<float> x({1, 3, resolution, resolution});
  pgi::image_to_tensor(image, resolution, x, 0);
  const pgi::Tensor<float> m = pgi::masks_to_tensor<float>(std::span<const pgi::Mask>(&mask, 1));
  const pgi::Tensor<float> raw = model->inpaint(x, m);
  const auto composed =
      pgi::compose_output(pgi::ag::Var<float>::constant(raw), pgi::ag::Var<float>::constant(x), m).value();
  const std::filesystem::path out = out_or(f, "inpainted.png");
  pgi::write_png(pgi::tensor_to_image(composed, 0), out);
  std::cout << "wrote " << out.string() << " (" << mask.hole_count() << " hole pixels)\n";
  return kOk;
}

int cmd_make_masks(const ExperimentFlags& f, const std::string& fractions_text, int count) {
  const ExperimentConfig c = effective_config(f);
  const auto fractions = parse_fractions(fractions_text);
  if (count < 1) throw UsageError("--count must be >= 1");
  const std::filesystem::path out = out_or(f, "masks");
  std::filesystem::create_directories(out);
  std::ofstream rle(out / "masks.rle");
  for (double fr : fractions)
    for (int i = 0; i < count; ++i) {
      const auto mask = pgi::mask_for_fraction(fr, c.resolution, c.family,
                                               pgi::eval_mask_key(c.seed, fr, static_cast<std::size_t>(i)));
      const std::string name = "mask_" + fraction_tag(fr) + "_" + std::to_string(i) + ".png";
      pgi::write_mask_png(mask, out / name);
      rle << name << ' ' << pgi::encode_mask_rle(mask) << '\n';
    }
  std::cout << "wrote " << fractions.size() * static_cast<std::size_t>(count) << " masks to " << out.string() << '\n';
  return kOk;
}

int cmd_plot(const ExperimentFlags& f, const std::vector<std::string>& reports) {
  std::vector<pgi::MetricsRow> rows;
  for (const auto& r : reports) {
    const auto rep = pgi::read_report_csv(r);
    rows.insert(rows.end(), rep.rows.begin(), rep.rows.end());
  }
  const auto paths = pgi::render_figures(pgi::build_figures(rows), out_or(f, "figures"));
  for (const auto& p : paths) std::cout << "figure: " << p.string() << '\n';
  return kOk;
}

int cmd_toy_corpus(const ExperimentFlags& f, int train_count, int test_count) {
  const ExperimentConfig c = effective_config(f);
  pgi::ToyCorpusSpec spec{train_count, test_count, c.resolution, c.seed};
  const std::filesystem::path out = out_or(f, "toy_corpus");
  pgi::generate_toy_corpus(out, spec);
  std::cout << "wrote " << train_count << " train / " << test_count << " test images to " << out.string() << '\n';
  return kOk;
}

int cmd_train_classifier(const ExperimentFlags& f, int epochs, int input_resolution) {
  const ExperimentConfig c = effective_config(f);
  if (c.dataset.empty()) throw UsageError("train-classifier needs --dataset");
  const auto train = pgi::index_dataset(c.dataset, pgi::Split::train, {c.max_images, pgi::kSubsampleSeed});
  std::vector<std::string> names;
  const auto labels = pgi::labels_from_directories(train, &names);
  std::vector<std::size_t> all(train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto images = pgi::load_batch(train, all, input_resolution);
  pgi::ClassifierConfig cc;
  cc.num_classes = static_cast<int>(names.size());
  cc.input_resolution = input_resolution;
  cc.class_names = names;
  pgi::ConvClassifier model(cc, pgi::derive_key(c.seed, {pgi::stream::kInitD, 0xc1a55}));
  pgi::ClassifierTrainOptions opts;
  opts.epochs = epochs;
  opts.seed = c.seed;
  const auto rep = pgi::train_classifier(model, images, labels, opts);
  const std::filesystem::path out = out_or(f, "classifier.pgi");
  model.save(out);
  std::printf("classifier: %zu classes, train accuracy %.3f, final loss %.4f -> %s\n", names.size(),
              rep.train_accuracy, rep.final_loss, out.string().c_str());
  return kOk;
}

int cmd_index(const ExperimentFlags& f, const std::string& split) {
  const ExperimentConfig c = effective_config(f);
  if (c.dataset.empty()) throw UsageError("index needs --dataset");
  const auto m = pgi::index_dataset(c.dataset, pgi::parse_split(split), {c.max_images, pgi::kSubsampleSeed});
  const std::string text = pgi::to_json(m).dump(2);
  if (f.output_dir) {
    std::ofstream(*f.output_dir) << text << '\n';
    std::cout << m.size() << " images indexed, " << m.skipped.size() << " skipped -> " << *f.output_dir << '\n';
  } else {
    std::cout << text << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum GAN inpainting with progressively growing masks"};
  app.name("pgi");
  app.fallthrough();
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Configuration file (key = value)");
  app.allow_config_extras(false);

  ExperimentFlags flags;
  register_experiment(app, flags);

  auto* train = app.add_subcommand("train", "Train a model");
  auto* show = app.add_subcommand("show-config", "Print the effective configuration");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Evaluate L1/PSNR/IS/FID across mask sizes");
  eval->add_option("--checkpoint", ef.checkpoint, "Training checkpoint");
  eval->add_flag("--identity", ef.identity, "Debug model that returns the ground truth");
  eval->add_option("--split", ef.split, "Dataset split")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--fractions", ef.fractions, "Comma-separated mask fractions");
  eval->add_option("--classifier", ef.classifier, "Feature classifier archive for IS/FID");
  eval->add_flag("--raw", ef.raw, "Score raw generator output instead of the composed image");
  eval->add_option("--is-splits", ef.is_splits, "Inception Score splits")->check(CLI::PositiveNumber);
  eval->add_option("--eval-batch", ef.batch, "Evaluation batch size")->check(CLI::PositiveNumber);
  eval->add_option("--eval-seed", ef.eval_seed, "Seed of the evaluation masks");

  InpaintFlags inf;
  auto* inpaint = app.add_subcommand("inpaint", "Inpaint one image");
  inpaint->add_option("--checkpoint", inf.checkpoint, "Training checkpoint");
  inpaint->add_flag("--identity", inf.identity, "Debug model that returns the input");
  inpaint->add_option("--image", inf.image, "Input image")->required();
  inpaint->add_option("--mask", inf.mask, "Mask PNG (non-zero = hole)");
  inpaint->add_option("--mask-spec", inf.specs, "center:<f> or freeform:<f>[:<seed>]; repeat to combine holes");

  std::string mask_fractions = "0.1,0.2,0.3,0.4,0.5";
  int mask_count = 4;
  auto* masks = app.add_subcommand("make-masks", "Write evaluation masks as PNG and RLE");
  masks->add_option("--fractions", mask_fractions, "Comma-separated mask fractions");
  masks->add_option("--count", mask_count, "Masks per fraction");

  std::vector<std::string> reports;
  auto* plot = app.add_subcommand("plot", "Render per-model metric grids from report CSVs");
  plot->add_option("reports", reports, "Report CSV files")->required()->check(CLI::ExistingFile);

  int toy_train = 500, toy_test = 100;
  auto* toy = app.add_subcommand("make-toy-corpus", "Generate the procedural shape corpus");
  toy->add_option("--train-count", toy_train, "Training images");
  toy->add_option("--test-count", toy_test, "Test images");

  int cls_epochs = 10, cls_res = 32;
  auto* cls = app.add_subcommand("train-classifier", "Train the feature classifier used for IS/FID");
  cls->add_option("--epochs", cls_epochs, "Training epochs")->check(CLI::PositiveNumber);
  cls->add_option("--input-resolution", cls_res, "Classifier input size");

  std::string index_split = "train";
  auto* index = app.add_subcommand("index", "Index a dataset split into a JSON manifest");
  index->add_option("--split", index_split, "Dataset split")->check(CLI::IsMember({"train", "val", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) return cmd_train(flags);
    if (*show) {
      std::cout << show_config(effective_config(flags));
      return kOk;
    }
    if (*eval) return cmd_eval(flags, ef);
    if (*inpaint) return cmd_inpaint(flags, inf);
    if (*masks) return cmd_make_masks(flags, mask_fractions, mask_count);
    if (*plot) return cmd_plot(flags, reports);
    if (*toy) return cmd_toy_corpus(flags, toy_train, toy_test);
    if (*cls) return cmd_train_classifier(flags, cls_epochs, cls_res);
    if (*index) return cmd_index(flags, index_split);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
