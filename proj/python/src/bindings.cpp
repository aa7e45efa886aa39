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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "pgi/data/image_io.hpp"
#include "pgi/data/toy_corpus.hpp"
#include "pgi/eval/classifier.hpp"
#include "pgi/eval/evaluate.hpp"
#include "pgi/eval/metrics.hpp"
#include "pgi/losses/losses.hpp"
#include "pgi/mask_engine/mask_io.hpp"
#include "pgi/mask_engine/schedule.hpp"
#include "pgi/plot/plot.hpp"
#include "pgi/trainer/trainer.hpp"

namespace py = pybind11;
using namespace pgi;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Tensor<double> to_tensor(const DArray& a) {
  Shape s(a.shape(), a.shape() + a.ndim());
  std::vector<double> v(a.data(), a.data() + a.size());
  return Tensor<double>(std::move(s), std::move(v));
}

// 2-D or 3-D arrays are promoted to NCHW by prepending unit axes.
Tensor<double> to_nchw(const DArray& a) {
  auto t = to_tensor(a);
  Shape s = t.shape();
  while (s.size() < 4) s.insert(s.begin(), 1);
  return t.reshaped(s);
}

std::vector<ag::Var<double>> to_scores(const std::vector<DArray>& arrays) {
  std::vector<ag::Var<double>> out;
  for (const auto& a : arrays) out.push_back(ag::Var<double>::constant(to_nchw(a)));
  return out;
}

U8Array mask_to_array(const Mask& m) {
  U8Array out({m.height, m.width});
  std::copy(m.grid.begin(), m.grid.end(), out.mutable_data());
  return out;
}

Mask array_to_mask(const U8Array& a) {
  if (a.ndim() != 2) throw ParameterError("mask array must be 2-D");
  Mask m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  for (std::size_t i = 0; i < m.grid.size(); ++i) m.grid[i] = a.data()[i] != 0;
  return m;
}

RgbImage array_to_image(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ParameterError("image array must be H×W×3");
  RgbImage img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
  return img;
}

U8Array image_to_array(const RgbImage& img) {
  U8Array out({img.height, img.width, 3});
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

ExperimentConfig config_from(const py::dict& d) {
  const auto text = py::module_::import("json").attr("dumps")(d).cast<std::string>();
  auto c = ExperimentConfig::from_json(nlohmann::json::parse(text));
  c.validate();
  return c;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::list rows_to_py(const MetricsReport& rep) {
  py::list out;
  for (const auto& r : rep.rows) {
    py::dict d;
    d["model"] = r.model;
    d["setup"] = r.setup;
    d["mask_fraction"] = r.mask_fraction;
    d["l1"] = r.l1;
    d["psnr"] = r.psnr;
    d["is_score"] = r.is_score;
    d["fid"] = r.fid;
    d["n_images"] = r.n_images;
    out.append(d);
  }
  return out;
}

Region parse_region(const std::string& name) {
  if (name == "hole") return Region::hole;
  if (name == "valid") return Region::valid;
  throw ParameterError("region must be 'hole' or 'valid', got '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_pgi, m) {
  m.doc() = "Progressive GAN inpainting: masks, curriculum schedules, losses, metrics, training and evaluation";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_RuntimeError);
  py::register_exception<IntegrityError>(m, "IntegrityError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // Masks
  m.def("center_rect_mask", [](int resolution, double fraction) {
    return mask_to_array(generate_center_rect_mask(resolution, fraction));
  }, py::arg("resolution"), py::arg("fraction"));
  m.def("freeform_mask", [](int resolution, double fraction, std::uint64_t seed, int max_turns) {
    return mask_to_array(generate_freeform_mask(resolution, MaskSpec::free_form_for_fraction(fraction, resolution, max_turns), seed));
  }, py::arg("resolution"), py::arg("fraction"), py::arg("seed") = 0, py::arg("max_turns") = 4);
  m.def("mask_for_fraction", [](double fraction, int resolution, const std::string& family, std::uint64_t key) {
    return mask_to_array(mask_for_fraction(fraction, resolution, parse_model_family(family), key));
  }, py::arg("fraction"), py::arg("resolution"), py::arg("family") = "custom", py::arg("key") = 0);
  m.def("encode_mask_rle", [](const U8Array& a) { return encode_mask_rle(array_to_mask(a)); });
  m.def("decode_mask_rle", [](const std::string& s) { return mask_to_array(decode_mask_rle(s)); });
  m.def("write_mask_png", [](const U8Array& a, const std::filesystem::path& p) { write_mask_png(array_to_mask(a), p); });
  m.def("read_mask_png", [](const std::filesystem::path& p) { return mask_to_array(read_mask_png(p)); });

  // Curriculum
  py::class_<CurriculumSchedule>(m, "Schedule")
      .def_static("growing", &CurriculumSchedule::growing, py::arg("total_iterations"), py::arg("k"),
                  py::arg("start_fraction") = 0.1)
      .def_static("fixed", &CurriculumSchedule::fixed, py::arg("total_iterations"), py::arg("k"),
                  py::arg("fraction") = 0.5)
      .def_readonly("stage_length_k", &CurriculumSchedule::stage_length_k)
      .def_readonly("num_stages", &CurriculumSchedule::num_stages)
      .def_readonly("start_fraction", &CurriculumSchedule::start_fraction)
      .def_readonly("end_fraction", &CurriculumSchedule::end_fraction)
      .def_property_readonly("total_iterations", &CurriculumSchedule::total_iterations)
      .def("stage", [](const CurriculumSchedule& s, long long it) { return stage_for_iteration(s, it); })
      .def("fraction", [](const CurriculumSchedule& s, int stage) { return mask_fraction_for_stage(s, stage); });
  m.def("stage_for_iteration", &stage_for_iteration);
  m.def("mask_fraction_for_stage", &mask_fraction_for_stage);
  m.def("masks_for_batch", [](const CurriculumSchedule& s, long long it, int batch, int resolution,
                              const std::string& family, std::uint64_t seed) {
    const auto masks = masks_for_batch(s, it, batch, resolution, parse_model_family(family), seed);
    U8Array out({batch, resolution, resolution});
    for (std::size_t i = 0; i < masks.size(); ++i)
      std::copy(masks[i].grid.begin(), masks[i].grid.end(), out.mutable_data() + i * masks[i].grid.size());
    return out;
  }, py::arg("schedule"), py::arg("iteration"), py::arg("batch_size"), py::arg("resolution"),
        py::arg("family") = "custom", py::arg("seed") = 1);
  m.def("adversarial_weight", [](const std::string& setup, const CurriculumSchedule& s, long long it, double base) {
    return adversarial_weight_for_iteration(parse_setup(setup), s, it, base);
  }, py::arg("setup"), py::arg("schedule"), py::arg("iteration"), py::arg("base_weight") = 1.0);

  // Losses on NumPy score maps / NCHW images
  m.def("lsgan_d_loss", [](const std::vector<DArray>& r, const std::vector<DArray>& f) {
    return lsgan_d_loss<double>(to_scores(r), to_scores(f)).item();
  });
  m.def("lsgan_g_loss", [](const std::vector<DArray>& f) { return lsgan_g_loss<double>(to_scores(f)).item(); });
  m.def("hinge_d_loss", [](const std::vector<DArray>& r, const std::vector<DArray>& f) {
    return hinge_d_loss<double>(to_scores(r), to_scores(f)).item();
  });
  m.def("hinge_g_loss", [](const std::vector<DArray>& f) { return hinge_g_loss<double>(to_scores(f)).item(); });
  m.def("region_l1", [](const DArray& gt, const DArray& pred, const DArray& mask, const std::string& region) {
    return region_l1(ag::Var<double>::constant(to_nchw(gt)), ag::Var<double>::constant(to_nchw(pred)), to_nchw(mask),
                     parse_region(region)).item();
  }, py::arg("ground_truth"), py::arg("prediction"), py::arg("mask"), py::arg("region") = "hole");
  m.def("perceptual_loss", [](const DArray& gt, const DArray& pred, const std::string& extractor, std::uint64_t seed) {
    std::unique_ptr<FeatureExtractor<double>> ex;
    if (extractor == "identity") ex = std::make_unique<IdentityExtractor<double>>();
    else if (extractor == "random") ex = make_random_conv_extractor<double>(seed);
    else ex = load_conv_extractor<double>(extractor);
    return perceptual_loss(ag::Var<double>::constant(to_nchw(gt)), ag::Var<double>::constant(to_nchw(pred)), ex.get())
        .item();
  }, py::arg("ground_truth"), py::arg("prediction"), py::arg("extractor") = "random", py::arg("seed") = 0);

  // Metrics, images in [0, 1]
  m.def("l1_metric", [](const DArray& a, const DArray& b) { return l1_metric(to_nchw(a), to_nchw(b)); });
  m.def("psnr", [](const DArray& a, const DArray& b, double max_value) { return psnr(to_nchw(a), to_nchw(b), max_value); },
        py::arg("ground_truth"), py::arg("prediction"), py::arg("max_value") = 1.0);
  m.def("mean_psnr", [](const DArray& a, const DArray& b, double max_value) {
    return mean_psnr(to_nchw(a), to_nchw(b), max_value);
  }, py::arg("ground_truth"), py::arg("prediction"), py::arg("max_value") = 1.0);
  m.def("inception_score", &inception_score, py::arg("probabilities"), py::arg("splits") = 1);
  m.def("fid", &fid, py::arg("features_real"), py::arg("features_fake"));
  m.attr("PSNR_CAP") = kPsnrCap;

  // Configuration and training
  m.def("default_config", [](const std::string& profile, const std::string& model) {
    return json_to_py(ExperimentConfig::preset(parse_profile(profile), parse_model_family(model)).to_json());
  }, py::arg("profile") = "desk", py::arg("model") = "custom");
  m.def("normalize_config", [](const py::dict& d) { return json_to_py(config_from(d).to_json()); });
  m.def("config_hash", [](const py::dict& d) { return config_from(d).hash(); });
  m.def("train", [](const py::dict& d) {
    const auto c = config_from(d);
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_training(c);
    }
    py::dict out;
    out["final_iteration"] = s.final_iteration;
    out["last_checkpoint"] = s.last_checkpoint;
    out["stage_events"] = s.stage_events;
    return out;
  }, py::arg("config"));
  m.def("generate_toy_corpus", [](const std::filesystem::path& dir, int train, int test, int resolution,
                                  std::uint64_t seed) {
    generate_toy_corpus(dir, ToyCorpusSpec{train, test, resolution, seed});
  }, py::arg("directory"), py::arg("train_count") = 500, py::arg("test_count") = 100, py::arg("resolution") = 64,
        py::arg("seed") = 1);

  // Evaluation, inpainting, plotting
  m.def("evaluate", [](const std::filesystem::path& dataset, const std::vector<double>& fractions,
                       std::optional<std::filesystem::path> checkpoint, std::optional<std::filesystem::path> classifier,
                       const std::string& split, int resolution, bool composed, std::uint64_t seed) {
    EvalOptions o;
    o.resolution = resolution;
    o.composed = composed;
    o.seed = seed;
    std::unique_ptr<InpaintingModel> model;
    if (checkpoint) {
      auto loaded = load_generator(*checkpoint);
      o.resolution = loaded.config.resolution;
      o.mask_family = loaded.config.family;
      o.model_label = to_string(loaded.config.family);
      o.setup_label = to_string(loaded.config.setup);
      model = std::make_unique<GeneratorModel>(std::move(loaded.generator), o.model_label);
    } else {
      model = std::make_unique<IdentityModel>();
      o.model_label = "identity";
      o.setup_label = "-";
    }
    std::optional<ConvClassifier> clf;
    if (classifier) clf.emplace(ConvClassifier::load(*classifier));
    const auto manifest = index_dataset(dataset, parse_split(split));
    MetricsReport rep;
    {
      py::gil_scoped_release release;
      rep = evaluate_by_mask_size(*model, manifest, fractions, clf ? &*clf : nullptr, o);
    }
    return rows_to_py(rep);
  }, py::arg("dataset"), py::arg("fractions"), py::arg("checkpoint") = py::none(), py::arg("classifier") = py::none(),
        py::arg("split") = "test", py::arg("resolution") = 64, py::arg("composed") = true,
        py::arg("seed") = kEvalSeed);
  m.def("inpaint", [](const std::filesystem::path& checkpoint, const U8Array& image, const U8Array& mask) {
    auto loaded = load_generator(checkpoint);
    const int r = loaded.config.resolution;
    const Mask mk = array_to_mask(mask);
    if (mk.height != r || mk.width != r)
      throw ConfigurationError("mask is " + std::to_string(mk.height) + "x" + std::to_string(mk.width) +
                               " but the model works at " + std::to_string(r) + "x" + std::to_string(r));
    Tensor<float> x({1, 3, r, r});
    image_to_tensor(array_to_image(image), r, x, 0);
    const auto mt = masks_to_tensor<float>(std::span<const Mask>(&mk, 1));
    GeneratorModel model(std::move(loaded.generator), "generator");
    const auto raw = model.inpaint(x, mt);
    const auto out = compose_output(ag::Var<float>::constant(raw), ag::Var<float>::constant(x), mt).value();
    return image_to_array(tensor_to_image(out, 0));
  }, py::arg("checkpoint"), py::arg("image"), py::arg("mask"));
  m.def("plot_reports", [](const std::vector<std::filesystem::path>& reports, const std::filesystem::path& out_dir) {
    std::vector<MetricsRow> rows;
    for (const auto& p : reports) {
      const auto rep = read_report_csv(p);
      rows.insert(rows.end(), rep.rows.begin(), rep.rows.end());
    }
    return render_figures(build_figures(rows), out_dir);
  }, py::arg("reports"), py::arg("out_dir"));
}
