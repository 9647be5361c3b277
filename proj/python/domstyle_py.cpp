// Copyright 2026 The Domstyle Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "domstyle/cli.hpp"
#include "domstyle/config.hpp"
#include "domstyle/error.hpp"
#include "domstyle/image.hpp"
#include "domstyle/losses.hpp"
#include "domstyle/networks.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/pipeline.hpp"
#include "domstyle/skip.hpp"
#include "domstyle/trainer.hpp"
#include "domstyle/transforms.hpp"
#include "domstyle/weights.hpp"

namespace py = pybind11;

namespace domstyle {
namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor from_numpy(const FloatArray& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  std::vector<float> values(a.data(), a.data() + a.size());
  return Tensor(std::move(shape), std::move(values));
}

py::array_t<float> to_numpy(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<float> out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

// [3,H,W] view of a stylized [1,3,H,W] batch.
Tensor first_item(const Tensor& t) {
  return t.rank() == 4 ? reshape(t, Shape{t.dim(1), t.dim(2), t.dim(3)}) : t;
}

py::dict domainness_dict(const Domainness& d) {
  py::dict out;
  out["alpha_levels"] = std::vector<double>(d.alpha_levels.begin(), d.alpha_levels.end());
  out["alpha_mean"] = static_cast<double>(d.alpha_mean);
  return out;
}

py::dict report_dict(const LossReport& r) {
  py::dict d;
  d["step"] = r.step;
  d["L_bce"] = r.bce;
  d["L_dlow"] = r.dlow;
  d["L_p"] = r.perceptual;
  d["L_cx"] = r.contextual;
  d["L_tv"] = r.tv;
  d["L_adv_D"] = r.adv_d;
  d["L_adv_G"] = r.adv_g;
  d["alpha_photo_mean"] = r.alpha_photo_mean;
  d["alpha_art_mean"] = r.alpha_art_mean;
  return d;
}

// A weight store together with the architecture it was built for.
struct Model {
  WeightStore ws;
  NetConfig net;

  static Model load(const std::filesystem::path& path) {
    Model m;
    m.ws = load_weights(path);
    m.net = infer_config(m.ws);
    return m;
  }
  static Model random(const std::string& preset, std::uint64_t seed) {
    Model m;
    m.net = NetConfig::preset(preset);
    m.ws = init_weights(m.net, seed);
    return m;
  }

  py::tuple stylize(const FloatArray& content, const FloatArray& style,
                    std::optional<double> alpha, std::optional<int> resize) const {
    StylizeResult r;
    {
      py::gil_scoped_release release;
      r = dstn_forward({from_numpy(content), from_numpy(style), alpha, resize}, ws, net);
    }
    return py::make_tuple(to_numpy(first_item(r.image)), domainness_dict(r.dom));
  }

  py::dict domainness(const FloatArray& image) const {
    Tensor t = from_numpy(image);
    if (t.rank() == 3) t = reshape(t, Shape{1, t.dim(0), t.dim(1), t.dim(2)});
    return domainness_dict(indicator_forward(t, ws, net).item(0));
  }

  std::vector<py::tuple> tensors() const {
    std::vector<py::tuple> out;
    for (const auto& [name, t] : ws.entries()) {
      out.push_back(py::make_tuple(name, std::vector<std::int64_t>(t.shape())));
    }
    return out;
  }
};

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli_main(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::tuple train_from_config(const std::string& config_json) {
  const RunConfig cfg = parse_run_config_text(config_json);
  TrainResult r;
  {
    py::gil_scoped_release release;
    r = train(cfg.train, cfg.net);
  }
  Model m{std::move(r.weights), cfg.net};
  py::list history;
  for (const auto& rep : r.history) history.append(report_dict(rep));
  return py::make_tuple(std::move(m), history);
}

}  // namespace
}  // namespace domstyle

PYBIND11_MODULE(_core, m) {
  using namespace domstyle;
  m.doc() = "Domain-aware style transfer core";

  static py::exception<Error> error(m, "DomstyleError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("read_image", [](const std::filesystem::path& p) { return to_numpy(read_image(p)); },
        py::arg("path"), "Read a binary PPM/PGM as a float32 [C,H,W] array in [0, 1].");
  m.def("write_image",
        [](const FloatArray& a, const std::filesystem::path& p) { write_image(from_numpy(a), p); },
        py::arg("image"), py::arg("path"), "Write a [C,H,W] array as binary PPM/PGM.");
  m.def("kernel_size_for", &kernel_size_for, py::arg("alpha"));
  m.def(
      "build_kernel",
      [](double alpha) {
        const GaussianKernel k = build_kernel(alpha);
        py::array_t<float> w({k.size, k.size});
        std::copy(k.weights.begin(), k.weights.end(), w.mutable_data());
        return w;
      },
      py::arg("alpha"), "Normalised Gaussian blur kernel for a domainness value.");
  m.def("wct", [](const FloatArray& fc, const FloatArray& fs) {
    return to_numpy(wct(from_numpy(fc), from_numpy(fs)));
  });
  m.def("stat_match", [](const FloatArray& fc, const FloatArray& fs) {
    return to_numpy(stat_match(from_numpy(fc), from_numpy(fs)));
  });
  m.def(
      "edge_ssim",
      [](const FloatArray& output, const FloatArray& content) {
        return metric_edge_ssim(from_numpy(output), from_numpy(content));
      },
      py::arg("output"), py::arg("content"));

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load, py::arg("path"))
      .def_static("random", &Model::random, py::arg("preset") = "toy", py::arg("seed") = 0)
      .def("save", [](const Model& self, const std::filesystem::path& p) { save_weights(self.ws, p); })
      .def("stylize", &Model::stylize, py::arg("content"), py::arg("style"),
           py::arg("alpha") = py::none(), py::arg("resize") = py::none(),
           "Returns (image [3,H,W], {'alpha_levels', 'alpha_mean'}).")
      .def("domainness", &Model::domainness, py::arg("image"))
      .def(
          "style_loss",
          [](const Model& self, const FloatArray& output, const FloatArray& style) {
            return metric_style_loss(from_numpy(output), from_numpy(style), self.ws, self.net);
          },
          py::arg("output"), py::arg("style"))
      .def("tensors", &Model::tensors)
      .def_property_readonly("parameter_count",
                             [](const Model& self) { return self.ws.parameter_count(); })
      .def_property_readonly("stage_channels",
                             [](const Model& self) { return self.net.stage_channels; });

  m.def(
      "synth_triplet",
      [](std::uint64_t seed, int size, double beta) {
        Rng rng(seed);
        const DomainTriplet t = synth_triplet(SyntheticDomainSpec{size}, rng, beta);
        return py::make_tuple(to_numpy(t.photo), to_numpy(t.art), to_numpy(t.mix), t.beta);
      },
      py::arg("seed"), py::arg("size") = 64, py::arg("beta") = -1.0,
      "Synthetic (photo, art, mix, beta); beta < 0 draws it at random.");
  m.def("train", &train_from_config, py::arg("config_json"),
        "Train from a run-config JSON document; returns (Model, history).");
  m.def("run_cli", &run_cli, py::arg("args"),
        "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
