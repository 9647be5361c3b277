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

#include "domstyle/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "domstyle/config.hpp"
#include "domstyle/error.hpp"
#include "domstyle/image.hpp"
#include "domstyle/losses.hpp"
#include "domstyle/networks.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/pipeline.hpp"
#include "domstyle/trainer.hpp"
#include "domstyle/weights.hpp"

namespace domstyle {
namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Network inputs are three-channel; grey images are replicated.
Tensor load_rgb(const std::string& path) {
  const Tensor img = read_image(path);
  if (img.dim(0) == 3) return img;
  return concat_channels({reshape(img, Shape{1, 1, img.dim(1), img.dim(2)}),
                          reshape(img, Shape{1, 1, img.dim(1), img.dim(2)}),
                          reshape(img, Shape{1, 1, img.dim(1), img.dim(2)})});
}

struct LoadedWeights {
  WeightStore ws;
  NetConfig net;
};

LoadedWeights load_model(const std::string& path) {
  LoadedWeights m;
  m.ws = load_weights(path);
  m.net = infer_config(m.ws);
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string alpha_line(const Domainness& d) {
  return "alpha_levels=" + fixed(d.alpha_levels[0], 4) + "," + fixed(d.alpha_levels[1], 4) +
         "," + fixed(d.alpha_levels[2], 4) + " alpha_mean=" + fixed(d.alpha_mean, 4);
}

struct Options {
  std::string content, style, output, weights, out, out_dir, image, config;
  std::optional<double> alpha;
  std::optional<int> resize;
  int steps = 10;
};

int run_stylize(const Options& o, std::ostream& out) {
  const LoadedWeights m = load_model(o.weights);
  const StylizeResult r =
      dstn_forward({load_rgb(o.content), load_rgb(o.style), o.alpha, o.resize}, m.ws, m.net);
  write_image(r.image, o.out);
  out << alpha_line(r.dom) << '\n';
  return kExitOk;
}

int run_domainness(const Options& o, std::ostream& out) {
  const LoadedWeights m = load_model(o.weights);
  Tensor img = load_rgb(o.image);
  if (o.resize) img = resize_bilinear(img, *o.resize, *o.resize);
  img = reshape(img, Shape{1, 3, img.dim(1), img.dim(2)});
  const Domainness d = indicator_forward(img, m.ws, m.net).item(0);
  out << "alpha_1=" << fixed(d.alpha_levels[0], 4) << " alpha_2=" << fixed(d.alpha_levels[1], 4)
      << " alpha_3=" << fixed(d.alpha_levels[2], 4) << " alpha_mean=" << fixed(d.alpha_mean, 4)
      << '\n';
  return kExitOk;
}

int run_alpha_sweep(const Options& o, std::ostream& out) {
  const LoadedWeights m = load_model(o.weights);
  const Tensor content = load_rgb(o.content);
  const Tensor style = load_rgb(o.style);
  fs::create_directories(o.out_dir);
  for (int k = 0; k <= o.steps; ++k) {
    const double alpha = static_cast<double>(k) / o.steps;
    const StylizeResult r = dstn_forward({content, style, alpha, o.resize}, m.ws, m.net);
    const fs::path path = fs::path(o.out_dir) / sweep_file_name(alpha);
    write_image(r.image, path);
    out << path.string() << '\t' << fixed(alpha, 4) << '\n';
  }
  return kExitOk;
}

int run_metrics(const Options& o, std::ostream& out) {
  const LoadedWeights m = load_model(o.weights);
  const Tensor content = load_rgb(o.content);
  const Tensor style = load_rgb(o.style);
  const Tensor output = load_rgb(o.output);
  const double ssim = metric_edge_ssim(output, content);
  const double style_loss = metric_style_loss(output, style, m.ws, m.net);
  out << o.content << '\t' << o.style << '\t' << fixed(ssim, 6) << '\t' << fixed(style_loss, 6)
      << '\n';
  return kExitOk;
}

int run_inspect(const Options& o, std::ostream& out) {
  const WeightStore ws = load_weights(o.weights);
  for (const auto& [name, t] : ws.entries()) {
    out << name << '\t' << shape_to_string(t.shape()) << '\t' << t.numel() << '\n';
  }
  out << "tensors=" << ws.size() << " total_parameters=" << ws.parameter_count() << '\n';
  return kExitOk;
}

int run_train_toy(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_run_config(o.config);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_text(dir / cfg.outputs.config, to_json(cfg).dump(2) + "\n");

  const fs::path log_path = dir / cfg.outputs.log;
  std::ofstream log(log_path, std::ios::binary);
  check(static_cast<bool>(log), ErrorCode::kIo, "cannot write " + log_path.string());
  const TrainResult r = train(cfg.train, cfg.net, &log);
  log.close();
  check(static_cast<bool>(log), ErrorCode::kIo, "failed writing " + log_path.string());
  save_weights(r.weights, dir / cfg.outputs.weights);

  const LossReport& last = r.history.back();
  const nlohmann::json summary = {
      {"steps", r.history.size()},
      {"final",
       {{"L_bce", last.bce},
        {"L_dlow", last.dlow},
        {"L_p", last.perceptual},
        {"L_cx", last.contextual},
        {"L_tv", last.tv},
        {"L_adv_D", last.adv_d},
        {"L_adv_G", last.adv_g},
        {"alpha_photo_mean", last.alpha_photo_mean},
        {"alpha_art_mean", last.alpha_art_mean}}},
      {"weights", cfg.outputs.weights},
      {"log", cfg.outputs.log},
  };
  write_text(dir / cfg.outputs.summary, summary.dump(2) + "\n");
  out << "trained " << r.history.size() << " steps; weights at "
      << (dir / cfg.outputs.weights).string() << '\n';
  return kExitOk;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string sweep_file_name(double alpha) {
  check(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument,
        "sweep alpha must lie in [0, 1]");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sweep_%03d.ppm", static_cast<int>(std::lround(alpha * 100.0)));
  return buf;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Domain-aware style transfer", "domstyle"};
  app.require_subcommand(1);
  Options o;

  auto* stylize = app.add_subcommand("stylize", "Stylize a content image with a style image");
  stylize->add_option("--content", o.content, "Content image (PPM/PGM)")->required();
  stylize->add_option("--style", o.style, "Style image (PPM/PGM)")->required();
  stylize->add_option("--weights", o.weights, "Weight file")->required();
  stylize->add_option("--out", o.out, "Output PPM")->required();
  stylize->add_option("--alpha", o.alpha, "Domainness override in [0, 1]")
      ->check(CLI::Range(0.0, 1.0).description("in [0, 1]"));
  stylize->add_option("--resize", o.resize, "Resample both images to N x N (multiple of 8)")
      ->check(CLI::PositiveNumber);

  auto* domainness = app.add_subcommand("domainness", "Predict the domainness of an image");
  domainness->add_option("--image", o.image, "Image (PPM/PGM)")->required();
  domainness->add_option("--weights", o.weights, "Weight file")->required();
  domainness->add_option("--resize", o.resize, "Resample to N x N first")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("alpha-sweep", "Stylize over evenly spaced alpha overrides");
  sweep->add_option("--content", o.content, "Content image")->required();
  sweep->add_option("--style", o.style, "Style image")->required();
  sweep->add_option("--weights", o.weights, "Weight file")->required();
  sweep->add_option("--out-dir", o.out_dir, "Output directory")->required();
  sweep->add_option("--steps", o.steps, "Number of intervals K (K + 1 images)")
      ->check(CLI::Range(1, 100));
  sweep->add_option("--resize", o.resize, "Resample both images to N x N first")
      ->check(CLI::PositiveNumber);

  auto* train_toy = app.add_subcommand("train-toy", "Train on synthetic photo/art data");
  train_toy->add_option("--config", o.config, "Run configuration (JSON)")->required();
  train_toy->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* metrics = app.add_subcommand("metrics", "Edge SSIM and style loss of an output");
  metrics->add_option("--content", o.content, "Content image")->required();
  metrics->add_option("--style", o.style, "Style image")->required();
  metrics->add_option("--output", o.output, "Stylized output")->required();
  metrics->add_option("--weights", o.weights, "Weight file")->required();

  auto* weights = app.add_subcommand("weights", "Weight file utilities");
  weights->require_subcommand(1);
  auto* inspect = weights->add_subcommand("inspect", "List tensors and parameter count");
  inspect->add_option("--weights", o.weights, "Weight file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (stylize->parsed()) return run_stylize(o, out);
    if (domainness->parsed()) return run_domainness(o, out);
    if (sweep->parsed()) return run_alpha_sweep(o, out);
    if (train_toy->parsed()) return run_train_toy(o, out);
    if (metrics->parsed()) return run_metrics(o, out);
    if (inspect->parsed()) return run_inspect(o, out);
  } catch (const Error& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace domstyle
