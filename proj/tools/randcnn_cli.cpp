// Copyright 2026 The randcnn Authors. All Rights Reserved.
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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "randcnn/randcnn.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliFailure : std::runtime_error {
  CliFailure(int code, const std::string& message)
      : std::runtime_error(message), exit_code(code) {}
  int exit_code;
};

void check(randcnn_status status, const std::string& what) {
  if (status == RANDCNN_OK) return;
  throw CliFailure(1, what + ": " + randcnn_status_name(status) + ": " +
                          randcnn_last_error());
}

struct ImageDeleter {
  void operator()(randcnn_image* p) const { randcnn_image_free(p); }
};
struct WeightsDeleter {
  void operator()(randcnn_weights* p) const { randcnn_weights_free(p); }
};
struct ResultDeleter {
  void operator()(randcnn_result* p) const { randcnn_result_free(p); }
};
struct ReportDeleter {
  void operator()(randcnn_stack_report* p) const { randcnn_stack_report_free(p); }
};
using ImagePtr = std::unique_ptr<randcnn_image, ImageDeleter>;
using WeightsPtr = std::unique_ptr<randcnn_weights, WeightsDeleter>;
using ResultPtr = std::unique_ptr<randcnn_result, ResultDeleter>;
using ReportPtr = std::unique_ptr<randcnn_stack_report, ReportDeleter>;

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure(1, "cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<std::string> vgg19_layers() {
  std::vector<std::string> out;
  for (size_t i = 0; i < randcnn_vgg19_layer_count(1); ++i) {
    out.emplace_back(randcnn_vgg19_layer_name(1, i));
  }
  return out;
}

std::string deepest(const std::vector<std::string>& layers) {
  const auto all = vgg19_layers();
  std::ptrdiff_t best = -1;
  for (const auto& l : layers) {
    const auto it = std::find(all.begin(), all.end(), l);
    if (it == all.end()) throw CliFailure(2, "--layer: unknown layer '" + l + "'");
    best = std::max(best, it - all.begin());
  }
  return all[static_cast<size_t>(best)];
}

// Flags shared by every optimization command.
struct RunFlags {
  std::string weights;
  std::optional<std::uint64_t> seed;
  double sigma = 0.015;
  std::uint32_t iters = 500;
  std::uint32_t history = 10;
  std::uint32_t size = 0;
  std::string out;
  std::uint32_t snapshots_every = 50;
  bool no_snapshots = false;
  std::string precision = "f32";
  std::string trace;
  std::optional<std::uint64_t> init_seed;
  std::vector<double> mean_rgb;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool weights_or_seed) {
  if (weights_or_seed) {
    auto* w = cmd->add_option("--weights", f.weights, "Weight file (RWNW)");
    auto* s = cmd->add_option("--seed", f.seed, "Draw pure-random weights from this seed");
    w->excludes(s);
    s->excludes(w);
  } else {
    cmd->add_option("--seed", f.seed, "Base seed");
  }
  cmd->add_option("--sigma", f.sigma, "Std. deviation of random weights")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--iters", f.iters, "Maximum L-BFGS iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--history", f.history, "L-BFGS history length")->check(CLI::PositiveNumber);
  cmd->add_option("--size", f.size, "Resize inputs to SIZE x SIZE")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--snapshots-every", f.snapshots_every, "Snapshot period in iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-snapshots", f.no_snapshots, "Disable progress snapshots");
  cmd->add_option("--precision", f.precision, "Arithmetic precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  cmd->add_option("--trace", f.trace, "Loss-trace CSV path (default OUT/trace.csv)");
  cmd->add_option("--init-seed", f.init_seed, "White-noise seed (default: --seed or 0)");
  cmd->add_option("--mean-rgb", f.mean_rgb, "Per-channel mean (3 values)")->expected(3);
}

randcnn_task_options task_options(const RunFlags& f) {
  randcnn_task_options o;
  randcnn_task_options_default(&o);
  o.max_iters = f.iters;
  o.history = f.history;
  o.init_seed = f.init_seed.value_or(f.seed.value_or(0));
  o.precision = f.precision == "f64" ? RANDCNN_F64 : RANDCNN_F32;
  o.snapshot_every = f.no_snapshots ? 0 : f.snapshots_every;
  if (!f.mean_rgb.empty()) {
    for (int c = 0; c < 3; ++c) o.mean_rgb[c] = f.mean_rgb[c];
  }
  return o;
}

// Collects everything needed to repeat a run.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["argv"] = argv;
    doc_["version"] = randcnn_version();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::object();
  }

  json& operator[](const char* key) { return doc_[key]; }

  void run_flags(const RunFlags& f, const randcnn_task_options& o) {
    json flags;
    flags["weights"] = f.weights.empty() ? json(nullptr) : json(f.weights);
    flags["seed"] = f.seed ? json(*f.seed) : json(nullptr);
    flags["sigma"] = f.sigma;
    flags["iters"] = o.max_iters;
    flags["history"] = o.history;
    flags["tolerance"] = o.tolerance;
    flags["wolfe_c1"] = o.wolfe_c1;
    flags["wolfe_c2"] = o.wolfe_c2;
    flags["size"] = f.size;
    flags["out"] = f.out;
    flags["snapshots_every"] = o.snapshot_every;
    flags["precision"] = f.precision;
    flags["init_seed"] = o.init_seed;
    flags["noise"] = {{"distribution", "uniform"}, {"amplitude", o.noise_amplitude}};
    flags["mean_rgb"] = {o.mean_rgb[0], o.mean_rgb[1], o.mean_rgb[2]};
    doc_["flags"] = flags;
  }

  void input(const std::string& role, const fs::path& path) {
    doc_["inputs"][role] = {{"path", path.string()}, {"fnv1a", fnv1a_file(path)}};
  }

  void output(const std::string& role, const fs::path& path) {
    doc_["outputs"][role] = {{"path", path.string()}, {"fnv1a", fnv1a_file(path)}};
  }

  void result(const randcnn_result* r, const std::string& key = "") {
    json factors = json::array();
    for (size_t i = 0; i < randcnn_result_factor_count(r); ++i) {
      factors.push_back({{"layer", randcnn_result_factor_layer(r, i)},
                         {"kind", randcnn_result_factor_kind(r, i)},
                         {"value", randcnn_result_factor_value(r, i)}});
    }
    double content = 0, texture = 0, tv = 0;
    randcnn_result_terms(r, &content, &texture, &tv);
    const size_t n = randcnn_result_trace_length(r);
    json summary = {
        {"factors", factors},
        {"termination", randcnn_result_termination(r)},
        {"iterations", n > 0 ? randcnn_result_trace_row(r, n - 1).iteration : 0},
        {"initial_loss", n > 0 ? randcnn_result_trace_row(r, 0).loss : 0.0},
        {"final_loss", n > 0 ? randcnn_result_trace_row(r, n - 1).loss : 0.0},
        {"final_terms", {{"content", content}, {"texture", texture}, {"tv", tv}}}};
    if (key.empty()) {
      doc_["result"] = summary;
    } else {
      doc_["results"][key] = summary;
    }
  }

  void write(const fs::path& path) {
    const auto ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    doc_["timing_ms"] = ms;
    std::ofstream out(path);
    if (!out) throw CliFailure(1, "cannot write " + path.string());
    out << doc_.dump(2) << "\n";
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

ImagePtr load(const std::string& path, std::uint32_t size) {
  randcnn_image* img = nullptr;
  check(randcnn_image_load(path.c_str(), size, size, &img), "loading " + path);
  return ImagePtr(img);
}

// Loads --weights or draws pure-random weights covering `layer`.
WeightsPtr obtain_weights(const RunFlags& f, const std::string& layer, Manifest& m) {
  randcnn_weights* w = nullptr;
  if (!f.weights.empty()) {
    check(randcnn_weights_load(f.weights.c_str(), &w), "loading " + f.weights);
    WeightsPtr owned(w);
    m.input("weights", f.weights);
    std::uint64_t seed = 0;
    double sigma = 0;
    randcnn_scheme scheme{};
    randcnn_weights_provenance(w, &seed, &sigma, &scheme);
    m["weights"] = {{"source", "file"}, {"seed", seed}, {"sigma", sigma},
                    {"scheme", static_cast<int>(scheme)}};
    return owned;
  }
  if (!f.seed) throw CliFailure(2, "exactly one of --weights or --seed is required");
  check(randcnn_weights_random(layer.c_str(), f.sigma, *f.seed, &w), "drawing weights");
  m["weights"] = {{"source", "pure-random"}, {"seed", *f.seed}, {"sigma", f.sigma}};
  return WeightsPtr(w);
}

struct SnapshotSink {
  fs::path dir;
  std::string prefix;
  std::vector<fs::path> written;
  std::string error;
};

void on_snapshot(std::uint32_t iteration, const randcnn_image* image, void* user) {
  auto* sink = static_cast<SnapshotSink*>(user);
  char name[64];
  std::snprintf(name, sizeof name, "%siter_%05u.png", sink->prefix.c_str(), iteration);
  const fs::path path = sink->dir / name;
  if (randcnn_image_save(image, path.string().c_str()) == RANDCNN_OK) {
    sink->written.push_back(path);
  } else if (sink->error.empty()) {
    sink->error = randcnn_last_error();
  }
}

// Writes image + trace for one result and records them.
void emit(const randcnn_result* r, const fs::path& png, const fs::path& csv,
          const std::string& role, Manifest& m) {
  check(randcnn_image_save(randcnn_result_image(r), png.string().c_str()),
        "writing " + png.string());
  check(randcnn_result_write_trace(r, csv.string().c_str()), "writing " + csv.string());
  m.output(role, png);
  m["traces"][role] = csv.string();
  const size_t n = randcnn_result_trace_length(r);
  std::printf("%s: %zu iterations, loss %.6g -> %.6g (%s) -> %s\n", role.c_str(),
              n > 0 ? n - 1 : 0, n > 0 ? randcnn_result_trace_row(r, 0).loss : 0.0,
              n > 0 ? randcnn_result_trace_row(r, n - 1).loss : 0.0,
              randcnn_result_termination(r), png.string().c_str());
}

void record_snapshots(const SnapshotSink& sink, Manifest& m) {
  if (!sink.error.empty()) throw CliFailure(1, "writing snapshot: " + sink.error);
  for (const auto& p : sink.written) m.output("snapshot:" + p.filename().string(), p);
}

fs::path prepare_out(const std::string& out) {
  fs::create_directories(out);
  return fs::path(out);
}

fs::path trace_path(const RunFlags& f, const fs::path& out) {
  return f.trace.empty() ? out / "trace.csv" : fs::path(f.trace);
}

struct InvertCmd {
  RunFlags run;
  std::string image;
  std::string layer = "conv1_1";
};

void cmd_invert(const InvertCmd& c, const std::vector<std::string>& argv) {
  Manifest m("invert", argv);
  const auto top = deepest({c.layer});
  const auto opts = task_options(c.run);
  m.run_flags(c.run, opts);
  m["layers"] = {c.layer};
  auto img = load(c.image, c.run.size);
  m.input("image", c.image);
  check(randcnn_check_input(top.c_str(), img.get()), "invert");
  auto w = obtain_weights(c.run, top, m);
  const auto out = prepare_out(c.run.out);
  SnapshotSink sink{out, "", {}, {}};
  randcnn_result* r = nullptr;
  check(randcnn_invert(w.get(), img.get(), c.layer.c_str(), &opts, on_snapshot, &sink, &r),
        "invert");
  ResultPtr result(r);
  emit(r, out / "output.png", trace_path(c.run, out), "output", m);
  record_snapshots(sink, m);
  m.result(r);
  m.write(out / "manifest.json");
}

struct TextureCmd {
  RunFlags run;
  std::string image;
  std::vector<std::string> layers{"conv1_1", "conv2_1", "conv3_1", "conv4_1"};
  bool ladder = false;
};

void cmd_texture(const TextureCmd& c, const std::vector<std::string>& argv) {
  Manifest m("texture", argv);
  const auto top = deepest(c.layers);
  const auto opts = task_options(c.run);
  m.run_flags(c.run, opts);
  m["layers"] = c.layers;
  m["ladder"] = c.ladder;
  auto img = load(c.image, c.run.size);
  m.input("image", c.image);
  check(randcnn_check_input(top.c_str(), img.get()), "texture");
  auto w = obtain_weights(c.run, top, m);
  const auto out = prepare_out(c.run.out);

  const size_t first = c.ladder ? 1 : c.layers.size();
  for (size_t n = first; n <= c.layers.size(); ++n) {
    std::vector<const char*> names;
    for (size_t i = 0; i < n; ++i) names.push_back(c.layers[i].c_str());
    const std::string role = c.ladder ? "ladder_" + std::to_string(n) : "output";
    SnapshotSink sink{out, c.ladder ? role + "_" : "", {}, {}};
    randcnn_result* r = nullptr;
    check(randcnn_texture(w.get(), img.get(), names.data(), names.size(), &opts,
                          on_snapshot, &sink, &r),
          "texture");
    ResultPtr result(r);
    const fs::path csv = c.ladder ? out / (role + "_trace.csv") : trace_path(c.run, out);
    emit(r, out / (role + ".png"), csv, role, m);
    record_snapshots(sink, m);
    m.result(r, role);
  }
  m.write(out / "manifest.json");
}

struct StyleCmd {
  RunFlags run;
  std::string content;
  std::string style;
  std::string content_layer = "conv2_2";
  std::vector<std::string> style_layers{"conv1_1", "conv2_1", "conv3_1", "conv4_1",
                                        "conv5_1"};
  double alpha = 100.0;
  double beta = 1.0;
  double gamma = 1000.0;
};

void cmd_style(const StyleCmd& c, const std::vector<std::string>& argv) {
  Manifest m("style", argv);
  auto all = c.style_layers;
  all.push_back(c.content_layer);
  const auto top = deepest(all);
  const auto opts = task_options(c.run);
  m.run_flags(c.run, opts);
  m["layers"] = {{"content", c.content_layer}, {"style", c.style_layers}};
  m["weights_ratio"] = {{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}};
  auto content = load(c.content, c.run.size);
  auto style = load(c.style, c.run.size);
  m.input("content", c.content);
  m.input("style", c.style);
  check(randcnn_check_input(top.c_str(), content.get()), "style");
  auto w = obtain_weights(c.run, top, m);
  const auto out = prepare_out(c.run.out);
  std::vector<const char*> names;
  for (const auto& l : c.style_layers) names.push_back(l.c_str());
  SnapshotSink sink{out, "", {}, {}};
  randcnn_result* r = nullptr;
  check(randcnn_style(w.get(), content.get(), style.get(), c.content_layer.c_str(),
                      names.data(), names.size(), c.alpha, c.beta, c.gamma, &opts,
                      on_snapshot, &sink, &r),
        "style");
  ResultPtr result(r);
  emit(r, out / "output.png", trace_path(c.run, out), "output", m);
  record_snapshots(sink, m);
  m.result(r);
  m.write(out / "manifest.json");
}

struct StackCmd {
  std::string image;
  std::string out;
  std::string layer = "conv5_4";
  std::uint32_t k = 5;
  double sigma = 0.015;
  std::uint64_t seed = 0;
  std::uint32_t iters = 100;
  std::uint32_t size = 128;
  std::vector<double> mean_rgb;
};

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.filename().string() + suffix);
}

void cmd_stack(const StackCmd& c, const std::vector<std::string>& argv) {
  Manifest m("stack", argv);
  randcnn_task_options opts;
  randcnn_task_options_default(&opts);
  opts.max_iters = c.iters;
  opts.init_seed = c.seed;
  if (!c.mean_rgb.empty()) {
    for (int i = 0; i < 3; ++i) opts.mean_rgb[i] = c.mean_rgb[i];
  }
  m["flags"] = {{"image", c.image}, {"out", c.out},   {"layer", c.layer},
                {"k", c.k},         {"sigma", c.sigma}, {"seed", c.seed},
                {"iters", c.iters}, {"size", c.size},
                {"mean_rgb", {opts.mean_rgb[0], opts.mean_rgb[1], opts.mean_rgb[2]}}};
  deepest({c.layer});
  auto img = load(c.image, c.size);
  m.input("reference", c.image);
  const fs::path out(c.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  randcnn_weights* w = nullptr;
  randcnn_stack_report* rep = nullptr;
  check(randcnn_stack(img.get(), fs::path(c.image).filename().string().c_str(),
                      c.layer.c_str(), c.k, c.sigma, c.seed, &opts, &w, &rep),
        "stack");
  WeightsPtr weights(w);
  ReportPtr report(rep);
  check(randcnn_weights_save(w, out.string().c_str()), "writing " + out.string());
  const fs::path report_path = sibling(out, ".report.json");
  {
    std::ofstream f(report_path);
    if (!f) throw CliFailure(1, "cannot write " + report_path.string());
    f << randcnn_stack_report_json(rep) << "\n";
  }
  m.output("weights", out);
  m.output("report", report_path);
  const auto parsed = json::parse(randcnn_stack_report_json(rep));
  for (const auto& l : parsed["layers"]) {
    std::printf("%s: chose candidate %s\n", l["layer"].get<std::string>().c_str(),
                l["chosen_index"].dump().c_str());
  }
  m.write(sibling(out, ".manifest.json"));
  std::printf("wrote %s\n", out.string().c_str());
}

struct GradcheckCmd {
  std::uint64_t seed = 0;
  std::uint32_t depth = 4;
  std::uint32_t size = 16;
  std::string precision = "f64";
  bool inject_fault = false;
  std::string out;
};

void cmd_gradcheck(const GradcheckCmd& c, const std::vector<std::string>& argv) {
  Manifest m("gradcheck", argv);
  m["flags"] = {{"seed", c.seed}, {"depth", c.depth}, {"size", c.size},
                {"precision", c.precision}, {"inject_fault", c.inject_fault}};
  randcnn_gradcheck_report rep{};
  const auto status = randcnn_gradcheck(
      c.seed, c.depth, c.size, c.precision == "f64" ? RANDCNN_F64 : RANDCNN_F32,
      c.inject_fault ? 1 : 0, &rep);
  if (status != RANDCNN_OK && status != RANDCNN_THRESHOLD_BREACHED) {
    check(status, "gradcheck");
  }
  std::printf("content   %.3e\ntexture   %.3e\ntv        %.3e\ncombined  %.3e\n",
              rep.content, rep.texture, rep.tv, rep.combined);
  std::printf("worst relative error %.3e (threshold %.0e): %s\n", rep.worst,
              rep.threshold, rep.passed ? "PASS" : "FAIL");
  m["result"] = {{"content", rep.content}, {"texture", rep.texture}, {"tv", rep.tv},
                 {"combined", rep.combined}, {"worst", rep.worst},
                 {"threshold", rep.threshold}, {"passed", rep.passed != 0}};
  if (!c.out.empty()) m.write(prepare_out(c.out) / "manifest.json");
  if (!rep.passed) throw CliFailure(1, randcnn_last_error());
}

struct VarianceCmd {
  RunFlags run;
  std::string image;
  std::string layer = "conv3_1";
  std::vector<std::string> schemes;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

void cmd_variance(const VarianceCmd& c, const std::vector<std::string>& argv) {
  Manifest m("variance", argv);
  const auto opts = task_options(c.run);
  m.run_flags(c.run, opts);
  m["layers"] = {c.layer};
  m["seeds"] = c.seeds;
  deepest({c.layer});
  auto img = load(c.image, c.run.size);
  m.input("image", c.image);
  std::vector<WeightsPtr> owned;
  std::vector<const randcnn_weights*> handles;
  std::vector<std::string> names;
  for (const auto& s : c.schemes) {
    if (s == "random") {
      handles.push_back(nullptr);
      names.push_back("pure-random");
      continue;
    }
    randcnn_weights* w = nullptr;
    check(randcnn_weights_load(s.c_str(), &w), "loading " + s);
    owned.emplace_back(w);
    handles.push_back(w);
    names.push_back(s);
    m.input("scheme:" + s, s);
  }
  std::vector<double> losses(handles.size() * c.seeds.size());
  check(randcnn_compare_variance(img.get(), c.layer.c_str(), handles.data(),
                                 handles.size(), c.seeds.data(), c.seeds.size(),
                                 c.run.sigma, &opts, losses.data()),
        "variance");
  const auto out = prepare_out(c.run.out);
  const fs::path csv = out / "variance.csv";
  {
    std::ofstream f(csv);
    f << "scheme,seed,loss\n";
    char buf[64];
    for (size_t i = 0; i < handles.size(); ++i) {
      for (size_t j = 0; j < c.seeds.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", losses[i * c.seeds.size() + j]);
        f << names[i] << "," << c.seeds[j] << "," << buf << "\n";
      }
    }
  }
  json summary = json::object();
  for (size_t i = 0; i < handles.size(); ++i) {
    const auto b = losses.begin() + static_cast<std::ptrdiff_t>(i * c.seeds.size());
    const auto e = b + static_cast<std::ptrdiff_t>(c.seeds.size());
    double mean = 0;
    for (auto it = b; it != e; ++it) mean += *it;
    mean /= static_cast<double>(c.seeds.size());
    summary[names[i]] = {{"min", *std::min_element(b, e)},
                         {"max", *std::max_element(b, e)},
                         {"mean", mean}};
    std::printf("%s: mean %.6g min %.6g max %.6g\n", names[i].c_str(), mean,
                *std::min_element(b, e), *std::max_element(b, e));
  }
  m["summary"] = summary;
  m.output("table", csv);
  m.write(out / "manifest.json");
}

int run(const std::vector<std::string>& argv);

struct ReplayCmd {
  std::string manifest;
  std::string out;
};

fs::path manifest_location(const json& doc) {
  const std::string command = doc["command"];
  const std::string out = doc["flags"]["out"];
  if (command == "stack") return sibling(fs::path(out), ".manifest.json");
  return fs::path(out) / "manifest.json";
}

void cmd_replay(const ReplayCmd& c) {
  std::ifstream in(c.manifest);
  if (!in) throw CliFailure(1, "cannot read " + c.manifest);
  const json original = json::parse(in);
  auto argv = original["argv"].get<std::vector<std::string>>();
  if (argv.empty() || argv[0] == "replay") throw CliFailure(1, "manifest has no command");
  if (!c.out.empty()) {
    const auto it = std::find(argv.begin(), argv.end(), "--out");
    if (it == argv.end() || it + 1 == argv.end()) {
      throw CliFailure(1, "manifest command has no --out to redirect");
    }
    *(it + 1) = c.out;
  }
  const int code = run(argv);
  if (code != 0) throw CliFailure(code, "replayed command failed");
  std::ifstream again_in(manifest_location({{"command", argv[0]},
                                            {"flags", {{"out", c.out.empty()
                                                                   ? original["flags"]["out"]
                                                                   : json(c.out)}}}}));
  const json again = json::parse(again_in);
  bool same = true;
  for (const auto& [role, entry] : original["outputs"].items()) {
    const auto& other = again["outputs"];
    const bool match = other.contains(role) && other[role]["fnv1a"] == entry["fnv1a"];
    std::printf("%-28s %s\n", role.c_str(), match ? "identical" : "DIFFERS");
    same = same && match;
  }
  if (!same) throw CliFailure(1, "replay produced different outputs");
}

int run(const std::vector<std::string>& argv) {
  CLI::App app{"Random-weight VGG-19 feature inversion, texture synthesis and style transfer"};
  app.name("randcnn");
  app.set_version_flag("--version", std::string(randcnn_version()));
  app.require_subcommand(1);
  std::uint32_t threads = 0;
  app.add_option("--threads", threads, "Thread cap (overrides RANDCNN_THREADS)");

  InvertCmd invert;
  auto* ci = app.add_subcommand("invert", "Reconstruct an image from one layer");
  ci->add_option("image", invert.image, "Source image (PNG or PPM)")
      ->required()
      ->check(CLI::ExistingFile);
  ci->add_option("--layer", invert.layer, "Layer to invert");
  add_run_flags(ci, invert.run, true);

  TextureCmd texture;
  auto* ct = app.add_subcommand("texture", "Synthesize a texture from Gram statistics");
  ct->add_option("image", texture.image, "Texture image")->required()->check(CLI::ExistingFile);
  ct->add_option("--layers", texture.layers, "Layers whose Gram matrices are matched")
      ->delimiter(',');
  ct->add_flag("--ladder", texture.ladder, "One output per prefix of --layers");
  add_run_flags(ct, texture.run, true);

  StyleCmd style;
  auto* cs = app.add_subcommand("style", "Transfer the style of one image onto another");
  cs->add_option("content", style.content, "Content image")
      ->required()
      ->check(CLI::ExistingFile);
  cs->add_option("style", style.style, "Style image")->required()->check(CLI::ExistingFile);
  cs->add_option("--layer", style.content_layer, "Content layer");
  cs->add_option("--layers", style.style_layers, "Style layers")->delimiter(',');
  cs->add_option("--alpha", style.alpha, "Content weight")->check(CLI::NonNegativeNumber);
  cs->add_option("--beta", style.beta, "Style weight")->check(CLI::NonNegativeNumber);
  cs->add_option("--gamma", style.gamma, "Total-variation weight")
      ->check(CLI::NonNegativeNumber);
  add_run_flags(cs, style.run, true);

  StackCmd stack;
  auto* ck = app.add_subcommand("stack", "Build a stacked random-weight network");
  ck->add_option("image", stack.image, "Reference image")->required()->check(CLI::ExistingFile);
  ck->add_option("--out", stack.out, "Weight file to write")->required();
  ck->add_option("--layer", stack.layer, "Deepest conv layer to build");
  ck->add_option("--k", stack.k, "Candidates per layer")->check(CLI::PositiveNumber);
  ck->add_option("--sigma", stack.sigma, "Std. deviation of random weights")
      ->check(CLI::PositiveNumber);
  ck->add_option("--seed", stack.seed, "Base seed");
  ck->add_option("--iters", stack.iters, "L-BFGS iterations per candidate")
      ->check(CLI::PositiveNumber);
  ck->add_option("--size", stack.size, "Scoring resolution")->check(CLI::PositiveNumber);
  ck->add_option("--mean-rgb", stack.mean_rgb, "Per-channel mean (3 values)")->expected(3);

  GradcheckCmd grad;
  auto* cg = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  cg->add_option("--seed", grad.seed, "Seed for the random network");
  cg->add_option("--depth", grad.depth, "Number of conv layers")->check(CLI::Range(1, 6));
  cg->add_option("--size", grad.size, "Input size")->check(CLI::Range(4, 32));
  cg->add_option("--precision", grad.precision, "Arithmetic precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  cg->add_flag("--inject-fault", grad.inject_fault)->group("");
  cg->add_option("--out", grad.out, "Directory for the manifest");

  VarianceCmd variance;
  auto* cv = app.add_subcommand("variance", "Spread of inversion losses across seeds");
  cv->add_option("image", variance.image, "Image to invert")
      ->required()
      ->check(CLI::ExistingFile);
  cv->add_option("--layer", variance.layer, "Layer to invert");
  cv->add_option("--schemes", variance.schemes,
                 "Weight files, or 'random' for per-seed pure-random weights")
      ->delimiter(',')
      ->required();
  cv->add_option("--seeds", variance.seeds, "Run seeds")->delimiter(',');
  add_run_flags(cv, variance.run, false);

  ReplayCmd replay;
  auto* cr = app.add_subcommand("replay", "Re-run a manifest and compare output hashes");
  cr->add_option("manifest", replay.manifest, "manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  cr->add_option("--out", replay.out, "Redirect outputs to another location");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (threads > 0) randcnn_set_threads(threads);

  try {
    if (ci->parsed()) {
      cmd_invert(invert, argv);
    } else if (ct->parsed()) {
      cmd_texture(texture, argv);
    } else if (cs->parsed()) {
      cmd_style(style, argv);
    } else if (ck->parsed()) {
      cmd_stack(stack, argv);
    } else if (cg->parsed()) {
      cmd_gradcheck(grad, argv);
    } else if (cv->parsed()) {
      if (variance.seeds.size() < 2) throw CliFailure(2, "--seeds: need at least two seeds");
      cmd_variance(variance, argv);
    } else if (cr->parsed()) {
      cmd_replay(replay);
    }
  } catch (const CliFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}
