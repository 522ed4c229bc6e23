// Copyright 2026 The INSTA-Kernels Authors.
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

#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "insta/autograd.hpp"
#include "insta/errors.hpp"
#include "insta/fsl/ablation.hpp"
#include "insta/fsl/checkpoint.hpp"
#include "insta/fsl/grad_suite.hpp"
#include "insta/insta.hpp"
#include "insta/kernel_generator.hpp"
#include "insta/rng.hpp"
#include "run_config.hpp"

namespace insta::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGradTolerance = 1e-5;

struct Options {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes, way, shot, threads;
  std::optional<std::string> variant;
  std::string output = "insta-out";
  std::vector<std::string> overrides;
  std::string checkpoint;
  bool random_prototypes = false;
  std::size_t c = 640, c_out = 640, h = 5, w = 5, k = 3, repeats = 20;
};

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string variant_id(fsl::Variant v) { return "(" + std::string(fsl::to_string(v)) + ")"; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

ConfigTree build_tree(const Options& o) {
  ConfigTree tree;
  if (!o.config.empty()) tree.merge_file(o.config);
  tree.merge_env(process_env());
  for (const auto& a : o.overrides) tree.set_override(a);
  if (o.seed) tree.set("seed", std::to_string(*o.seed));
  if (o.episodes) {
    const char* key = o.command == "train" ? "training.episodes"
                      : o.command == "ablate" ? "ablation.eval_episodes"
                                              : "eval.episodes";
    tree.set(key, std::to_string(*o.episodes));
  }
  for (const char* section : {"training", "eval"}) {
    if (o.way) tree.set(std::string(section) + ".way", std::to_string(*o.way));
    if (o.shot) tree.set(std::string(section) + ".shot", std::to_string(*o.shot));
  }
  if (o.variant) tree.set("model.variant", *o.variant);
  if (o.threads) tree.set("eval.threads", std::to_string(*o.threads));
  if (o.random_prototypes) tree.set("eval.random_prototypes", "true");
  return tree;
}

json report_json(const fsl::EvalReport& r) {
  return {{"mean", r.mean}, {"ci95", r.ci95}, {"episode_count", r.episode_count},
          {"eval_stream", hex64(r.stream_fingerprint)}};
}

int cmd_train(const RunSettings& s, const fs::path& dir, json& doc, std::ostream& err) {
  const fsl::SyntheticDataset data(s.dataset);
  fsl::ModelParams model = fsl::ModelParams::create(s.model, s.variant, s.seed);
  const auto t0 = Clock::now();
  const fsl::TrainResult r = fsl::train(model, data, s.training, s.seed, [&](std::size_t e, double loss) {
    if ((e + 1) % 100 == 0) err << "episode " << e + 1 << " loss " << loss << '\n';
  });
  const double wall = seconds_since(t0);
  fsl::save_checkpoint(dir / "checkpoint.txt", model, s.config_hash);

  std::ostringstream curve;
  curve << "episode,loss\n";
  for (std::size_t e = 0; e < r.curve.size(); ++e) curve << e << ',' << json(r.curve[e]).dump() << '\n';
  write_text(dir / "curve.csv", curve.str());

  const std::size_t n = r.curve.size();
  json row = {{"variant", variant_id(s.variant)}, {"episodes", n}};
  if (n >= 2) {
    const std::size_t window = std::min<std::size_t>(100, n / 2);
    row["window"] = window;
    row["initial_window_loss"] = fsl::window_mean(r.curve, 0, window);
    row["final_window_loss"] = fsl::window_mean(r.curve, n - window, n);
  }
  if (n > 0) row["final_loss"] = r.curve.back();
  row["train_stream"] = hex64(r.stream_fingerprint);
  doc["results"] = row;
  doc["results"]["checkpoint"] = "checkpoint.txt";
  doc["results"]["curve_file"] = "curve.csv";
  doc["results"]["curve"] = r.curve;
  doc["rows"] = json::array({row});
  doc["timing"] = {{"wall_seconds", wall}, {"seconds_per_episode", n ? wall / static_cast<double>(n) : 0.0}};
  return kOk;
}

int cmd_eval(const RunSettings& s, const Options& o, json& doc) {
  const fsl::SyntheticDataset data(s.dataset);
  fsl::ModelParams model = fsl::ModelParams::create(s.model, s.variant, s.seed);
  if (!o.checkpoint.empty()) fsl::load_checkpoint(o.checkpoint, model, s.config_hash);
  const auto t0 = Clock::now();
  const fsl::EvalReport r = fsl::evaluate(model, data, s.eval, s.seed);
  const double wall = seconds_since(t0);
  json row = {{"variant", variant_id(s.variant)},
              {"trained", !o.checkpoint.empty()},
              {"random_prototypes", s.eval.random_prototypes},
              {"way", s.eval.way},
              {"shot", s.eval.shot},
              {"queries", s.eval.queries}};
  row.update(report_json(r));
  doc["results"] = row;
  doc["results"]["episode_accuracies"] = r.episode_accuracies;
  doc["rows"] = json::array({row});
  doc["timing"] = {{"wall_seconds", wall}};
  return kOk;
}

int cmd_ablate(const RunSettings& s, json& doc, std::ostream& err) {
  const fsl::SyntheticDataset data(s.dataset);
  const auto t0 = Clock::now();
  const auto rows = fsl::ablate(s.model, data, s.ablation, s.seed, [&](const fsl::AblationRow& row) {
    err << variant_id(row.variant) << " mean " << row.report.mean << " +- " << row.report.ci95 << '\n';
  });
  json out = json::array();
  for (const auto& row : rows) {
    const auto& t = fsl::traits(row.variant);
    json r = {{"variant", variant_id(row.variant)},
              {"model", t.model},
              {"apply_to_support", t.apply_to_support},
              {"apply_to_query", t.apply_to_query}};
    r.update(report_json(row.report));
    r["train_stream"] = hex64(row.train_stream);
    if (!row.curve.empty()) r["final_train_loss"] = row.curve.back();
    out.push_back(r);
  }
  doc["results"] = {{"training_episodes", s.ablation.training.episodes}, {"eval_episodes", s.ablation.eval.episodes}};
  doc["rows"] = out;
  doc["timing"] = {{"wall_seconds", seconds_since(t0)}};
  return kOk;
}

template <typename F>
double time_per_call(std::size_t repeats, F&& f) {
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < repeats; ++i) f();
  return seconds_since(t0) / static_cast<double>(repeats);
}

int cmd_bench(const RunSettings& s, const Options& o, json& doc) {
  if (o.repeats == 0) throw ConfigError("--repeats must be positive");
  const ParamCount pc = param_count_report(o.c, o.c_out, o.h, o.w, o.k);
  Rng rng(derive_seed(s.seed, "bench"));
  const Tensor f = uniform_tensor(Shape{o.c, o.h, o.w}, 1.0, rng);
  const Tensor g = uniform_tensor(Shape{o.c, o.h, o.w, o.k, o.k}, 1.0, rng);
  NoGradGuard no_grad;
  const Var fv(f), gv(g);
  const Tensor adapted = adapt(fv, gv).value();
  const Tensor oracle = dynamic_conv_oracle(f, g);
  double diff = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) diff = std::max(diff, std::abs(adapted[i] - f[i] - oracle[i]));

  const double t_adapt = time_per_call(o.repeats, [&] { (void)adapt(fv, gv); });
  const double t_oracle = time_per_call(o.repeats, [&] { (void)dynamic_conv_oracle(f, g); });
  json row = {{"c", o.c}, {"c_out", o.c_out}, {"h", o.h}, {"w", o.w}, {"k", o.k},
              {"dynamic", pc.dynamic}, {"standard", pc.standard}, {"oracle_max_abs_diff", diff}};
  doc["results"] = row;
  doc["rows"] = json::array({row});
  doc["timing"] = {{"repeats", o.repeats},
                   {"adapt_seconds_per_call", t_adapt},
                   {"oracle_seconds_per_call", t_oracle},
                   {"adapt_calls_per_second", 1.0 / t_adapt},
                   {"oracle_calls_per_second", 1.0 / t_oracle}};
  return kOk;
}

int cmd_gradcheck(const RunSettings& s, json& doc) {
  const auto t0 = Clock::now();
  const auto checks = fsl::run_grad_suite(s.seed);
  json all = json::array();
  json rows = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    all.push_back({{"module", c.module}, {"name", c.name}, {"max_rel_err", c.max_rel_err}});
    auto it = std::find_if(rows.begin(), rows.end(), [&](const json& r) { return r["module"] == c.module; });
    if (it == rows.end()) {
      rows.push_back({{"module", c.module}, {"checks", 0}, {"max_rel_err", 0.0}, {"passed", true}});
      it = rows.end() - 1;
    }
    (*it)["checks"] = (*it)["checks"].get<std::size_t>() + 1;
    (*it)["max_rel_err"] = std::max((*it)["max_rel_err"].get<double>(), c.max_rel_err);
    (*it)["passed"] = (*it)["max_rel_err"].get<double>() < kGradTolerance;
    ok = ok && c.max_rel_err < kGradTolerance;
  }
  doc["results"] = {{"tolerance", kGradTolerance}, {"passed", ok}, {"checks", all}};
  doc["rows"] = rows;
  doc["timing"] = {{"wall_seconds", seconds_since(t0)}};
  return ok ? kOk : kNumericError;
}

std::string csv_field(const json& v) {
  if (!v.is_string()) return v.dump();
  const auto s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

std::string csv_from_json(const json& doc) {
  if (!doc.contains("rows") || !doc["rows"].is_array() || doc["rows"].empty()) return "";
  std::vector<std::string> header;
  for (const auto& row : doc["rows"]) {
    for (const auto& [key, _] : row.items()) {
      if (std::find(header.begin(), header.end(), key) == header.end()) header.push_back(key);
    }
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : doc["rows"]) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      out << (i ? "," : "");
      if (row.contains(header[i])) out << csv_field(row[header[i]]);
    }
    out << '\n';
  }
  return out.str();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Instance and task-aware dynamic kernels for few-shot learning", "insta"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  app.add_option("--config", o.config, "YAML config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--episodes", o.episodes, "training episodes (train) or evaluation episodes (eval, ablate)");
  app.add_option("--way", o.way, "classes per episode (training and evaluation)");
  app.add_option("--shot", o.shot, "support samples per class (training and evaluation)");
  app.add_option("--variant", o.variant, "ablation variant i..ix");
  app.add_option("--output", o.output, "output directory")->capture_default_str();
  app.add_option("--set", o.overrides, "config override section.key=value (repeatable)");
  app.add_option("--threads", o.threads, "evaluation worker threads");

  app.add_subcommand("train", "episodic training; writes checkpoint.txt and curve.csv");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or an untrained model");
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint written by train")->check(CLI::ExistingFile);
  eval->add_flag("--random-prototypes", o.random_prototypes, "score against random prototypes (chance control)");
  app.add_subcommand("ablate", "train and evaluate every variant on shared episode streams");
  auto* bench = app.add_subcommand("bench", "parameter counts and adapt vs oracle throughput");
  bench->set_help_flag("--help", "Print this help message and exit");
  bench->add_option("--c", o.c, "input channels")->capture_default_str();
  bench->add_option("--c-out", o.c_out, "output channels of the static comparison")->capture_default_str();
  bench->add_option("--h", o.h, "feature height")->capture_default_str();
  bench->add_option("--w", o.w, "feature width")->capture_default_str();
  bench->add_option("--k", o.k, "kernel size")->capture_default_str();
  bench->add_option("--repeats", o.repeats, "timed calls per implementation")->capture_default_str();
  app.add_subcommand("gradcheck", "finite-difference gradient suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    const ConfigTree tree = build_tree(o);
    const RunSettings s = materialize(tree);
    const fs::path dir(o.output);
    fs::create_directories(dir);
    write_text(dir / "config.effective.yaml", tree.emit());

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = o.command;
    doc["seed"] = s.seed;
    doc["config_hash"] = hex64(s.config_hash);
    int code = kOk;
    if (o.command == "train") code = cmd_train(s, dir, doc, err);
    else if (o.command == "eval") code = cmd_eval(s, o, doc);
    else if (o.command == "ablate") code = cmd_ablate(s, doc, err);
    else if (o.command == "bench") code = cmd_bench(s, o, doc);
    else code = cmd_gradcheck(s, doc);

    const std::string text = doc.dump(2) + "\n";
    write_text(dir / "result.json", text);
    write_text(dir / "summary.csv", csv_from_json(doc));
    out << text;
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    err << "invalid setting: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace insta::cli
