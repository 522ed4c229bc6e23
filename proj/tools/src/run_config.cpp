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

#include "run_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "insta/errors.hpp"
#include "insta/fsl/checkpoint.hpp"

extern char** environ;

namespace insta::cli {

namespace {

constexpr const char* kDefaults = R"(seed: 0
dataset:
  class_count: 10
  image_channels: 3
  image_height: 40
  image_width: 40
  samples_per_class: 200
  min_cycles: 2.0
  max_cycles: 6.0
  orientation_jitter: 0.08
  min_blob_radius: 0.08
  max_blob_radius: 0.22
  color_jitter: 0.35
  min_contrast: 0.4
  distractors: 2
  noise_std: 0.0
  seed: 0
model:
  variant: ix
  widths: [16, 32, 32, 32]
  pool: [true, true, true, false]
  kernel_size: 3
  sigma: 0.2
  frequency_groups: 16
  frequencies: []
  temperature: 64.0
  bn_affine: true
training:
  episodes: 500
  way: 5
  shot: 5
  queries: 5
  learning_rate: 0.01
  adaptation_lr_ratio: 25.0
  grad_clip: 5.0
eval:
  episodes: 600
  way: 5
  shot: 5
  queries: 15
  random_prototypes: false
  threads: 1
ablation:
  variants: [i, ii, iii, iv, v, vi, vii, viii, ix]
  training_episodes: 500
  eval_episodes: 600
)";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <typename T>
T get(const YAML::Node& root, const std::string& section, const std::string& key) {
  const YAML::Node node = section.empty() ? root[key] : root[section][key];
  const std::string name = section.empty() ? key : section + "." + key;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + name + "' has an invalid value");
  }
}

std::size_t get_count(const YAML::Node& root, const std::string& section, const std::string& key) {
  const auto v = get<long long>(root, section, key);
  if (v < 0) throw ConfigError("config key '" + section + "." + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

ConfigTree::ConfigTree() : root_(YAML::Load(kDefaults)) {}

YAML::Node ConfigTree::slot(const std::string& dotted, const std::string& origin) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) {
    if (!root_[dotted] || root_[dotted].IsMap()) throw ConfigError(origin + ": unknown config key '" + dotted + "'");
    return root_[dotted];
  }
  const std::string section = dotted.substr(0, dot), key = dotted.substr(dot + 1);
  if (!root_[section] || !root_[section].IsMap() || !root_[section][key]) {
    throw ConfigError(origin + ": unknown config key '" + dotted + "'");
  }
  return root_[section][key];
}

void ConfigTree::set(const std::string& dotted, const std::string& value) {
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse value for '" + dotted + "': " + e.what());
  }
  YAML::Node target = slot(dotted, "override");
  target = parsed;
}

void ConfigTree::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void ConfigTree::merge_yaml(const YAML::Node& doc, const std::string& origin) {
  if (!doc || doc.IsNull()) return;
  if (!doc.IsMap()) throw ConfigError(origin + ": top level must be a mapping");
  for (const auto& entry : doc) {
    const auto name = entry.first.as<std::string>();
    if (entry.second.IsMap()) {
      if (!root_[name] || !root_[name].IsMap()) throw ConfigError(origin + ": unknown config section '" + name + "'");
      for (const auto& kv : entry.second) {
        YAML::Node target = slot(name + "." + kv.first.as<std::string>(), origin);
        target = kv.second;
      }
    } else {
      YAML::Node target = slot(name, origin);
      target = entry.second;
    }
  }
}

void ConfigTree::merge_file(const std::filesystem::path& path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config file " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  merge_yaml(doc, path.string());
}

void ConfigTree::merge_env(const std::map<std::string, std::string>& env) {
  for (const auto& [name, value] : env) {
    if (name.rfind("INSTA_", 0) != 0) continue;
    const std::string rest = lower(name.substr(6));
    const auto sep = rest.find("__");
    if (sep == std::string::npos) {
      if (rest == "seed") set("seed", value);
      continue;
    }
    set(rest.substr(0, sep) + "." + rest.substr(sep + 2), value);
  }
}

std::string ConfigTree::emit() const {
  YAML::Emitter out;
  out << root_;
  return std::string(out.c_str()) + "\n";
}

std::string ConfigTree::emit_section(const std::string& section) const {
  YAML::Emitter out;
  out << root_[section];
  return out.c_str();
}

RunSettings materialize(const ConfigTree& tree) {
  const YAML::Node& r = tree.root();
  RunSettings s;
  s.seed = get<std::uint64_t>(r, "", "seed");

  auto& d = s.dataset;
  d.class_count = get_count(r, "dataset", "class_count");
  d.image_channels = get_count(r, "dataset", "image_channels");
  d.image_height = get_count(r, "dataset", "image_height");
  d.image_width = get_count(r, "dataset", "image_width");
  d.samples_per_class = get_count(r, "dataset", "samples_per_class");
  d.min_cycles = get<double>(r, "dataset", "min_cycles");
  d.max_cycles = get<double>(r, "dataset", "max_cycles");
  d.orientation_jitter = get<double>(r, "dataset", "orientation_jitter");
  d.min_blob_radius = get<double>(r, "dataset", "min_blob_radius");
  d.max_blob_radius = get<double>(r, "dataset", "max_blob_radius");
  d.color_jitter = get<double>(r, "dataset", "color_jitter");
  d.min_contrast = get<double>(r, "dataset", "min_contrast");
  d.distractors = get_count(r, "dataset", "distractors");
  d.noise_std = get<double>(r, "dataset", "noise_std");
  d.seed = get<std::uint64_t>(r, "dataset", "seed");

  try {
    s.variant = fsl::parse_variant(get<std::string>(r, "model", "variant"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model.variant: ") + e.what());
  }
  auto& m = s.model;
  m.backbone.in_channels = d.image_channels;
  m.backbone.widths = get<std::vector<std::size_t>>(r, "model", "widths");
  m.backbone.pool = get<std::vector<bool>>(r, "model", "pool");
  m.backbone.bn_affine = get<bool>(r, "model", "bn_affine");
  m.generator.k = get_count(r, "model", "kernel_size");
  m.generator.sigma = get<double>(r, "model", "sigma");
  m.generator.bn_affine = m.backbone.bn_affine;
  m.frequency_groups = get_count(r, "model", "frequency_groups");
  const auto pairs = get<std::vector<std::vector<std::size_t>>>(r, "model", "frequencies");
  if (!pairs.empty()) {
    std::vector<FrequencyPair> list;
    for (const auto& p : pairs) {
      if (p.size() != 2) throw ConfigError("model.frequencies: every entry must be a [u, v] pair");
      list.push_back({p[0], p[1]});
    }
    try {
      m.generator.frequencies = FrequencySelection(std::move(list));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("model.frequencies: ") + ex.what());
    }
  }
  m.temperature = get<double>(r, "model", "temperature");
  m.image_height = d.image_height;
  m.image_width = d.image_width;

  auto& t = s.training;
  t.episodes = get_count(r, "training", "episodes");
  t.way = get_count(r, "training", "way");
  t.shot = get_count(r, "training", "shot");
  t.queries = get_count(r, "training", "queries");
  t.learning_rate = get<double>(r, "training", "learning_rate");
  t.adaptation_lr_ratio = get<double>(r, "training", "adaptation_lr_ratio");
  t.grad_clip = get<double>(r, "training", "grad_clip");

  auto& e = s.eval;
  e.episodes = get_count(r, "eval", "episodes");
  e.way = get_count(r, "eval", "way");
  e.shot = get_count(r, "eval", "shot");
  e.queries = get_count(r, "eval", "queries");
  e.random_prototypes = get<bool>(r, "eval", "random_prototypes");
  e.threads = get_count(r, "eval", "threads");

  s.ablation.training = t;
  s.ablation.training.episodes = get_count(r, "ablation", "training_episodes");
  s.ablation.eval = e;
  s.ablation.eval.episodes = get_count(r, "ablation", "eval_episodes");
  for (const auto& id : get<std::vector<std::string>>(r, "ablation", "variants")) {
    try {
      s.ablation.variants.push_back(fsl::parse_variant(id));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("ablation.variants: ") + ex.what());
    }
  }

  s.config_hash = fsl::fnv1a(tree.emit_section("dataset") + "\n" + tree.emit_section("model"));
  return s;
}

std::map<std::string, std::string> process_env() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && entry.rfind("INSTA_", 0) == 0) out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

}  // namespace insta::cli
