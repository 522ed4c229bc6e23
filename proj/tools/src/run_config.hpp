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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "insta/fsl/ablation.hpp"
#include "insta/fsl/evaluator.hpp"
#include "insta/fsl/model.hpp"
#include "insta/fsl/synthetic.hpp"
#include "insta/fsl/trainer.hpp"

namespace insta::cli {

/// Layered configuration: built-in defaults, then the YAML file, then
/// INSTA_<SECTION>__<KEY> environment variables, then `key=value` overrides.
/// Every layer may only name keys that exist in the defaults.
class ConfigTree {
 public:
  ConfigTree();

  void merge_file(const std::filesystem::path& path);
  void merge_yaml(const YAML::Node& doc, const std::string& origin);
  /// Reads INSTA_* variables from `env` (name -> value).
  void merge_env(const std::map<std::string, std::string>& env);
  /// `dotted` is "section.key" or a top-level key such as "seed"; the value
  /// is parsed as YAML (so lists use [a, b]).
  void set(const std::string& dotted, const std::string& value);
  void set_override(const std::string& assignment);

  const YAML::Node& root() const { return root_; }
  std::string emit() const;
  std::string emit_section(const std::string& section) const;

 private:
  /// Handle to an existing leaf; assigning through it updates the tree.
  YAML::Node slot(const std::string& dotted, const std::string& origin);
  YAML::Node root_;
};

struct RunSettings {
  std::uint64_t seed = 0;
  fsl::SyntheticTaskConfig dataset;
  fsl::ModelConfig model;
  fsl::Variant variant = fsl::Variant::ix;
  fsl::TrainingConfig training;
  fsl::EvalSettings eval;
  fsl::AblationSettings ablation;
  /// FNV-1a of the emitted dataset and model sections.
  std::uint64_t config_hash = 0;
};

/// Typed view of the tree. Throws ConfigError naming the offending key.
RunSettings materialize(const ConfigTree& tree);

/// INSTA_* variables of the current process.
std::map<std::string, std::string> process_env();

}  // namespace insta::cli
