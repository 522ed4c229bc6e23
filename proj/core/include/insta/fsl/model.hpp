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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "insta/fsl/backbone.hpp"
#include "insta/insta.hpp"

namespace insta::fsl {

/// Ablation settings (i)-(ix). (i) is the plain ProtoNet baseline and (ix)
/// the full model.
enum class Variant { i, ii, iii, iv, v, vi, vii, viii, ix };

struct VariantTraits {
  Variant id;
  std::string_view label;          // "i" ... "ix"
  std::string_view model;          // short description
  std::string_view apply_to_support;
  std::string_view apply_to_query;
  bool support_task;
  bool support_instance;
  bool query_task;
  bool query_instance;
  bool gap_encoder;
  bool shared_generator;
};

const VariantTraits& traits(Variant variant);
/// All nine variants in table order.
std::span<const Variant> all_variants();
/// Accepts "i".."ix", optionally wrapped in parentheses. Throws
/// std::invalid_argument for unknown ids.
Variant parse_variant(std::string_view text);
std::string_view to_string(Variant variant);

struct ModelConfig {
  BackboneConfig backbone;
  /// `channels` is overwritten with the backbone output width.
  GeneratorConfig generator;
  /// Frequency groups when no explicit selection is configured.
  std::size_t frequency_groups = 16;
  double temperature = 64.0;
  std::size_t image_height = 40;
  std::size_t image_width = 40;
};

/// Backbone, shared generator, context module and the metric temperature.
struct ModelParams {
  Backbone backbone;
  GeneratorParams generator;
  /// Separate task-kernel generator; only for the unshared variant (viii).
  std::optional<GeneratorParams> task_generator;
  ContextParams context;
  double temperature = 64.0;
  Variant variant = Variant::ix;
  std::array<std::size_t, 3> feature_extents{};

  /// Deterministic in (config, variant, seed). Parts common to all variants
  /// are initialized identically across variants.
  static ModelParams create(const ModelConfig& config, Variant variant, std::uint64_t seed);

  void set_mode(BnMode mode);
  std::vector<Var*> backbone_parameters();
  std::vector<Var*> adaptation_parameters();
  std::vector<Var*> parameters();

  /// Every learnable tensor and running statistic under a stable name.
  std::vector<std::pair<std::string, Tensor*>> named_state();
};

/// Kernel generator config for a model config (resolves channels and the
/// default frequency selection against the backbone output).
GeneratorConfig resolve_generator_config(const ModelConfig& config, Variant variant);

struct AdaptOptions {
  /// Replace support instance kernels with all-ones (test hook for the
  /// multiplicative identity of the INSTA fusion).
  bool force_instance_ones = false;
};

struct AdaptedFeatures {
  Var supports;  // n_support x c x h x w
  Var queries;   // n_query x c x h x w
};

/// Applies the variant's kernels to backbone features. One generator batch is
/// formed per episode: the support maps, then (for variant vii) the query
/// maps, then the task summary when a task kernel is needed.
AdaptedFeatures adapt_episode(const Var& supports, const Var& queries, ModelParams& model, Variant variant,
                              const AdaptOptions& options = {});

}  // namespace insta::fsl
