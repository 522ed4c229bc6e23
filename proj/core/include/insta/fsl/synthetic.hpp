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

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "insta/tensor.hpp"

namespace insta::fsl {

/// Disjoint sample pools: training episodes and evaluation episodes render
/// different per-sample nuisances (phase, jitter, blob position) of the same
/// classes.
enum class Split { train, test };

std::string_view to_string(Split split);

/// Procedural image classes. Class c owns an orientation, a grating frequency,
/// a colour and a blob radius. Samples vary in phase, orientation, blob
/// position, contrast and colour, and carry randomly coloured distractor
/// discs, plus optional Gaussian noise.
struct SyntheticTaskConfig {
  std::size_t class_count = 10;
  std::size_t image_channels = 3;
  std::size_t image_height = 40;
  std::size_t image_width = 40;
  std::size_t samples_per_class = 200;
  double min_cycles = 2.0;           // grating cycles across the image
  double max_cycles = 6.0;
  double orientation_jitter = 0.08;  // radians, uniform +-
  double min_blob_radius = 0.08;     // fraction of the image width
  double max_blob_radius = 0.22;
  double color_jitter = 0.35;        // per-channel uniform +- on the class colour
  double min_contrast = 0.4;         // grating amplitude drawn per sample
  std::size_t distractors = 2;       // random discs of random colour
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

struct ClassStyle {
  double orientation = 0.0;
  double cycles = 0.0;
  std::vector<double> color;
  double blob_radius = 0.0;
};

class SyntheticDataset {
 public:
  explicit SyntheticDataset(SyntheticTaskConfig config);

  const SyntheticTaskConfig& config() const noexcept { return config_; }
  const ClassStyle& style(std::size_t cls) const;

  /// image_channels x image_height x image_width; a pure function of
  /// (seed, split, class, sample).
  Tensor render(std::size_t cls, std::size_t sample, Split split) const;

 private:
  SyntheticTaskConfig config_;
  std::vector<ClassStyle> styles_;
};

}  // namespace insta::fsl
