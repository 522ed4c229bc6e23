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
#include <vector>

#include "insta/fsl/synthetic.hpp"
#include "insta/rng.hpp"

namespace insta::fsl {

/// One N-way K-shot task. Labels are episode-local (0..way-1); `classes[i]`
/// is the dataset class behind label i. Supports are ordered class-major.
struct Episode {
  std::size_t way = 0;
  std::size_t shot = 0;
  std::size_t queries_per_class = 0;
  std::vector<std::size_t> classes;

  std::vector<Tensor> support_images;
  std::vector<std::size_t> support_labels;
  std::vector<std::size_t> support_samples;

  std::vector<Tensor> query_images;
  std::vector<std::size_t> query_labels;
  std::vector<std::size_t> query_samples;
};

/// Draws `way` classes without replacement, then shot + queries distinct
/// samples per class. Throws std::invalid_argument if way > class_count or
/// the per-class pool is too small.
Episode sample_episode(const SyntheticDataset& data, std::size_t way, std::size_t shot, std::size_t queries,
                       Rng& rng, Split split);

/// Stacks equally shaped images into batch x C x H x W.
Tensor stack_images(const std::vector<Tensor>& images);

/// Hash of the sampled class and sample indices (not the pixels).
std::uint64_t fingerprint(const Episode& episode);
/// Order-dependent combination of fingerprints.
std::uint64_t combine_fingerprint(std::uint64_t acc, std::uint64_t value);

}  // namespace insta::fsl
