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
#include <string>
#include <vector>

namespace insta::fsl {

struct GradCheckRow {
  std::string module;  // tensor-core, msa, kernel-generator, insta, fsl-harness
  std::string name;
  double max_rel_err = 0.0;
};

/// Finite-difference checks of every differentiable op and of the full
/// adaptation pipeline on a 2-way 2-shot micro-episode (c = 8, h = w = 3).
/// Deterministic in `seed`.
std::vector<GradCheckRow> run_grad_suite(std::uint64_t seed = 0);

}  // namespace insta::fsl
