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

#include "insta/fsl/ablation.hpp"

namespace insta::fsl {

std::vector<AblationRow> ablate(const ModelConfig& model_config, const SyntheticDataset& data,
                                const AblationSettings& settings, std::uint64_t seed,
                                const AblationObserver& observer) {
  std::vector<Variant> variants = settings.variants;
  if (variants.empty()) variants.assign(all_variants().begin(), all_variants().end());
  std::vector<AblationRow> rows;
  rows.reserve(variants.size());
  for (Variant v : variants) {
    ModelParams model = ModelParams::create(model_config, v, seed);
    TrainResult trained = train(model, data, settings.training, seed);
    AblationRow row{v, evaluate(model, data, settings.eval, seed), std::move(trained.curve),
                    trained.stream_fingerprint};
    if (observer) observer(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace insta::fsl
