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

#include "insta/fsl/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "insta/fsl/episode.hpp"
#include "insta/fsl/protonet.hpp"

namespace insta::fsl {

EvalReport make_report(std::vector<double> accuracies) {
  if (accuracies.size() < 2) throw std::invalid_argument("evaluation needs at least two episodes");
  EvalReport r;
  r.episode_count = accuracies.size();
  const double n = static_cast<double>(r.episode_count);
  // Extended precision keeps the mean of equal accuracies equal to that value.
  long double sum = 0.0L;
  for (double a : accuracies) sum += a;
  r.mean = static_cast<double>(sum / static_cast<long double>(r.episode_count));
  double sq = 0.0;
  for (double a : accuracies) sq += (a - r.mean) * (a - r.mean);
  r.ci95 = 1.96 * std::sqrt(sq / n) / std::sqrt(n);
  r.episode_accuracies = std::move(accuracies);
  return r;
}

namespace {

struct EpisodeResult {
  double accuracy;
  std::uint64_t fingerprint;
};

EpisodeResult run_one(ModelParams& model, const SyntheticDataset& data, const EvalSettings& s, std::uint64_t seed,
                      std::size_t e) {
  NoGradGuard no_grad;
  Rng rng(derive_seed(seed, "eval-episode", e));
  const Episode episode = sample_episode(data, s.way, s.shot, s.queries, rng, Split::test);
  Tensor logits;
  if (s.random_prototypes) {
    std::vector<Tensor> images = episode.query_images;
    const Var features = model.backbone.forward(Var(stack_images(images)));
    const std::size_t d = features.size() / features.shape()[0];
    Rng proto_rng(derive_seed(seed, "random-prototypes", e));
    logits = classify(features, Var(normal_tensor(Shape{s.way, d}, 1.0, proto_rng)), model.temperature).value();
  } else {
    logits = forward_episode(episode, model, model.variant).logits.value();
  }
  return {accuracy(logits, episode.query_labels), fingerprint(episode)};
}

}  // namespace

EvalReport evaluate(ModelParams& model, const SyntheticDataset& data, const EvalSettings& settings,
                    std::uint64_t seed) {
  if (settings.episodes < 2) throw std::invalid_argument("evaluation needs at least two episodes");
  model.set_mode(BnMode::eval);
  std::vector<EpisodeResult> results(settings.episodes);
  const std::size_t workers = std::clamp<std::size_t>(settings.threads, 1, settings.episodes);
  if (workers == 1) {
    for (std::size_t e = 0; e < settings.episodes; ++e) results[e] = run_one(model, data, settings, seed, e);
  } else {
    // Eval mode leaves the model untouched, so workers share it read-only.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t e = w; e < settings.episodes; e += workers) {
            results[e] = run_one(model, data, settings, seed, e);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  std::vector<double> accuracies;
  accuracies.reserve(results.size());
  std::uint64_t stream = 0;
  for (const auto& r : results) {
    accuracies.push_back(r.accuracy);
    stream = combine_fingerprint(stream, r.fingerprint);
  }
  EvalReport report = make_report(std::move(accuracies));
  report.stream_fingerprint = stream;
  return report;
}

}  // namespace insta::fsl
