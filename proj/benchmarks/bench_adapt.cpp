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

#include <benchmark/benchmark.h>

#include "insta/fsl/backbone.hpp"
#include "insta/insta.hpp"
#include "insta/kernel_generator.hpp"
#include "insta/rng.hpp"

namespace {

using namespace insta;

// Args: channels, height/width, k.
void BM_Adapt(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0)), h = static_cast<std::size_t>(state.range(1)),
             k = static_cast<std::size_t>(state.range(2));
  Rng rng(1);
  const Var f(uniform_tensor({c, h, h}, 1.0, rng));
  const Var g(uniform_tensor({c, h, h, k, k}, 1.0, rng));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(adapt(f, g).value().data().data());
}

void BM_Oracle(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0)), h = static_cast<std::size_t>(state.range(1)),
             k = static_cast<std::size_t>(state.range(2));
  Rng rng(1);
  const Tensor f = uniform_tensor({c, h, h}, 1.0, rng);
  const Tensor g = uniform_tensor({c, h, h, k, k}, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dynamic_conv_oracle(f, g).data().data());
}

void BM_GenerateKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  GeneratorConfig cfg;
  cfg.channels = 64;
  cfg.frequencies = FrequencySelection::lowest(5, 5, 16);
  GeneratorParams p = GeneratorParams::create(cfg, 2);
  Rng rng(3);
  const Var s(uniform_tensor({n, 64, 5, 5}, 1.0, rng));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(generate_kernel(s, p).value().data().data());
}

void BM_BackboneForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  fsl::Backbone net = fsl::Backbone::create(fsl::BackboneConfig{}, 4);
  Rng rng(5);
  const Var x(uniform_tensor({n, 3, 40, 40}, 1.0, rng));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x).value().data().data());
}

}  // namespace

BENCHMARK(BM_Adapt)->Args({64, 5, 3})->Args({640, 5, 3})->Args({64, 10, 5});
BENCHMARK(BM_Oracle)->Args({64, 5, 3})->Args({640, 5, 3})->Args({64, 10, 5});
BENCHMARK(BM_GenerateKernel)->Arg(1)->Arg(26);
BENCHMARK(BM_BackboneForward)->Arg(1)->Arg(100);

BENCHMARK_MAIN();
