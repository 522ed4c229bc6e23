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

#include "insta/fsl/grad_suite.hpp"

#include <functional>
#include <map>

#include "insta/batch_norm.hpp"
#include "insta/fsl/model.hpp"
#include "insta/fsl/protonet.hpp"
#include "insta/grad_check.hpp"
#include "insta/insta.hpp"
#include "insta/msa.hpp"
#include "insta/ops.hpp"
#include "insta/rng.hpp"

namespace insta::fsl {

namespace {

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(derive_seed(seed, "grad-suite")) {}

  // Entries in +-[0.1, 1.1], away from ReLU and max-pool kinks.
  Tensor random(Shape shape) {
    Tensor t = uniform_tensor(std::move(shape), 1.0, rng_);
    for (double& v : t.data()) v = v < 0.0 ? v - 0.1 : v + 0.1;
    return t;
  }

  // Scalar probe sum(y * R) with a fixed random R per shape.
  Var probe(const Var& y) {
    auto it = weights_.find(y.shape());
    if (it == weights_.end()) it = weights_.emplace(y.shape(), uniform_tensor(y.shape(), 1.0, rng_)).first;
    return ops::sum_all(ops::mul(y, Var(it->second)));
  }

  void unary(const std::string& module, const std::string& name, const std::function<Var(const Var&)>& f,
             const Tensor& x) {
    rows_.push_back({module, name, grad_check([&](const Var& v) { return probe(f(v)); }, x)});
  }

  void scalar(const std::string& module, const std::string& name, const std::function<Var(const Var&)>& f,
              const Tensor& x) {
    rows_.push_back({module, name, grad_check(f, x)});
  }

  void param(const std::string& module, const std::string& name, const std::function<Var()>& loss, Var& p) {
    rows_.push_back({module, name, grad_check_param(loss, p)});
  }

  std::vector<GradCheckRow> take() { return std::move(rows_); }

 private:
  Rng rng_;
  std::map<Shape, Tensor> weights_;
  std::vector<GradCheckRow> rows_;
};

void tensor_core(Suite& s) {
  const std::string m = "tensor-core";
  const Tensor a = s.random({2, 3, 4});
  const Var b(s.random({2, 3, 4}));
  s.unary(m, "add", [&](const Var& x) { return ops::add(x, b); }, a);
  s.unary(m, "sub", [&](const Var& x) { return ops::sub(b, x); }, a);
  s.unary(m, "mul", [&](const Var& x) { return ops::mul(x, b); }, a);
  s.unary(m, "scale", [&](const Var& x) { return ops::scale(x, -1.7); }, a);
  s.unary(m, "relu", [&](const Var& x) { return ops::relu(x); }, a);
  s.unary(m, "sum_all", [&](const Var& x) { return ops::sum_all(x); }, a);
  s.unary(m, "mean_over_tail", [&](const Var& x) { return ops::mean_over_tail(x, 2); }, a);
  s.unary(m, "sum_axis", [&](const Var& x) { return ops::sum_axis(x, 1); }, a);
  s.unary(m, "set_sum", [&](const Var& x) { return ops::set_sum(x); }, a);
  s.unary(m, "mean_axis", [&](const Var& x) { return ops::mean_axis(x, 2); }, a);
  s.unary(m, "reshape", [&](const Var& x) { return ops::reshape(x, {4, 6}); }, a);
  s.unary(m, "permute", [&](const Var& x) { return ops::permute(x, {2, 0, 1}); }, a);
  s.unary(m, "broadcast", [&](const Var& x) { return ops::broadcast(x, {1, 4}, {2, 3}); }, a);
  s.unary(m, "select", [&](const Var& x) { return ops::select(x, 1); }, a);
  s.unary(m, "gather", [&](const Var& x) { return ops::gather(x, {1, 0, 1}); }, a);
  s.unary(m, "stack", [&](const Var& x) {
    const Var items[] = {x, b, x};
    return ops::stack(items);
  }, a);
  s.unary(m, "concat", [&](const Var& x) {
    const Var items[] = {b, x};
    return ops::concat(items);
  }, a);

  const Tensor img = s.random({2, 3, 4, 4});
  const Var ximg(img);
  s.unary(m, "unfold", [&](const Var& x) { return ops::unfold(x, 3); }, img);

  Var w1(s.random({5, 3}), true), b1(s.random({5}), true);
  const auto pointwise = [&] { return s.probe(ops::conv1x1(ximg, w1, b1)); };
  s.unary(m, "conv1x1.x", [&](const Var& x) { return ops::conv1x1(x, w1, b1); }, img);
  s.param(m, "conv1x1.weight", pointwise, w1);
  s.param(m, "conv1x1.bias", pointwise, b1);

  Var wl(s.random({2, 4}), true), bl(s.random({2}), true);
  const Var xa(a);
  const auto affine = [&] { return s.probe(ops::linear(xa, wl, bl)); };
  s.unary(m, "linear.x", [&](const Var& x) { return ops::linear(x, wl, bl); }, a);
  s.param(m, "linear.weight", affine, wl);
  s.param(m, "linear.bias", affine, bl);

  Var wc(s.random({4, 3, 3, 3}), true), bc(s.random({4}), true);
  const auto dense = [&] { return s.probe(ops::conv2d(ximg, wc, bc, 1)); };
  s.unary(m, "conv2d.x", [&](const Var& x) { return ops::conv2d(x, wc, bc, 1); }, img);
  s.param(m, "conv2d.weight", dense, wc);
  s.param(m, "conv2d.bias", dense, bc);
  s.unary(m, "max_pool2", [&](const Var& x) { return ops::max_pool2(x); }, img);

  const Var protos(s.random({3, 6}));
  const Var queries(s.random({4, 6}));
  s.unary(m, "neg_sq_dist.queries", [&](const Var& x) { return ops::neg_sq_dist(x, protos, 2.0); }, s.random({4, 6}));
  s.unary(m, "neg_sq_dist.prototypes", [&](const Var& x) { return ops::neg_sq_dist(queries, x, 2.0); },
          s.random({3, 6}));
  const std::vector<std::size_t> labels{0, 2, 1, 2};
  s.scalar(m, "cross_entropy", [&](const Var& x) { return ops::cross_entropy(x, labels); }, s.random({4, 3}));

  for (BnMode mode : {BnMode::train, BnMode::eval}) {
    const std::string tag = mode == BnMode::train ? "batch_norm.train" : "batch_norm.eval";
    BNState bn = BNState::create(3);
    bn.mode = mode;
    bn.gamma.mutable_value() = s.random({3});
    bn.beta.mutable_value() = s.random({3});
    if (mode == BnMode::eval) {
      bn.running_mean = s.random({3});
      bn.running_var = Tensor(Shape{3}, 0.7);
    }
    s.unary(m, tag + ".x", [&](const Var& x) { return batch_norm(x, bn); }, img);
    const auto loss = [&] { return s.probe(batch_norm(ximg, bn)); };
    s.param(m, tag + ".gamma", loss, bn.gamma);
    s.param(m, tag + ".beta", loss, bn.beta);
  }
}

void msa(Suite& s) {
  const Tensor maps = s.random({2, 8, 3, 3});
  const FrequencySelection sel = FrequencySelection::lowest(3, 3, 4);
  s.unary("msa", "msa_encode", [&](const Var& x) { return msa_encode(x, sel); }, maps);
  s.unary("msa", "gap_encode", [&](const Var& x) { return gap_encode(x); }, maps);
}

GeneratorConfig micro_generator() {
  GeneratorConfig g;
  g.channels = 8;
  g.k = 3;
  g.sigma = 0.25;
  g.frequencies = FrequencySelection::lowest(3, 3, 4);
  return g;
}

void kernel_generator(Suite& s, std::uint64_t seed) {
  const std::string m = "kernel-generator";
  GeneratorParams gen = GeneratorParams::create(micro_generator(), seed);
  const Tensor maps = s.random({3, 8, 3, 3});
  const Var xmaps(maps);
  s.unary(m, "channel_kernel.s", [&](const Var& x) { return channel_kernel(x, gen); }, maps);
  s.unary(m, "spatial_kernel.s", [&](const Var& x) { return spatial_kernel(x, gen); }, maps);
  s.unary(m, "generate_kernel.s", [&](const Var& x) { return generate_kernel(x, gen); }, maps);
  const Var other(s.random({8, 3, 3, 3, 3}));
  s.unary(m, "fuse_channel_spatial", [&](const Var& x) { return fuse_channel_spatial(x, other); },
          s.random({8, 3, 3, 3, 3}));
  const auto loss = [&] { return s.probe(generate_kernel(xmaps, gen)); };
  const std::pair<const char*, Var*> params[] = {
      {"mlp_w1", &gen.mlp_w1}, {"mlp_b1", &gen.mlp_b1}, {"mlp_w2", &gen.mlp_w2},
      {"mlp_b2", &gen.mlp_b2}, {"sp_w", &gen.sp_w},     {"sp_b", &gen.sp_b},
      {"bn_ch.gamma", &gen.bn_ch.gamma}, {"bn_ch.beta", &gen.bn_ch.beta},
      {"bn_sp.gamma", &gen.bn_sp.gamma}, {"bn_sp.beta", &gen.bn_sp.beta}};
  for (const auto& [name, p] : params) s.param(m, std::string("generator.") + name, loss, *p);
}

void insta_module(Suite& s, std::uint64_t seed) {
  const std::string m = "insta";
  const Tensor f = s.random({8, 3, 3});
  const Var kernel(s.random({8, 3, 3, 3, 3}));
  s.unary(m, "adapt.f", [&](const Var& x) { return adapt(x, kernel); }, f);
  const Var xf(f);
  s.unary(m, "adapt.kernel", [&](const Var& g) { return adapt(xf, g); }, s.random({8, 3, 3, 3, 3}));

  ContextParams ctx = ContextParams::create(8, seed);
  const Tensor supports = s.random({4, 8, 3, 3});
  const Var xs(supports);
  s.unary(m, "context_summary.supports", [&](const Var& x) { return context_summary(x, ctx); }, supports);
  const auto loss = [&] { return s.probe(context_summary(xs, ctx)); };
  const std::pair<const char*, PointwiseLayer*> layers[] = {
      {"pre1", &ctx.pre1}, {"pre2", &ctx.pre2}, {"post1", &ctx.post1}, {"post2", &ctx.post2}};
  for (const auto& [name, layer] : layers) {
    s.param(m, std::string("context.") + name + ".weight", loss, layer->weight);
    s.param(m, std::string("context.") + name + ".bias", loss, layer->bias);
  }
}

// 2-way 2-shot episode of 1 x 3 x 3 images through a one-block backbone
// (c = 8, h = w = 3), variant (ix) adaptation and the metric loss.
void pipeline(Suite& s, std::uint64_t seed) {
  const std::string m = "fsl-harness";
  ModelConfig config;
  config.backbone.in_channels = 1;
  config.backbone.widths = {8};
  config.backbone.pool = {false};
  config.generator.sigma = 0.25;
  config.frequency_groups = 4;
  config.temperature = 4.0;
  config.image_height = 3;
  config.image_width = 3;
  ModelParams model = ModelParams::create(config, Variant::ix, seed);

  Episode ep;
  ep.way = 2;
  ep.shot = 2;
  ep.queries_per_class = 1;
  ep.classes = {0, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    ep.support_images.push_back(s.random({1, 3, 3}));
    ep.support_labels.push_back(i / 2);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    ep.query_images.push_back(s.random({1, 3, 3}));
    ep.query_labels.push_back(i);
  }

  const auto loss = [&] { return forward_episode(ep, model, Variant::ix).loss; };
  for (auto& [name, tensor] : model.named_state()) {
    for (Var* p : model.parameters()) {
      if (&p->mutable_value() == tensor) s.param(m, "episode_loss." + name, loss, *p);
    }
  }

  const Tensor supports = s.random({4, 8, 3, 3});
  const Tensor queries = s.random({2, 8, 3, 3});
  const Var xs(supports), xq(queries);
  const std::vector<std::size_t> sl{0, 0, 1, 1}, ql{0, 1};
  const auto head = [&](const Var& sup, const Var& qry) {
    const AdaptedFeatures a = adapt_episode(sup, qry, model, Variant::ix);
    return episode_loss(classify(a.queries, prototypes(a.supports, sl, 2, 2), config.temperature), ql);
  };
  s.scalar(m, "adapt_episode.supports", [&](const Var& x) { return head(x, xq); }, supports);
  s.scalar(m, "adapt_episode.queries", [&](const Var& x) { return head(xs, x); }, queries);
}

}  // namespace

std::vector<GradCheckRow> run_grad_suite(std::uint64_t seed) {
  Suite s(seed);
  tensor_core(s);
  msa(s);
  kernel_generator(s, seed);
  insta_module(s, seed);
  pipeline(s, seed);
  return s.take();
}

}  // namespace insta::fsl
