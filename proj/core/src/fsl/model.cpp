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

#include "insta/fsl/model.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "insta/ops.hpp"
#include "insta/rng.hpp"

namespace insta::fsl {

namespace {

constexpr std::array<VariantTraits, 9> kVariants{{
    {Variant::i, "i", "ProtoNet", "-", "-", false, false, false, false, false, true},
    {Variant::ii, "ii", "ProtoNet + G^ta", "G^ta", "-", true, false, false, false, false, true},
    {Variant::iii, "iii", "ProtoNet + G^ta", "G^ta", "G^ta", true, false, true, false, false, true},
    {Variant::iv, "iv", "ProtoNet + G^in", "G^in", "-", false, true, false, false, false, true},
    {Variant::v, "v", "ProtoNet + G^insta", "G^ta, G^in", "-", true, true, false, false, false, true},
    {Variant::vi, "vi", "INSTA-ProtoNet + GAP", "G^ta, G^in", "G^ta", true, true, true, false, true, true},
    {Variant::vii, "vii", "INSTA-ProtoNet + G^in_Q", "G^ta, G^in", "G^in_Q, G^ta", true, true, true, true, false, true},
    {Variant::viii, "viii", "INSTA-ProtoNet w/o sharing f_omega", "G^ta, G^in", "G^ta", true, true, true, false, false,
     false},
    {Variant::ix, "ix", "INSTA-ProtoNet", "G^ta, G^in", "G^ta", true, true, true, false, false, true},
}};

constexpr std::array<Variant, 9> kOrder{Variant::i,  Variant::ii,  Variant::iii,  Variant::iv, Variant::v,
                                        Variant::vi, Variant::vii, Variant::viii, Variant::ix};

std::vector<std::size_t> range(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

Var add_leading_axis(const Var& x) {
  Shape s = x.shape();
  s.insert(s.begin(), 1);
  return ops::reshape(x, s);
}

Var repeat(const Var& kernel, std::size_t n) { return ops::broadcast(kernel, {0}, {n}); }

}  // namespace

const VariantTraits& traits(Variant variant) { return kVariants[static_cast<std::size_t>(variant)]; }

std::span<const Variant> all_variants() { return kOrder; }

Variant parse_variant(std::string_view text) {
  if (text.size() >= 2 && text.front() == '(' && text.back() == ')') text = text.substr(1, text.size() - 2);
  for (const auto& t : kVariants) {
    if (t.label == text) return t.id;
  }
  throw std::invalid_argument("unknown variant id '" + std::string(text) + "' (expected i..ix)");
}

std::string_view to_string(Variant variant) { return traits(variant).label; }

GeneratorConfig resolve_generator_config(const ModelConfig& config, Variant variant) {
  Backbone probe = Backbone::create(config.backbone, 0);
  const auto [c, h, w] = probe.output_extents(config.image_height, config.image_width);
  GeneratorConfig g = config.generator;
  g.channels = c;
  if (g.frequencies.groups() == 0) g.frequencies = FrequencySelection::lowest(h, w, config.frequency_groups);
  g.frequencies.check_grid(h, w);
  if (c % g.frequencies.groups() != 0) {
    throw std::invalid_argument("frequency groups (" + std::to_string(g.frequencies.groups()) +
                                ") must divide the feature channels (" + std::to_string(c) + ")");
  }
  if (traits(variant).gap_encoder) g.encoder = ChannelEncoder::gap;
  return g;
}

ModelParams ModelParams::create(const ModelConfig& config, Variant variant, std::uint64_t seed) {
  if (!(config.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  ModelParams m{Backbone::create(config.backbone, seed),
                GeneratorParams::create(resolve_generator_config(config, variant), seed),
                std::nullopt,
                ContextParams(),
                config.temperature,
                variant,
                {}};
  m.feature_extents = m.backbone.output_extents(config.image_height, config.image_width);
  m.context = ContextParams::create(m.feature_extents[0], seed);
  if (!traits(variant).shared_generator) {
    m.task_generator = GeneratorParams::create(m.generator.config, derive_seed(seed, "task-generator"));
  }
  return m;
}

void ModelParams::set_mode(BnMode mode) {
  backbone.set_mode(mode);
  generator.set_mode(mode);
  if (task_generator) task_generator->set_mode(mode);
}

std::vector<Var*> ModelParams::backbone_parameters() { return backbone.parameters(); }

std::vector<Var*> ModelParams::adaptation_parameters() {
  std::vector<Var*> out = generator.parameters();
  if (task_generator) {
    for (Var* v : task_generator->parameters()) out.push_back(v);
  }
  for (Var* v : context.parameters()) out.push_back(v);
  return out;
}

std::vector<Var*> ModelParams::parameters() {
  std::vector<Var*> out = backbone_parameters();
  for (Var* v : adaptation_parameters()) out.push_back(v);
  return out;
}

namespace {

void add_bn(std::vector<std::pair<std::string, Tensor*>>& out, const std::string& prefix, BNState& bn) {
  out.emplace_back(prefix + ".gamma", &bn.gamma.mutable_value());
  out.emplace_back(prefix + ".beta", &bn.beta.mutable_value());
  out.emplace_back(prefix + ".running_mean", &bn.running_mean);
  out.emplace_back(prefix + ".running_var", &bn.running_var);
}

void add_generator(std::vector<std::pair<std::string, Tensor*>>& out, const std::string& prefix, GeneratorParams& g) {
  const std::pair<const char*, Var*> vars[] = {{"mlp_w1", &g.mlp_w1}, {"mlp_b1", &g.mlp_b1}, {"mlp_w2", &g.mlp_w2},
                                               {"mlp_b2", &g.mlp_b2}, {"sp_w", &g.sp_w},     {"sp_b", &g.sp_b}};
  for (const auto& [name, var] : vars) {
    if (var->defined()) out.emplace_back(prefix + "." + name, &var->mutable_value());
  }
  add_bn(out, prefix + ".bn_ch", g.bn_ch);
  add_bn(out, prefix + ".bn_sp", g.bn_sp);
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_state() {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto& blocks = backbone.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string prefix = "backbone." + std::to_string(i);
    out.emplace_back(prefix + ".weight", &blocks[i].weight.mutable_value());
    add_bn(out, prefix + ".bn", blocks[i].bn);
  }
  add_generator(out, "generator", generator);
  if (task_generator) add_generator(out, "task_generator", *task_generator);
  const std::pair<const char*, PointwiseLayer*> layers[] = {
      {"pre1", &context.pre1}, {"pre2", &context.pre2}, {"post1", &context.post1}, {"post2", &context.post2}};
  for (const auto& [name, layer] : layers) {
    out.emplace_back(std::string("context.") + name + ".weight", &layer->weight.mutable_value());
    out.emplace_back(std::string("context.") + name + ".bias", &layer->bias.mutable_value());
  }
  return out;
}

AdaptedFeatures adapt_episode(const Var& supports, const Var& queries, ModelParams& model, Variant variant,
                              const AdaptOptions& options) {
  const VariantTraits& t = traits(variant);
  if (supports.shape().size() != 4 || queries.shape().size() != 4 ||
      !std::equal(supports.shape().begin() + 1, supports.shape().end(), queries.shape().begin() + 1)) {
    throw ShapeError("adapt_episode: supports " + shape_to_string(supports.shape()) + " and queries " +
                     shape_to_string(queries.shape()) + " must be n x c x h x w with equal c, h, w");
  }
  const bool uses_kernels = t.support_task || t.support_instance || t.query_task || t.query_instance;
  if (!uses_kernels) return {supports, queries};
  if (t.gap_encoder != (model.generator.config.encoder == ChannelEncoder::gap)) {
    throw std::invalid_argument("variant " + std::string(t.label) + " needs a model built with the matching encoder");
  }
  if (!t.shared_generator && !model.task_generator) {
    throw std::invalid_argument("variant " + std::string(t.label) + " needs a separate task generator");
  }

  const std::size_t ns = supports.shape()[0], nq = queries.shape()[0];
  const bool needs_task = t.support_task || t.query_task;

  Var summary;
  if (needs_task) summary = context_summary(supports, model.context);

  Var support_instance, query_instance, task;
  if (t.shared_generator) {
    std::vector<Var> batch{supports};
    if (t.query_instance) batch.push_back(queries);
    if (needs_task) batch.push_back(add_leading_axis(summary));
    Var kernels = generate_kernel(ops::concat(batch), model.generator);
    support_instance = ops::gather(kernels, range(0, ns));
    if (t.query_instance) query_instance = ops::gather(kernels, range(ns, nq));
    if (needs_task) task = ops::select(kernels, kernels.shape()[0] - 1);
  } else {
    std::vector<Var> batch{supports};
    if (t.query_instance) batch.push_back(queries);
    Var kernels = generate_kernel(ops::concat(batch), model.generator);
    support_instance = ops::gather(kernels, range(0, ns));
    if (t.query_instance) query_instance = ops::gather(kernels, range(ns, nq));
    if (needs_task) task = ops::select(generate_kernel(add_leading_axis(summary), *model.task_generator), 0);
  }
  if (options.force_instance_ones) support_instance = Var(Tensor(support_instance.shape(), 1.0));

  Var support_kernel;
  if (t.support_task && t.support_instance) {
    support_kernel = ops::mul(support_instance, repeat(task, ns));
  } else if (t.support_task) {
    support_kernel = repeat(task, ns);
  } else if (t.support_instance) {
    support_kernel = support_instance;
  }
  Var query_kernel;
  if (t.query_task && t.query_instance) {
    query_kernel = ops::mul(query_instance, repeat(task, nq));
  } else if (t.query_task) {
    query_kernel = repeat(task, nq);
  } else if (t.query_instance) {
    query_kernel = query_instance;
  }

  AdaptedFeatures out{supports, queries};
  if (support_kernel.defined()) out.supports = adapt(supports, support_kernel);
  if (query_kernel.defined()) out.queries = adapt(queries, query_kernel);
  return out;
}

}  // namespace insta::fsl
