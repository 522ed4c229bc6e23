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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "insta/fsl/ablation.hpp"
#include "insta/fsl/checkpoint.hpp"
#include "insta/fsl/episode.hpp"
#include "insta/fsl/evaluator.hpp"
#include "insta/fsl/grad_suite.hpp"
#include "insta/fsl/model.hpp"
#include "insta/fsl/protonet.hpp"
#include "insta/fsl/trainer.hpp"
#include "insta/grad_check.hpp"
#include "insta/ops.hpp"
#include "test_util.hpp"

namespace insta::fsl {
namespace {

using insta::testing::random_tensor;

// 8x8 images through two blocks give 8 x 4 x 4 features.
SyntheticTaskConfig tiny_data(std::size_t classes = 10) {
  SyntheticTaskConfig d;
  d.class_count = classes;
  d.image_height = 8;
  d.image_width = 8;
  d.samples_per_class = 40;
  return d;
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.backbone.widths = {8, 8};
  m.backbone.pool = {true, false};
  m.image_height = 8;
  m.image_width = 8;
  m.frequency_groups = 4;
  m.generator.sigma = 0.25;
  return m;
}

Var features(std::size_t n, std::uint64_t seed) { return Var(random_tensor({n, 8, 4, 4}, seed)); }

std::vector<Tensor> snapshot(ModelParams& m) {
  std::vector<Tensor> out;
  for (Var* v : m.parameters()) out.push_back(v->value());
  return out;
}

// Episode sampler.

TEST(Episode, CountsLabelsAndDisjointness) {
  const SyntheticDataset data(tiny_data());
  Rng rng(1);
  const Episode ep = sample_episode(data, 5, 5, 15, rng, Split::train);
  EXPECT_EQ(ep.support_images.size(), 25u);
  EXPECT_EQ(ep.query_images.size(), 75u);
  EXPECT_EQ(std::set<std::size_t>(ep.classes.begin(), ep.classes.end()).size(), 5u);
  std::map<std::size_t, std::size_t> per_class;
  for (std::size_t l : ep.support_labels) ++per_class[l];
  for (const auto& [label, count] : per_class) {
    EXPECT_LT(label, 5u);
    EXPECT_EQ(count, 5u);
  }
  for (std::size_t l : ep.query_labels) EXPECT_LT(l, 5u);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t j = 0; j < 75; ++j) {
      if (ep.support_labels[i] == ep.query_labels[j]) {
        ASSERT_NE(ep.support_samples[i], ep.query_samples[j]);
      }
    }
}

TEST(Episode, DeterministicInRngState) {
  const SyntheticDataset data(tiny_data());
  Rng a(7), b(7);
  const Episode x = sample_episode(data, 5, 1, 3, a, Split::test);
  const Episode y = sample_episode(data, 5, 1, 3, b, Split::test);
  EXPECT_EQ(fingerprint(x), fingerprint(y));
  for (std::size_t i = 0; i < x.query_images.size(); ++i) EXPECT_EQ(x.query_images[i], y.query_images[i]);
}

TEST(Episode, ClassFrequencyWithinBinomialBound) {
  const SyntheticDataset data(tiny_data());
  Rng rng(3);
  std::vector<int> hits(10, 0);
  const int episodes = 1000;
  for (int e = 0; e < episodes; ++e) {
    for (std::size_t c : sample_episode(data, 5, 1, 1, rng, Split::train).classes) ++hits[c];
  }
  const double p = 0.5, mean = episodes * p, sigma = std::sqrt(episodes * p * (1 - p));
  for (int h : hits) {
    EXPECT_GE(h, mean - 5 * sigma);
    EXPECT_LE(h, mean + 5 * sigma);
  }
}

TEST(Episode, Errors) {
  const SyntheticDataset data(tiny_data(4));
  Rng rng(0);
  EXPECT_THROW(sample_episode(data, 5, 1, 1, rng, Split::train), std::invalid_argument);
  EXPECT_THROW(sample_episode(data, 2, 30, 11, rng, Split::train), std::invalid_argument);
  EXPECT_THROW(sample_episode(data, 0, 1, 1, rng, Split::train), std::invalid_argument);
}

// Synthetic data.

TEST(Synthetic, RenderIsPureAndSplitsDiffer) {
  const SyntheticDataset data(tiny_data());
  EXPECT_EQ(data.render(3, 5, Split::train), data.render(3, 5, Split::train));
  EXPECT_NE(data.render(3, 5, Split::train), data.render(3, 5, Split::test));
  EXPECT_EQ(data.render(0, 0, Split::test).shape(), (Shape{3, 8, 8}));
  EXPECT_THROW(data.render(10, 0, Split::train), std::invalid_argument);
  SyntheticTaskConfig bad = tiny_data();
  bad.noise_std = -1;
  EXPECT_THROW(SyntheticDataset{bad}, std::invalid_argument);
}

// Backbone.

TEST(Backbone, DefaultOutputShape) {
  Backbone net = Backbone::create(BackboneConfig{}, 0);
  EXPECT_EQ(net.forward(Var(random_tensor({8, 3, 40, 40}, 1))).shape(), (Shape{8, 32, 5, 5}));
  EXPECT_EQ(net.output_extents(40, 40), (std::array<std::size_t, 3>{32, 5, 5}));
}

TEST(Backbone, EvalModeBatchIndependent) {
  Backbone net = Backbone::create(BackboneConfig{}, 2);
  net.forward(Var(random_tensor({4, 3, 40, 40}, 3)));  // moves running statistics
  net.set_mode(BnMode::eval);
  const Tensor batch = random_tensor({8, 3, 40, 40}, 4);
  const Tensor all = net.forward(Var(batch)).value();
  const Tensor one = net.forward(ops::gather(Var(batch), {5})).value();
  const std::size_t per = one.size();
  for (std::size_t i = 0; i < per; ++i) ASSERT_EQ(one[i], all[5 * per + i]);
}

TEST(Backbone, ExtentMismatch) {
  Backbone net = Backbone::create(BackboneConfig{}, 0);
  EXPECT_THROW(net.forward(Var(Tensor(Shape{1, 1, 40, 40}))), ShapeError);
}

TEST(Backbone, ConvWeightGradient) {
  BackboneConfig cfg;
  cfg.widths = {4, 4};
  cfg.pool = {true, false};
  Backbone net = Backbone::create(cfg, 5);
  const Tensor x = random_tensor({2, 3, 6, 6}, 6);
  for (Var* w : net.parameters()) {
    EXPECT_LT(grad_check_param([&] { return insta::testing::probe(net.forward(Var(x))); }, *w), 1e-5);
  }
}

// Variants and adaptation.

TEST(Variants, ParseAndLabels) {
  EXPECT_EQ(parse_variant("ix"), Variant::ix);
  EXPECT_EQ(parse_variant("(iv)"), Variant::iv);
  EXPECT_THROW(parse_variant("x"), std::invalid_argument);
  ASSERT_EQ(all_variants().size(), 9u);
  const char* labels[] = {"i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix"};
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(to_string(all_variants()[i]), labels[i]);
  EXPECT_EQ(traits(Variant::ix).apply_to_support, "G^ta, G^in");
  EXPECT_EQ(traits(Variant::ix).apply_to_query, "G^ta");
  EXPECT_EQ(traits(Variant::i).apply_to_query, "-");
}

TEST(Variants, BaselineLeavesFeaturesUntouched) {
  ModelParams m = ModelParams::create(tiny_model(), Variant::i, 0);
  const Var s = features(4, 1), q = features(6, 2);
  const AdaptedFeatures out = adapt_episode(s, q, m, Variant::i);
  EXPECT_EQ(out.supports.value(), s.value());
  EXPECT_EQ(out.queries.value(), q.value());
}

TEST(Variants, ZeroGeneratorIsResidualIdentity) {
  for (BnMode mode : {BnMode::train, BnMode::eval}) {
    ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 0);
    m.set_mode(mode);
    m.generator.zero_weights();
    const Var s = features(4, 3), q = features(6, 4);
    const AdaptedFeatures out = adapt_episode(s, q, m, Variant::ix);
    EXPECT_EQ(out.supports.value(), s.value());
    EXPECT_EQ(out.queries.value(), q.value());
  }
}

TEST(Variants, ForcedOnesInstanceKernelReducesFullToTaskOnly) {
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 5);
  const Var s = features(4, 5), q = features(6, 6);
  const AdaptedFeatures full = adapt_episode(s, q, m, Variant::ix, {.force_instance_ones = true});
  const AdaptedFeatures task = adapt_episode(s, q, m, Variant::iii);
  EXPECT_EQ(full.supports.value(), task.supports.value());
  EXPECT_EQ(full.queries.value(), task.queries.value());
}

TEST(Variants, QueryIsolationWithFrozenContext) {
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 6);
  m.set_mode(BnMode::eval);
  m.context.post2.weight.mutable_value().fill(0.0);  // summary == post2 bias for every support set
  m.context.post2.bias.mutable_value() = random_tensor({8}, 7);
  Tensor s = features(4, 8).value();
  const Var q = features(6, 9);
  const AdaptedFeatures a = adapt_episode(Var(s), q, m, Variant::ix);
  for (std::size_t i = 0; i < 8 * 4 * 4; ++i) s[i] += 0.5;
  const AdaptedFeatures b = adapt_episode(Var(s), q, m, Variant::ix);
  EXPECT_EQ(a.queries.value(), b.queries.value());
  EXPECT_NE(a.supports.value(), b.supports.value());
  // Untouched supports keep their adapted features.
  const std::size_t per = 8 * 4 * 4;
  for (std::size_t i = per; i < 4 * per; ++i) ASSERT_EQ(a.supports.value()[i], b.supports.value()[i]);
}

TEST(Variants, EveryVariantRunsWithExpectedSides) {
  for (Variant v : all_variants()) {
    ModelParams m = ModelParams::create(tiny_model(), v, 7);
    // Non-zero output biases rule out kernels that vanish through dead ReLUs.
    m.generator.mlp_b2.mutable_value() = random_tensor(m.generator.mlp_b2.shape(), 12);
    if (m.task_generator) m.task_generator->mlp_b2.mutable_value() = random_tensor(m.generator.mlp_b2.shape(), 13);
    const Var s = features(4, 10), q = features(6, 11);
    const AdaptedFeatures out = adapt_episode(s, q, m, v);
    const VariantTraits& t = traits(v);
    EXPECT_EQ(out.supports.value() != s.value(), t.support_task || t.support_instance) << t.label;
    EXPECT_EQ(out.queries.value() != q.value(), t.query_task || t.query_instance) << t.label;
    EXPECT_EQ(m.task_generator.has_value(), !t.shared_generator) << t.label;
    EXPECT_EQ(m.generator.config.encoder == ChannelEncoder::gap, t.gap_encoder) << t.label;
  }
}

TEST(Variants, CommonPartsInitializedIdentically) {
  ModelParams a = ModelParams::create(tiny_model(), Variant::i, 9);
  ModelParams b = ModelParams::create(tiny_model(), Variant::ix, 9);
  const auto pa = a.backbone_parameters(), pb = b.backbone_parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value(), pb[i]->value());
  EXPECT_EQ(a.context.pre1.weight.value(), b.context.pre1.weight.value());
}

TEST(Variants, MismatchedShapesRejected) {
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 0);
  EXPECT_THROW(adapt_episode(features(4, 0), Var(Tensor(Shape{2, 8, 4, 3})), m, Variant::ix), ShapeError);
  EXPECT_THROW(adapt_episode(features(4, 0), features(2, 1), m, Variant::vi), std::invalid_argument);
}

// Matching head.

TEST(Prototypes, SingleShotAndIdenticalSupports) {
  const Tensor s = random_tensor({3, 2, 2}, 1);
  const std::vector<std::size_t> labels{2, 0, 1};
  const Tensor p = prototypes(Var(s), labels, 3, 1).value();
  ASSERT_EQ(p.shape(), (Shape{3, 4}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(p.at({labels[i], j}), s[i * 4 + j]);

  Tensor same(Shape{4, 3});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) same.at({i, j}) = 0.1 * static_cast<double>(j + 1) + (i >= 2 ? 1.0 : 0.0);
  const Tensor q = prototypes(Var(same), std::vector<std::size_t>{0, 0, 1, 1}, 2, 2).value();
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(q.at({0, j}), same.at({0, j}));
    EXPECT_EQ(q.at({1, j}), same.at({2, j}));
  }
}

TEST(Prototypes, MeanOracleAndErrors) {
  const Tensor s = random_tensor({6, 5}, 2);
  const std::vector<std::size_t> labels{1, 0, 2, 0, 1, 2};
  const Tensor p = prototypes(Var(s), labels, 3, 2).value();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 6; ++i) acc += labels[i] == c ? s[i * 5 + j] : 0.0;
      EXPECT_NEAR(p.at({c, j}), acc / 2.0, 1e-15);
    }
  EXPECT_THROW(prototypes(Var(s), std::vector<std::size_t>{0, 0, 0, 1, 2, 2}, 3, 2), std::invalid_argument);
  EXPECT_THROW(prototypes(Var(s), std::vector<std::size_t>{0, 0, 1, 1, 3, 3}, 3, 2), std::invalid_argument);
  EXPECT_THROW(prototypes(Var(s), std::vector<std::size_t>{0, 1, 2}, 3, 1), ShapeError);
}

TEST(Classify, DistanceOracleAndArgmax) {
  const Tensor q = random_tensor({4, 2, 3}, 3), p = random_tensor({3, 6}, 4);
  const Tensor logits = classify(Var(q), Var(p), 64.0).value();
  ASSERT_EQ(logits.shape(), (Shape{4, 3}));
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t n = 0; n < 3; ++n) {
      double d = 0.0;
      for (std::size_t j = 0; j < 6; ++j) d += (q[m * 6 + j] - p[n * 6 + j]) * (q[m * 6 + j] - p[n * 6 + j]);
      EXPECT_NEAR(logits.at({m, n}), -d / 64.0, 1e-14);
    }
  const Tensor hit = classify(ops::gather(Var(p), {2}), Var(p), 1.0).value();
  EXPECT_EQ(accuracy(hit, std::vector<std::size_t>{2}), 1.0);
}

TEST(Classify, EquidistantPrototypesGiveUniformSoftmax) {
  const Tensor p = Tensor::from({4, 2}, {1, 0, -1, 0, 0, 1, 0, -1});
  Var logits(classify(Var(Tensor(Shape{1, 2}, 0.0)), Var(p), 2.0).value(), true);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(logits.value()[i], logits.value()[0]);
  const double loss = episode_loss(logits, std::vector<std::size_t>{0}).value().item();
  EXPECT_NEAR(loss, std::log(4.0), 1e-15);
}

TEST(EpisodeLoss, KnownValues) {
  EXPECT_NEAR(episode_loss(Var(Tensor(Shape{3, 5}, 0.0)), std::vector<std::size_t>{0, 4, 2}).value().item(),
              std::log(5.0), 1e-12);
  EXPECT_NEAR(std::log(5.0), 1.60944, 1e-5);
  Tensor margin(Shape{2, 5}, 0.0);
  margin.at({0, 3}) = 1000.0;
  margin.at({1, 0}) = 1000.0;
  EXPECT_LT(episode_loss(Var(margin), std::vector<std::size_t>{3, 0}).value().item(), 1e-6);
  EXPECT_THROW(episode_loss(Var(margin), std::vector<std::size_t>{5, 0}), std::invalid_argument);
}

TEST(EpisodeLoss, MatchesSoftmaxNllOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor z = random_tensor({6, 5}, seed, 5.0);
    const std::vector<std::size_t> labels{0, 1, 2, 3, 4, 0};
    double expect = 0.0;
    for (std::size_t m = 0; m < 6; ++m) {
      double norm = 0.0;
      for (std::size_t n = 0; n < 5; ++n) norm += std::exp(z.at({m, n}));
      expect += std::log(norm) - z.at({m, labels[m]});
    }
    EXPECT_NEAR(episode_loss(Var(z), labels).value().item(), expect / 6.0, 1e-12);
  }
}

TEST(EpisodeLoss, LogitShiftInvariance) {
  // Integer logits keep the shift exact in floating point.
  const Tensor z = Tensor::from({2, 4}, {3, -1, 2, 0, 5, 5, -2, 1});
  Tensor shifted = z;
  for (std::size_t j = 0; j < 4; ++j) shifted.at({0, j}) += 7.0;
  for (std::size_t j = 0; j < 4; ++j) shifted.at({1, j}) -= 3.0;
  const std::vector<std::size_t> labels{2, 1};
  Var a(z, true), b(shifted, true);
  episode_loss(a, labels).backward();
  episode_loss(b, labels).backward();
  EXPECT_EQ(a.grad(), b.grad());
  EXPECT_EQ(accuracy(z, labels), accuracy(shifted, labels));
}

TEST(Accuracy, TiesGoToLowestIndexAndAlwaysZeroIsChance) {
  EXPECT_EQ(accuracy(Tensor::from({2, 3}, {1, 1, 0, 0, 2, 2}), std::vector<std::size_t>{0, 1}), 1.0);
  const SyntheticDataset data(tiny_data());
  Rng rng(4);
  const Episode ep = sample_episode(data, 5, 5, 15, rng, Split::test);
  Tensor always_zero(Shape{75, 5}, 0.0);
  for (std::size_t m = 0; m < 75; ++m) always_zero.at({m, 0}) = 1.0;
  EXPECT_EQ(accuracy(always_zero, ep.query_labels), 0.2);
}

// Training.

TEST(Train, ZeroLearningRateKeepsParameters) {
  const SyntheticDataset data(tiny_data());
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 1);
  const auto before = snapshot(m);
  TrainingConfig cfg;
  cfg.episodes = 3;
  cfg.queries = 3;
  cfg.learning_rate = 0.0;
  train(m, data, cfg, 1);
  EXPECT_EQ(snapshot(m), before);
}

TEST(Train, DeterministicCurves) {
  const SyntheticDataset data(tiny_data());
  TrainingConfig cfg;
  cfg.episodes = 5;
  cfg.queries = 3;
  cfg.grad_clip = 5.0;
  ModelParams a = ModelParams::create(tiny_model(), Variant::ix, 2), b = ModelParams::create(tiny_model(), Variant::ix, 2);
  const TrainResult ra = train(a, data, cfg, 3), rb = train(b, data, cfg, 3);
  EXPECT_EQ(ra.curve, rb.curve);
  EXPECT_EQ(ra.stream_fingerprint, rb.stream_fingerprint);
  EXPECT_EQ(snapshot(a), snapshot(b));
}

TEST(Train, TwoClassLossDecreases) {
  SyntheticTaskConfig d = tiny_data(2);
  d.noise_std = 0.0;
  const SyntheticDataset data(d);
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 4);
  TrainingConfig cfg;
  cfg.episodes = 200;
  cfg.way = 2;
  cfg.shot = 1;
  cfg.queries = 3;
  cfg.grad_clip = 5.0;
  std::size_t calls = 0;
  const TrainResult r = train(m, data, cfg, 5, [&](std::size_t, double) { ++calls; });
  EXPECT_EQ(calls, 200u);
  EXPECT_LT(window_mean(r.curve, 100, 200), window_mean(r.curve, 0, 100));
}

TEST(Train, DivergenceReportsEpisode) {
  const SyntheticDataset data(tiny_data());
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 6);
  TrainingConfig cfg;
  cfg.episodes = 50;
  cfg.queries = 3;
  cfg.learning_rate = 1e12;
  cfg.grad_clip = 0.0;
  EXPECT_THROW(train(m, data, cfg, 7), NumericError);
}

// Evaluation.

TEST(Report, StatisticsAndErrors) {
  const EvalReport perfect = make_report(std::vector<double>(10, 1.0));
  EXPECT_EQ(perfect.mean, 1.0);
  EXPECT_EQ(perfect.ci95, 0.0);
  EXPECT_EQ(make_report(std::vector<double>(600, 0.2)).mean, 0.2);
  EXPECT_THROW(make_report({0.5}), std::invalid_argument);

  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> acc(37);
  for (double& a : acc) a = u(rng);
  const EvalReport r = make_report(acc);
  double mean = 0.0;
  for (double a : acc) mean += a;
  mean /= 37.0;
  double var = 0.0;
  for (double a : acc) var += (a - mean) * (a - mean);
  EXPECT_NEAR(r.mean, mean, 1e-12);
  EXPECT_NEAR(r.ci95, 1.96 * std::sqrt(var / 37.0) / std::sqrt(37.0), 1e-12);
  EXPECT_EQ(r.episode_count, 37u);
}

TEST(Evaluate, DeterministicAndThreadIndependent) {
  const SyntheticDataset data(tiny_data());
  ModelParams m = ModelParams::create(tiny_model(), Variant::ix, 9);
  EvalSettings s;
  s.episodes = 6;
  s.queries = 3;
  const EvalReport a = evaluate(m, data, s, 10);
  s.threads = 3;
  const EvalReport b = evaluate(m, data, s, 10);
  EXPECT_EQ(a.episode_accuracies, b.episode_accuracies);
  EXPECT_EQ(a.stream_fingerprint, b.stream_fingerprint);
  for (double x : a.episode_accuracies) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  s.episodes = 1;
  EXPECT_THROW(evaluate(m, data, s, 10), std::invalid_argument);
}

TEST(Evaluate, RandomPrototypesAtChance) {
  const SyntheticDataset data(tiny_data());
  ModelParams m = ModelParams::create(tiny_model(), Variant::i, 11);
  EvalSettings s;
  s.episodes = 500;
  s.random_prototypes = true;
  const EvalReport r = evaluate(m, data, s, 12);
  // Per-episode accuracy over 75 queries has sigma sqrt(0.2 * 0.8 / 75); the mean over 500 episodes less.
  const double sigma = std::sqrt(0.2 * 0.8 / 75.0 / 500.0);
  EXPECT_NEAR(r.mean, 0.2, 3 * sigma);
}

// Ablation.

TEST(Ablate, NineRowsWithSharedStreams) {
  const SyntheticDataset data(tiny_data());
  AblationSettings s;
  s.training.episodes = 2;
  s.training.queries = 2;
  s.training.grad_clip = 5.0;
  s.eval.episodes = 2;
  s.eval.queries = 2;
  std::size_t seen = 0;
  const auto rows = ablate(tiny_model(), data, s, 13, [&](const AblationRow&) { ++seen; });
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(seen, 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(rows[i].variant, all_variants()[i]);
    EXPECT_EQ(rows[i].train_stream, rows[0].train_stream);
    EXPECT_EQ(rows[i].report.stream_fingerprint, rows[0].report.stream_fingerprint);
    EXPECT_EQ(rows[i].curve.size(), 2u);
  }
}

TEST(Ablate, BaselineRowEqualsPlainRun) {
  const SyntheticDataset data(tiny_data());
  AblationSettings s;
  s.training.episodes = 3;
  s.training.queries = 2;
  s.eval.episodes = 3;
  s.eval.queries = 2;
  s.variants = {Variant::i};
  const auto rows = ablate(tiny_model(), data, s, 14);
  ModelParams m = ModelParams::create(tiny_model(), Variant::i, 14);
  const TrainResult r = train(m, data, s.training, 14);
  EXPECT_EQ(rows[0].curve, r.curve);
  EXPECT_EQ(rows[0].report.episode_accuracies, evaluate(m, data, s.eval, 14).episode_accuracies);
}

// Checkpoints.

class Checkpoint : public ::testing::Test {
 protected:
  std::filesystem::path path = std::filesystem::temp_directory_path() / "insta_test_checkpoint.txt";
  void TearDown() override { std::filesystem::remove(path); }
};

TEST_F(Checkpoint, RoundTripIsExact) {
  ModelParams a = ModelParams::create(tiny_model(), Variant::viii, 15);
  a.backbone.blocks()[0].bn.running_var[1] = 0.1;  // a value without a short decimal form
  save_checkpoint(path, a, 42);
  ModelParams b = ModelParams::create(tiny_model(), Variant::viii, 16);
  load_checkpoint(path, b, 42);
  const auto sa = a.named_state(), sb = b.named_state();
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    EXPECT_EQ(sa[i].first, sb[i].first);
    EXPECT_EQ(*sa[i].second, *sb[i].second) << sa[i].first;
  }
}

TEST_F(Checkpoint, MismatchesAreConfigErrors) {
  ModelParams a = ModelParams::create(tiny_model(), Variant::ix, 17);
  save_checkpoint(path, a, 42);
  EXPECT_THROW(load_checkpoint(path, a, 43), ConfigError);
  ModelParams other = ModelParams::create(tiny_model(), Variant::iii, 17);
  EXPECT_THROW(load_checkpoint(path, other, 42), ConfigError);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
  EXPECT_THROW(load_checkpoint(path, a, 42), ConfigError);
  EXPECT_THROW(load_checkpoint(path.string() + ".missing", a, 42), ConfigError);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

// Gradient suite.

TEST(GradSuite, AllModulesBelowTolerance) {
  const auto rows = run_grad_suite(0);
  std::set<std::string> modules;
  for (const auto& r : rows) {
    modules.insert(r.module);
    EXPECT_LT(r.max_rel_err, 1e-5) << r.module << "/" << r.name;
  }
  EXPECT_EQ(modules, (std::set<std::string>{"tensor-core", "msa", "kernel-generator", "insta", "fsl-harness"}));
}

}  // namespace
}  // namespace insta::fsl
