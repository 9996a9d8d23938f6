#include <gtest/gtest.h>

#include <cmath>

#include "heteroflow/error.hpp"
#include "heteroflow/models.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace heteroflow;
using namespace heteroflow::models;
using heteroflow::datagen::SyntheticGraphRecord;

namespace {

std::vector<SyntheticGraphRecord> small_dataset(int count, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SyntheticGraphRecord> out;
  std::uniform_int_distribution<int> size(4, 9);
  for (int i = 0; i < count; ++i) {
    const int n = size(rng);
    Graph g = testutil::random_connected(n, 0.3, rng);
    Matrix f = testutil::gaussian(n, d, rng);
    const int label = i % 2;
    // Label 1 graphs carry a shifted mean so the task is learnable.
    if (label == 1) f.array() += 1.0;
    auto r = datagen::make_plain_record(std::move(g), std::vector<int>(static_cast<std::size_t>(n), 0),
                                        FeatureMatrix(f), {});
    r.graph_label = label;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST(Family, NamesRoundTrip) {
  for (Family f : kAllFamilies) EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_THROW(parse_family("mlp"), Error);
}

TEST(Params, LayoutAndCounts) {
  const auto gcn = ModelParams::init(ModelConfig::defaults(Family::Gcn, 8), 1);
  EXPECT_EQ(gcn.parameter_count(), 913u);  // 8*16 + 3*256 + 16 + 1
  EXPECT_EQ(gcn.tensors().front().name, "W0");
  EXPECT_EQ(gcn.tensors().back().name, "head_b");
  const auto gf = ModelParams::init(ModelConfig::defaults(Family::GfGcn, 8), 1);
  EXPECT_TRUE(gf.at("W").isApprox(gf.at("W").transpose()));
  EXPECT_EQ(gf.config().activation, Activation::Identity);
  const auto mix = ModelParams::init(ModelConfig::defaults(Family::AdaptiveMix, 8), 1);
  EXPECT_NEAR(mix.mixing(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(mix.mixing(2)(0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(mix.at("nope"), Error);
  EXPECT_EQ(ModelParams::init(ModelConfig::defaults(Family::Gcn, 8), 1), gcn);
  EXPECT_FALSE(ModelParams::init(ModelConfig::defaults(Family::Gcn, 8), 2) == gcn);
}

TEST(Params, MatchedWidths) {
  EXPECT_EQ(matched_hidden_width(Family::Gcn, 8, 4, 16), 16);
  for (Family f : {Family::GfGcn, Family::AdaptiveMix}) {
    const int h = matched_hidden_width(f, 8, 4, 16);
    const auto p = ModelParams::init(ModelConfig::defaults(f, 8, 4, h), 0);
    const auto below = ModelParams::init(ModelConfig::defaults(f, 8, 4, h - 1), 0);
    const auto above = ModelParams::init(ModelConfig::defaults(f, 8, 4, h + 1), 0);
    // The symmetric gf_gcn weight counts once per unique entry.
    const auto unique = [f](const ModelParams& m) {
      const auto c = static_cast<double>(m.parameter_count());
      if (f != Family::GfGcn) return c;
      const auto w = static_cast<double>(m.at("W").rows());
      return c - w * (w - 1) / 2;
    };
    const auto gap = [&](const ModelParams& m) { return std::abs(unique(m) - 913.0); };
    EXPECT_LE(gap(p), gap(below));
    EXPECT_LE(gap(p), gap(above));
  }
}

TEST(Forward, HandComputedGcn) {
  // One layer, one channel, single edge: A_sl = [[.5, .5], [.5, .5]].
  ModelConfig cfg = ModelConfig::defaults(Family::Gcn, 1, 1, 1);
  auto p = ModelParams::zeros(cfg);
  p.at("W0")(0, 0) = 2.0;
  p.at("head_w")(0, 0) = 3.0;
  p.at("head_b")(0, 0) = -1.0;
  const Graph e = testutil::from_pairs(2, {{0, 1}});
  Matrix f(2, 1);
  f << 1.0, -3.0;
  const auto out = forward(p, e, FeatureMatrix(f));
  // propagated = [-1, -1] * 2 -> relu -> 0; mean 0; prediction -1.
  EXPECT_NEAR(out.predictions(0), -1.0, 1e-15);
  f << 3.0, 1.0;
  // propagated = [2, 2] * 2 = 4; prediction 3*4 - 1 = 11.
  EXPECT_NEAR(forward(p, e, FeatureMatrix(f)).predictions(0), 11.0, 1e-14);
}

TEST(Forward, HandComputedGf) {
  // H0 = F enc; H1 = H0 + tau * A_hat H0 W with A_hat = [[0,1],[1,0]].
  ModelConfig cfg = ModelConfig::defaults(Family::GfGcn, 1, 1, 1);
  cfg.tau = 0.5;
  auto p = ModelParams::zeros(cfg);
  p.at("encoder")(0, 0) = 1.0;
  p.at("W")(0, 0) = -1.0;
  p.at("head_w")(0, 0) = 1.0;
  const Graph e = testutil::from_pairs(2, {{0, 1}});
  Matrix f(2, 1);
  f << 1.0, -1.0;
  const auto layers = layer_outputs(p, e, FeatureMatrix(f));
  ASSERT_EQ(layers.size(), 2u);
  // h1 = [1 + 0.5 * (-1)(-1), -1 + 0.5 * (1)(-1)] = [1.5, -1.5]
  EXPECT_NEAR(layers[1](0, 0), 1.5, 1e-15);
  EXPECT_NEAR(layers[1](1, 0), -1.5, 1e-15);
}

TEST(Forward, BatchMatchesSingleGraphs) {
  const auto data = small_dataset(6, 3, 1);
  const auto batch = make_batch(data, LossKind::Logistic);
  for (Family fam : kAllFamilies) {
    const auto p = ModelParams::init(ModelConfig::defaults(fam, 3, 3, 5), 7);
    const auto all = forward(p, batch);
    for (int i = 0; i < 6; ++i) {
      const auto& r = data[static_cast<std::size_t>(i)];
      EXPECT_NEAR(forward(p, r.graph, r.features).predictions(0), all.predictions(i), 1e-12);
    }
  }
}

TEST(Forward, PermutationInvariant) {
  Rng rng(2);
  for (Family fam : kAllFamilies) {
    const auto p = ModelParams::init(ModelConfig::defaults(fam, 4), 3);
    for (int t = 0; t < 5; ++t) {
      const Graph g = testutil::random_connected(10, 0.3, rng);
      const Matrix f = testutil::gaussian(10, 4, rng);
      const auto perm = testutil::random_permutation(10, rng);
      Matrix pf(10, 4);
      for (int i = 0; i < 10; ++i) pf.row(perm[static_cast<std::size_t>(i)]) = f.row(i);
      EXPECT_NEAR(forward(p, g, FeatureMatrix(f)).predictions(0),
                  forward(p, g.relabeled(perm), FeatureMatrix(pf)).predictions(0), 1e-10);
    }
  }
}

TEST(Loss, Examples) {
  Vector pred(2);
  Vector tgt(2);
  pred << 0.0, 0.0;
  tgt << 1.0, 0.0;
  EXPECT_NEAR(loss(pred, tgt, LossKind::Logistic), std::log(2.0), 1e-15);
  pred << 2.0, -1.0;
  EXPECT_NEAR(loss(pred, tgt, LossKind::Mse), (1.0 + 1.0) / 2.0, 1e-15);
  pred << 800.0, -800.0;
  EXPECT_NEAR(loss(pred, tgt, LossKind::Logistic), 0.0, 1e-15);
  tgt << 0.0, 1.0;
  EXPECT_NEAR(loss(pred, tgt, LossKind::Logistic), 800.0, 1e-9);
  EXPECT_THROW(loss(pred, Vector(3), LossKind::Mse), Error);
  EXPECT_THROW(loss(Vector(0), Vector(0), LossKind::Mse), Error);
}

TEST(Grad, MatchesFiniteDifferences) {
  const auto data = small_dataset(8, 4, 3);
  for (LossKind kind : {LossKind::Logistic, LossKind::Mse}) {
    const auto batch = make_batch(data, kind);
    for (Family fam : kAllFamilies) {
      const auto p = ModelParams::init(ModelConfig::defaults(fam, 4, 3, 6), 11);
      const auto check = oracle::finite_difference_check(p, batch, kind, 200, 5);
      EXPECT_EQ(check.failures, 0) << to_string(fam) << " worst " << check.worst;
      EXPECT_GT(check.coordinates, 0);
    }
  }
}

TEST(Grad, EmptyBatchThrows) {
  const std::vector<SyntheticGraphRecord> none;
  const auto p = ModelParams::init(ModelConfig::defaults(Family::Gcn, 4), 0);
  EXPECT_THROW(grad(p, make_batch(none, LossKind::Logistic), LossKind::Logistic), Error);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto p = ModelParams::zeros(ModelConfig::defaults(Family::Gcn, 1, 1, 1));
  auto state = AdamState::for_params(p);
  Gradients g;
  for (const auto& t : p.tensors()) g.push_back(Matrix::Constant(t.value.rows(), t.value.cols(), 0.3));
  adam_step(p, g, state, 0.1);
  // Bias correction makes the first step -lr * sign(g), up to eps.
  for (const auto& t : p.tensors()) EXPECT_NEAR(t.value(0, 0), -0.1, 1e-7);
  adam_step(p, g, state, 0.1);
  for (const auto& t : p.tensors()) EXPECT_NEAR(t.value(0, 0), -0.2, 1e-7);
  EXPECT_EQ(state.t, 2);
  g.pop_back();
  EXPECT_THROW(adam_step(p, g, state, 0.1), Error);
}

TEST(Adam, KeepsGfWeightSymmetric) {
  auto p = ModelParams::init(ModelConfig::defaults(Family::GfGcn, 2, 2, 3), 0);
  auto state = AdamState::for_params(p);
  Gradients g;
  Rng rng(1);
  for (const auto& t : p.tensors()) g.push_back(testutil::gaussian(static_cast<int>(t.value.rows()),
                                                                    static_cast<int>(t.value.cols()), rng));
  adam_step(p, g, state, 0.05);
  EXPECT_EQ(p.at("W"), Matrix(p.at("W").transpose()));
}

TEST(GfGcn, SignOfWeightSetsFrequency) {
  // Identity activation, no encoder mixing: positive W smooths, negative W sharpens.
  const Graph g = testutil::from_pairs(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 2}});
  Rng rng(4);
  const Matrix f = testutil::gaussian(6, 2, rng);
  for (double sign : {1.0, -1.0}) {
    ModelConfig cfg = ModelConfig::defaults(Family::GfGcn, 2, 30, 2);
    cfg.tau = 0.2;
    auto p = ModelParams::zeros(cfg);
    p.at("encoder") = Matrix::Identity(2, 2);
    p.at("W") = sign * Matrix::Identity(2, 2);
    const auto layers = layer_outputs(p, g, FeatureMatrix(f));
    const double r0 = rayleigh_quotient(g, layers.front());
    const double rt = rayleigh_quotient(g, layers.back());
    if (sign > 0) EXPECT_LT(rt, r0);
    else EXPECT_GT(rt, r0);
  }
}

TEST(AdaptiveMix, ChannelsSpanLowAndHighPass) {
  // With all weight on one channel and identity weights, the layer is exactly
  // A_hat H, H - A_hat H or H before the ReLU.
  const Graph g = testutil::from_pairs(3, {{0, 1}, {1, 2}});
  Matrix f(3, 1);
  f << 1.0, 2.0, 4.0;
  const Matrix a = normalized_adjacency(g);
  const Matrix low = a * f;
  const Matrix expected[3] = {low, f - low, f};
  for (int c = 0; c < 3; ++c) {
    auto p = ModelParams::zeros(ModelConfig::defaults(Family::AdaptiveMix, 1, 1, 1));
    p.at("W_low0")(0, 0) = 1.0;
    p.at("W_high0")(0, 0) = 1.0;
    p.at("W_id0")(0, 0) = 1.0;
    p.at("alpha0")(c, 0) = 60.0;
    const auto out = layer_outputs(p, g, FeatureMatrix(f)).back();
    EXPECT_NEAR((out - expected[c].cwiseMax(0.0)).norm(), 0.0, 1e-12);
  }
}

TEST(Train, DeterministicAndSeparable) {
  const auto data = small_dataset(40, 3, 5);
  Rng rng(1);
  const auto split = datagen::split_dataset(std::span<const SyntheticGraphRecord>(data), {}, rng);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.learning_rate = 0.02;
  cfg.seed = 3;
  for (Family fam : kAllFamilies) {
    const auto a = train(fam, data, split, cfg);
    const auto b = train(fam, data, split, cfg);
    EXPECT_EQ(a.train_loss, b.train_loss);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.train_loss.size(), 60u);
    EXPECT_LT(a.train_loss.back(), a.train_loss.front());
    EXPECT_GE(a.test_metric, 0.75) << to_string(fam);
    EXPECT_EQ(a.test_embeddings.rows(), static_cast<Eigen::Index>(split.test.size()));
  }
}

TEST(Train, ZeroLearningRateKeepsInitialModel) {
  const auto data = small_dataset(20, 3, 6);
  Rng rng(2);
  const auto split = datagen::split_dataset(std::span<const SyntheticGraphRecord>(data), {}, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 0.0;
  const auto r = train(Family::Gcn, data, split, cfg);
  ModelConfig mc = ModelConfig::defaults(Family::Gcn, 3);
  EXPECT_EQ(r.selected_epoch, 0);
  for (double l : r.train_loss) EXPECT_EQ(l, r.train_loss.front());
  EXPECT_EQ(r.params.parameter_count(), ModelParams::zeros(mc).parameter_count());
  cfg.learning_rate = -1.0;
  EXPECT_THROW(train(Family::Gcn, data, split, cfg), Error);
}

TEST(Train, MinibatchAndEmptySplit) {
  const auto data = small_dataset(20, 3, 7);
  Rng rng(3);
  auto split = datagen::split_dataset(std::span<const SyntheticGraphRecord>(data), {}, rng);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  EXPECT_EQ(train(Family::AdaptiveMix, data, split, cfg).train_loss.size(), 3u);
  split.val.clear();
  EXPECT_THROW(train(Family::Gcn, data, split, cfg), Error);
}

TEST(Train, RegressionTargets) {
  auto data = small_dataset(30, 2, 8);
  for (auto& r : data) r.target = r.features.values().mean();
  Rng rng(4);
  const auto split = datagen::split_dataset(std::span<const SyntheticGraphRecord>(data), {}, rng);
  TrainConfig cfg;
  cfg.loss = LossKind::Mse;
  cfg.epochs = 80;
  cfg.learning_rate = 0.02;
  const auto r = train(Family::Gcn, data, split, cfg);
  EXPECT_TRUE(std::isfinite(r.test_metric));
  EXPECT_LT(r.train_loss.back(), r.train_loss.front());
}

TEST(Embed, ShapesAndEmptyInput) {
  const auto data = small_dataset(5, 3, 9);
  const auto p = ModelParams::init(ModelConfig::defaults(Family::Gcn, 3, 2, 7), 0);
  EXPECT_EQ(embed_graphs(p, data).rows(), 5);
  EXPECT_EQ(embed_graphs(p, data).cols(), 7);
  EXPECT_EQ(embed_graphs(p, std::vector<SyntheticGraphRecord>{}).rows(), 0);
}
