#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

using namespace seesaw;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<double>> rows_of(const Tensor<double>& t) {
  const std::size_t d = t.size() / t.n();
  std::vector<std::vector<double>> out(t.n());
  for (std::size_t i = 0; i < t.n(); ++i) out[i].assign(t.data() + i * d, t.data() + (i + 1) * d);
  return out;
}

ArchSpec tiny_spec() {
  return parse_spec(
      "model tiny\n"
      "input 3 12 12\n"
      "stem_conv 8 - 2 - 1\n"
      "block 8 16 1 shuffle 1\n"
      "head_conv 16 - 1 - 1\n"
      "gdconv 16 - 1 - 1\n"
      "embedding_linear 8 - 1 - 1\n");
}

Dataset<float> tiny_data() {
  SyntheticSpec s;
  s.identities = 4;
  s.images_per_identity = 6;
  s.size = 12;
  s.seed = 2;
  return synthetic_dataset<float>(s);
}

TrainConfig tiny_config(std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  cfg.lr_decay_epochs = {};
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(ArcFace, ZeroMarginIsNormalizedSoftmax) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto emb = oracle::random_tensor<double>(Shape{6, 16, 1, 1}, rng);
    ArcFaceHead<double> head(9, 16, 100 + trial, 64.0, 0.0);
    std::vector<std::size_t> labels(6);
    for (auto& l : labels) l = rng() % 9;
    const double ref = oracle::normalized_softmax_ce(rows_of(emb), rows_of(head.weight), labels, 64.0);
    EXPECT_LT(oracle::rel_error(arcface_loss(emb, labels, head).loss, ref, 1e-12), 1e-6) << trial;
  }
}

TEST(ArcFace, TargetNeverExceedsCosineAndIsMonotone) {
  for (double m : {0.1, 0.5, 1.0}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1000; i >= 0; --i) {
      const double c = std::cos(M_PI * i / 1000.0);
      const double t = arcface_target(c, m);
      EXPECT_LE(t, c + 1e-12) << m << " " << i;
      EXPECT_GE(t, prev - 1e-12) << m << " " << i;
      prev = t;
    }
  }
  EXPECT_NEAR(arcface_target(std::cos(0.3), 0.5), std::cos(0.8), 1e-12);
  EXPECT_EQ(arcface_target(0.42, 0.0), 0.42);
}

TEST(ArcFace, TargetDerivativeMatchesDifferences) {
  for (double c = -0.95; c < 0.95; c += 0.05) {
    const double h = 1e-6;
    const double fd = (arcface_target(c + h, 0.5) - arcface_target(c - h, 0.5)) / (2 * h);
    EXPECT_LT(oracle::rel_error(arcface_target_derivative(c, 0.5), fd), 1e-5) << c;
  }
}

TEST(ArcFace, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(2);
  auto emb = oracle::random_tensor<double>(Shape{5, 12, 1, 1}, rng);
  ArcFaceHead<double> head(7, 12, 3, 8.0, 0.5);
  const std::vector<std::size_t> labels = {0, 3, 6, 3, 1};
  head.grad.fill(0);
  const auto res = arcface_loss(emb, labels, head);
  const auto loss_at = [&]() {
    ArcFaceHead<double> copy = head;
    return arcface_loss(emb, labels, copy).loss;
  };
  const double h = 1e-6;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    const double v = emb[i];
    emb[i] = v + h;
    const double up = loss_at();
    emb[i] = v - h;
    const double down = loss_at();
    emb[i] = v;
    EXPECT_LT(oracle::rel_error(res.grad_embeddings[i], (up - down) / (2 * h)), 1e-5) << "emb " << i;
  }
  for (std::size_t i = 0; i < head.weight.size(); ++i) {
    const double v = head.weight[i];
    head.weight[i] = v + h;
    const double up = loss_at();
    head.weight[i] = v - h;
    const double down = loss_at();
    head.weight[i] = v;
    EXPECT_LT(oracle::rel_error(head.grad[i], (up - down) / (2 * h)), 1e-5) << "head " << i;
  }
}

TEST(ArcFace, RejectsBadInput) {
  ArcFaceHead<double> head(3, 4, 1);
  EXPECT_THROW(arcface_loss(Tensor<double>(Shape{1, 4, 1, 1}), {0}, head), Error);
  EXPECT_THROW(arcface_loss(Tensor<double>(Shape{1, 4, 1, 1}, 1.0), {3}, head), Error);
  EXPECT_THROW(arcface_loss(Tensor<double>(Shape{1, 5, 1, 1}, 1.0), {0}, head), Error);
  EXPECT_THROW(ArcFaceHead<double>(3, 4, 1, 64.0, -0.1), Error);
}

TEST(Schedule, StepDecays) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_at_epoch(0, cfg), 0.1);
  EXPECT_DOUBLE_EQ(lr_at_epoch(8, cfg), 0.1);
  EXPECT_NEAR(lr_at_epoch(9, cfg), 0.01, 1e-15);
  EXPECT_NEAR(lr_at_epoch(12, cfg), 0.01, 1e-15);
  EXPECT_NEAR(lr_at_epoch(13, cfg), 0.001, 1e-15);
  EXPECT_NEAR(lr_at_epoch(15, cfg), 1e-4, 1e-15);
  EXPECT_THROW(lr_at_epoch(16, cfg), Error);
  cfg.lr_decay_epochs = {9, 9};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.lr_decay_epochs = {20};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Sgd, KnownValues) {
  std::vector<double> p = {1.0, -2.0}, v = {0.5, 0.0};
  const std::vector<double> g = {0.2, 0.4};
  sgd_momentum_step<double>(p, g, v, 0.1, 0.9, 0.01);
  EXPECT_NEAR(v[0], 0.9 * 0.5 + 0.2 + 0.01, 1e-15);
  EXPECT_NEAR(v[1], 0.4 - 0.02, 1e-15);
  EXPECT_NEAR(p[0], 1.0 - 0.1 * v[0], 1e-15);
  EXPECT_NEAR(p[1], -2.0 - 0.1 * v[1], 1e-15);
}

TEST(Sgd, NonFiniteGradientThrowsWithoutUpdating) {
  std::vector<double> p = {1.0, 2.0}, v = {0.0, 0.0};
  const std::vector<double> g = {0.1, std::nan("")};
  EXPECT_THROW(sgd_momentum_step<double>(p, g, v, 0.1, 0.9), Error);
  EXPECT_EQ(p[0], 1.0);
  const std::vector<double> short_g = {0.1};
  EXPECT_THROW(sgd_momentum_step<double>(p, short_g, v, 0.1, 0.9), Error);
}

TEST(Fit, DeterministicAndLogsEpochs) {
  const auto data = tiny_data();
  auto run = [&]() {
    auto model = build_model<float>(tiny_spec(), 1);
    ArcFaceHead<float> head(data.num_classes, model.embedding_dim(), 2);
    std::size_t calls = 0;
    const auto log = fit(model, data, head, tiny_config(3), [&](const EpochLog&) { ++calls; });
    EXPECT_EQ(calls, 3u);
    return std::make_pair(log, encode_records(model_records(model)));
  };
  const auto [a, wa] = run();
  const auto [b, wb] = run();
  ASSERT_EQ(a.epochs.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.epochs[e].loss, b.epochs[e].loss);
    EXPECT_TRUE(std::isfinite(a.epochs[e].loss));
  }
  EXPECT_EQ(wa, wb);
}

TEST(Fit, ReducesLossOnSeparableData) {
  const auto data = tiny_data();
  auto model = build_model<float>(tiny_spec(), 1);
  ArcFaceHead<float> head(data.num_classes, model.embedding_dim(), 2, 16.0, 0.2);
  const auto log = fit(model, data, head, tiny_config(8));
  EXPECT_LT(log.epochs.back().loss, log.epochs.front().loss);
}

TEST(Fit, WritesOneCheckpointPerEpoch) {
  const auto dir = fs::temp_directory_path() / "seesaw_fit_ckpt";
  fs::remove_all(dir);
  const auto data = tiny_data();
  auto model = build_model<float>(tiny_spec(), 1);
  ArcFaceHead<float> head(data.num_classes, model.embedding_dim(), 2);
  auto cfg = tiny_config(2);
  cfg.checkpoint_dir = dir.string();
  fit(model, data, head, cfg);
  std::size_t ssfn = 0;
  for (const auto& e : fs::directory_iterator(dir)) ssfn += e.path().extension() == ".ssfn";
  EXPECT_EQ(ssfn, 2u);
  EXPECT_EQ(fs::path(checkpoint_stem(dir.string(), 1)).filename(), "epoch_01");
  std::ifstream meta(checkpoint_stem(dir.string(), 1) + ".meta");
  std::stringstream ss;
  ss << meta.rdbuf();
  EXPECT_NE(ss.str().find("epoch=1"), std::string::npos);
  auto fresh = build_model<float>(tiny_spec(), 9);
  load_weights(fresh, checkpoint_stem(dir.string(), 1) + ".ssfn");
  EXPECT_EQ(encode_records(model_records(fresh)), encode_records(model_records(model)));
}

TEST(Fit, RejectsInconsistentInput) {
  auto data = tiny_data();
  auto model = build_model<float>(tiny_spec(), 1);
  ArcFaceHead<float> small(2, model.embedding_dim(), 2);
  EXPECT_THROW(fit(model, data, small, tiny_config(1)), Error);
  ArcFaceHead<float> wrong_dim(4, 5, 2);
  EXPECT_THROW(fit(model, data, wrong_dim, tiny_config(1)), Error);
  Dataset<float> empty;
  ArcFaceHead<float> head(4, model.embedding_dim(), 2);
  EXPECT_THROW(fit(model, empty, head, tiny_config(1)), Error);
}
