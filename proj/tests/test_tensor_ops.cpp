#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace seesaw;
using oracle::random_tensor;

namespace {

template <typename T>
double max_rel(const Tensor<T>& a, const Tensor<T>& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, oracle::rel_error(a[i], b[i], 1e-6));
  return worst;
}

}  // namespace

TEST(Shape, NumelAndString) {
  Shape s{2, 3, 4, 5};
  EXPECT_EQ(s.numel(), 120u);
  EXPECT_EQ(s.plane(), 20u);
  EXPECT_EQ(s.str(), "(2,3,4,5)");
}

TEST(Tensor, ZeroDimensionRejected) {
  EXPECT_THROW(Tensor<float>(Shape{0, 3, 4, 4}), Error);
  EXPECT_THROW(Tensor<float>(Shape{1, 3, 0, 4}), Error);
}

TEST(Tensor, IndexingIsNchw) {
  Tensor<float> t(Shape{2, 3, 4, 5});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i);
  EXPECT_EQ(t(1, 2, 3, 4), 119.0f);
  EXPECT_EQ(t(0, 1, 0, 0), 20.0f);
  EXPECT_EQ(t(1, 0, 0, 0), 60.0f);
}

TEST(Conv, AllOnesKernelSumsNeighbourhood) {
  Tensor<double> x(Shape{1, 1, 3, 3}, 1.0);
  Tensor<double> w(Shape{1, 1, 3, 3}, 1.0);
  const auto y = conv2d_forward(x, w, ConvParams::same(1, 1, 3));
  EXPECT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  EXPECT_EQ(y(0, 0, 1, 1), 9.0);
  EXPECT_EQ(y(0, 0, 0, 0), 4.0);
  EXPECT_EQ(y(0, 0, 0, 1), 6.0);
}

TEST(Conv, StrideTwoStemShape) {
  std::mt19937_64 rng(1);
  auto x = random_tensor<float>(Shape{1, 3, 112, 112}, rng);
  auto w = random_tensor<float>(Shape{64, 3, 3, 3}, rng);
  const auto y = conv2d_forward(x, w, ConvParams::same(3, 64, 3, 2));
  EXPECT_EQ(y.shape(), (Shape{1, 64, 56, 56}));
}

TEST(Conv, ChannelMismatchNamesDimension) {
  Tensor<float> x(Shape{1, 4, 8, 8});
  Tensor<float> w(Shape{8, 3, 3, 3});
  try {
    conv2d_forward(x, w, ConvParams::same(3, 8, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos);
  }
}

TEST(Conv, CrossCorrelationNotConvolution) {
  Tensor<double> x(Shape{1, 1, 1, 3});
  x[0] = 1, x[1] = 2, x[2] = 3;
  Tensor<double> w(Shape{1, 1, 1, 3});
  w[0] = 1, w[1] = 0, w[2] = 0;
  ConvParams p{1, 1, 1, 3, 1, 0, 1, false};
  const auto y = conv2d_forward(x, w, p);
  EXPECT_EQ(y[0], 1.0);
}

TEST(Conv, MatchesNaiveOnRandomCases) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> ch(1, 16), sp(3, 16), pick(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 2, c = ch(rng), o = ch(rng), h = sp(rng), w = sp(rng);
    const std::size_t k = pick(rng) == 0 ? 1 : 3, stride = 1 + pick(rng) % 2, pad = k / 2;
    auto x = random_tensor<double>(Shape{n, c, h, w}, rng);
    ConvParams p{c, o, k, k, stride, pad, 1, false};
    auto wt = random_tensor<double>(p.weight_shape(), rng);
    EXPECT_LT(max_rel(conv2d_forward(x, wt, p), oracle::naive_conv2d(x, wt, stride, pad, 1)), 1e-9) << trial;
  }
}

TEST(Conv, GroupedMatchesNaive) {
  std::mt19937_64 rng(7);
  for (std::size_t groups : {2u, 4u}) {
    auto x = random_tensor<double>(Shape{2, 8, 9, 9}, rng);
    ConvParams p{8, 12, 3, 3, 1, 1, groups, false};
    auto wt = random_tensor<double>(p.weight_shape(), rng);
    EXPECT_LT(max_rel(conv2d_forward(x, wt, p), oracle::naive_conv2d(x, wt, 1, 1, groups)), 1e-9);
  }
}

TEST(Conv, BiasAddsPerChannel) {
  std::mt19937_64 rng(3);
  auto x = random_tensor<double>(Shape{1, 2, 4, 4}, rng);
  ConvParams p = ConvParams::same(2, 3, 1);
  p.has_bias = true;
  auto wt = random_tensor<double>(p.weight_shape(), rng);
  Tensor<double> b(Shape{3, 1, 1, 1});
  b[0] = 1, b[1] = 2, b[2] = 3;
  const auto with = conv2d_forward(x, wt, p, &b);
  p.has_bias = false;
  const auto without = conv2d_forward(x, wt, p);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(with(0, c, 2, 1) - without(0, c, 2, 1), double(c + 1), 1e-12);
}

TEST(Depthwise, MatchesGroupedNaive) {
  std::mt19937_64 rng(11);
  for (std::size_t stride : {1u, 2u}) {
    auto x = random_tensor<double>(Shape{2, 6, 11, 11}, rng);
    auto w = random_tensor<double>(Shape{6, 1, 3, 3}, rng);
    const auto y = depthwise_conv2d_forward(x, w, stride, 1);
    EXPECT_LT(max_rel(y, oracle::naive_conv2d(x, w, stride, 1, 6)), 1e-9);
  }
}

TEST(Depthwise, GlobalKernelGivesOneByOne) {
  std::mt19937_64 rng(2);
  auto x = random_tensor<double>(Shape{2, 4, 7, 7}, rng);
  auto w = random_tensor<double>(Shape{4, 1, 7, 7}, rng);
  const auto y = global_depthwise_conv(x, w);
  EXPECT_EQ(y.shape(), (Shape{2, 4, 1, 1}));
  double ref = 0;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) ref += x(1, 3, i, j) * w(3, 0, i, j);
  EXPECT_NEAR(y(1, 3, 0, 0), ref, 1e-12);
}

TEST(Depthwise, GlobalKernelRejectsWrongSpatialSize) {
  Tensor<float> x(Shape{1, 4, 8, 8});
  Tensor<float> w(Shape{4, 1, 7, 7});
  EXPECT_THROW(global_depthwise_conv(x, w), ShapeError);
}

TEST(BatchNorm, TrainModeNormalizesPerChannel) {
  std::mt19937_64 rng(5);
  auto x = random_tensor<double>(Shape{4, 3, 5, 5}, rng, -3, 7);
  BatchNormParams<double> p(3);
  const auto y = batchnorm_forward(x, p, Mode::train);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0, sq = 0;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < 25; ++i) mean += y.plane(n, c)[i];
    mean /= 100;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < 25; ++i) sq += std::pow(y.plane(n, c)[i] - mean, 2);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq / 100, 1.0, 1e-3);
  }
}

TEST(BatchNorm, RunningStatsUpdateAndInferUsesThem) {
  Tensor<double> x(Shape{2, 1, 1, 2});
  x[0] = 1, x[1] = 2, x[2] = 3, x[3] = 4;
  BatchNormParams<double> p(1);
  batchnorm_forward(x, p, Mode::train);
  EXPECT_NEAR(p.running_mean[0], 0.1 * 2.5, 1e-12);
  EXPECT_NEAR(p.running_var[0], 0.9 * 1.0 + 0.1 * (5.0 / 3.0), 1e-12);
  const auto y = batchnorm_forward(x, p, Mode::infer);
  EXPECT_NEAR(y[0], (1 - p.running_mean[0]) / std::sqrt(p.running_var[0] + 1e-5), 1e-12);
}

TEST(Activation, KnownValues) {
  Tensor<double> x(Shape{1, 2, 1, 2});
  x[0] = -2, x[1] = 0, x[2] = 1, x[3] = -1;
  const auto sw = activation(x, Activation::swish);
  EXPECT_NEAR(sw[0], -2.0 / (1 + std::exp(2.0)), 1e-15);
  EXPECT_EQ(sw[1], 0.0);
  Tensor<double> slope(Shape{2, 1, 1, 1});
  slope[0] = 0.25, slope[1] = 0.5;
  const auto pr = activation(x, Activation::prelu, &slope);
  EXPECT_EQ(pr[0], -0.5);
  EXPECT_EQ(pr[3], -0.5);
  EXPECT_EQ(pr[2], 1.0);
  const auto re = activation(x, Activation::relu);
  EXPECT_EQ(re[0], 0.0);
  EXPECT_NEAR(activation(x, Activation::sigmoid)[1], 0.5, 1e-15);
  EXPECT_EQ(activation(x, Activation::identity)[0], -2.0);
}

TEST(Activation, SigmoidStableAtExtremes) {
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-745.0)));
}

TEST(Activation, NamesRoundTrip) {
  for (auto a : {Activation::swish, Activation::prelu, Activation::relu, Activation::sigmoid, Activation::identity})
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  EXPECT_EQ(activation_from_string("linear"), Activation::identity);
  EXPECT_THROW(activation_from_string("tanh"), Error);
}

TEST(MaxPool, MatchesNaiveAndFloorsOddSizes) {
  std::mt19937_64 rng(9);
  auto x = random_tensor<double>(Shape{2, 3, 7, 6}, rng);
  const auto y = max_pool2d(x);
  EXPECT_EQ(y.shape(), (Shape{2, 3, 3, 3}));
  EXPECT_EQ(max_rel(y, oracle::naive_max_pool(x)), 0.0);
}

TEST(Linear, MatchesMatmulOracle) {
  std::mt19937_64 rng(13);
  auto x = random_tensor<double>(Shape{3, 4, 2, 2}, rng);
  auto w = random_tensor<double>(Shape{5, 16, 1, 1}, rng);
  const auto y = linear_forward(x, w);
  std::vector<std::vector<double>> xs(3, std::vector<double>(16)), ws(5, std::vector<double>(16));
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t i = 0; i < 16; ++i) xs[n][i] = x[n * 16 + i];
  for (std::size_t o = 0; o < 5; ++o)
    for (std::size_t i = 0; i < 16; ++i) ws[o][i] = w[o * 16 + i];
  const auto ref = oracle::naive_matmul(xs, ws);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t o = 0; o < 5; ++o) EXPECT_NEAR(y(n, o, 0, 0), ref[n][o], 1e-12);
}

TEST(GlobalAveragePool, Means) {
  Tensor<double> x(Shape{1, 2, 2, 2});
  for (std::size_t i = 0; i < 8; ++i) x[i] = static_cast<double>(i);
  const auto y = global_average_pool(x);
  EXPECT_EQ(y[0], 1.5);
  EXPECT_EQ(y[1], 5.5);
}

TEST(Layers, BackwardWithoutForwardThrows) {
  Conv2d<double> conv(ConvParams::same(2, 2, 3));
  EXPECT_THROW(conv.backward(Tensor<double>(Shape{1, 2, 4, 4})), Error);
  BatchNorm2d<double> bn(2);
  EXPECT_THROW(bn.backward(Tensor<double>(Shape{1, 2, 4, 4})), Error);
}

TEST(Layers, BatchNormParamsAndBuffers) {
  BatchNorm2d<float> bn(8);
  std::size_t trainable = 0, buffers = 0;
  for (auto& p : bn.parameters("x")) (p.trainable() ? trainable : buffers) += p.value->size();
  EXPECT_EQ(trainable, 16u);
  EXPECT_EQ(buffers, 16u);
}

TEST(Conv, GroupsMustDivideChannels) {
  Tensor<float> x(Shape{1, 6, 4, 4});
  ConvParams p{6, 4, 1, 1, 1, 0, 4, false};
  EXPECT_THROW(conv2d_forward(x, Tensor<float>(Shape{4, 1, 1, 1}), p), Error);
}

TEST(Conv, TwoGroupExample) {
  std::mt19937_64 rng(21);
  auto x = random_tensor<double>(Shape{2, 4, 8, 8}, rng);
  auto w = random_tensor<double>(Shape{6, 2, 3, 3}, rng);
  ConvParams p{4, 6, 3, 3, 1, 1, 2, false};
  EXPECT_LT(max_rel(conv2d_forward(x, w, p), oracle::naive_conv2d(x, w, 1, 1, 2)), 1e-6);
}

TEST(Depthwise, IdentityCenterKernel) {
  Tensor<double> x(Shape{1, 2, 3, 3});
  for (std::size_t i = 0; i < 9; ++i) x.plane(0, 0)[i] = 1, x.plane(0, 1)[i] = 2;
  Tensor<double> w(Shape{2, 1, 3, 3});
  w(0, 0, 1, 1) = w(1, 0, 1, 1) = 1;
  const auto y = depthwise_conv2d_forward(x, w, 1, 1);
  EXPECT_EQ(y(0, 0, 1, 1), 1.0);
  EXPECT_EQ(y(0, 1, 1, 1), 2.0);
  EXPECT_EQ(depthwise_output_shape(Shape{1, 64, 56, 56}, 3, 3, 1, 1), (Shape{1, 64, 56, 56}));
  EXPECT_THROW(depthwise_conv2d_forward(x, Tensor<double>(Shape{3, 1, 3, 3}), 1, 1), Error);
}

TEST(Depthwise, GlobalAveragesConstantAndMatchesDepthwise) {
  Tensor<double> x(Shape{1, 512, 7, 7}, 0.75);
  Tensor<double> w(Shape{512, 1, 7, 7}, 1.0 / 49.0);
  const auto y = global_depthwise_conv(x, w);
  EXPECT_EQ(y.shape(), (Shape{1, 512, 1, 1}));
  for (double v : y.values()) EXPECT_NEAR(v, 0.75, 1e-12);
  std::mt19937_64 rng(22);
  const auto r = random_tensor<double>(Shape{2, 5, 4, 4}, rng);
  const auto k = random_tensor<double>(Shape{5, 1, 4, 4}, rng);
  EXPECT_LT(max_rel(global_depthwise_conv(r, k), depthwise_conv2d_forward(r, k, 1, 0)), 1e-6);
}

TEST(BatchNorm, InferIdentityAndAffine) {
  std::mt19937_64 rng(23);
  const auto x = random_tensor<double>(Shape{2, 3, 4, 4}, rng);
  BatchNormParams<double> p(3);
  p.epsilon = 0;
  EXPECT_EQ(batchnorm_forward(x, p, Mode::infer).values(), x.values());
  BatchNormParams<double> q(1);
  q.epsilon = 0;
  q.gamma[0] = 2, q.beta[0] = 3, q.running_mean[0] = 1, q.running_var[0] = 1;
  EXPECT_EQ(batchnorm_forward(Tensor<double>(Shape{1, 1, 1, 1}, 1.0), q, Mode::infer)[0], 3.0);
}

TEST(BatchNorm, TrainStatsFollowGammaBeta) {
  std::mt19937_64 rng(24);
  const auto x = random_tensor<double>(Shape{8, 2, 6, 6}, rng, -4, 9);
  BatchNormParams<double> p(2);
  p.gamma[0] = 2, p.gamma[1] = 0.5, p.beta[0] = -1, p.beta[1] = 3;
  const auto y = batchnorm_forward(x, p, Mode::train);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, s = 0;
    for (std::size_t n = 0; n < 8; ++n)
      for (std::size_t i = 0; i < 36; ++i) m += y.plane(n, c)[i];
    m /= 288;
    for (std::size_t n = 0; n < 8; ++n)
      for (std::size_t i = 0; i < 36; ++i) s += std::pow(y.plane(n, c)[i] - m, 2);
    EXPECT_NEAR(m, p.beta[c], 1e-4);
    EXPECT_NEAR(std::sqrt(s / 288), p.gamma[c], 1e-4);
  }
}

TEST(Activation, SwishAtOne) {
  Tensor<double> x(Shape{1, 1, 1, 1}, 1.0);
  EXPECT_NEAR(activation(x, Activation::swish)[0], 0.731059, 1e-6);
}

TEST(Activation, SwishDerivativeAtZero) {
  Tensor<double> x(Shape{1, 1, 1, 1}, 0.0);
  const auto g = activation_backward(x, Tensor<double>(Shape{1, 1, 1, 1}, 1.0), Activation::swish);
  EXPECT_DOUBLE_EQ(g[0], 0.5);
}

TEST(MaxPool, SmallCases) {
  Tensor<double> x(Shape{1, 1, 2, 2});
  x[0] = 1, x[1] = 2, x[2] = 3, x[3] = 4;
  EXPECT_EQ(max_pool2d(x)[0], 4.0);
  const auto c = max_pool2d(Tensor<double>(Shape{1, 3, 8, 8}, -1.5));
  for (double v : c.values()) EXPECT_EQ(v, -1.5);
  std::mt19937_64 rng(25);
  const auto r = random_tensor<double>(Shape{1, 3, 8, 8}, rng);
  EXPECT_EQ(max_pool2d(r).values(), oracle::naive_max_pool(r).values());
}

TEST(Linear, IdentityAndShapes) {
  std::mt19937_64 rng(26);
  const auto x = random_tensor<double>(Shape{1, 512, 1, 1}, rng);
  Tensor<double> eye(Shape{512, 512, 1, 1});
  for (std::size_t i = 0; i < 512; ++i) eye(i, i, 0, 0) = 1;
  const auto y = linear_forward(x, eye);
  EXPECT_EQ(y.shape(), (Shape{1, 512, 1, 1}));
  EXPECT_EQ(y.values(), x.values());
  EXPECT_THROW(linear_forward(x, Tensor<double>(Shape{4, 3, 1, 1})), Error);
}

TEST(Linear, BackwardOfSumIsColumnSums) {
  std::mt19937_64 rng(27);
  const auto x = random_tensor<double>(Shape{1, 3, 1, 1}, rng);
  const auto w = random_tensor<double>(Shape{4, 3, 1, 1}, rng);
  Tensor<double> gw(w.shape());
  const auto gx = linear_backward(x, w, Tensor<double>(Shape{1, 4, 1, 1}, 1.0), gw);
  for (std::size_t i = 0; i < 3; ++i) {
    double col = 0;
    for (std::size_t o = 0; o < 4; ++o) col += w(o, i, 0, 0);
    EXPECT_NEAR(gx[i], col, 1e-12);
  }
}

TEST(OracleSuite, HundredRandomCasesUnderTolerance) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 16), sp(3, 16), pick(0, 3);
  std::size_t cases = 0;
  for (int t = 0; t < 120; ++t) {
    const std::size_t n = 1 + t % 2, h = sp(rng), w = sp(rng), stride = 1 + pick(rng) % 2;
    const std::size_t g = std::size_t{1} << pick(rng);
    const std::size_t c = g * std::max<std::size_t>(1, dim(rng) / g), o = g * std::max<std::size_t>(1, dim(rng) / g);
    const auto x = random_tensor<double>(Shape{n, c, h, w}, rng);
    switch (t % 3) {
      case 0: {
        ConvParams p{c, o, 3, 3, stride, 1, g, false};
        const auto wt = random_tensor<double>(p.weight_shape(), rng);
        EXPECT_LT(max_rel(conv2d_forward(x, wt, p), oracle::naive_conv2d(x, wt, stride, 1, g)), 1e-6);
        break;
      }
      case 1: {
        const auto wt = random_tensor<double>(Shape{c, 1, 3, 3}, rng);
        EXPECT_LT(max_rel(depthwise_conv2d_forward(x, wt, stride, 1), oracle::naive_conv2d(x, wt, stride, 1, c)),
                  1e-6);
        break;
      }
      default: {
        UnevenPointwise<double> pw(c + 4, o + 4, uneven_split_cover(c + 4, o + 4, 0.25));
        oracle::randomize(pw, rng);
        const auto xx = random_tensor<double>(Shape{n, c + 4, h, w}, rng);
        Tensor<double> dense(Shape{o + 4, c + 4, 1, 1});
        for (const auto& gr : pw.groups())
          for (std::size_t a = 0; a < gr.output_range.width(); ++a)
            for (std::size_t b = 0; b < gr.input_range.width(); ++b)
              dense(gr.output_range.start + a, gr.input_range.start + b, 0, 0) = gr.weights(a, b, 0, 0);
        EXPECT_LT(max_rel(pw.forward(xx, Mode::infer), oracle::naive_conv2d(xx, dense, 1, 0, 1)), 1e-6);
      }
    }
    ++cases;
  }
  EXPECT_GE(cases, 100u);
}
