#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace seesaw;

namespace {

constexpr double kTolerance = 1e-4;

class LayerGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(LayerGradient, MatchesCentralDifferences) {
  const auto cases = oracle::gradient_cases();
  const auto& gc = cases[GetParam()];
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(1000 * GetParam() + seed);
    auto inst = gc.make(rng);
    oracle::randomize(*inst.module, rng);
    const auto x = oracle::random_tensor<double>(inst.input, rng);
    const auto res = oracle::check_gradients(*inst.module, x, inst.mode, rng, 24);
    EXPECT_LT(res.max_error, kTolerance) << gc.name << " seed " << seed << ": " << res.worst;
    EXPECT_GT(res.checked, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(AllLayers, LayerGradient, ::testing::Range<std::size_t>(0, oracle::gradient_cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return oracle::gradient_cases()[info.param].name;
                         });

ArchSpec tiny_spec() {
  return parse_spec(
      "model tiny\n"
      "input 3 12 12\n"
      "stem_conv 8 - 2 - 1\n"
      "dw_conv 8 - 1 - 1\n"
      "block 8 16 2 shuffle 1\n"
      "block 8 16 1 share 1\n"
      "head_conv 16 - 1 - 1\n"
      "gdconv 16 - 1 - 1\n"
      "embedding_linear 8 - 1 - 1\n");
}

}  // namespace

TEST(ModelGradient, WholeGraphMatchesCentralDifferences) {
  auto model = build_model<double>(tiny_spec(), 3);
  std::mt19937_64 rng(17);
  const auto x = oracle::random_tensor<double>(model.spec().input_shape(3), rng);
  const auto res = oracle::check_gradients(model, x, Mode::train, rng, 6);
  EXPECT_LT(res.max_error, kTolerance) << res.worst;
}

TEST(ModelGradient, ZeroGradClearsAccumulators) {
  auto model = build_model<double>(tiny_spec(), 3);
  std::mt19937_64 rng(5);
  const auto x = oracle::random_tensor<double>(model.spec().input_shape(2), rng);
  const auto y = model.forward(x, Mode::train);
  model.backward(oracle::random_tensor<double>(y.shape(), rng));
  model.zero_grad();
  for (auto& p : model.parameters()) {
    if (!p.trainable()) continue;
    for (double g : p.grad->values()) ASSERT_EQ(g, 0.0) << p.name;
  }
}

namespace {

struct WrongBackward : Module<double> {
  Tensor<double> forward(const Tensor<double>& x, Mode) override {
    Tensor<double> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i];
    input = x;
    return y;
  }
  Tensor<double> backward(const Tensor<double>& g) override {
    Tensor<double> out(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * input[i];  // missing factor 2
    return out;
  }
  Shape output_shape(const Shape& in) const override { return in; }
  void collect(const std::string&, std::vector<ParamRef<double>>&) override {}
  Tensor<double> input;
};

}  // namespace

TEST(GradientChecker, DetectsWrongBackward) {
  WrongBackward m;
  std::mt19937_64 rng(1);
  const auto x = oracle::random_tensor<double>(Shape{1, 2, 3, 3}, rng, 0.5, 1.0);
  EXPECT_GT(oracle::check_gradients(m, x, Mode::infer, rng).max_error, 0.1);
}
