#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace seesaw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "seesaw_verification_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct ScoredSet {
  std::vector<double> scores;
  std::vector<bool> labels;
};

ScoredSet random_set(std::mt19937_64& rng, std::size_t n, double overlap) {
  std::normal_distribution<double> noise(0.0, overlap);
  ScoredSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const bool same = rng() % 2 == 0;
    s.labels.push_back(same);
    s.scores.push_back((same ? 0.5 : -0.2) + noise(rng));
  }
  return s;
}

}  // namespace

TEST(Preprocess, NormalizesPixels) {
  Image8 img(2, 2, 0);
  img.at(0, 0, 0) = 255;
  img.at(1, 1, 2) = 128;
  const auto t = preprocess<double>(img, 2, 2);
  EXPECT_EQ(t.shape(), (Shape{1, 3, 2, 2}));
  EXPECT_DOUBLE_EQ(t(0, 0, 0, 0), 127.5 / 128.0);
  EXPECT_DOUBLE_EQ(t(0, 1, 0, 0), -127.5 / 128.0);
  EXPECT_DOUBLE_EQ(t(0, 2, 1, 1), 0.5 / 128.0);
  for (double v : t.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Preprocess, RejectsWrongSize) {
  EXPECT_THROW(preprocess<float>(Image8(111, 112)), Error);
  EXPECT_THROW(preprocess<float>(Image8(112, 113)), Error);
  EXPECT_NO_THROW(preprocess<float>(Image8(112, 112)));
}

TEST(Cosine, RangeAndSpecialCases) {
  const std::vector<double> a = {1, 2, 3}, b = {-1, -2, -3}, c = {3, -1, 2}, z = {0, 0, 0};
  EXPECT_NEAR(cosine_score<double>(a, a), 1.0, 1e-12);
  EXPECT_NEAR(cosine_score<double>(a, b), -1.0, 1e-12);
  EXPECT_NEAR(cosine_score<double>(a, c), 7.0 / 14.0, 1e-12);
  EXPECT_THROW(cosine_score<double>(a, z), Error);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto x = oracle::random_tensor<double>(Shape{1, 8, 1, 1}, rng);
    const auto y = oracle::random_tensor<double>(Shape{1, 8, 1, 1}, rng);
    const double s = cosine_score<double>(x.values(), y.values());
    EXPECT_LE(std::abs(s), 1.0 + 1e-12);
    EXPECT_NEAR(s, cosine_score<double>(y.values(), x.values()), 1e-15);
  }
}

TEST(Normalize, UnitLength) {
  std::vector<double> v = {3, 4};
  l2_normalize<double>(v);
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
  std::vector<double> z = {0, 0};
  EXPECT_THROW(l2_normalize<double>(z), Error);
}

TEST(KFold, SeparableSetIsPerfect) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> pattern;
  for (int i = 0; i < 20; ++i) pattern.push_back(i % 3 != 0 ? 0.6 + 0.4 * u(rng) : -1 + 1.5 * u(rng));
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int f = 0; f < 10; ++f)
    for (int i = 0; i < 20; ++i) {
      scores.push_back(pattern[i]);
      labels.push_back(i % 3 != 0);
    }
  const auto r = kfold_accuracy(scores, labels, 10);
  EXPECT_EQ(r.mean_accuracy, 1.0);
  EXPECT_EQ(r.std_accuracy, 0.0);
  EXPECT_EQ(r.fold_accuracy.size(), 10u);
  EXPECT_EQ(r.thresholds.size(), 10u);
  double max_diff = -2, min_same = 2;
  for (int i = 0; i < 20; ++i) {
    if (i % 3 != 0) min_same = std::min(min_same, pattern[i]);
    else max_diff = std::max(max_diff, pattern[i]);
  }
  for (double t : r.thresholds) {
    EXPECT_GT(t, max_diff);
    EXPECT_LE(t, min_same);
  }
}

TEST(KFold, AllSameAndAllDifferent) {
  std::vector<double> scores(20);
  for (std::size_t i = 0; i < 20; ++i) scores[i] = 0.01 * static_cast<double>(i);
  EXPECT_EQ(kfold_accuracy(scores, std::vector<bool>(20, true), 10).mean_accuracy, 1.0);
  EXPECT_EQ(kfold_accuracy(scores, std::vector<bool>(20, false), 10).mean_accuracy, 1.0);
}

TEST(KFold, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_set(rng, 100, 0.4);
    const auto base = kfold_accuracy(s.scores, s.labels, 10);
    for (auto f : {+[](double x) { return 3 * x + 1; }, +[](double x) { return std::exp(x); },
                   +[](double x) { return std::atan(5 * x); }}) {
      std::vector<double> t;
      for (double x : s.scores) t.push_back(f(x));
      EXPECT_EQ(kfold_accuracy(t, s.labels, 10).fold_accuracy, base.fold_accuracy) << trial;
    }
  }
}

TEST(KFold, MatchesBruteForceOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_set(rng, 40, 0.5);
    const auto r = kfold_accuracy(s.scores, s.labels, 4);
    for (std::size_t f = 0; f < 4; ++f) {
      std::size_t best = 0;
      std::vector<double> all = s.scores;
      all.push_back(std::numeric_limits<double>::infinity());
      for (double thr : all) {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < 40; ++i)
          if (i / 10 != f) ok += (s.scores[i] >= thr) == s.labels[i];
        best = std::max(best, ok);
      }
      std::size_t ok = 0;
      for (std::size_t i = 0; i < 40; ++i)
        if (i / 10 != f) ok += (s.scores[i] >= r.thresholds[f]) == s.labels[i];
      EXPECT_GE(ok, best) << trial << " fold " << f;
    }
  }
}

TEST(KFold, RejectsBadInput) {
  const std::vector<double> s(25, 0.1);
  EXPECT_THROW(kfold_accuracy(s, std::vector<bool>(25, true), 10), Error);
  EXPECT_THROW(kfold_accuracy(std::vector<double>(5, 0.1), std::vector<bool>(5, true), 10), Error);
  EXPECT_THROW(kfold_accuracy(std::vector<double>(20, 0.1), std::vector<bool>(19, true), 10), Error);
  std::vector<double> bad(20, 0.1);
  bad[3] = std::nan("");
  EXPECT_THROW(kfold_accuracy(bad, std::vector<bool>(20, true), 10), Error);
}

TEST(Ppm, RoundTrip) {
  const auto dir = scratch("ppm");
  Image8 img(5, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  write_ppm((dir / "x.ppm").string(), img);
  const Image8 back = read_ppm((dir / "x.ppm").string());
  EXPECT_EQ(back.width, 5u);
  EXPECT_EQ(back.height, 3u);
  EXPECT_EQ(back.pixels, img.pixels);
  std::ofstream((dir / "bad.ppm").string()) << "P3\n1 1\n255\n0 0 0\n";
  EXPECT_THROW(read_ppm((dir / "bad.ppm").string()), Error);
  EXPECT_THROW(read_ppm((dir / "missing.ppm").string()), Error);
}

TEST(Manifest, SyntheticDatasetLoads) {
  const auto dir = scratch("synthetic");
  SyntheticSpec spec;
  spec.identities = 3;
  spec.images_per_identity = 4;
  const auto manifest = write_synthetic_dataset(dir.string(), spec, 20);
  const auto data = load_dataset<float>(manifest, 28, 28);
  EXPECT_EQ(data.samples.size(), 12u);
  EXPECT_EQ(data.num_classes, 3u);
  const auto mem = synthetic_dataset<float>(spec);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(data.samples[i].label, mem.samples[i].label);
    EXPECT_EQ(data.samples[i].image.values(), mem.samples[i].image.values());
  }
  const auto pairs = load_pairs((dir / "pairs.txt").string());
  ASSERT_EQ(pairs.size(), 20u);
  EXPECT_TRUE(pairs[0].same);
  EXPECT_FALSE(pairs[1].same);
  EXPECT_THROW(load_dataset<float>(manifest, 32, 32), Error);
}

TEST(Manifest, MalformedRowsAndMissingFiles) {
  const auto dir = scratch("malformed");
  std::ofstream((dir / "m.txt").string()) << "a.ppm\n";
  EXPECT_THROW(read_identity_manifest((dir / "m.txt").string()), Error);
  std::ofstream((dir / "l.txt").string()) << "a.ppm x\n";
  EXPECT_THROW(read_identity_manifest((dir / "l.txt").string()), Error);
  std::ofstream((dir / "p.txt").string()) << "a.ppm b.ppm 2\n";
  EXPECT_THROW(read_pair_manifest((dir / "p.txt").string()), Error);
  EXPECT_THROW(load_dataset<float>((dir / "absent.txt").string(), 28, 28), Error);
}

TEST(Evaluate, DeterministicAndBounded) {
  SyntheticSpec spec;
  spec.identities = 5;
  spec.images_per_identity = 4;
  const auto items = synthetic_identities(spec);
  std::vector<ImagePair> pairs;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t a = i % items.size(), b = (i % 2 == 0) ? (a / 4) * 4 + (a + 1) % 4 : (a + 4) % items.size();
    pairs.push_back({items[a].first, items[b].first, i % 2 == 0});
  }
  auto model = build_model<float>(spec_by_name("seesawfacenet-toy"), 3);
  const auto r1 = evaluate_model(model, pairs, 10);
  const auto r2 = evaluate_model(model, pairs, 10);
  EXPECT_EQ(r1.scores, r2.scores);
  EXPECT_EQ(r1.report.mean_accuracy, r2.report.mean_accuracy);
  for (double s : r1.scores) EXPECT_LE(std::abs(s), 1.0 + 1e-6);
  EXPECT_GE(r1.report.mean_accuracy, 0.0);
  EXPECT_LE(r1.report.mean_accuracy, 1.0);
  pairs.pop_back();
  EXPECT_THROW(evaluate_model(model, pairs, 10), Error);
}
