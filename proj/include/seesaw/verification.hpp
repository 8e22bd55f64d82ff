#pragma once

// Pair verification: input normalization, cosine scoring and the k-fold
// best-threshold accuracy protocol.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "seesaw/architectures.hpp"

namespace seesaw {

/// 8-bit interleaved RGB image, row-major (H, W, 3).
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h * 3, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t ch) { return pixels[(y * width + x) * 3 + ch]; }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t ch) const { return pixels[(y * width + x) * 3 + ch]; }
};

/// (pixel − 127.5) / 128 into a (1, 3, H, W) tensor.
template <typename T>
Tensor<T> preprocess(const Image8& raw, std::size_t height = 112, std::size_t width = 112) {
  if (raw.height != height) throw ShapeError("preprocess", "image height", height, raw.height);
  if (raw.width != width) throw ShapeError("preprocess", "image width", width, raw.width);
  if (raw.pixels.size() != height * width * 3) throw ShapeError("preprocess", "pixel count", height * width * 3, raw.pixels.size());
  Tensor<T> out(Shape{1, 3, height, width});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x)
        out(0, c, y, x) = static_cast<T>((static_cast<double>(raw.at(y, x, c)) - 127.5) / 128.0);
  return out;
}

template <typename T>
double cosine_score(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw ShapeError("cosine_score", "vector length", a.size(), b.size());
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) throw Error("cosine_score: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

template <typename T>
void l2_normalize(std::span<T> v) {
  double n = 0;
  for (T x : v) n += double(x) * x;
  n = std::sqrt(n);
  if (n == 0) throw Error("l2_normalize: zero vector");
  for (T& x : v) x = static_cast<T>(x / n);
}

struct VerificationReport {
  double mean_accuracy = 0;
  double std_accuracy = 0;
  std::vector<double> fold_accuracy;
  std::vector<double> thresholds;
};

namespace detail {

inline double threshold_accuracy(std::span<const double> scores, const std::vector<bool>& labels,
                                 const std::vector<std::size_t>& idx, double thr) {
  std::size_t ok = 0;
  for (std::size_t i : idx) ok += ((scores[i] >= thr) == labels[i]) ? 1 : 0;
  return idx.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(idx.size());
}

}  // namespace detail

/// Contiguous folds; for each held-out fold the threshold maximizing accuracy
/// on the remaining folds is picked from the midpoints of the sorted unique
/// scores plus ±∞, with the rule `score >= threshold ⇒ same`. Ties resolve to
/// the middle candidate (by rank) of the first best run, or to ±∞ when the run
/// reaches an end, so the result depends only on the ordering of the scores.
inline VerificationReport kfold_accuracy(std::span<const double> scores, const std::vector<bool>& labels,
                                         std::size_t fold_count = 10) {
  if (scores.size() != labels.size()) throw ShapeError("kfold_accuracy", "label count", scores.size(), labels.size());
  if (fold_count < 2) throw Error("kfold_accuracy: need at least two folds");
  if (scores.size() < fold_count)
    throw Error("kfold_accuracy: " + std::to_string(scores.size()) + " pairs is fewer than " +
                std::to_string(fold_count) + " folds");
  if (scores.size() % fold_count != 0)
    throw Error("kfold_accuracy: pair count " + std::to_string(scores.size()) + " is not divisible by " +
                std::to_string(fold_count));
  for (double s : scores)
    if (!std::isfinite(s)) throw Error("kfold_accuracy: non-finite score");

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> candidates{-std::numeric_limits<double>::infinity()};
  for (std::size_t i = 1; i < sorted.size(); ++i) candidates.push_back(sorted[i - 1] + (sorted[i] - sorted[i - 1]) / 2);
  candidates.push_back(std::numeric_limits<double>::infinity());

  const std::size_t per = scores.size() / fold_count;
  VerificationReport rep;
  for (std::size_t f = 0; f < fold_count; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < scores.size(); ++i) (i / per == f ? test : train).push_back(i);
    std::vector<double> acc(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      acc[c] = detail::threshold_accuracy(scores, labels, train, candidates[c]);
    const std::size_t first = static_cast<std::size_t>(std::max_element(acc.begin(), acc.end()) - acc.begin());
    std::size_t last = first;
    while (last + 1 < acc.size() && acc[last + 1] == acc[first]) ++last;
    std::size_t pick = first + (last - first) / 2;
    if (first == 0) pick = 0;
    else if (last + 1 == candidates.size()) pick = last;
    const double thr = candidates[pick];
    rep.thresholds.push_back(thr);
    rep.fold_accuracy.push_back(detail::threshold_accuracy(scores, labels, test, thr));
  }
  double sum = 0;
  for (double a : rep.fold_accuracy) sum += a;
  rep.mean_accuracy = sum / static_cast<double>(fold_count);
  double var = 0;
  for (double a : rep.fold_accuracy) var += (a - rep.mean_accuracy) * (a - rep.mean_accuracy);
  rep.std_accuracy = std::sqrt(var / static_cast<double>(fold_count));
  return rep;
}

struct ImagePair {
  Image8 a;
  Image8 b;
  bool same = false;
};

/// L2-normalized (N, D) embeddings for a list of images, evaluated in infer mode.
template <typename T>
std::vector<std::vector<T>> embed_images(ModelGraph<T>& model, const std::vector<const Image8*>& images,
                                         std::size_t batch = 8) {
  const ArchSpec& spec = model.spec();
  std::vector<std::vector<T>> out;
  for (std::size_t start = 0; start < images.size(); start += batch) {
    const std::size_t len = std::min(batch, images.size() - start);
    Tensor<T> x(spec.input_shape(len));
    const std::size_t per = spec.in_channels * spec.in_height * spec.in_width;
    for (std::size_t i = 0; i < len; ++i) {
      const Tensor<T> t = preprocess<T>(*images[start + i], spec.in_height, spec.in_width);
      std::copy_n(t.data(), per, x.data() + i * per);
    }
    const Tensor<T> e = forward_embed(model, x, Mode::infer);
    const std::size_t D = e.c();
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<T> v(e.data() + i * D, e.data() + (i + 1) * D);
      l2_normalize<T>(v);
      out.push_back(std::move(v));
    }
  }
  return out;
}

struct PairEvaluation {
  std::vector<double> scores;
  VerificationReport report;
};

/// preprocess → embed (infer) → L2-normalize → cosine → k-fold accuracy.
template <typename T>
PairEvaluation evaluate_model(ModelGraph<T>& model, const std::vector<ImagePair>& pairs, std::size_t fold_count = 10) {
  if (pairs.size() < fold_count || pairs.size() % fold_count != 0)
    throw Error("evaluate_model: pair count " + std::to_string(pairs.size()) + " is not a positive multiple of " +
                std::to_string(fold_count));
  std::vector<const Image8*> images;
  for (const auto& p : pairs) {
    images.push_back(&p.a);
    images.push_back(&p.b);
  }
  const auto emb = embed_images(model, images);
  PairEvaluation ev;
  std::vector<bool> labels;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ev.scores.push_back(cosine_score<T>(emb[2 * i], emb[2 * i + 1]));
    labels.push_back(pairs[i].same);
  }
  ev.report = kfold_accuracy(ev.scores, labels, fold_count);
  return ev;
}

}  // namespace seesaw
