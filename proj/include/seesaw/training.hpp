#pragma once

// Additive angular margin (ArcFace) loss, SGD with classical momentum, the
// step learning-rate schedule, and a small training loop.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seesaw/architectures.hpp"
#include "seesaw/serialize.hpp"

namespace seesaw {

template <typename T>
struct ArcFaceHead {
  Tensor<T> weight;  // (classes, dim, 1, 1); rows are normalized on use
  Tensor<T> grad;
  double scale = 64.0;
  double margin = 0.5;

  ArcFaceHead(std::size_t classes, std::size_t dim, std::uint64_t seed, double s = 64.0, double m = 0.5)
      : weight(Shape{classes, dim, 1, 1}), grad(Shape{classes, dim, 1, 1}), scale(s), margin(m) {
    if (!(m >= 0.0 && m < M_PI)) throw Error("ArcFaceHead: margin must lie in [0, pi)");
    if (!(s > 0.0)) throw Error("ArcFaceHead: scale must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.01);
    for (auto& v : weight.values()) v = static_cast<T>(dist(rng));
  }

  std::size_t classes() const { return weight.n(); }
  std::size_t dim() const { return weight.c(); }
};

/// Margin-adjusted target cosine: cos(θ+m) while θ+m ≤ π, otherwise the
/// monotone continuation cosθ − m·sin(m).
inline double arcface_target(double cos_theta, double m) {
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  if (c >= -std::cos(m)) return c * std::cos(m) - std::sqrt(std::max(0.0, 1.0 - c * c)) * std::sin(m);
  return c - m * std::sin(m);
}

inline double arcface_target_derivative(double cos_theta, double m) {
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  if (c >= -std::cos(m)) return std::cos(m) + std::sin(m) * c / std::max(std::sqrt(std::max(0.0, 1.0 - c * c)), 1e-12);
  return 1.0;
}

template <typename T>
struct ArcFaceResult {
  double loss = 0;                           // mean cross-entropy
  Tensor<T> grad_embeddings;                 // d loss / d embeddings
  std::vector<std::size_t> predictions;      // argmax of the margin-free cosines
  std::vector<std::vector<double>> logits;   // margin-applied, scaled logits
  std::size_t correct = 0;
};

/// Mean ArcFace cross-entropy over the batch. Class-weight gradients are
/// accumulated into `head.grad`.
template <typename T>
ArcFaceResult<T> arcface_loss(const Tensor<T>& embeddings, const std::vector<std::size_t>& labels,
                              ArcFaceHead<T>& head) {
  const std::size_t N = embeddings.n();
  const std::size_t D = embeddings.c() * embeddings.h() * embeddings.w();
  const std::size_t K = head.classes();
  if (D != head.dim()) throw ShapeError("arcface_loss", "embedding dimension", head.dim(), D);
  if (labels.size() != N) throw ShapeError("arcface_loss", "label count", N, labels.size());
  const double s = head.scale, m = head.margin;

  std::vector<double> wnorm(K);
  for (std::size_t k = 0; k < K; ++k) {
    double a = 0;
    for (std::size_t d = 0; d < D; ++d) a += double(head.weight[k * D + d]) * head.weight[k * D + d];
    wnorm[k] = std::sqrt(a);
    if (wnorm[k] == 0) throw Error("arcface_loss: class " + std::to_string(k) + " has a zero weight vector");
  }

  ArcFaceResult<T> res;
  res.grad_embeddings = Tensor<T>(embeddings.shape());
  res.predictions.resize(N);
  res.logits.assign(N, std::vector<double>(K));
  std::vector<double> e_hat(D), cosv(K), dcos(K), de_hat(D);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t y = labels[i];
    if (y >= K) throw Error("arcface_loss: label " + std::to_string(y) + " out of range [0," + std::to_string(K) + ")");
    const T* e = embeddings.data() + i * D;
    double en = 0;
    for (std::size_t d = 0; d < D; ++d) en += double(e[d]) * e[d];
    en = std::sqrt(en);
    if (en == 0) throw Error("arcface_loss: embedding " + std::to_string(i) + " has zero norm");
    for (std::size_t d = 0; d < D; ++d) e_hat[d] = e[d] / en;

    std::size_t best = 0;
    for (std::size_t k = 0; k < K; ++k) {
      double c = 0;
      const T* w = head.weight.data() + k * D;
      for (std::size_t d = 0; d < D; ++d) c += e_hat[d] * w[d];
      cosv[k] = c / wnorm[k];
      if (cosv[k] > cosv[best]) best = k;
    }
    res.predictions[i] = best;
    if (best == y) ++res.correct;

    auto& z = res.logits[i];
    for (std::size_t k = 0; k < K; ++k) z[k] = s * cosv[k];
    z[y] = s * arcface_target(cosv[y], m);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    res.loss += (lse - z[y]) / static_cast<double>(N);

    for (std::size_t k = 0; k < K; ++k) {
      const double dz = (std::exp(z[k] - lse) - (k == y ? 1.0 : 0.0)) / static_cast<double>(N);
      dcos[k] = s * dz * (k == y ? arcface_target_derivative(cosv[y], m) : 1.0);
    }
    // cos_k = ê·ŵ_k
    std::fill(de_hat.begin(), de_hat.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const T* w = head.weight.data() + k * D;
      T* gw = head.grad.data() + k * D;
      double what_dot = 0;  // ŵ_k · dŵ_k with dŵ_k = dcos_k ê
      for (std::size_t d = 0; d < D; ++d) {
        de_hat[d] += dcos[k] * w[d] / wnorm[k];
        what_dot += (w[d] / wnorm[k]) * dcos[k] * e_hat[d];
      }
      for (std::size_t d = 0; d < D; ++d)
        gw[d] += static_cast<T>((dcos[k] * e_hat[d] - (w[d] / wnorm[k]) * what_dot) / wnorm[k]);
    }
    double proj = 0;
    for (std::size_t d = 0; d < D; ++d) proj += e_hat[d] * de_hat[d];
    T* ge = res.grad_embeddings.data() + i * D;
    for (std::size_t d = 0; d < D; ++d) ge[d] = static_cast<T>((de_hat[d] - e_hat[d] * proj) / en);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Optimization

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 16;
  double momentum = 0.9;
  double initial_lr = 0.1;
  std::vector<std::size_t> lr_decay_epochs = {9, 13, 15};
  double decay_factor = 0.1;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  /// Per-epoch checkpoints are written here when non-empty.
  std::string checkpoint_dir;

  void validate() const {
    if (batch_size == 0) throw Error("TrainConfig: batch_size must be positive");
    if (epochs == 0) throw Error("TrainConfig: epochs must be positive");
    for (std::size_t i = 0; i < lr_decay_epochs.size(); ++i) {
      if (lr_decay_epochs[i] >= epochs) throw Error("TrainConfig: decay epoch beyond the last epoch");
      if (i > 0 && lr_decay_epochs[i] <= lr_decay_epochs[i - 1])
        throw Error("TrainConfig: decay epochs must be strictly increasing");
    }
  }
};

/// Piecewise-constant schedule: initial_lr · decay_factor^(decay epochs ≤ epoch).
inline double lr_at_epoch(std::size_t epoch, const TrainConfig& cfg) {
  if (epoch >= cfg.epochs)
    throw Error("lr_at_epoch: epoch " + std::to_string(epoch) + " outside [0," + std::to_string(cfg.epochs) + ")");
  double lr = cfg.initial_lr;
  for (std::size_t d : cfg.lr_decay_epochs)
    if (epoch >= d) lr *= cfg.decay_factor;
  return lr;
}

/// v ← momentum·v + (g + wd·p); p ← p − lr·v.
template <typename T>
void sgd_momentum_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, double lr,
                       double momentum, double weight_decay = 0.0) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw ShapeError("sgd_momentum_step", "buffer length", params.size(),
                     grads.size() != params.size() ? grads.size() : velocity.size());
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw Error("sgd_momentum_step: non-finite gradient at element " + std::to_string(i));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i] + static_cast<T>(weight_decay) * params[i];
    velocity[i] = static_cast<T>(momentum) * velocity[i] + g;
    params[i] -= static_cast<T>(lr) * velocity[i];
  }
}

/// Momentum SGD over a fixed list of tensors; velocity buffers are created on
/// first use and kept in list order.
template <typename T>
class SgdMomentum {
 public:
  SgdMomentum(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

  void step(const std::vector<std::pair<Tensor<T>*, Tensor<T>*>>& tensors, double lr) {
    if (velocity_.empty())
      for (const auto& [p, g] : tensors) velocity_.emplace_back(p->shape());
    if (velocity_.size() != tensors.size()) throw Error("SgdMomentum: parameter list changed between steps");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      auto [p, g] = tensors[i];
      try {
        sgd_momentum_step<T>(p->values(), g->values(), velocity_[i].values(), lr, momentum_, weight_decay_);
      } catch (const Error& e) {
        throw Error(std::string(e.what()) + " (tensor #" + std::to_string(i) + ")");
      }
    }
  }

 private:
  double momentum_;
  double weight_decay_;
  std::vector<Tensor<T>> velocity_;
};

// ---------------------------------------------------------------------------
// Training loop

template <typename T>
struct Sample {
  Tensor<T> image;  // (1, C, H, W), already normalized
  std::size_t label = 0;
};

template <typename T>
struct Dataset {
  std::vector<Sample<T>> samples;
  std::size_t num_classes = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0;
  double loss = 0;
  double accuracy = 0;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
};

template <typename T>
Tensor<T> stack_samples(const Dataset<T>& data, std::span<const std::size_t> indices) {
  const Shape s = data.samples.at(indices[0]).image.shape();
  Tensor<T> batch(Shape{indices.size(), s.c, s.h, s.w});
  const std::size_t per = s.c * s.h * s.w;
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& img = data.samples.at(indices[b]).image;
    if (img.size() != per) throw Error("dataset: sample " + std::to_string(indices[b]) + " has a different shape");
    std::copy_n(img.data(), per, batch.data() + b * per);
  }
  return batch;
}

inline std::string checkpoint_stem(const std::string& dir, std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%02zu", epoch);
  return (std::filesystem::path(dir) / buf).string();
}

template <typename T>
void write_checkpoint(ModelGraph<T>& model, const ArcFaceHead<T>& head, const std::string& stem, const EpochLog& log) {
  save_weights(model, stem + ".ssfn", {TensorRecord::from("arcface.weight", head.weight)});
  std::ofstream meta(stem + ".meta", std::ios::trunc);
  if (!meta) throw Error("cannot write checkpoint metadata '" + stem + ".meta'");
  char buf[256];
  std::snprintf(buf, sizeof buf, "epoch=%zu\nlr=%.17g\nloss=%.17g\naccuracy=%.17g\n", log.epoch, log.lr, log.loss,
                log.accuracy);
  meta << buf;
}

/// Runs the full schedule. Batches are reshuffled every epoch from
/// (seed, epoch); a trailing batch of one sample is skipped because batch
/// statistics are undefined for it at 1×1 spatial size.
template <typename T>
TrainingLog fit(ModelGraph<T>& model, const Dataset<T>& data, ArcFaceHead<T>& head, const TrainConfig& cfg,
                const std::function<void(const EpochLog&)>& on_epoch = {}) {
  cfg.validate();
  if (data.samples.empty()) throw Error("fit: empty dataset");
  if (head.dim() != model.embedding_dim()) throw ShapeError("fit", "head dimension", model.embedding_dim(), head.dim());
  for (const auto& s : data.samples)
    if (s.label >= head.classes()) throw Error("fit: label " + std::to_string(s.label) + " exceeds head classes");
  if (!cfg.checkpoint_dir.empty()) std::filesystem::create_directories(cfg.checkpoint_dir);

  std::vector<std::pair<Tensor<T>*, Tensor<T>*>> tensors;
  for (auto& p : model.parameters())
    if (p.trainable()) tensors.emplace_back(p.value, p.grad);
  tensors.emplace_back(&head.weight, &head.grad);
  SgdMomentum<T> opt(cfg.momentum, cfg.weight_decay);

  TrainingLog log;
  std::vector<std::size_t> order(data.samples.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch, cfg);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed * 1000003ULL + epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t seen = 0, correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      if (len < 2 && order.size() > 1) continue;
      std::span<const std::size_t> idx(order.data() + start, len);
      std::vector<std::size_t> labels(len);
      for (std::size_t i = 0; i < len; ++i) labels[i] = data.samples[idx[i]].label;

      model.zero_grad();
      head.grad.fill(T(0));
      const Tensor<T> emb = model.forward(stack_samples(data, idx), Mode::train);
      ArcFaceResult<T> res = arcface_loss(emb, labels, head);
      model.backward(res.grad_embeddings);
      opt.step(tensors, lr);

      loss_sum += res.loss * static_cast<double>(len);
      correct += res.correct;
      seen += len;
    }
    EpochLog e{epoch, lr, loss_sum / static_cast<double>(std::max<std::size_t>(seen, 1)),
               static_cast<double>(correct) / static_cast<double>(std::max<std::size_t>(seen, 1))};
    log.epochs.push_back(e);
    if (!cfg.checkpoint_dir.empty()) write_checkpoint(model, head, checkpoint_stem(cfg.checkpoint_dir, epoch), e);
    if (on_epoch) on_epoch(e);
  }
  return log;
}

}  // namespace seesaw
