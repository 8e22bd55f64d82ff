#pragma once

// Composite building blocks: uneven grouped pointwise convolution, channel
// shuffle / channel share covers, squeeze-and-excitation, and the bottleneck
// block in its Seesaw-shuffle, Seesaw-share and plain inverted-residual forms.

#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "seesaw/layers.hpp"

namespace seesaw {

// ---------------------------------------------------------------------------
// Channel shuffle

/// Reshape (g, C/g) → transpose → flatten: channel k·(C/g)+j moves to j·g+k.
inline std::vector<std::size_t> shuffle_permutation(std::size_t channels, std::size_t groups) {
  if (groups == 0 || channels % groups != 0)
    throw ShapeError("channel_shuffle", "channels divisible by groups", groups, channels);
  const std::size_t per = channels / groups;
  std::vector<std::size_t> dest(channels);
  for (std::size_t k = 0; k < groups; ++k)
    for (std::size_t j = 0; j < per; ++j) dest[k * per + j] = j * groups + k;
  return dest;
}

/// Moves source channel i to destination dest[i].
template <typename T>
Tensor<T> permute_channels(const Tensor<T>& input, const std::vector<std::size_t>& dest) {
  if (dest.size() != input.c()) throw ShapeError("permute_channels", "channels", input.c(), dest.size());
  Tensor<T> out(input.shape());
  const std::size_t P = input.h() * input.w();
  for (std::size_t n = 0; n < input.n(); ++n)
    for (std::size_t c = 0; c < input.c(); ++c) std::copy_n(input.plane(n, c), P, out.plane(n, dest[c]));
  return out;
}

inline std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& dest) {
  std::vector<std::size_t> inv(dest.size());
  for (std::size_t i = 0; i < dest.size(); ++i) inv[dest[i]] = i;
  return inv;
}

template <typename T>
Tensor<T> channel_shuffle(const Tensor<T>& input, std::size_t groups) {
  return permute_channels(input, shuffle_permutation(input.c(), groups));
}

// ---------------------------------------------------------------------------
// Channel range groups

/// Half-open channel interval [start, end).
struct ChannelRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - start; }
  friend bool operator==(const ChannelRange&, const ChannelRange&) = default;
};

/// Input/output channel ranges of one group of a grouped pointwise conv.
struct GroupSpan {
  ChannelRange input;
  ChannelRange output;
  friend bool operator==(const GroupSpan&, const GroupSpan&) = default;
};

template <typename T>
struct ChannelRangeGroup {
  ChannelRange input_range;
  ChannelRange output_range;
  Tensor<T> weights;  // (output width, input width, 1, 1)
};

/// ⌈ratio·channels⌉ with a guard against representation error (0.25·64 is 16, not 17).
inline std::size_t first_group_width(double ratio, std::size_t channels) {
  return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(channels) - 1e-9));
}

inline void validate_split(double ratio, std::size_t channels, const char* what) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(std::string(what) + ": split ratio must lie in (0,1)");
  const std::size_t a = first_group_width(ratio, channels);
  if (a < 1 || a >= channels)
    throw Error(std::string(what) + ": split ratio " + std::to_string(ratio) + " leaves an empty group over " +
                std::to_string(channels) + " channels");
}

/// Two disjoint uneven groups: [0,a)→[0,b) and [a,C_in)→[b,C_out).
inline std::vector<GroupSpan> uneven_split_cover(std::size_t c_in, std::size_t c_out, double ratio) {
  const std::size_t a = first_group_width(ratio, c_in);
  const std::size_t b = first_group_width(ratio, c_out);
  if (a == 0 || a >= c_in || b == 0 || b >= c_out) return {GroupSpan{{0, c_in}, {0, c_out}}};
  return {GroupSpan{{0, a}, {0, b}}, GroupSpan{{a, c_in}, {b, c_out}}};
}

/// Two groups whose input ranges overlap by ⌈ratio·sA⌉ channels so that
/// information crosses groups without moving data: A reads [0,sA), B reads
/// [sA−ovl, C_in). Output ranges partition [0, C_out).
inline std::vector<GroupSpan> channel_share_cover(std::size_t c_in, std::size_t c_out, double ratio) {
  const std::size_t sa = first_group_width(ratio, c_in);
  const std::size_t b = first_group_width(ratio, c_out);
  if (sa == 0 || sa >= c_in || b == 0 || b >= c_out) return {GroupSpan{{0, c_in}, {0, c_out}}};
  const std::size_t ovl = std::min(sa, first_group_width(ratio, sa));
  return {GroupSpan{{0, sa}, {0, b}}, GroupSpan{{sa - ovl, c_in}, {b, c_out}}};
}

inline void validate_cover(const std::vector<GroupSpan>& spans, std::size_t c_in, std::size_t c_out,
                           const char* where) {
  if (spans.empty()) throw Error(std::string(where) + ": no groups");
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return spans[a].output.start < spans[b].output.start; });
  std::size_t next = 0;
  for (std::size_t i : order) {
    const GroupSpan& g = spans[i];
    if (g.input.start >= g.input.end || g.input.end > c_in)
      throw Error(std::string(where) + ": group " + std::to_string(i) + " input range out of bounds");
    if (g.output.start >= g.output.end || g.output.end > c_out)
      throw Error(std::string(where) + ": group " + std::to_string(i) + " output range out of bounds");
    if (g.output.start != next)
      throw Error(std::string(where) + ": output channels [" + std::to_string(next) + "," +
                  std::to_string(g.output.start) + ") not covered exactly once");
    next = g.output.end;
  }
  if (next != c_out)
    throw Error(std::string(where) + ": output channels [" + std::to_string(next) + "," + std::to_string(c_out) +
                ") not covered");
}

template <typename T>
Tensor<T> uneven_group_pointwise(const Tensor<T>& input, const std::vector<ChannelRangeGroup<T>>& groups) {
  std::vector<GroupSpan> spans;
  std::size_t c_out = 0;
  for (const auto& g : groups) {
    spans.push_back({g.input_range, g.output_range});
    c_out = std::max(c_out, g.output_range.end);
  }
  validate_cover(spans, input.c(), c_out, "uneven_group_pointwise");
  Tensor<T> out(Shape{input.n(), c_out, input.h(), input.w()});
  const std::size_t P = input.h() * input.w();
  for (const auto& g : groups) {
    const Shape& ws = g.weights.shape();
    if (ws.n != g.output_range.width())
      throw ShapeError("uneven_group_pointwise", "group output width", g.output_range.width(), ws.n);
    if (ws.c != g.input_range.width() || ws.h != 1 || ws.w != 1)
      throw ShapeError("uneven_group_pointwise", "group input width", g.input_range.width(), ws.c);
    for (std::size_t n = 0; n < input.n(); ++n)
      detail::gemm_nn(ws.n, P, ws.c, g.weights.data(), input.plane(n, g.input_range.start),
                      out.plane(n, g.output_range.start));
  }
  return out;
}

/// Pointwise convolution made of channel-range groups.
template <typename T>
class UnevenPointwise : public Module<T> {
 public:
  UnevenPointwise(std::size_t c_in, std::size_t c_out, std::vector<GroupSpan> spans)
      : c_in_(c_in), c_out_(c_out) {
    validate_cover(spans, c_in, c_out, "UnevenPointwise");
    for (const auto& s : spans) {
      const Shape ws{s.output.width(), s.input.width(), 1, 1};
      groups_.push_back({s.input, s.output, Tensor<T>(ws)});
      grads_.emplace_back(ws);
    }
  }

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    if (input.c() != c_in_) throw ShapeError("UnevenPointwise", "input channels", c_in_, input.c());
    input_ = input;
    return uneven_group_pointwise(input, groups_);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const Tensor<T>& x = detail::require_cache(input_, "UnevenPointwise");
    Tensor<T> grad_in(x.shape());
    const std::size_t P = x.h() * x.w();
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      const std::size_t o = g.output_range.width();
      const std::size_t i = g.input_range.width();
      for (std::size_t n = 0; n < x.n(); ++n) {
        const T* go = grad_out.plane(n, g.output_range.start);
        detail::gemm_nt(o, i, P, go, x.plane(n, g.input_range.start), grads_[gi].data());
        detail::gemm_tn(i, P, o, g.weights.data(), go, grad_in.plane(n, g.input_range.start));
      }
    }
    return grad_in;
  }

  Shape output_shape(const Shape& in) const override {
    if (in.c != c_in_) throw ShapeError("UnevenPointwise", "input channels", c_in_, in.c);
    return Shape{in.n, c_out_, in.h, in.w};
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    for (std::size_t i = 0; i < groups_.size(); ++i)
      out.push_back({detail::join(prefix, "g" + std::to_string(i) + ".weight"), &groups_[i].weights, &grads_[i]});
  }

  std::vector<ChannelRangeGroup<T>>& groups() { return groups_; }
  const std::vector<ChannelRangeGroup<T>>& groups() const { return groups_; }

 private:
  std::size_t c_in_;
  std::size_t c_out_;
  std::vector<ChannelRangeGroup<T>> groups_;
  std::vector<Tensor<T>> grads_;
  std::optional<Tensor<T>> input_;
};

template <typename T>
class ChannelShuffle : public Module<T> {
 public:
  ChannelShuffle(std::size_t channels, std::size_t groups)
      : dest_(shuffle_permutation(channels, groups)), inverse_(inverse_permutation(dest_)) {}

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    seen_ = true;
    return permute_channels(input, dest_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    if (!seen_) throw Error("ChannelShuffle: backward called without a cached forward pass");
    return permute_channels(grad_out, inverse_);
  }
  Shape output_shape(const Shape& in) const override {
    if (in.c != dest_.size()) throw ShapeError("ChannelShuffle", "input channels", dest_.size(), in.c);
    return in;
  }

 private:
  std::vector<std::size_t> dest_;
  std::vector<std::size_t> inverse_;
  bool seen_ = false;
};

// ---------------------------------------------------------------------------
// Squeeze-and-excitation

inline std::size_t se_reduced_width(std::size_t channels, std::size_t reduction) {
  return std::max<std::size_t>(1, channels / std::max<std::size_t>(1, reduction));
}

/// Global average pool → FC(C→C/r) → swish → FC(C/r→C) → sigmoid → per-channel scale.
template <typename T>
class SqueezeExcite : public Module<T> {
 public:
  SqueezeExcite(std::size_t channels, std::size_t reduction)
      : channels_(channels),
        fc1_(channels, se_reduced_width(channels, reduction), true),
        act_(Activation::swish, se_reduced_width(channels, reduction)),
        fc2_(se_reduced_width(channels, reduction), channels, true),
        gate_(Activation::sigmoid, channels) {}

  Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
    if (input.c() != channels_) throw ShapeError("SqueezeExcite", "input channels", channels_, input.c());
    input_ = input;
    Tensor<T> s = gate_.forward(fc2_.forward(act_.forward(fc1_.forward(global_average_pool(input), mode), mode), mode),
                                mode);
    Tensor<T> out(input.shape());
    const std::size_t P = input.h() * input.w();
    for (std::size_t n = 0; n < input.n(); ++n)
      for (std::size_t c = 0; c < channels_; ++c) {
        const T k = s[n * channels_ + c];
        const T* x = input.plane(n, c);
        T* y = out.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) y[i] = x[i] * k;
      }
    scale_ = std::move(s);
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const Tensor<T>& x = detail::require_cache(input_, "SqueezeExcite");
    const std::size_t P = x.h() * x.w();
    Tensor<T> grad_in(x.shape());
    Tensor<T> grad_scale(Shape{x.n(), channels_, 1, 1});
    for (std::size_t n = 0; n < x.n(); ++n)
      for (std::size_t c = 0; c < channels_; ++c) {
        const T k = (*scale_)[n * channels_ + c];
        const T* xv = x.plane(n, c);
        const T* g = grad_out.plane(n, c);
        T* gi = grad_in.plane(n, c);
        T acc = 0;
        for (std::size_t i = 0; i < P; ++i) {
          acc += g[i] * xv[i];
          gi[i] = g[i] * k;
        }
        grad_scale[n * channels_ + c] = acc;
      }
    Tensor<T> grad_pooled = fc1_.backward(act_.backward(fc2_.backward(gate_.backward(grad_scale))));
    for (std::size_t n = 0; n < x.n(); ++n)
      for (std::size_t c = 0; c < channels_; ++c) {
        const T d = grad_pooled[n * channels_ + c] / static_cast<T>(P);
        T* gi = grad_in.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) gi[i] += d;
      }
    return grad_in;
  }

  Shape output_shape(const Shape& in) const override {
    if (in.c != channels_) throw ShapeError("SqueezeExcite", "input channels", channels_, in.c);
    return in;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    fc1_.collect(detail::join(prefix, "fc1"), out);
    fc2_.collect(detail::join(prefix, "fc2"), out);
  }

  /// Per-(n, c) gate from the last forward pass, shape (N, C, 1, 1).
  const Tensor<T>& last_scale() const {
    if (!scale_) throw Error("SqueezeExcite: no forward pass yet");
    return *scale_;
  }
  std::size_t reduced_width() const { return fc1_.weight().n(); }
  Linear<T>& fc1() { return fc1_; }
  Linear<T>& fc2() { return fc2_; }

 private:
  std::size_t channels_;
  Linear<T> fc1_;
  ActivationLayer<T> act_;
  Linear<T> fc2_;
  ActivationLayer<T> gate_;
  std::optional<Tensor<T>> input_;
  std::optional<Tensor<T>> scale_;
};

template <typename T>
Tensor<T> se_module(const Tensor<T>& input, SqueezeExcite<T>& se) {
  return se.forward(input, Mode::infer);
}

// ---------------------------------------------------------------------------
// Bottleneck blocks

enum class BlockVariant { seesaw_shuffle, seesaw_share, inverted_residual };

inline const char* to_string(BlockVariant v) {
  switch (v) {
    case BlockVariant::seesaw_shuffle: return "shuffle";
    case BlockVariant::seesaw_share: return "share";
    case BlockVariant::inverted_residual: return "inverted_residual";
  }
  return "?";
}

inline BlockVariant block_variant_from_string(const std::string& s) {
  if (s == "shuffle" || s == "seesaw_shuffle") return BlockVariant::seesaw_shuffle;
  if (s == "share" || s == "seesaw_share") return BlockVariant::seesaw_share;
  if (s == "inverted_residual" || s == "ir") return BlockVariant::inverted_residual;
  throw Error("unknown block variant '" + s + "'");
}

/// Number of groups in the single channel shuffle of a Seesaw-shuffle block.
inline constexpr std::size_t kShuffleGroups = 2;

struct BlockConfig {
  std::size_t in_channels = 64;
  std::size_t out_channels = 64;
  std::size_t expansion_channels = 128;
  std::size_t stride = 1;
  BlockVariant variant = BlockVariant::seesaw_shuffle;
  double split_ratio = 0.25;
  bool use_se = true;
  std::size_t se_reduction = 4;
  Activation activation = Activation::swish;
  bool residual = false;
  /// Max-pool + 1×1 conv shortcut added to a stride-2 block (DW-SeesawFaceNet V2).
  bool skip_branch = false;

  void validate() const {
    if (in_channels == 0 || out_channels == 0 || expansion_channels == 0)
      throw Error("BlockConfig: channel counts must be positive");
    if (stride != 1 && stride != 2) throw Error("BlockConfig: stride must be 1 or 2");
    if (residual && (stride != 1 || in_channels != out_channels))
      throw ShapeError("BlockConfig", "residual requires stride 1 and in == out; out_channels", in_channels,
                       out_channels);
    if (skip_branch && (stride != 2 || residual))
      throw Error("BlockConfig: skip branch applies only to non-residual stride-2 blocks");
    if (se_reduction == 0) throw Error("BlockConfig: se_reduction must be positive");
    if (activation != Activation::swish && activation != Activation::prelu && activation != Activation::relu)
      throw Error("BlockConfig: activation must be swish, prelu or relu");
    if (variant != BlockVariant::inverted_residual) {
      validate_split(split_ratio, in_channels, "BlockConfig in_channels");
      validate_split(split_ratio, expansion_channels, "BlockConfig expansion_channels");
      validate_split(split_ratio, out_channels, "BlockConfig out_channels");
      if (variant == BlockVariant::seesaw_shuffle && expansion_channels % kShuffleGroups != 0)
        throw ShapeError("BlockConfig", "expansion channels divisible by shuffle groups", kShuffleGroups,
                         expansion_channels);
    }
  }

  std::vector<GroupSpan> expand_cover() const {
    switch (variant) {
      case BlockVariant::seesaw_shuffle: return uneven_split_cover(in_channels, expansion_channels, split_ratio);
      case BlockVariant::seesaw_share: return channel_share_cover(in_channels, expansion_channels, split_ratio);
      default: return {GroupSpan{{0, in_channels}, {0, expansion_channels}}};
    }
  }

  std::vector<GroupSpan> project_cover() const {
    switch (variant) {
      case BlockVariant::seesaw_shuffle: return uneven_split_cover(expansion_channels, out_channels, split_ratio);
      case BlockVariant::seesaw_share: return channel_share_cover(expansion_channels, out_channels, split_ratio);
      default: return {GroupSpan{{0, expansion_channels}, {0, out_channels}}};
    }
  }
};

/// Expand (1×1, BN, act) → [shuffle] → 3×3 depthwise (BN, act) → [SE] →
/// linear project (1×1, BN) → [+ input | + skip branch].
template <typename T>
class SeesawBlock : public Module<T> {
 public:
  explicit SeesawBlock(const BlockConfig& cfg)
      : cfg_((cfg.validate(), cfg)),
        expand_(cfg.in_channels, cfg.expansion_channels, cfg.expand_cover()),
        expand_bn_(cfg.expansion_channels),
        expand_act_(cfg.activation, cfg.expansion_channels),
        dw_(cfg.expansion_channels, 3, cfg.stride, 1),
        dw_bn_(cfg.expansion_channels),
        dw_act_(cfg.activation, cfg.expansion_channels),
        project_(cfg.expansion_channels, cfg.out_channels, cfg.project_cover()),
        project_bn_(cfg.out_channels) {
    if (cfg.variant == BlockVariant::seesaw_shuffle)
      shuffle_ = std::make_unique<ChannelShuffle<T>>(cfg.expansion_channels, kShuffleGroups);
    if (cfg.use_se) se_ = std::make_unique<SqueezeExcite<T>>(cfg.expansion_channels, cfg.se_reduction);
    if (cfg.skip_branch)
      skip_conv_ = std::make_unique<Conv2d<T>>(ConvParams::same(cfg.in_channels, cfg.out_channels, 1));
  }

  Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
    if (input.c() != cfg_.in_channels) throw ShapeError("SeesawBlock", "input channels", cfg_.in_channels, input.c());
    Tensor<T> y = expand_act_.forward(expand_bn_.forward(expand_.forward(input, mode), mode), mode);
    if (shuffle_) y = shuffle_->forward(y, mode);
    y = dw_act_.forward(dw_bn_.forward(dw_.forward(y, mode), mode), mode);
    if (se_) y = se_->forward(y, mode);
    y = project_bn_.forward(project_.forward(y, mode), mode);
    if (cfg_.residual) {
      if (!(y.shape() == input.shape())) throw ShapeError("SeesawBlock", "residual shape", input.size(), y.size());
      y += input;
    }
    if (skip_conv_) y += skip_conv_->forward(skip_pool_.forward(input, mode), mode);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> g = project_.backward(project_bn_.backward(grad_out));
    if (se_) g = se_->backward(g);
    g = dw_.backward(dw_bn_.backward(dw_act_.backward(g)));
    if (shuffle_) g = shuffle_->backward(g);
    g = expand_.backward(expand_bn_.backward(expand_act_.backward(g)));
    if (cfg_.residual) g += grad_out;
    if (skip_conv_) g += skip_pool_.backward(skip_conv_->backward(grad_out));
    return g;
  }

  Shape output_shape(const Shape& in) const override {
    if (in.c != cfg_.in_channels) throw ShapeError("SeesawBlock", "input channels", cfg_.in_channels, in.c);
    const std::size_t h = conv_out_extent(in.h, 3, cfg_.stride, 1, "SeesawBlock");
    const std::size_t w = conv_out_extent(in.w, 3, cfg_.stride, 1, "SeesawBlock");
    if (skip_conv_ && (in.h / 2 != h || in.w / 2 != w))
      throw ShapeError("SeesawBlock", "skip branch spatial extent", h, in.h / 2);
    return Shape{in.n, cfg_.out_channels, h, w};
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    expand_.collect(detail::join(prefix, "expand"), out);
    expand_bn_.collect(detail::join(prefix, "expand_bn"), out);
    expand_act_.collect(detail::join(prefix, "expand_act"), out);
    dw_.collect(detail::join(prefix, "dw"), out);
    dw_bn_.collect(detail::join(prefix, "dw_bn"), out);
    dw_act_.collect(detail::join(prefix, "dw_act"), out);
    if (se_) se_->collect(detail::join(prefix, "se"), out);
    project_.collect(detail::join(prefix, "project"), out);
    project_bn_.collect(detail::join(prefix, "project_bn"), out);
    if (skip_conv_) skip_conv_->collect(detail::join(prefix, "skip"), out);
  }

  const BlockConfig& config() const { return cfg_; }
  UnevenPointwise<T>& expand() { return expand_; }
  UnevenPointwise<T>& project() { return project_; }
  DepthwiseConv2d<T>& depthwise() { return dw_; }
  SqueezeExcite<T>* se() { return se_.get(); }
  Conv2d<T>* skip_conv() { return skip_conv_.get(); }

 private:
  BlockConfig cfg_;
  UnevenPointwise<T> expand_;
  BatchNorm2d<T> expand_bn_;
  ActivationLayer<T> expand_act_;
  std::unique_ptr<ChannelShuffle<T>> shuffle_;
  DepthwiseConv2d<T> dw_;
  BatchNorm2d<T> dw_bn_;
  ActivationLayer<T> dw_act_;
  std::unique_ptr<SqueezeExcite<T>> se_;
  UnevenPointwise<T> project_;
  BatchNorm2d<T> project_bn_;
  MaxPool2x2<T> skip_pool_;
  std::unique_ptr<Conv2d<T>> skip_conv_;
};

template <typename T>
Tensor<T> seesaw_block_forward(const Tensor<T>& input, SeesawBlock<T>& block, Mode mode = Mode::infer) {
  if (block.config().variant == BlockVariant::inverted_residual)
    throw Error("seesaw_block_forward: block is an inverted residual block");
  return block.forward(input, mode);
}

template <typename T>
Tensor<T> inverted_residual_forward(const Tensor<T>& input, SeesawBlock<T>& block, Mode mode = Mode::infer) {
  if (block.config().variant != BlockVariant::inverted_residual)
    throw Error("inverted_residual_forward: block is a Seesaw block");
  return block.forward(input, mode);
}

/// 2×2 max pool followed by a 1×1 convolution with `weights` (out, in, 1, 1).
template <typename T>
Tensor<T> downsample_skip_branch(const Tensor<T>& input, const Tensor<T>& weights) {
  const Tensor<T> pooled = max_pool2d(input);
  if (weights.c() != pooled.c()) throw ShapeError("downsample_skip_branch", "weight in_channels", pooled.c(), weights.c());
  return conv2d_forward(pooled, weights, ConvParams::same(weights.c(), weights.n(), 1));
}

}  // namespace seesaw
