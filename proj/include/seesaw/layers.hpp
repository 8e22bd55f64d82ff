#pragma once

// Stateful layer wrappers around the kernels in ops.hpp. Each layer caches
// whatever its backward pass needs during forward(); parameter gradients are
// accumulated, so call zero_grad() between optimizer steps.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seesaw/ops.hpp"

namespace seesaw {

/// Named view of a layer-owned tensor. `grad == nullptr` marks a buffer
/// (batch-norm running statistics) that is serialized but not trained.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;

  bool trainable() const { return grad != nullptr; }
};

template <typename T>
class Module {
 public:
  virtual ~Module() = default;

  virtual Tensor<T> forward(const Tensor<T>& input, Mode mode) = 0;
  /// Gradient w.r.t. the input of the most recent forward() call.
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) { (void)prefix, (void)out; }

  std::vector<ParamRef<T>> parameters(const std::string& prefix = "") {
    std::vector<ParamRef<T>> out;
    collect(prefix, out);
    return out;
  }

  void zero_grad() {
    for (auto& p : parameters())
      if (p.grad) p.grad->fill(T(0));
  }
};

namespace detail {

inline std::string join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

template <typename T>
const Tensor<T>& require_cache(const std::optional<Tensor<T>>& cached, const char* layer) {
  if (!cached) throw Error(std::string(layer) + ": backward called without a cached forward pass");
  return *cached;
}

}  // namespace detail

template <typename T>
class Conv2d : public Module<T> {
 public:
  explicit Conv2d(ConvParams params)
      : params_(params), weight_(params.weight_shape()), grad_weight_(params.weight_shape()) {
    check_conv(Shape{1, params.in_channels, params.kernel_h, params.kernel_w}, weight_.shape(), params_, "Conv2d");
  }

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    input_ = input;
    return conv2d_forward(input, weight_, params_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return conv2d_backward(detail::require_cache(input_, "Conv2d"), weight_, params_, grad_out, grad_weight_);
  }
  Shape output_shape(const Shape& in) const override {
    if (in.c != params_.in_channels) throw ShapeError("Conv2d", "input channels", params_.in_channels, in.c);
    return conv_output_shape(in, params_);
  }
  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    out.push_back({detail::join(prefix, "weight"), &weight_, &grad_weight_});
  }

  const ConvParams& params() const { return params_; }
  Tensor<T>& weight() { return weight_; }
  const Tensor<T>& weight() const { return weight_; }

 private:
  ConvParams params_;
  Tensor<T> weight_;
  Tensor<T> grad_weight_;
  std::optional<Tensor<T>> input_;
};

template <typename T>
class DepthwiseConv2d : public Module<T> {
 public:
  DepthwiseConv2d(std::size_t channels, std::size_t kernel, std::size_t stride, std::size_t padding)
      : stride_(stride),
        padding_(padding),
        weight_(Shape{channels, 1, kernel, kernel}),
        grad_weight_(Shape{channels, 1, kernel, kernel}) {}

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    input_ = input;
    return depthwise_conv2d_forward(input, weight_, stride_, padding_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return depthwise_conv2d_backward(detail::require_cache(input_, "DepthwiseConv2d"), weight_, stride_, padding_,
                                     grad_out, grad_weight_);
  }
  Shape output_shape(const Shape& in) const override {
    if (in.c != weight_.n()) throw ShapeError("DepthwiseConv2d", "input channels", weight_.n(), in.c);
    return depthwise_output_shape(in, weight_.h(), weight_.w(), stride_, padding_);
  }
  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    out.push_back({detail::join(prefix, "weight"), &weight_, &grad_weight_});
  }

  Tensor<T>& weight() { return weight_; }
  const Tensor<T>& weight() const { return weight_; }
  std::size_t stride() const { return stride_; }

 protected:
  std::size_t stride_;
  std::size_t padding_;
  Tensor<T> weight_;
  Tensor<T> grad_weight_;
  std::optional<Tensor<T>> input_;
};

/// Linear global depthwise convolution (GDConv): kernel equals the input map.
template <typename T>
class GlobalDepthwiseConv : public DepthwiseConv2d<T> {
 public:
  GlobalDepthwiseConv(std::size_t channels, std::size_t kernel) : DepthwiseConv2d<T>(channels, kernel, 1, 0) {}

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    this->input_ = input;
    return global_depthwise_conv(input, this->weight_);
  }
  Shape output_shape(const Shape& in) const override {
    if (in.h != this->weight_.h() || in.w != this->weight_.w())
      throw ShapeError("GlobalDepthwiseConv", "spatial extent vs kernel", this->weight_.h(), in.h);
    return DepthwiseConv2d<T>::output_shape(in);
  }
};

template <typename T>
class BatchNorm2d : public Module<T> {
 public:
  explicit BatchNorm2d(std::size_t channels)
      : params_(channels), grad_gamma_(Shape{channels, 1, 1, 1}), grad_beta_(Shape{channels, 1, 1, 1}) {}

  Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
    cache_.emplace();
    return batchnorm_forward(input, params_, mode, &*cache_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    if (!cache_) throw Error("BatchNorm2d: backward called without a cached forward pass");
    return batchnorm_backward(grad_out, *cache_, params_, grad_gamma_, grad_beta_);
  }
  Shape output_shape(const Shape& in) const override {
    if (in.c != params_.channels()) throw ShapeError("BatchNorm2d", "input channels", params_.channels(), in.c);
    return in;
  }
  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    out.push_back({detail::join(prefix, "gamma"), &params_.gamma, &grad_gamma_});
    out.push_back({detail::join(prefix, "beta"), &params_.beta, &grad_beta_});
    out.push_back({detail::join(prefix, "running_mean"), &params_.running_mean, nullptr});
    out.push_back({detail::join(prefix, "running_var"), &params_.running_var, nullptr});
  }

  BatchNormParams<T>& params() { return params_; }

 private:
  BatchNormParams<T> params_;
  Tensor<T> grad_gamma_;
  Tensor<T> grad_beta_;
  std::optional<BatchNormCache<T>> cache_;
};

/// Parameter-free nonlinearity, or PReLU with one learnable slope per channel.
template <typename T>
class ActivationLayer : public Module<T> {
 public:
  ActivationLayer(Activation kind, std::size_t channels) : kind_(kind) {
    if (kind == Activation::prelu) {
      slope_.emplace(Shape{channels, 1, 1, 1}, T(0.25));
      grad_slope_.emplace(Shape{channels, 1, 1, 1});
    }
  }

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    input_ = input;
    return activation(input, kind_, slope_ ? &*slope_ : nullptr);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return activation_backward(detail::require_cache(input_, "Activation"), grad_out, kind_,
                               slope_ ? &*slope_ : nullptr, grad_slope_ ? &*grad_slope_ : nullptr);
  }
  Shape output_shape(const Shape& in) const override {
    if (slope_ && in.c != slope_->size()) throw ShapeError("PReLU", "input channels", slope_->size(), in.c);
    return in;
  }
  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    if (slope_) out.push_back({detail::join(prefix, "slope"), &*slope_, &*grad_slope_});
  }

  Activation kind() const { return kind_; }

 private:
  Activation kind_;
  std::optional<Tensor<T>> slope_;
  std::optional<Tensor<T>> grad_slope_;
  std::optional<Tensor<T>> input_;
};

template <typename T>
class MaxPool2x2 : public Module<T> {
 public:
  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    input_shape_ = input.shape();
    return max_pool2d(input, &argmax_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    if (!input_shape_) throw Error("MaxPool2x2: backward called without a cached forward pass");
    return max_pool2d_backward(*input_shape_, argmax_, grad_out);
  }
  Shape output_shape(const Shape& in) const override { return Shape{in.n, in.c, in.h / 2, in.w / 2}; }

 private:
  std::optional<Shape> input_shape_;
  std::vector<std::size_t> argmax_;
};

template <typename T>
class Linear : public Module<T> {
 public:
  Linear(std::size_t in, std::size_t out, bool bias)
      : weight_(Shape{out, in, 1, 1}), grad_weight_(Shape{out, in, 1, 1}) {
    if (bias) {
      bias_.emplace(Shape{out, 1, 1, 1});
      grad_bias_.emplace(Shape{out, 1, 1, 1});
    }
  }

  Tensor<T> forward(const Tensor<T>& input, Mode) override {
    input_ = input;
    return linear_forward(input, weight_, bias_ ? &*bias_ : nullptr);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return linear_backward(detail::require_cache(input_, "Linear"), weight_, grad_out, grad_weight_,
                           grad_bias_ ? &*grad_bias_ : nullptr);
  }
  Shape output_shape(const Shape& in) const override {
    if (in.c * in.h * in.w != weight_.c()) throw ShapeError("Linear", "input features", weight_.c(), in.c * in.h * in.w);
    return Shape{in.n, weight_.n(), 1, 1};
  }
  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    out.push_back({detail::join(prefix, "weight"), &weight_, &grad_weight_});
    if (bias_) out.push_back({detail::join(prefix, "bias"), &*bias_, &*grad_bias_});
  }

  Tensor<T>& weight() { return weight_; }
  const Tensor<T>& weight() const { return weight_; }
  Tensor<T>* bias() { return bias_ ? &*bias_ : nullptr; }

 private:
  Tensor<T> weight_;
  Tensor<T> grad_weight_;
  std::optional<Tensor<T>> bias_;
  std::optional<Tensor<T>> grad_bias_;
  std::optional<Tensor<T>> input_;
};

}  // namespace seesaw
