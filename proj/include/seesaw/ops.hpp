#pragma once

// Forward and backward kernels for the operators every architecture in this
// library is assembled from. All kernels take NCHW tensors and use
// cross-correlation (no kernel flip).

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "seesaw/tensor.hpp"

namespace seesaw {

struct ConvParams {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t groups = 1;
  bool has_bias = false;

  /// 3×3 kernels pad by one, 1×1 kernels by zero.
  static ConvParams same(std::size_t in, std::size_t out, std::size_t k, std::size_t stride = 1,
                         std::size_t groups = 1) {
    return ConvParams{in, out, k, k, stride, k / 2, groups, false};
  }

  Shape weight_shape() const { return Shape{out_channels, in_channels / groups, kernel_h, kernel_w}; }
};

inline std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad,
                                   const char* where) {
  if (in + 2 * pad < kernel) throw ShapeError(where, "spatial extent vs kernel", kernel, in + 2 * pad);
  return (in + 2 * pad - kernel) / stride + 1;
}

namespace detail {

// C[M×N] += A[M×K] · B[K×N]
template <typename T>
void gemm_nn(std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C) {
  for (std::size_t i = 0; i < M; ++i) {
    T* c = C + i * N;
    const T* a = A + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const T av = a[k];
      const T* b = B + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

// C[M×N] += A[M×K] · B[N×K]ᵀ
template <typename T>
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C) {
  for (std::size_t i = 0; i < M; ++i) {
    const T* a = A + i * K;
    for (std::size_t j = 0; j < N; ++j) {
      const T* b = B + j * K;
      T acc = 0;
      for (std::size_t k = 0; k < K; ++k) acc += a[k] * b[k];
      C[i * N + j] += acc;
    }
  }
}

// C[M×N] += A[K×M]ᵀ · B[K×N]
template <typename T>
void gemm_tn(std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C) {
  for (std::size_t k = 0; k < K; ++k) {
    const T* b = B + k * N;
    for (std::size_t i = 0; i < M; ++i) {
      const T av = A[k * M + i];
      T* c = C + i * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

// Unfold `channels` planes starting at `src` into a (channels·kh·kw) × (oh·ow) matrix.
template <typename T>
void im2col(const T* src, std::size_t channels, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, T* col) {
  const std::size_t P = oh * ow;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* plane = src + c * h * w;
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        T* row = col + ((c * kh + ky) * kw + kx) * P;
        for (std::size_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * stride + ky) - static_cast<std::ptrdiff_t>(pad);
          T* dst = row + y * ow;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
            for (std::size_t x = 0; x < ow; ++x) dst[x] = T(0);
            continue;
          }
          const T* line = plane + static_cast<std::size_t>(iy) * w;
          for (std::size_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(x * stride + kx) - static_cast<std::ptrdiff_t>(pad);
            dst[x] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) ? T(0) : line[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add the column matrix back onto the planes.
template <typename T>
void col2im(const T* col, std::size_t channels, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, T* dst) {
  const std::size_t P = oh * ow;
  for (std::size_t c = 0; c < channels; ++c) {
    T* plane = dst + c * h * w;
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        const T* row = col + ((c * kh + ky) * kw + kx) * P;
        for (std::size_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * stride + ky) - static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          T* line = plane + static_cast<std::size_t>(iy) * w;
          for (std::size_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(x * stride + kx) - static_cast<std::ptrdiff_t>(pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(w)) line[ix] += row[y * ow + x];
          }
        }
      }
    }
  }
}

inline bool is_pointwise(const ConvParams& p) {
  return p.kernel_h == 1 && p.kernel_w == 1 && p.stride == 1 && p.padding == 0;
}

}  // namespace detail

inline void check_conv(const Shape& in, const Shape& wshape, const ConvParams& p, const char* where) {
  if (p.groups == 0 || p.in_channels % p.groups != 0)
    throw ShapeError(where, "in_channels divisible by groups", p.groups, p.in_channels);
  if (p.out_channels % p.groups != 0)
    throw ShapeError(where, "out_channels divisible by groups", p.groups, p.out_channels);
  if (p.stride == 0) throw Error(std::string(where) + ": stride must be positive");
  if (in.c != p.in_channels) throw ShapeError(where, "input channels", p.in_channels, in.c);
  const Shape ws = p.weight_shape();
  if (wshape.n != ws.n) throw ShapeError(where, "weight out_channels", ws.n, wshape.n);
  if (wshape.c != ws.c) throw ShapeError(where, "weight in_channels/groups", ws.c, wshape.c);
  if (wshape.h != ws.h) throw ShapeError(where, "weight kernel height", ws.h, wshape.h);
  if (wshape.w != ws.w) throw ShapeError(where, "weight kernel width", ws.w, wshape.w);
}

inline Shape conv_output_shape(const Shape& in, const ConvParams& p) {
  return Shape{in.n, p.out_channels, conv_out_extent(in.h, p.kernel_h, p.stride, p.padding, "conv2d"),
               conv_out_extent(in.w, p.kernel_w, p.stride, p.padding, "conv2d")};
}

/// Grouped 2-D convolution via im2col + GEMM (1×1 stride-1 convs skip the unfold).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const ConvParams& p,
                         const Tensor<T>* bias = nullptr) {
  check_conv(input.shape(), weights.shape(), p, "conv2d_forward");
  const Shape os = conv_output_shape(input.shape(), p);
  Tensor<T> out(os);
  const std::size_t cin_g = p.in_channels / p.groups;
  const std::size_t cout_g = p.out_channels / p.groups;
  const std::size_t K = cin_g * p.kernel_h * p.kernel_w;
  const std::size_t P = os.h * os.w;
  const bool pointwise = detail::is_pointwise(p);
  std::vector<T> col(pointwise ? 0 : K * P);
  for (std::size_t n = 0; n < input.n(); ++n) {
    for (std::size_t g = 0; g < p.groups; ++g) {
      const T* src = input.plane(n, g * cin_g);
      const T* colp = src;
      if (!pointwise) {
        detail::im2col(src, cin_g, input.h(), input.w(), p.kernel_h, p.kernel_w, p.stride, p.padding, os.h, os.w,
                       col.data());
        colp = col.data();
      }
      detail::gemm_nn(cout_g, P, K, weights.data() + g * cout_g * K, colp, out.plane(n, g * cout_g));
    }
  }
  if (p.has_bias && bias != nullptr) {
    if (bias->size() != p.out_channels) throw ShapeError("conv2d_forward", "bias length", p.out_channels, bias->size());
    for (std::size_t n = 0; n < os.n; ++n)
      for (std::size_t c = 0; c < os.c; ++c) {
        T* o = out.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) o[i] += (*bias)[c];
      }
  }
  return out;
}

/// Accumulates into `grad_weights`; returns the gradient w.r.t. the input.
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights, const ConvParams& p,
                          const Tensor<T>& grad_out, Tensor<T>& grad_weights) {
  check_conv(input.shape(), weights.shape(), p, "conv2d_backward");
  const Shape os = conv_output_shape(input.shape(), p);
  if (!(grad_out.shape() == os)) throw Error("conv2d_backward: upstream gradient shape " + grad_out.shape().str());
  Tensor<T> grad_in(input.shape());
  const std::size_t cin_g = p.in_channels / p.groups;
  const std::size_t cout_g = p.out_channels / p.groups;
  const std::size_t K = cin_g * p.kernel_h * p.kernel_w;
  const std::size_t P = os.h * os.w;
  const bool pointwise = detail::is_pointwise(p);
  std::vector<T> col(pointwise ? 0 : K * P);
  std::vector<T> gcol(pointwise ? 0 : K * P);
  for (std::size_t n = 0; n < input.n(); ++n) {
    for (std::size_t g = 0; g < p.groups; ++g) {
      const T* src = input.plane(n, g * cin_g);
      const T* go = grad_out.plane(n, g * cout_g);
      const T* w = weights.data() + g * cout_g * K;
      if (pointwise) {
        detail::gemm_nt(cout_g, K, P, go, src, grad_weights.data() + g * cout_g * K);
        detail::gemm_tn(K, P, cout_g, w, go, grad_in.plane(n, g * cin_g));
        continue;
      }
      detail::im2col(src, cin_g, input.h(), input.w(), p.kernel_h, p.kernel_w, p.stride, p.padding, os.h, os.w,
                     col.data());
      detail::gemm_nt(cout_g, K, P, go, col.data(), grad_weights.data() + g * cout_g * K);
      std::fill(gcol.begin(), gcol.end(), T(0));
      detail::gemm_tn(K, P, cout_g, w, go, gcol.data());
      detail::col2im(gcol.data(), cin_g, input.h(), input.w(), p.kernel_h, p.kernel_w, p.stride, p.padding, os.h,
                     os.w, grad_in.plane(n, g * cin_g));
    }
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// Depthwise

inline Shape depthwise_output_shape(const Shape& in, std::size_t kh, std::size_t kw, std::size_t stride,
                                    std::size_t pad) {
  return Shape{in.n, in.c, conv_out_extent(in.h, kh, stride, pad, "depthwise_conv2d"),
               conv_out_extent(in.w, kw, stride, pad, "depthwise_conv2d")};
}

/// One filter per channel; weights are (C, 1, kh, kw).
template <typename T>
Tensor<T> depthwise_conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::size_t stride,
                                   std::size_t padding) {
  const Shape& ws = weights.shape();
  if (ws.n != input.c()) throw ShapeError("depthwise_conv2d_forward", "weight channels", input.c(), ws.n);
  if (ws.c != 1) throw ShapeError("depthwise_conv2d_forward", "channel multiplier", 1, ws.c);
  if (stride == 0) throw Error("depthwise_conv2d_forward: stride must be positive");
  const Shape os = depthwise_output_shape(input.shape(), ws.h, ws.w, stride, padding);
  Tensor<T> out(os);
  const auto H = static_cast<std::ptrdiff_t>(input.h());
  const auto W = static_cast<std::ptrdiff_t>(input.w());
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t c = 0; c < os.c; ++c) {
      const T* src = input.plane(n, c);
      const T* k = weights.data() + c * ws.h * ws.w;
      T* dst = out.plane(n, c);
      for (std::size_t y = 0; y < os.h; ++y) {
        for (std::size_t x = 0; x < os.w; ++x) {
          T acc = 0;
          for (std::size_t ky = 0; ky < ws.h; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * stride + ky) - static_cast<std::ptrdiff_t>(padding);
            if (iy < 0 || iy >= H) continue;
            const T* line = src + iy * W;
            const T* krow = k + ky * ws.w;
            for (std::size_t kx = 0; kx < ws.w; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(x * stride + kx) - static_cast<std::ptrdiff_t>(padding);
              if (ix >= 0 && ix < W) acc += krow[kx] * line[ix];
            }
          }
          dst[y * os.w + x] = acc;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> depthwise_conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights, std::size_t stride,
                                    std::size_t padding, const Tensor<T>& grad_out, Tensor<T>& grad_weights) {
  const Shape& ws = weights.shape();
  const Shape os = depthwise_output_shape(input.shape(), ws.h, ws.w, stride, padding);
  if (!(grad_out.shape() == os))
    throw Error("depthwise_conv2d_backward: upstream gradient shape " + grad_out.shape().str());
  Tensor<T> grad_in(input.shape());
  const auto H = static_cast<std::ptrdiff_t>(input.h());
  const auto W = static_cast<std::ptrdiff_t>(input.w());
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t c = 0; c < os.c; ++c) {
      const T* src = input.plane(n, c);
      const T* k = weights.data() + c * ws.h * ws.w;
      T* gk = grad_weights.data() + c * ws.h * ws.w;
      T* gi = grad_in.plane(n, c);
      const T* go = grad_out.plane(n, c);
      for (std::size_t y = 0; y < os.h; ++y) {
        for (std::size_t x = 0; x < os.w; ++x) {
          const T g = go[y * os.w + x];
          for (std::size_t ky = 0; ky < ws.h; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * stride + ky) - static_cast<std::ptrdiff_t>(padding);
            if (iy < 0 || iy >= H) continue;
            for (std::size_t kx = 0; kx < ws.w; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(x * stride + kx) - static_cast<std::ptrdiff_t>(padding);
              if (ix < 0 || ix >= W) continue;
              gk[ky * ws.w + kx] += g * src[iy * W + ix];
              gi[iy * W + ix] += g * k[ky * ws.w + kx];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

/// Depthwise convolution whose kernel spans the whole feature map, giving (N, C, 1, 1).
template <typename T>
Tensor<T> global_depthwise_conv(const Tensor<T>& input, const Tensor<T>& weights) {
  if (input.h() != weights.h()) throw ShapeError("global_depthwise_conv", "height vs kernel", weights.h(), input.h());
  if (input.w() != weights.w()) throw ShapeError("global_depthwise_conv", "width vs kernel", weights.w(), input.w());
  return depthwise_conv2d_forward(input, weights, 1, 0);
}

// ---------------------------------------------------------------------------
// Batch norm

template <typename T>
struct BatchNormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T epsilon = T(1e-5);
  T momentum = T(0.1);

  explicit BatchNormParams(std::size_t channels = 1)
      : gamma(Shape{channels, 1, 1, 1}, T(1)),
        beta(Shape{channels, 1, 1, 1}, T(0)),
        running_mean(Shape{channels, 1, 1, 1}, T(0)),
        running_var(Shape{channels, 1, 1, 1}, T(1)) {}

  std::size_t channels() const { return gamma.size(); }
};

/// Values needed by the backward pass.
template <typename T>
struct BatchNormCache {
  Tensor<T> normalized;
  std::vector<T> inv_std;
  Mode mode = Mode::infer;
};

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& input, BatchNormParams<T>& params, Mode mode,
                            BatchNormCache<T>* cache = nullptr) {
  const std::size_t C = input.c();
  if (params.gamma.size() != C) throw ShapeError("batchnorm_forward", "channels", params.gamma.size(), C);
  if (params.beta.size() != C || params.running_mean.size() != C || params.running_var.size() != C)
    throw Error("batchnorm_forward: parameter lengths disagree with channel count");
  const std::size_t P = input.h() * input.w();
  const std::size_t count = input.n() * P;
  if (mode == Mode::train && count == 0) throw Error("batchnorm_forward: empty batch in train mode");
  Tensor<T> out(input.shape());
  Tensor<T> xhat(input.shape());
  std::vector<T> inv_std(C);
  for (std::size_t c = 0; c < C; ++c) {
    T mean, var;
    if (mode == Mode::train) {
      double s = 0;
      for (std::size_t n = 0; n < input.n(); ++n) {
        const T* x = input.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) s += x[i];
      }
      const double m = s / static_cast<double>(count);
      double v = 0;
      for (std::size_t n = 0; n < input.n(); ++n) {
        const T* x = input.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) v += (x[i] - m) * (x[i] - m);
      }
      mean = static_cast<T>(m);
      var = static_cast<T>(v / static_cast<double>(count));
      const double unbiased = count > 1 ? v / static_cast<double>(count - 1) : v;
      params.running_mean[c] = (T(1) - params.momentum) * params.running_mean[c] + params.momentum * mean;
      params.running_var[c] =
          (T(1) - params.momentum) * params.running_var[c] + params.momentum * static_cast<T>(unbiased);
    } else {
      mean = params.running_mean[c];
      var = params.running_var[c];
    }
    const T is = T(1) / std::sqrt(var + params.epsilon);
    inv_std[c] = is;
    const T g = params.gamma[c];
    const T b = params.beta[c];
    for (std::size_t n = 0; n < input.n(); ++n) {
      const T* x = input.plane(n, c);
      T* xh = xhat.plane(n, c);
      T* y = out.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        xh[i] = (x[i] - mean) * is;
        y[i] = xh[i] * g + b;
      }
    }
  }
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  return out;
}

/// Accumulates into grad_gamma/grad_beta; returns the input gradient.
template <typename T>
Tensor<T> batchnorm_backward(const Tensor<T>& grad_out, const BatchNormCache<T>& cache, const BatchNormParams<T>& params,
                             Tensor<T>& grad_gamma, Tensor<T>& grad_beta) {
  const Shape& s = grad_out.shape();
  if (!(cache.normalized.shape() == s)) throw Error("batchnorm_backward: cache shape " + cache.normalized.shape().str());
  const std::size_t P = s.h * s.w;
  const T M = static_cast<T>(s.n * P);
  Tensor<T> grad_in(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    T sum_g = 0, sum_gx = 0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* g = grad_out.plane(n, c);
      const T* xh = cache.normalized.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
    }
    grad_gamma[c] += sum_gx;
    grad_beta[c] += sum_g;
    const T scale = params.gamma[c] * cache.inv_std[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* g = grad_out.plane(n, c);
      const T* xh = cache.normalized.plane(n, c);
      T* gi = grad_in.plane(n, c);
      if (cache.mode == Mode::train) {
        for (std::size_t i = 0; i < P; ++i) gi[i] = scale / M * (M * g[i] - sum_g - xh[i] * sum_gx);
      } else {
        for (std::size_t i = 0; i < P; ++i) gi[i] = scale * g[i];
      }
    }
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// Activations

enum class Activation { swish, prelu, relu, sigmoid, identity };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::swish: return "swish";
    case Activation::prelu: return "prelu";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "swish") return Activation::swish;
  if (s == "prelu") return Activation::prelu;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity" || s == "linear") return Activation::identity;
  throw Error("unknown activation '" + s + "'");
}

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

/// Elementwise nonlinearity. `slope` holds one PReLU slope per channel and is
/// ignored for other kinds.
template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind, const Tensor<T>* slope = nullptr) {
  Tensor<T> out(input.shape());
  const std::size_t P = input.h() * input.w();
  if (kind == Activation::prelu) {
    if (slope == nullptr || slope->size() != input.c())
      throw ShapeError("activation", "prelu slope length", input.c(), slope ? slope->size() : 0);
    for (std::size_t n = 0; n < input.n(); ++n)
      for (std::size_t c = 0; c < input.c(); ++c) {
        const T a = (*slope)[c];
        const T* x = input.plane(n, c);
        T* y = out.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) y[i] = x[i] > 0 ? x[i] : a * x[i];
      }
    return out;
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    const T x = input[i];
    switch (kind) {
      case Activation::swish: out[i] = x * sigmoid(x); break;
      case Activation::relu: out[i] = x > 0 ? x : T(0); break;
      case Activation::sigmoid: out[i] = sigmoid(x); break;
      default: out[i] = x; break;
    }
  }
  return out;
}

template <typename T>
Tensor<T> activation_backward(const Tensor<T>& input, const Tensor<T>& grad_out, Activation kind,
                              const Tensor<T>* slope = nullptr, Tensor<T>* grad_slope = nullptr) {
  if (!(input.shape() == grad_out.shape())) throw Error("activation_backward: shape mismatch");
  Tensor<T> grad_in(input.shape());
  const std::size_t P = input.h() * input.w();
  if (kind == Activation::prelu) {
    for (std::size_t n = 0; n < input.n(); ++n)
      for (std::size_t c = 0; c < input.c(); ++c) {
        const T a = (*slope)[c];
        const T* x = input.plane(n, c);
        const T* g = grad_out.plane(n, c);
        T* gi = grad_in.plane(n, c);
        T gs = 0;
        for (std::size_t i = 0; i < P; ++i) {
          if (x[i] > 0) {
            gi[i] = g[i];
          } else {
            gi[i] = a * g[i];
            gs += g[i] * x[i];
          }
        }
        if (grad_slope) (*grad_slope)[c] += gs;
      }
    return grad_in;
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    const T x = input[i];
    const T g = grad_out[i];
    switch (kind) {
      case Activation::swish: {
        const T s = sigmoid(x);
        grad_in[i] = g * (s + x * s * (T(1) - s));
        break;
      }
      case Activation::relu: grad_in[i] = x > 0 ? g : T(0); break;
      case Activation::sigmoid: {
        const T s = sigmoid(x);
        grad_in[i] = g * s * (T(1) - s);
        break;
      }
      default: grad_in[i] = g; break;
    }
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// Pooling

/// 2×2 max pooling with stride 2; odd trailing rows/columns are dropped.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& input, std::vector<std::size_t>* argmax = nullptr) {
  if (input.h() < 2 || input.w() < 2) throw ShapeError("max_pool2d", "spatial extent", 2, std::min(input.h(), input.w()));
  const Shape os{input.n(), input.c(), input.h() / 2, input.w() / 2};
  Tensor<T> out(os);
  if (argmax) argmax->assign(os.numel(), 0);
  std::size_t o = 0;
  for (std::size_t n = 0; n < os.n; ++n)
    for (std::size_t c = 0; c < os.c; ++c)
      for (std::size_t y = 0; y < os.h; ++y)
        for (std::size_t x = 0; x < os.w; ++x, ++o) {
          std::size_t best = input.index(n, c, 2 * y, 2 * x);
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t i = input.index(n, c, 2 * y + dy, 2 * x + dx);
              if (input[i] > input[best]) best = i;
            }
          out[o] = input[best];
          if (argmax) (*argmax)[o] = best;
        }
  return out;
}

template <typename T>
Tensor<T> max_pool2d_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                              const Tensor<T>& grad_out) {
  if (argmax.size() != grad_out.size()) throw ShapeError("max_pool2d_backward", "element count", argmax.size(), grad_out.size());
  Tensor<T> grad_in(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) grad_in[argmax[o]] += grad_out[o];
  return grad_in;
}

/// Mean over each (n, c) plane, giving (N, C, 1, 1).
template <typename T>
Tensor<T> global_average_pool(const Tensor<T>& input) {
  Tensor<T> out(Shape{input.n(), input.c(), 1, 1});
  const std::size_t P = input.h() * input.w();
  for (std::size_t n = 0; n < input.n(); ++n)
    for (std::size_t c = 0; c < input.c(); ++c) {
      const T* x = input.plane(n, c);
      T s = 0;
      for (std::size_t i = 0; i < P; ++i) s += x[i];
      out(n, c, 0, 0) = s / static_cast<T>(P);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Fully connected

/// Affine map on the flattened (C·H·W) features of each sample. Weights are
/// (out, in, 1, 1); the result is (N, out, 1, 1).
template <typename T>
Tensor<T> linear_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>* bias = nullptr) {
  const std::size_t in = input.c() * input.h() * input.w();
  const std::size_t out = weights.n();
  if (weights.c() * weights.h() * weights.w() != in)
    throw ShapeError("linear_forward", "input features", weights.c() * weights.h() * weights.w(), in);
  if (bias && bias->size() != out) throw ShapeError("linear_forward", "bias length", out, bias->size());
  Tensor<T> y(Shape{input.n(), out, 1, 1});
  detail::gemm_nt(input.n(), out, in, input.data(), weights.data(), y.data());
  if (bias)
    for (std::size_t n = 0; n < input.n(); ++n)
      for (std::size_t o = 0; o < out; ++o) y[n * out + o] += (*bias)[o];
  return y;
}

template <typename T>
Tensor<T> linear_backward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& grad_out,
                          Tensor<T>& grad_weights, Tensor<T>* grad_bias = nullptr) {
  const std::size_t in = input.c() * input.h() * input.w();
  const std::size_t out = weights.n();
  if (grad_out.size() != input.n() * out) throw ShapeError("linear_backward", "upstream features", input.n() * out, grad_out.size());
  Tensor<T> grad_in(input.shape());
  detail::gemm_nn(input.n(), in, out, grad_out.data(), weights.data(), grad_in.data());
  detail::gemm_tn(out, in, input.n(), grad_out.data(), input.data(), grad_weights.data());
  if (grad_bias)
    for (std::size_t n = 0; n < input.n(); ++n)
      for (std::size_t o = 0; o < out; ++o) (*grad_bias)[o] += grad_out[n * out + o];
  return grad_in;
}

}  // namespace seesaw
