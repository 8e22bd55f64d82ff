#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seesaw {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when tensor dimensions disagree. `dimension()` names the axis or
/// quantity that is off (e.g. "channels", "width").
class ShapeError : public Error {
 public:
  ShapeError(std::string where, std::string dimension, std::size_t expected, std::size_t actual)
      : Error(compose(where, dimension, expected, actual)), dimension_(std::move(dimension)) {}

  const std::string& dimension() const noexcept { return dimension_; }

 private:
  static std::string compose(const std::string& where, const std::string& dim, std::size_t expected,
                             std::size_t actual) {
    std::ostringstream os;
    os << where << ": " << dim << " mismatch (expected " << expected << ", got " << actual << ")";
    return os.str();
  }

  std::string dimension_;
};

enum class Mode { train, infer };

/// Batch/channel/height/width extents of a rank-4 tensor.
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    std::ostringstream os;
    os << "(" << n << "," << c << "," << h << "," << w << ")";
    return os.str();
  }
};

/// Dense NCHW tensor, W innermost. All extents are at least one.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() : Tensor(Shape{}) {}

  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape) {
    if (shape.n == 0 || shape.c == 0 || shape.h == 0 || shape.w == 0)
      throw Error("tensor: every dimension must be >= 1, got " + shape.str());
    data_.assign(shape.numel(), fill);
  }

  Tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, T fill = T(0))
      : Tensor(Shape{n, c, h, w}, fill) {}

  Tensor(Shape shape, std::vector<T> values) : Tensor(shape) {
    if (values.size() != shape.numel()) throw ShapeError("tensor", "element count", shape.numel(), values.size());
    data_ = std::move(values);
  }

  const Shape& shape() const { return shape_; }
  std::size_t n() const { return shape_.n; }
  std::size_t c() const { return shape_.c; }
  std::size_t h() const { return shape_.h; }
  std::size_t w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) { return data_[index(n, c, h, w)]; }
  const T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[index(n, c, h, w)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Pointer to the first element of plane (n, c).
  T* plane(std::size_t n, std::size_t c) { return data_.data() + (n * shape_.c + c) * shape_.plane(); }
  const T* plane(std::size_t n, std::size_t c) const {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  /// Same data, new extents; element count must be preserved.
  Tensor reshaped(Shape s) const {
    if (s.numel() != shape_.numel()) throw ShapeError("reshape", "element count", shape_.numel(), s.numel());
    Tensor out = *this;
    out.shape_ = s;
    return out;
  }

  Tensor& operator+=(const Tensor& o) {
    if (!(o.shape_ == shape_)) throw Error("tensor add: shape " + shape_.str() + " vs " + o.shape_.str());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <typename T>
Tensor<T> operator+(Tensor<T> a, const Tensor<T>& b) {
  a += b;
  return a;
}

}  // namespace seesaw
