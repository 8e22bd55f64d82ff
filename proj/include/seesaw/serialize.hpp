#pragma once

// Flat binary weight container.
//
//   "SSFN" | version u32 | record count u32
//   per record: name length u32 | UTF-8 name | dtype u8 | rank u32 | dims u32×rank | values
//
// All integers and values are little-endian. dtype 0 = float32, 1 = float64.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <type_traits>
#include <vector>

#include "seesaw/layers.hpp"

namespace seesaw {

static_assert(std::endian::native == std::endian::little, "weight container assumes a little-endian host");

inline constexpr char kWeightMagic[4] = {'S', 'S', 'F', 'N'};
inline constexpr std::uint32_t kWeightVersion = 1;

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? DType::f32 : DType::f64;
}

inline std::size_t dtype_size(DType d) { return d == DType::f32 ? 4 : 8; }

struct TensorRecord {
  std::string name;
  DType dtype = DType::f32;
  std::vector<std::uint32_t> dims;
  std::vector<unsigned char> bytes;

  std::size_t numel() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  template <typename T>
  static TensorRecord from(const std::string& name, const Tensor<T>& t) {
    TensorRecord r;
    r.name = name;
    r.dtype = dtype_of<T>();
    const Shape& s = t.shape();
    r.dims = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c), static_cast<std::uint32_t>(s.h),
              static_cast<std::uint32_t>(s.w)};
    r.bytes.resize(t.size() * sizeof(T));
    std::memcpy(r.bytes.data(), t.data(), r.bytes.size());
    return r;
  }

  /// Values converted to T (exact when the stored dtype matches).
  template <typename T>
  std::vector<T> values() const {
    std::vector<T> out(numel());
    if (dtype == DType::f32) {
      std::vector<float> v(numel());
      std::memcpy(v.data(), bytes.data(), v.size() * sizeof(float));
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(v[i]);
    } else {
      std::vector<double> v(numel());
      std::memcpy(v.data(), bytes.data(), v.size() * sizeof(double));
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(v[i]);
    }
    return out;
  }
};

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& b) : b_(b) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  void bytes(std::size_t n, unsigned char* dst) {
    need(n);
    std::memcpy(dst, b_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error("weight container: truncated at byte " + std::to_string(pos_));
  }
  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_records(const std::vector<TensorRecord>& records) {
  std::vector<unsigned char> out(kWeightMagic, kWeightMagic + 4);
  detail::put_u32(out, kWeightVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    if (r.bytes.size() != r.numel() * dtype_size(r.dtype))
      throw Error("weight container: record '" + r.name + "' byte length disagrees with dims");
    detail::put_u32(out, static_cast<std::uint32_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    out.push_back(static_cast<unsigned char>(r.dtype));
    detail::put_u32(out, static_cast<std::uint32_t>(r.dims.size()));
    for (auto d : r.dims) detail::put_u32(out, d);
    out.insert(out.end(), r.bytes.begin(), r.bytes.end());
  }
  return out;
}

inline std::vector<TensorRecord> decode_records(const std::vector<unsigned char>& bytes) {
  detail::ByteReader rd(bytes);
  unsigned char magic[4];
  rd.bytes(4, magic);
  if (std::memcmp(magic, kWeightMagic, 4) != 0) throw Error("weight container: bad magic");
  const std::uint32_t version = rd.u32();
  if (version != kWeightVersion) throw Error("weight container: unsupported version " + std::to_string(version));
  const std::uint32_t count = rd.u32();
  std::vector<TensorRecord> records(count);
  for (auto& r : records) {
    r.name.resize(rd.u32());
    rd.bytes(r.name.size(), reinterpret_cast<unsigned char*>(r.name.data()));
    const std::uint8_t tag = rd.u8();
    if (tag > 1) throw Error("weight container: record '" + r.name + "' has unknown dtype " + std::to_string(tag));
    r.dtype = static_cast<DType>(tag);
    r.dims.resize(rd.u32());
    for (auto& d : r.dims) d = rd.u32();
    r.bytes.resize(r.numel() * dtype_size(r.dtype));
    rd.bytes(r.bytes.size(), r.bytes.data());
  }
  if (!rd.done()) throw Error("weight container: trailing bytes after last record");
  return records;
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write to '" + path + "' failed");
}

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

/// Every parameter and buffer of `model`, in collection order.
template <typename T>
std::vector<TensorRecord> model_records(Module<T>& model) {
  std::vector<TensorRecord> out;
  for (auto& p : model.parameters()) out.push_back(TensorRecord::from(p.name, *p.value));
  return out;
}

/// Copies matching records into `model`. Every model tensor must be present
/// with identical dims; records whose names start with one of
/// `ignore_prefixes` are skipped, any other extra record is an error.
template <typename T>
void load_records(Module<T>& model, const std::vector<TensorRecord>& records,
                  const std::vector<std::string>& ignore_prefixes = {"arcface."}) {
  auto params = model.parameters();
  std::size_t matched = 0;
  for (const auto& r : records) {
    bool ignored = false;
    for (const auto& pre : ignore_prefixes) ignored = ignored || r.name.rfind(pre, 0) == 0;
    if (ignored) continue;
    auto it = std::find_if(params.begin(), params.end(), [&](const ParamRef<T>& p) { return p.name == r.name; });
    if (it == params.end()) throw Error("weight container: record '" + r.name + "' does not exist in the model");
    const Shape& s = it->value->shape();
    const std::vector<std::uint32_t> want = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                                             static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
    if (r.dims != want) {
      std::string got;
      for (auto d : r.dims) got += (got.empty() ? "" : "x") + std::to_string(d);
      throw Error("weight container: layer '" + r.name + "' has shape " + got + " but the model expects " +
                  std::to_string(s.n) + "x" + std::to_string(s.c) + "x" + std::to_string(s.h) + "x" +
                  std::to_string(s.w));
    }
    it->value->values() = r.values<T>();
    ++matched;
  }
  if (matched != params.size()) {
    for (const auto& p : params)
      if (std::none_of(records.begin(), records.end(), [&](const TensorRecord& r) { return r.name == p.name; }))
        throw Error("weight container: missing record for layer '" + p.name + "'");
  }
}

template <typename T>
void save_weights(Module<T>& model, const std::string& path, const std::vector<TensorRecord>& extra = {}) {
  auto records = model_records(model);
  records.insert(records.end(), extra.begin(), extra.end());
  write_file(path, encode_records(records));
}

template <typename T>
void load_weights(Module<T>& model, const std::string& path) {
  load_records(model, decode_records(read_file(path)));
}

}  // namespace seesaw
