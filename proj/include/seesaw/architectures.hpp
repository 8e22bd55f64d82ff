#pragma once

// Declarative architecture descriptions with one LayerSpec per operator row.
// Specs round-trip through a line-oriented text format and build into a ModelGraph.

#include <cstdint>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seesaw/blocks.hpp"

namespace seesaw {

enum class LayerKind { stem_conv, dw_conv, block, head_conv, gdconv, embedding_linear };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::stem_conv: return "stem_conv";
    case LayerKind::dw_conv: return "dw_conv";
    case LayerKind::block: return "block";
    case LayerKind::head_conv: return "head_conv";
    case LayerKind::gdconv: return "gdconv";
    case LayerKind::embedding_linear: return "embedding_linear";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  for (LayerKind k : {LayerKind::stem_conv, LayerKind::dw_conv, LayerKind::block, LayerKind::head_conv,
                      LayerKind::gdconv, LayerKind::embedding_linear})
    if (s == to_string(k)) return k;
  throw Error("unknown layer kind '" + s + "'");
}

/// One row of an architecture table. Non-block rows use `out_channels`,
/// `stride` and `activation`; block rows carry a BlockConfig and a repeat count.
struct LayerSpec {
  LayerKind kind = LayerKind::stem_conv;
  std::size_t out_channels = 0;
  std::size_t stride = 1;
  Activation activation = Activation::swish;
  std::optional<BlockConfig> block;
  std::size_t repeat = 1;
};

struct ArchSpec {
  std::string name;
  std::size_t in_channels = 3;
  std::size_t in_height = 112;
  std::size_t in_width = 112;
  std::vector<LayerSpec> layers;

  Shape input_shape(std::size_t batch = 1) const { return Shape{batch, in_channels, in_height, in_width}; }
};

// ---------------------------------------------------------------------------
// Predefined architectures

namespace detail {

inline LayerSpec plain(LayerKind kind, std::size_t out, std::size_t stride, Activation act) {
  LayerSpec l;
  l.kind = kind;
  l.out_channels = out;
  l.stride = stride;
  l.activation = act;
  return l;
}

struct BlockStyle {
  BlockVariant variant = BlockVariant::seesaw_shuffle;
  Activation activation = Activation::swish;
  bool use_se = true;
  double split_ratio = 0.25;
};

inline LayerSpec block_row(const BlockStyle& st, std::size_t in, std::size_t exp, std::size_t out, std::size_t stride,
                           std::size_t repeat) {
  BlockConfig b;
  b.in_channels = in;
  b.expansion_channels = exp;
  b.out_channels = out;
  b.stride = stride;
  b.variant = st.variant;
  b.activation = st.activation;
  b.use_se = st.use_se;
  b.split_ratio = st.split_ratio;
  b.residual = stride == 1 && in == out;
  LayerSpec l;
  l.kind = LayerKind::block;
  l.out_channels = out;
  l.stride = stride;
  l.activation = st.activation;
  l.block = b;
  l.repeat = repeat;
  return l;
}

/// Stage rows are {expansion, out, repeat, stride}.
struct StageRow {
  std::size_t expansion, out, repeat, stride;
};

inline ArchSpec assemble(std::string name, std::size_t stem, const std::vector<StageRow>& stages,
                         const BlockStyle& st, std::size_t head = 512, std::size_t embedding = 512,
                         std::size_t input = 112) {
  ArchSpec s;
  s.name = std::move(name);
  s.in_height = s.in_width = input;
  s.layers.push_back(plain(LayerKind::stem_conv, stem, 2, st.activation));
  s.layers.push_back(plain(LayerKind::dw_conv, stem, 1, st.activation));
  std::size_t c = stem;
  for (const auto& r : stages) {
    s.layers.push_back(block_row(st, c, r.expansion, r.out, r.stride, r.repeat));
    c = r.out;
  }
  s.layers.push_back(plain(LayerKind::head_conv, head, 1, st.activation));
  s.layers.push_back(plain(LayerKind::gdconv, head, 1, Activation::identity));
  s.layers.push_back(plain(LayerKind::embedding_linear, embedding, 1, Activation::identity));
  return s;
}

}  // namespace detail

/// SeesawFaceNet with either shuffle or share blocks.
inline ArchSpec spec_seesawfacenet(BlockVariant variant = BlockVariant::seesaw_shuffle) {
  if (variant == BlockVariant::inverted_residual) throw Error("spec_seesawfacenet: variant must be shuffle or share");
  detail::BlockStyle st;
  st.variant = variant;
  return detail::assemble(variant == BlockVariant::seesaw_share ? "seesawfacenet-share" : "seesawfacenet-shuffle", 64,
                          {{128, 64, 1, 2},
                           {128, 64, 4, 1},
                           {256, 128, 1, 2},
                           {256, 128, 6, 1},
                           {512, 128, 1, 2},
                           {256, 128, 2, 1}},
                          st);
}

/// SeesawFaceNet laid out with MobiFace's stage depths (2, 3, 6 residual blocks).
/// The 128-wide residual blocks of the last two stages expand to 512 channels.
inline ArchSpec spec_seesawfacenet_mobi() {
  detail::BlockStyle st;
  return detail::assemble("seesawfacenet-mobi", 64,
                          {{128, 64, 1, 2},
                           {128, 64, 2, 1},
                           {256, 128, 1, 2},
                           {512, 128, 3, 1},
                           {512, 128, 1, 2},
                           {512, 128, 6, 1}},
                          st);
}

/// Deeper and wider SeesawFaceNet; version 2 adds a max-pool + 1×1 conv
/// shortcut to every stride-2 block.
inline ArchSpec spec_dw_seesawfacenet(int version = 1) {
  if (version != 1 && version != 2) throw Error("spec_dw_seesawfacenet: version must be 1 or 2");
  detail::BlockStyle st;
  ArchSpec s = detail::assemble(version == 1 ? "dw-seesawfacenet-v1" : "dw-seesawfacenet-v2", 96,
                                {{128, 96, 1, 2},
                                 {192, 96, 8, 1},
                                 {384, 192, 1, 2},
                                 {384, 192, 12, 1},
                                 {768, 192, 1, 2},
                                 {384, 192, 4, 1}},
                                st);
  if (version == 2)
    for (auto& l : s.layers)
      if (l.block && l.block->stride == 2) l.block->skip_branch = true;
  return s;
}

/// MobileFaceNet with a 512-D embedding: plain inverted residual blocks, PReLU, no SE.
inline ArchSpec spec_mobilefacenet_baseline() {
  detail::BlockStyle st;
  st.variant = BlockVariant::inverted_residual;
  st.activation = Activation::prelu;
  st.use_se = false;
  return detail::assemble("mobilefacenet", 64,
                          {{128, 64, 1, 2},
                           {128, 64, 4, 1},
                           {256, 128, 1, 2},
                           {256, 128, 6, 1},
                           {512, 128, 1, 2},
                           {256, 128, 2, 1}},
                          st);
}

/// Width-reduced SeesawFaceNet layout on 28×28 inputs for desk-scale training runs.
inline ArchSpec spec_seesawfacenet_toy() {
  detail::BlockStyle st;
  return detail::assemble("seesawfacenet-toy", 16,
                          {{32, 16, 1, 2}, {32, 16, 4, 1}, {64, 32, 1, 2}, {64, 32, 6, 1}, {128, 32, 1, 2}, {64, 32, 2, 1}},
                          st, 128, 128, 28);
}

inline const std::vector<std::string>& known_model_names() {
  static const std::vector<std::string> names = {"seesawfacenet-shuffle", "seesawfacenet-share", "seesawfacenet-mobi",
                                                 "dw-seesawfacenet-v1",   "dw-seesawfacenet-v2", "mobilefacenet",
                                                 "seesawfacenet-toy"};
  return names;
}

inline ArchSpec spec_by_name(const std::string& name) {
  if (name == "seesawfacenet-shuffle") return spec_seesawfacenet(BlockVariant::seesaw_shuffle);
  if (name == "seesawfacenet-share") return spec_seesawfacenet(BlockVariant::seesaw_share);
  if (name == "seesawfacenet-mobi") return spec_seesawfacenet_mobi();
  if (name == "dw-seesawfacenet-v1") return spec_dw_seesawfacenet(1);
  if (name == "dw-seesawfacenet-v2") return spec_dw_seesawfacenet(2);
  if (name == "mobilefacenet") return spec_mobilefacenet_baseline();
  if (name == "seesawfacenet-toy") return spec_seesawfacenet_toy();
  std::string msg = "unknown model '" + name + "'; known models:";
  for (const auto& n : known_model_names()) msg += " " + n;
  throw Error(msg);
}

/// Block-level overrides applied uniformly to every block row.
struct BlockOverrides {
  std::optional<double> split_ratio;
  std::optional<bool> use_se;
  std::optional<BlockVariant> variant;
};

inline void apply_overrides(ArchSpec& spec, const BlockOverrides& o) {
  for (auto& l : spec.layers) {
    if (!l.block) continue;
    if (o.split_ratio) l.block->split_ratio = *o.split_ratio;
    if (o.use_se) l.block->use_se = *o.use_se;
    if (o.variant) l.block->variant = *o.variant;
  }
}

// ---------------------------------------------------------------------------
// Shape propagation

struct ShapeRow {
  Shape input;
  Shape output;
  std::string op;
};

namespace detail {

inline std::string fmt_hw(const Shape& s) {
  std::ostringstream os;
  os << s.h << "×" << s.w << "×" << s.c;
  return os.str();
}

inline std::string stride_tag(std::size_t stride) { return stride == 2 ? " /2" : ""; }

inline std::string describe(const LayerSpec& l, const Shape& in) {
  std::ostringstream os;
  switch (l.kind) {
    case LayerKind::stem_conv: os << "3×3 Conv" << stride_tag(l.stride) << " " << l.out_channels; break;
    case LayerKind::dw_conv: os << "3×3 DWconv" << stride_tag(l.stride) << " " << l.out_channels; break;
    case LayerKind::head_conv: os << "1×1 Conv " << l.out_channels; break;
    case LayerKind::gdconv: os << "linear GD" << in.h << "×" << in.w << " Conv " << l.out_channels; break;
    case LayerKind::embedding_linear: os << "linear 1×1 Conv " << l.out_channels; break;
    case LayerKind::block: {
      const BlockConfig& b = *l.block;
      os << (b.residual ? "RBlock " : "Block ") << l.repeat << "× {1×1 Conv " << b.expansion_channels
         << ", 3×3 DWconv" << stride_tag(b.stride) << " " << b.expansion_channels << ", 1×1 Conv Linear "
         << b.out_channels << "}";
      if (b.variant != BlockVariant::seesaw_shuffle) os << " [" << to_string(b.variant) << "]";
      if (b.use_se) os << " +SE";
      if (b.skip_branch) os << " +skip";
      break;
    }
  }
  return os.str();
}

inline std::string transition_error(std::size_t index, const LayerSpec& l, const std::string& what) {
  return "spec layer " + std::to_string(index) + " (" + to_string(l.kind) + "): " + what;
}

}  // namespace detail

/// Propagates the input shape through every row; throws at the first row whose
/// input does not match the previous row's output.
inline std::vector<ShapeRow> propagate_shapes(const ArchSpec& spec) {
  std::vector<ShapeRow> rows;
  Shape s = spec.input_shape();
  bool saw_embedding = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.repeat == 0) throw Error(detail::transition_error(i, l, "repeat must be >= 1"));
    if (saw_embedding) throw Error(detail::transition_error(i, l, "layers after embedding_linear"));
    Shape out = s;
    try {
      switch (l.kind) {
        case LayerKind::stem_conv:
        case LayerKind::head_conv: {
          const std::size_t k = l.kind == LayerKind::stem_conv ? 3 : 1;
          out = conv_output_shape(s, ConvParams::same(s.c, l.out_channels, k, l.stride));
          break;
        }
        case LayerKind::dw_conv:
          if (l.out_channels != s.c)
            throw Error("depthwise conv keeps channels: " + std::to_string(s.c) + " -> " +
                        std::to_string(l.out_channels));
          out = depthwise_output_shape(s, 3, 3, l.stride, 1);
          break;
        case LayerKind::gdconv:
          if (l.out_channels != s.c)
            throw Error("GDConv keeps channels: " + std::to_string(s.c) + " -> " + std::to_string(l.out_channels));
          out = Shape{s.n, s.c, 1, 1};
          break;
        case LayerKind::embedding_linear:
          out = Shape{s.n, l.out_channels, 1, 1};
          saw_embedding = true;
          break;
        case LayerKind::block: {
          if (!l.block) throw Error("block row without BlockConfig");
          const BlockConfig& b = *l.block;
          if (b.in_channels != s.c)
            throw Error("block expects " + std::to_string(b.in_channels) + " input channels but previous layer produces " +
                        std::to_string(s.c));
          b.validate();
          if (l.repeat > 1 && !b.residual)
            throw Error("repeated blocks must be residual (stride 1, in == out)");
          const std::size_t h = conv_out_extent(s.h, 3, b.stride, 1, "block");
          const std::size_t w = conv_out_extent(s.w, 3, b.stride, 1, "block");
          if (b.skip_branch && (s.h / 2 != h || s.w / 2 != w))
            throw Error("skip branch pooling yields " + std::to_string(s.h / 2) + " rows but main path " +
                        std::to_string(h));
          out = Shape{s.n, b.out_channels, h, w};
          break;
        }
      }
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with("spec layer")) throw;
      throw Error(detail::transition_error(i, l, e.what()));
    }
    rows.push_back({s, out, detail::describe(l, s)});
    s = out;
  }
  if (rows.empty()) throw Error("spec '" + spec.name + "' has no layers");
  return rows;
}

inline std::size_t embedding_dim(const ArchSpec& spec) { return propagate_shapes(spec).back().output.c; }

// ---------------------------------------------------------------------------
// Text format
//
//   model <name>
//   input <C> <H> <W>
//   <kind> <channels> <expansion|-> <stride> <variant|-> <repeat> [key=value ...]
//
// Block rows accept in=, se=, act=, residual=, skip=, split=, se_reduction=;
// other rows accept act=. '#' starts a comment.

inline std::string format_ratio(double r) {
  std::ostringstream os;
  os << std::setprecision(17) << r;
  return os.str();
}

inline std::string serialize_spec(const ArchSpec& spec) {
  std::ostringstream os;
  os << "model " << spec.name << "\n";
  os << "input " << spec.in_channels << " " << spec.in_height << " " << spec.in_width << "\n";
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::block) {
      const BlockConfig& b = *l.block;
      os << "block " << b.out_channels << " " << b.expansion_channels << " " << b.stride << " "
         << to_string(b.variant) << " " << l.repeat << " in=" << b.in_channels << " se=" << (b.use_se ? 1 : 0)
         << " act=" << to_string(b.activation) << " residual=" << (b.residual ? 1 : 0)
         << " skip=" << (b.skip_branch ? 1 : 0) << " split=" << format_ratio(b.split_ratio)
         << " se_reduction=" << b.se_reduction << "\n";
    } else {
      os << to_string(l.kind) << " " << l.out_channels << " - " << l.stride << " - " << l.repeat
         << " act=" << to_string(l.activation) << "\n";
    }
  }
  return os.str();
}

inline ArchSpec parse_spec(const std::string& text) {
  ArchSpec spec;
  spec.name = "custom";
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t channels = spec.in_channels;
  auto fail = [&](const std::string& msg) { throw Error("spec line " + std::to_string(lineno) + ": " + msg); };
  auto to_size = [&](const std::string& s) -> std::size_t {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) fail("expected an integer, got '" + s + "'");
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      fail("expected an integer, got '" + s + "'");
    }
    return 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "model") {
      if (tok.size() != 2) fail("expected 'model <name>'");
      spec.name = tok[1];
      continue;
    }
    if (tok[0] == "input") {
      if (tok.size() != 4) fail("expected 'input <C> <H> <W>'");
      spec.in_channels = to_size(tok[1]);
      spec.in_height = to_size(tok[2]);
      spec.in_width = to_size(tok[3]);
      if (spec.layers.empty()) channels = spec.in_channels;
      continue;
    }
    if (tok.size() < 6) fail("expected '<kind> <channels> <expansion> <stride> <variant> <repeat> [key=value...]'");
    LayerSpec l;
    try {
      l.kind = layer_kind_from_string(tok[0]);
    } catch (const Error& e) {
      fail(e.what());
    }
    l.out_channels = to_size(tok[1]);
    l.stride = to_size(tok[3]);
    l.repeat = to_size(tok[5]);
    std::vector<std::pair<std::string, std::string>> kv;
    for (std::size_t i = 6; i < tok.size(); ++i) {
      const auto eq = tok[i].find('=');
      if (eq == std::string::npos) fail("expected key=value, got '" + tok[i] + "'");
      kv.emplace_back(tok[i].substr(0, eq), tok[i].substr(eq + 1));
    }
    try {
      if (l.kind == LayerKind::block) {
        BlockConfig b;
        b.in_channels = channels;
        b.out_channels = l.out_channels;
        b.expansion_channels = to_size(tok[2]);
        b.stride = l.stride;
        b.variant = block_variant_from_string(tok[4]);
        b.residual = b.stride == 1 && b.in_channels == b.out_channels;
        bool residual_set = false;
        for (const auto& [k, v] : kv) {
          if (k == "in") b.in_channels = to_size(v);
          else if (k == "se") b.use_se = to_size(v) != 0;
          else if (k == "act") b.activation = activation_from_string(v);
          else if (k == "residual") b.residual = to_size(v) != 0, residual_set = true;
          else if (k == "skip") b.skip_branch = to_size(v) != 0;
          else if (k == "split") b.split_ratio = std::stod(v);
          else if (k == "se_reduction") b.se_reduction = to_size(v);
          else fail("unknown block key '" + k + "'");
        }
        if (!residual_set) b.residual = b.stride == 1 && b.in_channels == b.out_channels;
        l.activation = b.activation;
        l.block = b;
      } else {
        l.activation = (l.kind == LayerKind::gdconv || l.kind == LayerKind::embedding_linear) ? Activation::identity
                                                                                               : Activation::swish;
        for (const auto& [k, v] : kv) {
          if (k == "act") l.activation = activation_from_string(v);
          else fail("unknown key '" + k + "'");
        }
      }
    } catch (const std::invalid_argument&) {
      fail("malformed value");
    }
    channels = l.out_channels;
    spec.layers.push_back(std::move(l));
  }
  if (spec.layers.empty()) throw Error("spec has no layers");
  return spec;
}

// ---------------------------------------------------------------------------
// Executable graph

/// Ordered, named modules compiled from an ArchSpec. The graph is itself a
/// Module so it can be trained and gradient-checked like any layer.
template <typename T>
class ModelGraph : public Module<T> {
 public:
  struct Node {
    std::string name;
    std::unique_ptr<Module<T>> module;
  };

  ModelGraph(ArchSpec spec, std::vector<Node> nodes) : spec_(std::move(spec)), nodes_(std::move(nodes)) {
    embedding_dim_ = seesaw::embedding_dim(spec_);
  }

  Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
    const Shape expect = spec_.input_shape(input.n());
    if (input.c() != expect.c) throw ShapeError("ModelGraph", "input channels", expect.c, input.c());
    if (input.h() != expect.h) throw ShapeError("ModelGraph", "input height", expect.h, input.h());
    if (input.w() != expect.w) throw ShapeError("ModelGraph", "input width", expect.w, input.w());
    Tensor<T> x = input;
    for (auto& n : nodes_) x = n.module->forward(x, mode);
    return x;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> g = grad_out;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) g = it->module->backward(g);
    return g;
  }

  Shape output_shape(const Shape& in) const override {
    Shape s = in;
    for (const auto& n : nodes_) s = n.module->output_shape(s);
    return s;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
    for (auto& n : nodes_) n.module->collect(detail::join(prefix, n.name), out);
  }

  const ArchSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  std::size_t embedding_dim() const { return embedding_dim_; }
  std::vector<Node>& nodes() { return nodes_; }

  Module<T>* find(const std::string& name) {
    for (auto& n : nodes_)
      if (n.name == name) return n.module.get();
    return nullptr;
  }

 private:
  ArchSpec spec_;
  std::vector<Node> nodes_;
  std::size_t embedding_dim_ = 0;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic fan-in He-normal initialization. Each weight tensor draws from
/// its own stream keyed by (seed, parameter name), so models sharing parameter
/// names (e.g. DW V1 and V2) receive identical values for them.
template <typename T>
void initialize_weights(Module<T>& model, std::uint64_t seed) {
  for (auto& p : model.parameters()) {
    if (!p.trainable()) continue;
    const std::string& n = p.name;
    if (n.size() < 6 || n.compare(n.size() - 6, 6, "weight") != 0) continue;
    std::mt19937_64 rng(seed ^ detail::fnv1a(n));
    const Shape& s = p.value->shape();
    const double fan_in = static_cast<double>(s.c * s.h * s.w);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (auto& v : p.value->values()) v = static_cast<T>(dist(rng));
  }
}

template <typename T>
ModelGraph<T> build_model(const ArchSpec& spec, std::uint64_t seed) {
  const auto rows = propagate_shapes(spec);
  using Node = typename ModelGraph<T>::Node;
  std::vector<Node> nodes;
  auto add = [&](std::string name, std::unique_ptr<Module<T>> m) { nodes.push_back({std::move(name), std::move(m)}); };
  std::size_t block_index = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const Shape& in = rows[i].input;
    switch (l.kind) {
      case LayerKind::stem_conv:
      case LayerKind::head_conv: {
        const std::string p = l.kind == LayerKind::stem_conv ? "stem" : "head";
        const std::size_t k = l.kind == LayerKind::stem_conv ? 3 : 1;
        add(p + ".conv", std::make_unique<Conv2d<T>>(ConvParams::same(in.c, l.out_channels, k, l.stride)));
        add(p + ".bn", std::make_unique<BatchNorm2d<T>>(l.out_channels));
        if (l.activation != Activation::identity)
          add(p + ".act", std::make_unique<ActivationLayer<T>>(l.activation, l.out_channels));
        break;
      }
      case LayerKind::dw_conv:
        add("dw.conv", std::make_unique<DepthwiseConv2d<T>>(in.c, 3, l.stride, 1));
        add("dw.bn", std::make_unique<BatchNorm2d<T>>(in.c));
        if (l.activation != Activation::identity)
          add("dw.act", std::make_unique<ActivationLayer<T>>(l.activation, in.c));
        break;
      case LayerKind::block:
        for (std::size_t r = 0; r < l.repeat; ++r)
          add("blocks." + std::to_string(block_index++), std::make_unique<SeesawBlock<T>>(*l.block));
        break;
      case LayerKind::gdconv:
        if (in.h != in.w) throw Error("build_model: GDConv needs a square feature map, got " + in.str());
        add("gdconv.conv", std::make_unique<GlobalDepthwiseConv<T>>(in.c, in.h));
        add("gdconv.bn", std::make_unique<BatchNorm2d<T>>(in.c));
        break;
      case LayerKind::embedding_linear:
        add("embedding.linear", std::make_unique<Linear<T>>(in.c * in.h * in.w, l.out_channels, false));
        add("embedding.bn", std::make_unique<BatchNorm2d<T>>(l.out_channels));
        break;
    }
  }
  ModelGraph<T> model(spec, std::move(nodes));
  initialize_weights(model, seed);
  return model;
}

/// Raw (N, D, 1, 1) embeddings for a batch of (N, C, H, W) images.
template <typename T>
Tensor<T> forward_embed(ModelGraph<T>& model, const Tensor<T>& batch, Mode mode = Mode::infer) {
  return model.forward(batch, mode);
}

}  // namespace seesaw
