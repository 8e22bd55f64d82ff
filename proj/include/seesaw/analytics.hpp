#pragma once

// Analytic parameter / multiply-accumulate cost model. Only convolutional and
// fully connected layers contribute MAdds (one MAdd = one multiply-accumulate);
// batch norm, activations, sigmoid gates, shuffles, pooling and residual adds
// are free. Batch norm contributes gamma and beta (running statistics are not
// parameters); PReLU contributes one slope per channel.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "seesaw/architectures.hpp"

namespace seesaw {

enum class OpKind { conv, depthwise, batchnorm, activation, squeeze_excite, shuffle, max_pool, linear, residual_add };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::conv: return "conv";
    case OpKind::depthwise: return "depthwise";
    case OpKind::batchnorm: return "batchnorm";
    case OpKind::activation: return "activation";
    case OpKind::squeeze_excite: return "squeeze_excite";
    case OpKind::shuffle: return "shuffle";
    case OpKind::max_pool: return "max_pool";
    case OpKind::linear: return "linear";
    case OpKind::residual_add: return "residual_add";
  }
  return "?";
}

/// Weight-free description of one primitive op.
struct OpRecord {
  std::string name;
  OpKind kind = OpKind::conv;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  /// conv: channel-range groups (a dense conv is one group).
  std::vector<GroupSpan> groups;
  /// activation kind, and the SE reduced width.
  Activation activation = Activation::identity;
  std::size_t reduced = 0;
};

struct LayerCost {
  std::uint64_t params = 0;
  std::uint64_t madds = 0;
  Shape output;
};

inline LayerCost count_layer(const OpRecord& op, const Shape& in) {
  LayerCost r;
  switch (op.kind) {
    case OpKind::conv: {
      const std::size_t ho = conv_out_extent(in.h, op.kernel, op.stride, op.padding, "count_layer");
      const std::size_t wo = conv_out_extent(in.w, op.kernel, op.stride, op.padding, "count_layer");
      std::size_t c_out = 0;
      for (const auto& g : op.groups) {
        if (g.input.end > in.c) throw ShapeError("count_layer " + op.name, "input channels", g.input.end, in.c);
        r.params += static_cast<std::uint64_t>(g.input.width()) * g.output.width() * op.kernel * op.kernel;
        c_out = std::max(c_out, g.output.end);
      }
      r.madds = r.params * ho * wo;
      r.output = Shape{in.n, c_out, ho, wo};
      break;
    }
    case OpKind::depthwise: {
      const std::size_t ho = conv_out_extent(in.h, op.kernel, op.stride, op.padding, "count_layer");
      const std::size_t wo = conv_out_extent(in.w, op.kernel, op.stride, op.padding, "count_layer");
      r.params = static_cast<std::uint64_t>(in.c) * op.kernel * op.kernel;
      r.madds = r.params * ho * wo;
      r.output = Shape{in.n, in.c, ho, wo};
      break;
    }
    case OpKind::batchnorm:
      r.params = 2 * static_cast<std::uint64_t>(in.c);
      r.output = in;
      break;
    case OpKind::activation:
      r.params = op.activation == Activation::prelu ? in.c : 0;
      r.output = in;
      break;
    case OpKind::squeeze_excite: {
      const std::uint64_t c = in.c, k = op.reduced;
      r.params = 2 * c * k + k + c;
      r.madds = 2 * c * k;
      r.output = in;
      break;
    }
    case OpKind::shuffle:
    case OpKind::residual_add: r.output = in; break;
    case OpKind::max_pool: r.output = Shape{in.n, in.c, in.h / 2, in.w / 2}; break;
    case OpKind::linear: {
      const std::uint64_t fin = static_cast<std::uint64_t>(in.c) * in.h * in.w;
      r.params = fin * op.out_channels;
      r.madds = r.params;
      r.output = Shape{in.n, op.out_channels, 1, 1};
      break;
    }
    default: throw Error("count_layer: unknown op kind for '" + op.name + "'");
  }
  return r;
}

/// An op plus the shape it consumes.
struct PlacedOp {
  OpRecord op;
  Shape input;
};

namespace detail {

inline OpRecord dense_conv(std::string name, std::size_t in, std::size_t out, std::size_t k, std::size_t stride) {
  OpRecord r;
  r.name = std::move(name);
  r.kind = OpKind::conv;
  r.out_channels = out;
  r.kernel = k;
  r.stride = stride;
  r.padding = k / 2;
  r.groups = {GroupSpan{{0, in}, {0, out}}};
  return r;
}

inline OpRecord simple(std::string name, OpKind kind, Activation act = Activation::identity) {
  OpRecord r;
  r.name = std::move(name);
  r.kind = kind;
  r.activation = act;
  return r;
}

}  // namespace detail

/// Flattens a spec into primitive ops, each with its input shape, using the
/// same naming and decomposition as build_model.
inline std::vector<PlacedOp> expand_ops(const ArchSpec& spec) {
  const auto rows = propagate_shapes(spec);
  std::vector<PlacedOp> ops;
  Shape s = spec.input_shape();
  auto push = [&](OpRecord op) {
    const Shape in = s;
    s = count_layer(op, in).output;
    ops.push_back({std::move(op), in});
  };
  std::size_t block_index = 0;
  for (const auto& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::stem_conv:
      case LayerKind::head_conv: {
        const std::string p = l.kind == LayerKind::stem_conv ? "stem" : "head";
        push(detail::dense_conv(p + ".conv", s.c, l.out_channels, l.kind == LayerKind::stem_conv ? 3 : 1, l.stride));
        push(detail::simple(p + ".bn", OpKind::batchnorm));
        if (l.activation != Activation::identity) push(detail::simple(p + ".act", OpKind::activation, l.activation));
        break;
      }
      case LayerKind::dw_conv: {
        OpRecord dw = detail::simple("dw.conv", OpKind::depthwise);
        dw.kernel = 3, dw.stride = l.stride, dw.padding = 1;
        push(dw);
        push(detail::simple("dw.bn", OpKind::batchnorm));
        if (l.activation != Activation::identity) push(detail::simple("dw.act", OpKind::activation, l.activation));
        break;
      }
      case LayerKind::block:
        for (std::size_t r = 0; r < l.repeat; ++r) {
          const BlockConfig& b = *l.block;
          const std::string p = "blocks." + std::to_string(block_index++) + ".";
          const Shape block_in = s;
          OpRecord expand = detail::simple(p + "expand", OpKind::conv);
          expand.groups = b.expand_cover();
          push(expand);
          push(detail::simple(p + "expand_bn", OpKind::batchnorm));
          push(detail::simple(p + "expand_act", OpKind::activation, b.activation));
          if (b.variant == BlockVariant::seesaw_shuffle) push(detail::simple(p + "shuffle", OpKind::shuffle));
          OpRecord dw = detail::simple(p + "dw", OpKind::depthwise);
          dw.kernel = 3, dw.stride = b.stride, dw.padding = 1;
          push(dw);
          push(detail::simple(p + "dw_bn", OpKind::batchnorm));
          push(detail::simple(p + "dw_act", OpKind::activation, b.activation));
          if (b.use_se) {
            OpRecord se = detail::simple(p + "se", OpKind::squeeze_excite);
            se.reduced = se_reduced_width(b.expansion_channels, b.se_reduction);
            push(se);
          }
          OpRecord project = detail::simple(p + "project", OpKind::conv);
          project.groups = b.project_cover();
          push(project);
          push(detail::simple(p + "project_bn", OpKind::batchnorm));
          if (b.residual) push(detail::simple(p + "residual", OpKind::residual_add));
          if (b.skip_branch) {
            const Shape main_out = s;
            s = block_in;
            push(detail::simple(p + "skip_pool", OpKind::max_pool));
            push(detail::dense_conv(p + "skip", b.in_channels, b.out_channels, 1, 1));
            if (!(s == main_out)) throw Error("expand_ops: skip branch shape " + s.str() + " vs " + main_out.str());
          }
        }
        break;
      case LayerKind::gdconv: {
        OpRecord gd = detail::simple("gdconv.conv", OpKind::depthwise);
        gd.kernel = s.h;
        push(gd);
        push(detail::simple("gdconv.bn", OpKind::batchnorm));
        break;
      }
      case LayerKind::embedding_linear: {
        OpRecord lin = detail::simple("embedding.linear", OpKind::linear);
        lin.out_channels = l.out_channels;
        push(lin);
        push(detail::simple("embedding.bn", OpKind::batchnorm));
        break;
      }
    }
  }
  if (!(s == rows.back().output)) throw Error("expand_ops: final shape " + s.str() + " disagrees with propagation");
  return ops;
}

struct CostEntry {
  std::string name;
  std::string kind;
  std::uint64_t params = 0;
  std::uint64_t madds = 0;
};

struct CostReport {
  std::string model;
  std::vector<CostEntry> entries;
  std::uint64_t total_params = 0;
  std::uint64_t total_madds = 0;
  std::string counting_rule =
      "MAdds: conv + fully connected only (1 MAdd = 1 multiply-accumulate); "
      "params include BN gamma/beta and PReLU slopes, exclude BN running stats";
};

inline CostReport count_model(const ArchSpec& spec) {
  CostReport rep;
  rep.model = spec.name;
  for (const auto& p : expand_ops(spec)) {
    const LayerCost c = count_layer(p.op, p.input);
    rep.entries.push_back({p.op.name, to_string(p.op.kind), c.params, c.madds});
    rep.total_params += c.params;
    rep.total_madds += c.madds;
  }
  return rep;
}

/// Sums entries per module: "stem", "dw", "blocks.<i>", "head", "gdconv", "embedding".
inline CostReport aggregate_modules(const CostReport& rep) {
  CostReport out;
  out.model = rep.model;
  out.counting_rule = rep.counting_rule;
  for (const auto& e : rep.entries) {
    std::size_t dot = e.name.find('.');
    if (dot != std::string::npos && e.name.compare(0, dot, "blocks") == 0) dot = e.name.find('.', dot + 1);
    const std::string key = dot == std::string::npos ? e.name : e.name.substr(0, dot);
    if (out.entries.empty() || out.entries.back().name != key) out.entries.push_back({key, "module", 0, 0});
    out.entries.back().params += e.params;
    out.entries.back().madds += e.madds;
  }
  out.total_params = rep.total_params;
  out.total_madds = rep.total_madds;
  return out;
}

/// One decimal in M (10^6) below 10^9, otherwise G.
inline std::string format_count(std::uint64_t v) {
  char buf[32];
  if (v >= 1000000000ULL)
    std::snprintf(buf, sizeof buf, "%.1fG", static_cast<double>(v) / 1e9);
  else
    std::snprintf(buf, sizeof buf, "%.1fM", static_cast<double>(v) / 1e6);
  return buf;
}

struct CostDelta {
  std::string name;
  std::int64_t params_delta = 0;
  std::int64_t madds_delta = 0;
};

struct CostComparison {
  std::string model_a;
  std::string model_b;
  std::vector<CostDelta> layers;
  std::int64_t params_delta = 0;
  std::int64_t madds_delta = 0;
  double params_ratio = 1.0;  // a / b
  double madds_ratio = 1.0;   // a / b
};

inline double safe_ratio(std::uint64_t a, std::uint64_t b) {
  if (b == 0) return a == 0 ? 1.0 : INFINITY;
  return static_cast<double>(a) / static_cast<double>(b);
}

/// Per-layer (matched by name, missing entries count as zero) and total
/// differences a − b, plus a/b ratios.
inline CostComparison compare_reports(const CostReport& a, const CostReport& b) {
  CostComparison cmp;
  cmp.model_a = a.model;
  cmp.model_b = b.model;
  std::map<std::string, const CostEntry*> in_b;
  for (const auto& e : b.entries) in_b[e.name] = &e;
  for (const auto& e : a.entries) {
    CostDelta d{e.name, static_cast<std::int64_t>(e.params), static_cast<std::int64_t>(e.madds)};
    if (auto it = in_b.find(e.name); it != in_b.end()) {
      d.params_delta -= static_cast<std::int64_t>(it->second->params);
      d.madds_delta -= static_cast<std::int64_t>(it->second->madds);
      in_b.erase(it);
    }
    cmp.layers.push_back(d);
  }
  for (const auto& e : b.entries)
    if (in_b.count(e.name))
      cmp.layers.push_back({e.name, -static_cast<std::int64_t>(e.params), -static_cast<std::int64_t>(e.madds)});
  cmp.params_delta = static_cast<std::int64_t>(a.total_params) - static_cast<std::int64_t>(b.total_params);
  cmp.madds_delta = static_cast<std::int64_t>(a.total_madds) - static_cast<std::int64_t>(b.total_madds);
  cmp.params_ratio = safe_ratio(a.total_params, b.total_params);
  cmp.madds_ratio = safe_ratio(a.total_madds, b.total_madds);
  return cmp;
}

/// Ratio of two published totals, e.g. 146M vs 221M.
inline double cost_ratio(double a, double b) { return a / b; }

/// Trainable element count of a built model (excludes BN running statistics).
template <typename T>
std::uint64_t count_trainable(Module<T>& model) {
  std::uint64_t n = 0;
  for (auto& p : model.parameters())
    if (p.trainable()) n += p.value->size();
  return n;
}

}  // namespace seesaw
