#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seesaw/seesaw.hpp"

namespace fs = std::filesystem;
using namespace seesaw;

namespace {

enum class Format { text, structured };

struct Options {
  std::string model;
  std::string spec_path;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string dataset;
  std::string pairs;
  std::string checkpoint;
  std::string out;
  std::size_t epochs = 16;
  std::size_t batch_size = 32;
  double lr = 0.1;
  std::size_t folds = 10;
  std::size_t pair_count = 200;
  std::optional<double> split_ratio;
  std::optional<bool> se;
  std::string variant;
  std::vector<std::string> names;
};

Format format_of(const Options& o) { return o.format == "structured" ? Format::structured : Format::text; }

ArchSpec resolve_spec(const Options& o, const std::string& fallback = "") {
  ArchSpec spec;
  if (!o.spec_path.empty()) {
    std::ifstream f(o.spec_path);
    if (!f) throw Error("cannot open spec file '" + o.spec_path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    spec = parse_spec(ss.str());
  } else {
    std::string name = !o.names.empty() ? o.names.front() : o.model;
    if (name.empty()) name = fallback;
    if (name.empty()) throw Error("no model given; pass a model name, --model or --spec");
    spec = spec_by_name(name);
  }
  BlockOverrides ov;
  ov.split_ratio = o.split_ratio;
  ov.use_se = o.se;
  if (!o.variant.empty()) ov.variant = block_variant_from_string(o.variant);
  apply_overrides(spec, ov);
  propagate_shapes(spec);
  return spec;
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s)
    if ((ch & 0xC0) != 0x80) ++n;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return s + std::string(width > w ? width - w : 0, ' ');
}

std::string plain_shape(const Shape& s) {
  return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (widths.size() <= i) widths.push_back(0);
      widths[i] = std::max(widths[i], display_width(r[i]));
    }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += " | ";
      line += i + 1 == r.size() ? r[i] : pad(r[i], widths[i]);
    }
    std::cout << line << "\n";
  }
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_summarize(const Options& o) {
  const ArchSpec spec = resolve_spec(o);
  const auto rows = propagate_shapes(spec);
  if (format_of(o) == Format::structured) {
    std::cout << "model=" << spec.name << "\nrows=" << rows.size() << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::cout << "row." << i << ".input=" << plain_shape(rows[i].input) << "\n";
      std::cout << "row." << i << ".operator=" << rows[i].op << "\n";
      std::cout << "row." << i << ".output=" << plain_shape(rows[i].output) << "\n";
    }
    std::cout << "embedding_dim=" << rows.back().output.c << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> table{{"Input", "Operator", "Output"}};
  for (const auto& r : rows) table.push_back({detail::fmt_hw(r.input), r.op, detail::fmt_hw(r.output)});
  std::cout << spec.name << "\n";
  print_table(table);
  return 0;
}

std::uint64_t prelu_params(const CostReport& rep) {
  std::uint64_t n = 0;
  for (const auto& e : rep.entries)
    if (e.kind == std::string(to_string(OpKind::activation))) n += e.params;
  return n;
}

int cmd_cost(const Options& o) {
  const ArchSpec spec = resolve_spec(o);
  const CostReport rep = count_model(spec);
  const std::uint64_t prelu = prelu_params(rep);
  if (format_of(o) == Format::structured) {
    std::cout << "model=" << rep.model << "\n";
    for (const auto& e : rep.entries) {
      std::cout << "layer." << e.name << ".kind=" << e.kind << "\n";
      std::cout << "layer." << e.name << ".params=" << e.params << "\n";
      std::cout << "layer." << e.name << ".madds=" << e.madds << "\n";
    }
    for (const auto& m : aggregate_modules(rep).entries) {
      std::cout << "module." << m.name << ".params=" << m.params << "\n";
      std::cout << "module." << m.name << ".madds=" << m.madds << "\n";
    }
    std::cout << "total_params=" << rep.total_params << "\n";
    std::cout << "total_params_excluding_prelu=" << rep.total_params - prelu << "\n";
    std::cout << "total_madds=" << rep.total_madds << "\n";
    std::cout << "counting_rule=" << rep.counting_rule << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> table{{"Layer", "Kind", "Params", "MAdds"}};
  for (const auto& e : rep.entries) table.push_back({e.name, e.kind, std::to_string(e.params), std::to_string(e.madds)});
  std::cout << rep.model << "\n";
  print_table(table);
  std::cout << "total params " << rep.total_params << " (" << format_count(rep.total_params) << "), "
            << rep.total_params - prelu << " excluding PReLU slopes\n";
  std::cout << "total MAdds " << rep.total_madds << " (" << format_count(rep.total_madds) << ")\n";
  std::cout << rep.counting_rule << "\n";
  return 0;
}

int cmd_compare(const Options& o) {
  if (o.names.size() != 2) throw Error("compare takes exactly two model names");
  Options oa = o, ob = o;
  oa.names = {o.names[0]};
  ob.names = {o.names[1]};
  oa.spec_path.clear();
  ob.spec_path.clear();
  const CostReport a = aggregate_modules(count_model(resolve_spec(oa)));
  const CostReport b = aggregate_modules(count_model(resolve_spec(ob)));
  const CostComparison c = compare_reports(a, b);
  if (format_of(o) == Format::structured) {
    std::cout << "model_a=" << c.model_a << "\nmodel_b=" << c.model_b << "\n";
    std::cout << "params_a=" << a.total_params << "\nparams_b=" << b.total_params << "\n";
    std::cout << "madds_a=" << a.total_madds << "\nmadds_b=" << b.total_madds << "\n";
    for (const auto& d : c.layers) {
      std::cout << "module." << d.name << ".params_delta=" << d.params_delta << "\n";
      std::cout << "module." << d.name << ".madds_delta=" << d.madds_delta << "\n";
    }
    std::cout << "params_delta=" << c.params_delta << "\nmadds_delta=" << c.madds_delta << "\n";
    std::cout << "params_ratio=" << num(c.params_ratio) << "\nmadds_ratio=" << num(c.madds_ratio) << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> table{{"Module", "ΔParams", "ΔMAdds"}};
  for (const auto& d : c.layers) table.push_back({d.name, std::to_string(d.params_delta), std::to_string(d.madds_delta)});
  std::cout << c.model_a << " vs " << c.model_b << "\n";
  print_table(table);
  std::cout << "params " << format_count(a.total_params) << " vs " << format_count(b.total_params) << ", ratio "
            << num(c.params_ratio) << "\n";
  std::cout << "MAdds " << format_count(a.total_madds) << " vs " << format_count(b.total_madds) << ", ratio "
            << num(c.madds_ratio) << "\n";
  return 0;
}

int cmd_spec(const Options& o) {
  const std::string text = serialize_spec(resolve_spec(o));
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) throw Error("cannot write '" + o.out + "'");
    f << text;
  }
  return 0;
}

int cmd_train_toy(const Options& o) {
  if (o.dataset.empty()) throw Error("train-toy needs --dataset <manifest>");
  if (!fs::exists(o.dataset)) throw Error("dataset manifest '" + o.dataset + "' does not exist");
  const ArchSpec spec = resolve_spec(o, "seesawfacenet-toy");
  const auto data = load_dataset<float>(o.dataset, spec.in_height, spec.in_width);

  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.initial_lr = o.lr;
  cfg.seed = o.seed;
  cfg.checkpoint_dir = o.checkpoint.empty() ? "checkpoints" : o.checkpoint;
  std::erase_if(cfg.lr_decay_epochs, [&](std::size_t e) { return e >= cfg.epochs; });

  auto model = build_model<float>(spec, o.seed);
  ArcFaceHead<float> head(data.num_classes, model.embedding_dim(), o.seed + 1);
  fs::create_directories(cfg.checkpoint_dir);
  std::ofstream log((fs::path(cfg.checkpoint_dir) / "train.log").string(), std::ios::trunc);
  const bool structured = format_of(o) == Format::structured;
  if (structured) std::cout << "model=" << spec.name << "\nsamples=" << data.samples.size() << "\n";
  fit(model, data, head, cfg, [&](const EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %zu lr %g loss %.6f accuracy %.6f", e.epoch, e.lr, e.loss, e.accuracy);
    log << buf << "\n";
    if (structured) {
      std::cout << "epoch." << e.epoch << ".lr=" << e.lr << "\n";
      std::cout << "epoch." << e.epoch << ".loss=" << num(e.loss) << "\n";
      std::cout << "epoch." << e.epoch << ".accuracy=" << num(e.accuracy) << "\n";
    } else {
      std::cout << buf << std::endl;
    }
  });
  const std::string last = checkpoint_stem(cfg.checkpoint_dir, cfg.epochs - 1) + ".ssfn";
  std::cout << (structured ? "checkpoint=" : "final checkpoint ") << last << "\n";
  return 0;
}

int cmd_eval_pairs(const Options& o) {
  if (o.pairs.empty()) throw Error("eval-pairs needs --pairs <manifest>");
  if (o.checkpoint.empty()) throw Error("eval-pairs needs --checkpoint <file>");
  const ArchSpec spec = resolve_spec(o, "seesawfacenet-toy");
  auto model = build_model<float>(spec, o.seed);
  load_weights(model, o.checkpoint);
  const auto pairs = load_pairs(o.pairs);
  const PairEvaluation ev = evaluate_model(model, pairs, o.folds);
  const auto& r = ev.report;
  if (format_of(o) == Format::structured) {
    std::cout << "pairs=" << pairs.size() << "\nfolds=" << r.fold_accuracy.size() << "\n";
    for (std::size_t i = 0; i < r.fold_accuracy.size(); ++i) {
      std::cout << "fold." << i << ".accuracy=" << num(r.fold_accuracy[i]) << "\n";
      std::cout << "fold." << i << ".threshold=" << num(r.thresholds[i]) << "\n";
    }
    std::cout << "mean_accuracy=" << num(r.mean_accuracy) << "\nstd_accuracy=" << num(r.std_accuracy) << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> table{{"Fold", "Threshold", "Accuracy"}};
  for (std::size_t i = 0; i < r.fold_accuracy.size(); ++i)
    table.push_back({std::to_string(i), num(r.thresholds[i]), num(r.fold_accuracy[i])});
  print_table(table);
  char buf[96];
  std::snprintf(buf, sizeof buf, "accuracy %.3f ± %.3f over %zu pairs", r.mean_accuracy, r.std_accuracy, pairs.size());
  std::cout << buf << "\n";
  return 0;
}

void report_container(const Options& o, const std::string& path, const std::string& model, std::uint64_t params) {
  const auto bytes = read_file(path);
  const auto records = decode_records(bytes);
  if (format_of(o) == Format::structured) {
    std::cout << "model=" << model << "\npath=" << path << "\nrecords=" << records.size() << "\nparams=" << params
              << "\nbytes=" << bytes.size() << "\n";
  } else {
    std::cout << model << ": " << records.size() << " records, " << params << " parameters, " << bytes.size()
              << " bytes -> " << path << "\n";
  }
}

int cmd_export(const Options& o) {
  if (o.out.empty()) throw Error("export needs --out <file>");
  const ArchSpec spec = resolve_spec(o);
  auto model = build_model<float>(spec, o.seed);
  save_weights(model, o.out);
  report_container(o, o.out, spec.name, count_trainable(model));
  return 0;
}

int cmd_import(const Options& o) {
  if (o.checkpoint.empty()) throw Error("import needs --checkpoint <file>");
  const ArchSpec spec = resolve_spec(o);
  auto model = build_model<float>(spec, o.seed);
  load_weights(model, o.checkpoint);
  if (!o.out.empty()) {
    save_weights(model, o.out);
    report_container(o, o.out, spec.name, count_trainable(model));
  } else {
    report_container(o, o.checkpoint, spec.name, count_trainable(model));
  }
  return 0;
}

int cmd_make_synthetic(const Options& o) {
  if (o.out.empty()) throw Error("make-synthetic needs --out <directory>");
  SyntheticSpec s;
  s.seed = o.seed;
  const std::string manifest = write_synthetic_dataset(o.out, s, o.pair_count);
  if (format_of(o) == Format::structured)
    std::cout << "manifest=" << manifest << "\npairs=" << (fs::path(o.out) / "pairs.txt").string() << "\n";
  else
    std::cout << "wrote " << manifest << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SeesawFaceNet architecture, cost and training tool"};
  app.require_subcommand(1);
  Options o;

  auto model_opts = [&](CLI::App* sub, bool positional) {
    if (positional) sub->add_option("name", o.names, "model name")->expected(0, 1);
    sub->add_option("--model,-m", o.model, "model name");
    sub->add_option("--spec", o.spec_path, "architecture spec file");
    sub->add_option("--split-ratio", o.split_ratio, "first-group share of uneven pointwise convs");
    sub->add_flag("--se,!--no-se", o.se, "enable or disable squeeze-and-excitation");
    sub->add_option("--variant", o.variant, "block variant: shuffle, share or inverted_residual");
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
    sub->add_option("--seed", o.seed, "random seed");
  };

  auto* summarize = app.add_subcommand("summarize", "layer table with input and output shapes");
  model_opts(summarize, true);
  common(summarize);

  auto* cost = app.add_subcommand("cost", "parameter and MAdds report");
  model_opts(cost, true);
  common(cost);

  auto* compare = app.add_subcommand("compare", "cost difference between two models");
  compare->add_option("models", o.names, "two model names")->expected(2)->required();
  compare->add_option("--split-ratio", o.split_ratio, "first-group share of uneven pointwise convs");
  compare->add_flag("--se,!--no-se", o.se, "enable or disable squeeze-and-excitation");
  compare->add_option("--variant", o.variant, "block variant");
  common(compare);

  auto* spec = app.add_subcommand("spec", "print the text spec of a model");
  model_opts(spec, true);
  common(spec);
  spec->add_option("--out", o.out, "write to file instead of stdout");

  auto* train = app.add_subcommand("train-toy", "ArcFace training with per-epoch checkpoints");
  model_opts(train, false);
  common(train);
  train->add_option("--dataset", o.dataset, "identity manifest")->required();
  train->add_option("--checkpoint", o.checkpoint, "checkpoint directory");
  train->add_option("--epochs", o.epochs, "epoch count")->check(CLI::PositiveNumber);
  train->add_option("--batch-size", o.batch_size, "batch size")->check(CLI::PositiveNumber);
  train->add_option("--lr", o.lr, "initial learning rate")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval-pairs", "k-fold verification accuracy on a pair manifest");
  model_opts(eval, false);
  common(eval);
  eval->add_option("--pairs", o.pairs, "pair manifest")->required();
  eval->add_option("--checkpoint", o.checkpoint, "weight file")->required();
  eval->add_option("--folds", o.folds, "fold count")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export", "write freshly initialized weights");
  model_opts(exp, true);
  common(exp);
  exp->add_option("--out", o.out, "output weight file")->required();

  auto* imp = app.add_subcommand("import", "load and validate a weight file");
  model_opts(imp, true);
  common(imp);
  imp->add_option("--checkpoint", o.checkpoint, "weight file")->required();
  imp->add_option("--out", o.out, "re-export the loaded weights");

  auto* synth = app.add_subcommand("make-synthetic", "write a synthetic identity dataset and pair manifest");
  common(synth);
  synth->add_option("--out", o.out, "output directory")->required();
  synth->add_option("--pairs", o.pair_count, "pair count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*summarize) return cmd_summarize(o);
    if (*cost) return cmd_cost(o);
    if (*compare) return cmd_compare(o);
    if (*spec) return cmd_spec(o);
    if (*train) return cmd_train_toy(o);
    if (*eval) return cmd_eval_pairs(o);
    if (*exp) return cmd_export(o);
    if (*imp) return cmd_import(o);
    if (*synth) return cmd_make_synthetic(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
