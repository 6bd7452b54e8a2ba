// credscan: scan source trees for hard-coded credentials, and train and
// evaluate the category classifier behind it.
//
// Exit codes: 0 success (scan: no findings), 1 scan found credentials,
// 2 any error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "credscan/analysis.h"
#include "credscan/bench.h"
#include "credscan/classifier.h"
#include "credscan/cli_config.h"
#include "credscan/embedder.h"
#include "credscan/error.h"
#include "credscan/ingest.h"
#include "credscan/metrics.h"
#include "credscan/scanner.h"
#include "credscan/synthetic.h"
#include "credscan/taxonomy.h"

#ifndef CREDSCAN_DATA_DIR
#define CREDSCAN_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace credscan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 2;

std::vector<std::string> class_names() {
  std::vector<std::string> names;
  for (auto c : kAllCategories) names.emplace_back(category_name(c));
  return names;
}

void emit(const CliConfig& cfg, const json& doc, const std::string& text) {
  switch (cfg.output_format) {
    case OutputFormat::kText: std::cout << text; break;
    case OutputFormat::kJson: std::cout << doc.dump(2) << '\n'; break;
    case OutputFormat::kJsonl: std::cout << doc.dump() << '\n'; break;
  }
}

LabeledDataset load_dataset(const std::string& path) {
  if (fs::path(path).extension() == ".csv") return load_csv(path);
  return load_jsonl(path);
}

// By default classification data is the true credentials only, since a
// false-positive line has no real category. --records all keeps every line
// under its labeled category.
bool g_all_records = false;

LabeledDataset load_labeled(const std::string& path) {
  auto ds = load_dataset(path);
  if (!g_all_records) ds = ds.true_only();
  if (ds.empty()) throw DomainError(path + (g_all_records ? " holds no records" : " holds no records with is_true set"));
  return ds;
}

std::vector<RuleSignature> load_rule_set(const CliConfig& cfg) {
  return cfg.rules_path ? load_rules(*cfg.rules_path) : default_rules();
}

struct Embedding {
  std::unique_ptr<EmbeddingProvider> provider;
  std::unique_ptr<EmbeddingCache> cache;
};

Embedding open_embedding(const CliConfig& cfg) {
  Embedding e;
  e.provider = make_provider(cfg.provider);
  if (cfg.cache_path) e.cache = std::make_unique<EmbeddingCache>(*cfg.cache_path);
  return e;
}

LabeledEmbeddings embed_dataset(const LabeledDataset& ds, const CliConfig& cfg, Embedding& emb) {
  std::vector<std::string> texts;
  texts.reserve(ds.size());
  for (const auto& r : ds.records) texts.push_back(r.text);
  LabeledEmbeddings out;
  out.inputs = embed_batch(texts, *emb.provider, cfg.provider.batch_size, emb.cache.get());
  for (const auto& r : ds.records) out.labels.push_back(static_cast<std::size_t>(category_id(r.category)));
  return out;
}

const std::string& require_model(const CliConfig& cfg) {
  if (!cfg.model_checkpoint) throw DomainError("no model checkpoint: pass --model or set \"model\" in the config file");
  return *cfg.model_checkpoint;
}

void check_dims(const MlpClassifier& model, const EmbeddingProvider& provider) {
  if (model.input_dim() != provider.dimension()) {
    throw DomainError("model expects " + std::to_string(model.input_dim()) + "-dim embeddings but the provider yields " +
                      std::to_string(provider.dimension()));
  }
}

ConfusionMatrix confusion_for(const MlpParams& params, const LabeledEmbeddings& data) {
  ConfusionMatrix cm(params.arch.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) cm.add(data.labels[i], predict(data.inputs[i].view(), params).class_id);
  return cm;
}

std::string history_to_text(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os << "epoch  train_loss  train_acc  valid_loss  valid_acc\n";
  for (const auto& h : history) {
    os << std::setw(5) << h.epoch << std::fixed << std::setprecision(4) << std::setw(12) << h.train_loss
       << std::setw(11) << h.train_accuracy;
    if (h.valid_loss) {
      os << std::setw(12) << *h.valid_loss << std::setw(11) << *h.valid_accuracy;
    } else {
      os << std::setw(12) << "-" << std::setw(11) << "-";
    }
    os << '\n';
  }
  return os.str();
}

json counts_json(const LabeledDataset& ds) {
  json counts = json::object();
  const auto cc = ds.category_counts();
  for (auto c : kAllCategories) counts[std::string(category_name(c))] = cc[static_cast<std::size_t>(category_id(c))];
  return counts;
}

std::string counts_text(const LabeledDataset& ds) {
  std::ostringstream os;
  const auto cc = ds.category_counts();
  for (auto c : kAllCategories) {
    os << "  " << std::left << std::setw(20) << category_name(c) << cc[static_cast<std::size_t>(category_id(c))]
       << '\n';
  }
  return os.str();
}

// ---- subcommands ----------------------------------------------------------

struct ScanArgs {
  std::string root;
  std::vector<std::string> include, exclude;
  std::uint64_t max_file_bytes = 1 << 20;
  bool no_classify = false;
};

int run_scan(const CliConfig& cfg, const ScanArgs& args) {
  ScanConfig sc;
  sc.root = args.root;
  sc.include_globs = args.include;
  sc.exclude_globs = args.exclude;
  sc.max_file_bytes = args.max_file_bytes;
  sc.mask_snippets = cfg.masking;
  const auto rules = load_rule_set(cfg);
  // Lines with no keyword are judged by the password rule's entropy floor.
  for (const auto& r : rules) {
    if (r.category == CredentialCategory::kPasswords && r.entropy_floor) sc.entropy_floor_default = *r.entropy_floor;
  }

  std::optional<MlpClassifier> model;
  Embedding emb;
  if (cfg.model_checkpoint && !args.no_classify) {
    model = load_checkpoint(*cfg.model_checkpoint);
    emb = open_embedding(cfg);
    check_dims(*model, *emb.provider);
  }
  const auto report = scan_and_classify(sc, rules, model ? &*model : nullptr, emb.provider.get(),
                                        cfg.provider.batch_size);

  const auto& s = report.summary;
  json summary = {{"files_scanned", s.walk.files_scanned}, {"skipped_binary", s.walk.skipped_binary},
                  {"skipped_large", s.walk.skipped_large},  {"skipped_excluded", s.walk.skipped_excluded},
                  {"unreadable", s.walk.unreadable},        {"candidates", s.candidates},
                  {"classified", s.classified},             {"embed_errors", s.embed_errors}};
  switch (cfg.output_format) {
    case OutputFormat::kJsonl: std::cout << findings_to_jsonl(report.findings); break;
    case OutputFormat::kJson: {
      json findings = json::array();
      for (const auto& f : report.findings) findings.push_back(finding_to_json(f));
      std::cout << json{{"findings", findings}, {"summary", summary}}.dump(2) << '\n';
      break;
    }
    case OutputFormat::kText:
      std::cout << findings_to_table(report.findings);
      std::cout << report.findings.size() << " finding(s) in " << s.walk.files_scanned << " file(s)\n";
      break;
  }
  if (s.embed_errors > 0) std::cerr << "warning: " << s.embed_errors << " finding(s) left unclassified\n";
  return scan_exit_code(report);
}

struct IngestArgs {
  std::string input;
  std::string format = "auto";
  std::string out;
  std::size_t synthetic = 0;
  CsvColumnMapping columns;
};

int run_ingest(const CliConfig& cfg, const IngestArgs& args) {
  LabeledDataset ds;
  if (args.synthetic > 0) {
    ds = synthetic_dataset(args.synthetic, cfg.seed);
  } else {
    if (args.input.empty()) throw DomainError("ingest needs an input file or --synthetic N");
    const bool csv =
        args.format == "csv" || (args.format == "auto" && fs::path(args.input).extension() == ".csv");
    if (!csv && args.format != "auto" && args.format != "jsonl") {
      throw DomainError("--format must be auto, jsonl or csv");
    }
    ds = csv ? load_csv(args.input, args.columns) : load_jsonl(args.input);
  }
  save_jsonl(ds, args.out);
  std::size_t true_count = 0;
  for (const auto& r : ds.records) true_count += r.is_true ? 1 : 0;
  json doc = {{"output", args.out}, {"records", ds.size()}, {"true_records", true_count},
              {"category_counts", counts_json(ds)}};
  emit(cfg, doc,
       "wrote " + std::to_string(ds.size()) + " records (" + std::to_string(true_count) + " true) to " + args.out +
           "\n" + counts_text(ds));
  return kExitOk;
}

struct SplitArgs {
  std::string input;
  std::string out_dir;
  double train = 0.8, valid = 0.1, test = 0.1;
  bool no_stratify = false;
};

int run_split(const CliConfig& cfg, const SplitArgs& args) {
  SplitSpec spec{args.train, args.valid, args.test, cfg.seed, !args.no_stratify};
  validate(spec);
  const auto ds = load_dataset(args.input);
  const auto split = split_dataset(ds, spec);
  fs::create_directories(args.out_dir);
  const auto dir = fs::path(args.out_dir);
  save_jsonl(split.train, (dir / "train.jsonl").string());
  save_jsonl(split.valid, (dir / "valid.jsonl").string());
  save_jsonl(split.test, (dir / "test.jsonl").string());
  json doc = {{"train", split.train.size()}, {"valid", split.valid.size()}, {"test", split.test.size()},
              {"seed", cfg.seed}, {"stratified", spec.stratified}, {"out_dir", args.out_dir}};
  emit(cfg, doc,
       "train " + std::to_string(split.train.size()) + ", valid " + std::to_string(split.valid.size()) + ", test " +
           std::to_string(split.test.size()) + " -> " + args.out_dir + "\n");
  return kExitOk;
}

struct TrainArgs {
  std::string data_path;  // split 80/10/10 here, or pass train/valid directly
  std::string train_path;
  std::string valid_path;
  std::string preset = "gpt2-mlp";
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::string model_out;
};

int run_train(const CliConfig& cfg, const TrainArgs& args) {
  if (args.data_path.empty() && args.train_path.empty()) throw DomainError("train needs --data or --train");
  auto tc = preset_config(args.preset);
  tc.seed = cfg.seed;
  if (args.epochs) tc.epochs = *args.epochs;
  if (args.lr) tc.learning_rate = *args.lr;
  validate(tc);

  auto emb = open_embedding(cfg);
  LabeledEmbeddings train_set, valid_set;
  std::optional<std::size_t> test_records;
  if (!args.data_path.empty()) {
    SplitSpec spec;
    spec.seed = cfg.seed;
    const auto split = split_dataset(load_labeled(args.data_path), spec);
    train_set = embed_dataset(split.train, cfg, emb);
    if (!split.valid.empty()) valid_set = embed_dataset(split.valid, cfg, emb);
    test_records = split.test.size();
  } else {
    train_set = embed_dataset(load_labeled(args.train_path), cfg, emb);
    if (!args.valid_path.empty()) valid_set = embed_dataset(load_labeled(args.valid_path), cfg, emb);
  }

  MlpArchitecture arch;
  arch.input_dim = emb.provider->dimension();
  const auto result = train(train_set, valid_set, arch, tc);
  save_checkpoint(MlpClassifier{result.params, tc.preset, tc.seed}, args.model_out);

  json doc = {{"model", args.model_out}, {"preset", tc.preset}, {"seed", tc.seed},
              {"train_records", train_set.size()}, {"valid_records", valid_set.size()},
              {"history", history_to_json(result.history)}};
  if (test_records) doc["test_records"] = *test_records;
  emit(cfg, doc, history_to_text(result.history) + "saved " + args.model_out + "\n");
  return kExitOk;
}

struct EvalArgs {
  std::string data;
  std::size_t splits = 0;
  bool held_out = false;
};

int run_eval(const CliConfig& cfg, const EvalArgs& args) {
  const auto model = load_checkpoint(require_model(cfg));
  auto emb = open_embedding(cfg);
  check_dims(model, *emb.provider);
  const auto ds = load_labeled(args.data);

  if (args.splits == 0) {
    // --held-out rebuilds the test part that `train --data` set aside.
    SplitSpec spec;
    spec.seed = cfg.seed;
    const auto data = embed_dataset(args.held_out ? split_dataset(ds, spec).test : ds, cfg, emb);
    const auto report = build_report(confusion_for(model.params, data));
    emit(cfg, report_to_json(report, class_names()), report_to_text(report, class_names()));
    return kExitOk;
  }

  // Retrain the checkpoint's architecture and preset on k seeded splits.
  std::vector<MetricValues> runs;
  json per_run = json::array();
  auto tc = preset_config(model.preset);
  for (std::size_t i = 0; i < args.splits; ++i) {
    SplitSpec spec;
    spec.seed = cfg.seed + i;
    const auto split = split_dataset(ds, spec);
    tc.seed = cfg.seed + i;
    const auto result = train(embed_dataset(split.train, cfg, emb), embed_dataset(split.valid, cfg, emb),
                              model.params.arch, tc);
    const auto report = build_report(confusion_for(result.params, embed_dataset(split.test, cfg, emb)));
    runs.push_back(metric_values(report));
    per_run.push_back({{"seed", spec.seed}, {"metrics", runs.back()}});
  }
  const auto agg = aggregate_runs(runs);
  json doc = aggregate_to_json(agg);
  doc["preset"] = model.preset;
  doc["runs"] = per_run;
  emit(cfg, doc, "preset " + model.preset + "\n" + aggregate_to_text(agg));
  return kExitOk;
}

struct AnalyzeArgs {
  std::string data;
  std::uint64_t pair_budget = 2'000'000;
  std::string projection_csv;
};

int run_analyze(const CliConfig& cfg, const AnalyzeArgs& args) {
  auto emb = open_embedding(cfg);
  const auto ds = load_labeled(args.data);
  const auto data = embed_dataset(ds, cfg, emb);
  std::vector<CredentialCategory> cats;
  for (const auto& r : ds.records) cats.push_back(r.category);

  const auto rep = separation(data.inputs, cats, SeparationOptions{args.pair_budget, cfg.seed});
  json doc = separation_to_json(rep);
  std::ostringstream text;
  text << std::setprecision(6) << "mean intra-class distance  " << rep.mean_intra << "  (" << rep.n_intra
       << " pairs)\nmean inter-class distance  " << rep.mean_inter << "  (" << rep.n_inter << " pairs)\n";
  if (rep.sampled) text << "pairs sampled from " << rep.total_pairs << "\n";
  if (rep.welch) {
    text << "Welch t = " << rep.welch->t << ", df = " << rep.welch->df << ", p = " << std::scientific
         << rep.welch->p << (rep.p_underflow ? " (underflow)" : "") << '\n';
  } else {
    text << "Welch test undefined: " << rep.test_error << '\n';
  }
  if (!args.projection_csv.empty()) {
    const auto proj = project_2d(data.inputs, ProjectionOptions{1000, 1e-12, cfg.seed});
    std::ofstream out(args.projection_csv);
    if (!out) throw IoError("cannot write " + args.projection_csv);
    out << projection_to_csv(proj, cats);
    doc["projection_csv"] = args.projection_csv;
    text << "projection written to " << args.projection_csv << '\n';
  }
  emit(cfg, doc, text.str());
  return kExitOk;
}

struct BenchArgs {
  std::string data;
  std::size_t repeats = 10;
  std::size_t warmup = 1;
};

int run_bench(const CliConfig& cfg, const BenchArgs& args) {
  // Times representation (embedding) per category; the cache would hide the
  // cost being measured, so it is not used here.
  const auto provider = make_provider(cfg.provider);
  const auto ds = load_labeled(args.data);
  std::map<int, std::vector<std::string>> by_category;
  for (const auto& r : ds.records) by_category[category_id(r.category)].push_back(r.text);

  json doc = json::object();
  std::ostringstream text;
  text << std::left << std::setw(20) << "Category" << std::right << std::setw(8) << "items" << std::setw(14)
       << "mean (s)" << std::setw(14) << "std (s)" << std::setw(14) << "ci95 (s)" << std::setw(16) << "per item (s)"
       << '\n';
  for (const auto& [id, texts] : by_category) {
    const auto stats = time_op([&] { (void)embed_batch(texts, *provider, cfg.provider.batch_size); },
                               TimingOptions{args.repeats, args.warmup, texts.size()});
    const std::string name(category_name(category_from_id(id)));
    doc[name] = timing_to_json(stats);
    text << std::left << std::setw(20) << name << std::right << std::setw(8) << texts.size() << std::scientific
         << std::setprecision(3) << std::setw(14) << stats.mean_seconds << std::setw(14) << stats.std_seconds
         << std::setw(14) << stats.ci95_seconds << std::setw(16) << *stats.per_item_mean_seconds() << '\n'
         << std::defaultfloat;
  }
  emit(cfg, doc, text.str());
  return kExitOk;
}

struct CompareArgs {
  std::string data;
  std::string published = std::string(CREDSCAN_DATA_DIR) + "/published_tool_results.json";
  std::string name;
};

int run_compare(const CliConfig& cfg, const CompareArgs& args) {
  const auto model = load_checkpoint(require_model(cfg));
  auto emb = open_embedding(cfg);
  check_dims(model, *emb.provider);
  const auto data = embed_dataset(load_labeled(args.data), cfg, emb);
  const auto report = build_report(confusion_for(model.params, data));
  const std::string name = args.name.empty() ? "credscan " + model.preset : args.name;
  const auto cmp = comparison_report(measured_row(name, report), load_published_rows(args.published));
  emit(cfg, comparison_to_json(cmp), comparison_to_text(cmp));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"credscan: find and classify hard-coded credentials in source trees"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::optional<std::string> config_file;
  CliOverrides flags;
  bool show_config = false;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--seed", flags.seed, "Seed for every random choice");
  app.add_option("--output", flags.output, "Output format")->check(CLI::IsMember({"text", "json", "jsonl"}));
  app.add_option("--provider", flags.provider, "Embedding provider")->check(CLI::IsMember({"fallback", "remote"}));
  app.add_option("--endpoint", flags.endpoint, "Embedding sidecar URL (remote provider)");
  app.add_option("--rules", flags.rules_path, "Rule table JSON (default: built-in rules)");
  app.add_option("--model", flags.model_checkpoint, "Classifier checkpoint");
  app.add_option("--cache", flags.cache_path, "Embedding cache file");
  app.add_flag("--no-mask", flags.no_mask, "Print snippets unmasked");
  app.add_flag("--show-config", show_config, "Print the effective configuration and exit");
  std::string records = "true";
  app.add_option("--records", records, "Labeled records used by train/eval/analyze/bench/compare")
      ->check(CLI::IsMember({"true", "all"}));

  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "Scan a directory tree; exit 1 when credentials are found");
  scan->add_option("root", scan_args.root, "Directory to scan")->required();
  scan->add_option("--include", scan_args.include, "Glob of paths to scan (repeatable)");
  scan->add_option("--exclude", scan_args.exclude, "Glob of paths to skip (repeatable)");
  scan->add_option("--max-file-bytes", scan_args.max_file_bytes, "Skip larger files");
  scan->add_flag("--no-classify", scan_args.no_classify, "Report rule matches only, even with --model");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Convert a CSV or JSONL corpus (or synthesize one) to JSONL");
  ingest->add_option("input", ingest_args.input, "Input file");
  ingest->add_option("--format", ingest_args.format, "auto, jsonl or csv");
  ingest->add_option("--out,-o", ingest_args.out, "Output JSONL")->required();
  ingest->add_option("--synthetic", ingest_args.synthetic, "Generate N synthetic records per category instead");
  ingest->add_option("--text-col", ingest_args.columns.text, "CSV column holding the line");
  ingest->add_option("--category-col", ingest_args.columns.category, "CSV column holding the category");
  ingest->add_option("--is-true-col", ingest_args.columns.is_true, "CSV column holding the true/false label");
  ingest->add_option("--path-col", ingest_args.columns.source_path, "CSV column holding the source path");
  ingest->add_option("--line-col", ingest_args.columns.line_number, "CSV column holding the line number");
  ingest->add_option("--lang-col", ingest_args.columns.language_tag, "CSV column holding the language tag");

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Write train/valid/test JSONL partitions");
  split->add_option("input", split_args.input, "Dataset")->required();
  split->add_option("--out-dir", split_args.out_dir, "Directory for train.jsonl, valid.jsonl, test.jsonl")->required();
  split->add_option("--train-frac", split_args.train, "Train fraction");
  split->add_option("--valid-frac", split_args.valid, "Validation fraction");
  split->add_option("--test-frac", split_args.test, "Test fraction");
  split->add_flag("--no-stratify", split_args.no_stratify, "Plain random split");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the classifier on embedded records");
  auto* data_opt = train_cmd->add_option("--data", train_args.data_path,
                                         "Labeled JSONL/CSV, split 80/10/10 with --seed (test part held out)");
  auto* train_opt = train_cmd->add_option("--train", train_args.train_path, "Training JSONL/CSV");
  train_cmd->add_option("--valid", train_args.valid_path, "Validation JSONL/CSV")->excludes(data_opt);
  data_opt->excludes(train_opt);
  train_cmd->add_option("--preset", train_args.preset, "bert-mlp or gpt2-mlp")
      ->check(CLI::IsMember({"bert-mlp", "gpt2-mlp"}));
  train_cmd->add_option("--epochs", train_args.epochs, "Override the preset's epoch count");
  train_cmd->add_option("--lr", train_args.lr, "Override the preset's learning rate");
  train_cmd->add_option("--model-out", train_args.model_out, "Checkpoint to write")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Metric report for a checkpoint, or aggregate over k retrained splits");
  eval->add_option("--data", eval_args.data, "Labeled JSONL/CSV")->required();
  eval->add_option("--splits", eval_args.splits, "Retrain on this many seeded splits of --data and aggregate");
  eval->add_flag("--held-out", eval_args.held_out, "Score only the seeded 10% test part of --data");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Intra- vs inter-category embedding distances");
  analyze->add_option("--data", analyze_args.data, "Labeled JSONL/CSV")->required();
  analyze->add_option("--pair-budget", analyze_args.pair_budget, "Sample pairs above this many");
  analyze->add_option("--projection-csv", analyze_args.projection_csv, "Write a 2-D PCA projection here");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time embedding per category");
  bench->add_option("--data", bench_args.data, "Labeled JSONL/CSV")->required();
  bench->add_option("--repeats", bench_args.repeats, "Measured runs")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bench_args.warmup, "Unmeasured runs first");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Rank a checkpoint against published results of other scanners");
  compare->add_option("--data", compare_args.data, "Labeled JSONL/CSV")->required();
  compare->add_option("--published", compare_args.published, "Published results JSON");
  compare->add_option("--name", compare_args.name, "Row label for the measured model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  g_all_records = records == "all";
  try {
    const auto cfg = resolve_config(config_file, flags);
    if (show_config) {
      std::cout << config_to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    if (*scan) return run_scan(cfg, scan_args);
    if (*ingest) return run_ingest(cfg, ingest_args);
    if (*split) return run_split(cfg, split_args);
    if (*train_cmd) return run_train(cfg, train_args);
    if (*eval) return run_eval(cfg, eval_args);
    if (*analyze) return run_analyze(cfg, analyze_args);
    if (*bench) return run_bench(cfg, bench_args);
    if (*compare) return run_compare(cfg, compare_args);
    std::cerr << app.help();
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
