#include "ensemblekit/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ensemblekit/binary_io.hpp"
#include "ensemblekit/checkpoint.hpp"
#include "ensemblekit/error.hpp"
#include "ensemblekit/pipeline.hpp"
#include "ensemblekit/report.hpp"
#include "ensemblekit/synthetic.hpp"

namespace ensemblekit {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Bad flag values found after CLI11 has accepted the command line.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string method;
  std::string data;
  std::string out;
  std::string model;
  std::string json_out;
  std::string compare_dir;
  std::string format = "dsef";
  std::string gmean = "sensitivity-specificity";
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool serial = false;
  bool save_models = false;
  synthetic::BenchmarkSpec synth;
  PipelineConfig pipeline;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ENSEMBLEKIT_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError("ENSEMBLEKIT_SEED must be an unsigned integer");
    return v;
  }
  return kDefaultSeed;
}

GMeanMode parse_gmean(const std::string& name) {
  if (name == "sensitivity-specificity") return GMeanMode::sensitivity_specificity;
  if (name == "precision-recall") return GMeanMode::precision_recall;
  throw UsageError("--gmean must be sensitivity-specificity or precision-recall");
}

void apply_execution(Options& o) {
  o.pipeline.policy = o.serial ? ExecPolicy::serial : ExecPolicy::parallel;
  if (o.jobs < 0) throw UsageError("--jobs must be >= 0");
  if (o.jobs > 0) omp_set_num_threads(o.jobs);
}

void add_pipeline_flags(CLI::App* cmd, Options& o) {
  auto& p = o.pipeline;
  cmd->add_option("--data", o.data, "Feature file (DSEF or CSV)")->required();
  cmd->add_option("--threshold", o.threshold,
                  "Power-loss threshold: records at or above it are soiled")
      ->required();
  cmd->add_option("--seed", o.seed, "Run seed (fallback: ENSEMBLEKIT_SEED, then 1)");
  cmd->add_option("--test-fraction", p.test_fraction, "Held-out fraction per class");
  cmd->add_option("--smote-k", p.smote_k, "SMOTE neighbours");
  cmd->add_option("--epochs", p.denn.epochs, "DENN epochs");
  cmd->add_option("--lr", p.denn.lr, "DENN Adam learning rate");
  cmd->add_option("--batch-size", p.denn.batch_size, "DENN mini-batch size");
  cmd->add_option("--width", p.denn.branch_width, "DENN branch width");
  cmd->add_option("--trees", p.ensemble.n_trees, "Trees per random forest");
  cmd->add_option("--bagging-depth", p.ensemble.bagging_depth, "Random forest max depth");
  cmd->add_option("--rounds", p.ensemble.boosting_rounds, "Boosting rounds");
  cmd->add_option("--boosting-depth", p.ensemble.boosting_depth, "Boosting tree depth");
  cmd->add_option("--shrinkage", p.ensemble.shrinkage, "Boosting shrinkage");
  cmd->add_option("--holdout", p.ensemble.blend_holdout, "Blending holdout fraction");
  cmd->add_option("--dynamic-threshold", p.ensemble.dynamic_threshold,
                  "Decision threshold of the dynamic ensemble");
  cmd->add_option("--gmean", o.gmean, "sensitivity-specificity (default) or precision-recall");
  cmd->add_option("--jobs", o.jobs, "OpenMP threads (0 = runtime default)");
  cmd->add_flag("--serial", o.serial, "Use the serial reference kernels");
}

ordered_json config_json(const PipelineConfig& p) {
  const auto& d = p.denn;
  const auto& e = p.ensemble;
  return {{"threshold", p.threshold},
          {"test_fraction", p.test_fraction},
          {"smote_k", p.smote_k},
          {"denn",
           {{"branch_width", d.branch_width},
            {"epochs", d.epochs},
            {"batch_size", d.batch_size},
            {"lr", d.lr},
            {"beta1", d.beta1},
            {"beta2", d.beta2},
            {"eps", d.eps}}},
          {"ensemble",
           {{"n_trees", e.n_trees},
            {"bagging_depth", e.bagging_depth},
            {"forest_min_samples_leaf", e.forest_min_samples_leaf},
            {"forest_features_per_split", e.forest_features_per_split},
            {"bootstrap", e.bootstrap},
            {"boosting_rounds", e.boosting_rounds},
            {"boosting_depth", e.boosting_depth},
            {"shrinkage", e.shrinkage},
            {"blend_holdout", e.blend_holdout},
            {"dynamic_threshold", e.dynamic_threshold},
            {"dynamic_weights", e.dynamic_weights},
            {"logreg", {{"l2", e.logreg.l2}, {"epochs", e.logreg.epochs}, {"lr", e.logreg.lr}}},
            {"svm", {{"c", e.svm.c}, {"epochs", e.svm.epochs}, {"lr", e.svm.lr}}}}}};
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_metrics(std::ostream& out, const MetricsReport& m) {
  const auto& c = m.confusion.counts;
  out << "accuracy  " << fmt6(m.accuracy) << "\n"
      << "precision " << fmt6(m.precision_weighted) << "\n"
      << "recall    " << fmt6(m.recall_weighted) << "\n"
      << "f1        " << fmt6(m.f1_weighted) << "\n"
      << "g_mean    " << fmt6(m.g_mean) << "\n"
      << "confusion [[" << c[0][0] << ", " << c[0][1] << "], [" << c[1][0] << ", " << c[1][1]
      << "]]\n";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct LoadedData {
  FeatureSet set;
  std::uint64_t hash = 0;
};

LoadedData load_data(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  return {read_features(path), fnv1a64(bytes)};
}

int cmd_train(Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Method method = [&] {
    try {
      return parse_method(o.method);
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }();
  apply_execution(o);
  const GMeanMode mode = parse_gmean(o.gmean);
  o.pipeline.threshold = *o.threshold;
  o.pipeline.seed = resolve_seed(o.seed);

  const LoadedData data = load_data(o.data);
  const PreparedData prepared = prepare_data(data.set, o.pipeline);
  out << "train " << to_string(method) << ": " << prepared.balanced.size()
      << " balanced training records, " << prepared.test.size() << " test records\n";

  const MethodFit fit = fit_method(method, prepared.balanced, o.pipeline,
                                   [&](std::size_t epoch, double loss) {
                                     out << "epoch " << epoch << " loss " << fmt6(loss) << "\n";
                                   });
  save_model(fit.model, o.out);
  out << "test metrics\n";
  print_metrics(out, evaluate_model(fit.model, prepared.test, mode, o.pipeline.policy));

  RunManifest manifest;
  manifest.command = "train";
  manifest.method = std::string(to_string(method));
  manifest.seed = o.pipeline.seed;
  manifest.config_json = config_json(o.pipeline).dump();
  manifest.data_path = o.data;
  manifest.data_hash = data.hash;
  manifest.split_hash = prepared.split_hash;
  manifest.smote_hash = prepared.smote_hash;
  manifest.outputs = {o.out};
  manifest.duration_seconds = seconds_since(start);
  write_manifest(manifest, o.out + ".manifest");
  out << "wrote " << o.out << "\n";
  return kExitOk;
}

int cmd_evaluate(Options& o, std::ostream& out) {
  const GMeanMode mode = parse_gmean(o.gmean);
  const TrainedModel model = load_model(o.model);
  const FeatureSet data = binarize_labels(read_features(o.data), *o.threshold);
  if (data.dim != model_input_dim(model)) {
    throw ContractError("dimension mismatch: data has dim " + std::to_string(data.dim) +
                        ", model expects " + std::to_string(model_input_dim(model)));
  }
  const MetricsReport report = evaluate_model(model, data, mode);
  out << to_string(method_of(model)) << " on " << data.size() << " records\n";
  print_metrics(out, report);
  if (!o.json_out.empty()) write_file_atomic(o.json_out, metrics_json(report));
  return kExitOk;
}

int cmd_compare(Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  apply_execution(o);
  const GMeanMode mode = parse_gmean(o.gmean);
  o.pipeline.threshold = *o.threshold;
  o.pipeline.seed = resolve_seed(o.seed);

  const LoadedData data = load_data(o.data);
  const PreparedData prepared = prepare_data(data.set, o.pipeline);
  out << "compare: " << prepared.balanced.size() << " balanced training records, "
      << prepared.test.size() << " test records, split " << hex64(prepared.split_hash) << "\n";

  // Every method trains on the same balanced set and owns a derived seed,
  // so the order in which they run does not affect any result.
  std::vector<std::optional<TrainedModel>> models(kAllMethods.size());
  std::vector<MetricsReport> reports(kAllMethods.size());
  for_each_index(kAllMethods.size(), o.pipeline.policy, [&](std::size_t i) {
    MethodFit fit = fit_method(kAllMethods[i], prepared.balanced, o.pipeline);
    reports[i] = evaluate_model(fit.model, prepared.test, mode, o.pipeline.policy);
    models[i] = std::move(fit.model);
  });

  const fs::path dir = o.compare_dir;
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  auto emit = [&](const fs::path& path, std::string_view bytes) {
    write_file_atomic(path, bytes);
    outputs.push_back(path.string());
  };

  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
    const std::string name(to_string(kAllMethods[i]));
    rows.push_back(comparison_row(name, reports[i]));
    emit(dir / ("confusion_" + name + ".csv"), confusion_csv(reports[i].confusion));
  }
  emit(dir / "comparison.csv", comparison_csv(rows));
  emit(dir / "radar.json", radar_json(rows));
  emit(dir / "radar.svg", radar_svg(rows));
  std::vector<NamedConfusion> grid;
  for (std::size_t i = 0; i < rows.size(); ++i) grid.push_back({rows[i].method, reports[i].confusion});
  emit(dir / "confusion.svg", confusion_grid_svg(grid));
  if (o.save_models) {
    fs::create_directories(dir / "models");
    for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
      const fs::path path = dir / "models" / (std::string(to_string(kAllMethods[i])) + ".model");
      save_model(*models[i], path);
      outputs.push_back(path.string());
    }
  }

  out << comparison_csv(rows);

  RunManifest manifest;
  manifest.command = "compare";
  manifest.method = "all";
  manifest.seed = o.pipeline.seed;
  manifest.config_json = config_json(o.pipeline).dump();
  manifest.data_path = o.data;
  manifest.data_hash = data.hash;
  manifest.split_hash = prepared.split_hash;
  manifest.smote_hash = prepared.smote_hash;
  manifest.outputs = outputs;
  manifest.duration_seconds = seconds_since(start);
  write_manifest(manifest, dir / "manifest.json");
  out << "wrote " << outputs.size() << " artifacts to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_report(Options& o, std::ostream& out) {
  const fs::path dir = o.compare_dir;
  const fs::path table = dir / "comparison.csv";
  if (!fs::exists(table)) throw IoError("no comparison data: " + table.string() + " is missing");
  const auto rows = parse_comparison_csv(read_file_bytes(table));
  if (rows.empty()) throw FormatError(table.string() + " has no rows");
  std::vector<NamedConfusion> grid;
  for (const auto& row : rows) {
    const fs::path cm = dir / ("confusion_" + row.method + ".csv");
    if (!fs::exists(cm)) throw IoError("no confusion data: " + cm.string() + " is missing");
    grid.push_back({row.method, parse_confusion_csv(read_file_bytes(cm))});
  }
  const fs::path radar = o.out;
  fs::path confusion = radar;
  confusion.replace_extension(".confusion.svg");
  write_file_atomic(radar, radar_svg(rows));
  write_file_atomic(confusion, confusion_grid_svg(grid));
  out << "wrote " << radar.string() << " and " << confusion.string() << " (" << rows.size()
      << " methods)\n";
  return kExitOk;
}

int cmd_synth(Options& o, std::ostream& out) {
  if (o.seed) o.synth.seed = *o.seed;
  const FeatureSet set = synthetic::benchmark_dataset(o.synth);
  if (o.format != "dsef" && o.format != "csv") throw UsageError("--format must be dsef or csv");
  write_features(set, o.out, o.format == "csv" ? FeatureFormat::csv : FeatureFormat::dsef);
  const auto hist = class_histogram(set);
  out << "wrote " << set.size() << " records (dim " << set.dim << ", soiled "
      << (hist.count(kSoiled) ? hist.at(kSoiled) : 0) << " at threshold " << o.synth.threshold
      << ") to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"DENN and decision-level ensemble toolkit", "ensemblekit"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train one method and write a checkpoint");
  train->add_option("--method", o.method,
                    "denn|bagging|boosting|voting|cascading|blending|dual_bb|dynamic")
      ->required();
  train->add_option("--out", o.out, "Model checkpoint path")->required();
  add_pipeline_flags(train, o);

  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a labelled feature file");
  evaluate->add_option("--model", o.model, "Model checkpoint")->required();
  evaluate->add_option("--data", o.data, "Feature file (DSEF or CSV)")->required();
  evaluate->add_option("--threshold", o.threshold, "Power-loss threshold")->required();
  evaluate->add_option("--json", o.json_out, "Also write the metrics as JSON");
  evaluate->add_option("--gmean", o.gmean, "sensitivity-specificity (default) or precision-recall");

  auto* compare = app.add_subcommand("compare", "Train and score all eight methods on one split");
  compare->add_option("--out-dir", o.compare_dir, "Output directory")->required();
  compare->add_flag("--save-models", o.save_models, "Also write every model checkpoint");
  add_pipeline_flags(compare, o);

  auto* report = app.add_subcommand("report", "Render SVG charts from a compare directory");
  report->add_option("--compare-dir", o.compare_dir, "Directory written by compare")->required();
  report->add_option("--out", o.out, "Radar chart SVG path")->required();

  auto* synth = app.add_subcommand("synth", "Write the seeded synthetic benchmark feature file");
  synth->add_option("--out", o.out, "Output path")->required();
  synth->add_option("--records", o.synth.records, "Record count");
  synth->add_option("--dim", o.synth.dim, "Feature dimension (even)");
  synth->add_option("--latent", o.synth.latent, "Latent descriptor width");
  synth->add_option("--hidden", o.synth.hidden, "Generator hidden width");
  synth->add_option("--view-noise", o.synth.view_noise, "Noise added to each feature view");
  synth->add_option("--minority-fraction", o.synth.minority_fraction, "Soiled fraction");
  synth->add_option("--threshold", o.synth.threshold, "Power-loss threshold the labels use");
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--format", o.format, "dsef or csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == train) return cmd_train(o, out);
    if (chosen == evaluate) return cmd_evaluate(o, out);
    if (chosen == compare) return cmd_compare(o, out);
    if (chosen == report) return cmd_report(o, out);
    return cmd_synth(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace ensemblekit
