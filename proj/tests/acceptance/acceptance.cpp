// Acceptance suite: one PASS/FAIL line per criterion at its stated
// tolerance and time budget. Exits non-zero if any gating check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensemblekit/binary_io.hpp"
#include "ensemblekit/checkpoint.hpp"
#include "ensemblekit/cli.hpp"
#include "ensemblekit/dataset.hpp"
#include "ensemblekit/ensembles.hpp"
#include "ensemblekit/metrics.hpp"
#include "ensemblekit/numeric.hpp"
#include "ensemblekit/pipeline.hpp"
#include "ensemblekit/report.hpp"
#include "ensemblekit/rng.hpp"
#include "ensemblekit/smote.hpp"
#include "ensemblekit/synthetic.hpp"
#include "ensemblekit/tree.hpp"
#include "../support/denn_gradcheck.hpp"

using namespace ensemblekit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check, double budget_s = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0 && secs >= budget_s) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(budget_s) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "ensemblekit_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

// ---- criteria ---------------------------------------------------------------

Outcome gradient_correctness() {
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  bool all_blocks = true;
  for (std::uint64_t t = 0; t < 200; ++t) {
    DennConfig cfg;
    cfg.input_dim = 8;
    cfg.branch_width = 4;
    Rng rng(derive_seed(2024, t));
    DennModel m = denn_init(cfg, rng);
    for (double& b : m.cnn_branch.bias) b = rng.uniform(-0.5, 0.5);
    for (double& b : m.mlp_branch.bias) b = rng.uniform(-0.5, 0.5);
    for (double& b : m.meta.bias) b = rng.uniform(-0.5, 0.5);
    Vector x(8);
    for (double& v : x) v = rng.normal();
    const auto r = testing::check_denn_gradients(m, x, t % 2, 1e-5);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    skipped += r.skipped;
    for (std::size_t c : r.checked_per_block) all_blocks = all_blocks && c > 0;
  }
  const double skip_rate = static_cast<double>(skipped) / static_cast<double>(checked + skipped);
  return {worst <= 1e-5 && skip_rate < 0.01 && all_blocks,
          "max rel err " + fmt("%.3g", worst) + " (tol 1e-5) over " + std::to_string(checked) +
              " entries, 6 blocks, kink skips " + std::to_string(skipped)};
}

Outcome metric_identity() {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(500);
    const double rate = rng.uniform01();
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.uniform01() < rate;
      p[i] = rng.uniform01() < 0.5;
    }
    const MetricsReport r = evaluate(t, p);
    worst = std::max(worst, std::abs(r.recall_weighted - r.accuracy));
  }
  return {worst <= 1e-12, "max |recall_w - accuracy| " + fmt("%.3g", worst) + " over 1000 pairs"};
}

Outcome softmax_cross_entropy() {
  Rng rng(8);
  double norm_err = 0.0, shift_err = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    Vector logits(2 + trial % 9);
    for (double& l : logits) l = rng.uniform(-30.0, 30.0);
    const Vector p = softmax(logits);
    double s = 0.0;
    for (double v : p) s += v;
    norm_err = std::max(norm_err, std::abs(s - 1.0));
    Vector shifted = logits;
    const double c = rng.uniform(-500.0, 500.0);
    for (double& l : shifted) l += c;
    const Vector q = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) shift_err = std::max(shift_err, std::abs(p[i] - q[i]));
  }
  const double ce0 = std::abs(cross_entropy(Vector{0.5, 0.5}, 0) - std::log(2.0));
  const double ce1 = std::abs(cross_entropy(Vector{0.5, 0.5}, 1) - std::log(2.0));
  return {norm_err <= 1e-12 && shift_err <= 1e-12 && ce0 <= 1e-12 && ce1 <= 1e-12,
          "norm err " + fmt("%.2g", norm_err) + ", shift err " + fmt("%.2g", shift_err) +
              ", |CE - ln2| " + fmt("%.2g", std::max(ce0, ce1))};
}

double segment_distance(const Vector& p, const Vector& a, const Vector& b) {
  double ab2 = 0.0, dot_ap = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    ab2 += (b[j] - a[j]) * (b[j] - a[j]);
    dot_ap += (p[j] - a[j]) * (b[j] - a[j]);
  }
  const double t = ab2 > 0.0 ? std::clamp(dot_ap / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double c = a[j] + t * (b[j] - a[j]);
    d2 += (p[j] - c) * (p[j] - c);
  }
  return std::sqrt(d2);
}

Outcome smote_contract() {
  synthetic::BenchmarkSpec spec;
  spec.records = 10000;
  const FeatureSet train = synthetic::benchmark_dataset(spec);
  const SmoteResult r = smote_balance_traced(train, SmoteConfig{5, 99});
  const auto hist = class_histogram(r.balanced);
  const bool balanced = hist.at(kClean) == hist.at(kSoiled);
  bool majority_identical = true;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& a = train.records[i];
    const auto& b = r.balanced.records[i];
    majority_identical = majority_identical && a.features == b.features &&
                         a.power_loss == b.power_loss && a.label == b.label;
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < r.origins.size(); ++s) {
    const auto& o = r.origins[s];
    worst = std::max(worst, segment_distance(r.balanced.records[train.size() + s].features,
                                             train.records[o.sample].features,
                                             train.records[o.neighbor].features));
  }
  const bool deterministic = encode_dsef(smote_balance(train, SmoteConfig{5, 99})) ==
                             encode_dsef(r.balanced);
  return {balanced && majority_identical && worst < 1e-9 && deterministic,
          std::to_string(hist.at(kClean)) + "/" + std::to_string(hist.at(kSoiled)) +
              " after balance, max segment residual " + fmt("%.2g", worst) +
              ", originals identical " + (majority_identical ? "yes" : "no") +
              ", deterministic " + (deterministic ? "yes" : "no")};
}

Outcome knn_oracle() {
  Rng rng(9);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector> pts(50, Vector(4));
    for (auto& p : pts)
      for (double& v : p) v = trial % 2 ? rng.normal() : static_cast<double>(rng.uniform_index(3));
    const std::size_t q = rng.uniform_index(50);
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == q) continue;
      double d = 0.0;
      for (std::size_t j = 0; j < 4; ++j) d += (pts[i][j] - pts[q][j]) * (pts[i][j] - pts[q][j]);
      all.push_back({d, i});
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < 5; ++i) expected.push_back(all[i].second);
    mismatches += knn_indices(pts, q, 5) != expected;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 100 instances"};
}

Outcome bagging_vote_equivalence() {
  // Fully grown trees on consistent data have pure leaves, so every tree
  // casts a one-hot vote; with an odd tree count the mean never ties.
  int disagreements = 0;
  std::size_t queries = 0;
  for (std::uint64_t f = 0; f < 100; ++f) {
    const FeatureSet train = synthetic::random_dataset(60 + f, 3, 500 + f);
    EnsembleConfig cfg;
    cfg.n_trees = 1 + 2 * (f % 8);
    cfg.bagging_depth = kUnlimitedDepth;
    cfg.forest_min_samples_leaf = 1;
    const Matrix x = feature_matrix(train);
    const RandomForest forest = fit_forest(x, train.labels(), cfg, derive_seed(77, f));
    const Matrix queries_x = feature_matrix(synthetic::random_dataset(50, 3, 900 + f));
    const Matrix mean = forest_predict_proba(forest, queries_x);
    for (std::size_t i = 0; i < queries_x.rows(); ++i) {
      std::size_t votes = 0;
      for (const auto& t : forest.trees) {
        votes += argmax(tree_predict_proba(t, queries_x.row(i))) == 1;
      }
      const int majority = 2 * votes > forest.trees.size() ? 1 : 0;
      disagreements += majority != static_cast<int>(argmax(mean.row(i)));
      ++queries;
    }
  }
  return {disagreements == 0, std::to_string(disagreements) + " disagreements over " +
                                  std::to_string(queries) + " queries, 100 forests"};
}

Outcome boosting_monotonicity() {
  std::string detail;
  bool ok = true;
  for (std::uint64_t d = 0; d < 3; ++d) {
    const FeatureSet s = synthetic::benchmark_dataset({600, 8, 4, 8, 0.1, 0.15 + 0.1 * d, 0.05, 40 + d});
    const Matrix x = feature_matrix(s);
    const auto y = s.labels();
    EnsembleConfig cfg;
    cfg.boosting_rounds = 100;
    LossTrace trace;
    const GradientBoosting g = fit_gradient_boosting(x, y, cfg, d, &trace);
    double pos = 0.0;
    for (int v : y) pos += v;
    const double p = pos / static_cast<double>(y.size());
    const bool f0_exact = g.f0 == std::log(p / (1.0 - p));
    std::size_t rises = 0;
    for (std::size_t t = 1; t < trace.size(); ++t) rises += trace[t] > trace[t - 1];
    ok = ok && f0_exact && rises == 0 && trace.size() == 101;
    detail += (d ? "; " : "") + fmt("loss %.4f", trace.front()) + fmt("->%.4f", trace.back()) +
              " rises " + std::to_string(rises) + (f0_exact ? " F0 exact" : " F0 WRONG");
  }
  return {ok, detail};
}

Outcome tree_oracle() {
  std::size_t wrong = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const FeatureSet s = synthetic::random_dataset(200, 5, 3000 + t);
    Rng rng(t);
    const DecisionTree tree = tree_fit(s, TreeParams{kUnlimitedDepth, 1, 0}, rng);
    for (const auto& r : s.records) {
      wrong += argmax(tree_predict_proba(tree, r.features)) != static_cast<std::size_t>(r.label);
    }
  }
  return {wrong == 0, std::to_string(wrong) + " training errors over 20 x 200 records"};
}

// Shared state for the end-to-end, determinism and round-trip criteria.
struct EndToEnd {
  fs::path data;
  fs::path parallel_dir;
  std::vector<ComparisonRow> rows;
};
EndToEnd e2e;

Outcome end_to_end() {
  e2e.data = work_dir() / "benchmark.dsef";
  e2e.parallel_dir = work_dir() / "compare_parallel";
  if (cli({"synth", "--out", e2e.data.string()}) != 0) return {false, "synth failed"};
  if (cli({"compare", "--data", e2e.data.string(), "--threshold", "0.05", "--seed",
           std::to_string(kDefaultSeed), "--out-dir", e2e.parallel_dir.string(), "--save-models",
           "--jobs", "4"}) != 0) {
    return {false, "compare failed"};
  }
  e2e.rows = parse_comparison_csv(read_file_bytes(e2e.parallel_dir / "comparison.csv"));
  const auto it = std::find_if(e2e.rows.begin(), e2e.rows.end(),
                               [](const ComparisonRow& r) { return r.method == "denn"; });
  if (it == e2e.rows.end()) return {false, "no denn row"};
  const bool ok = e2e.rows.size() == 8 && it->accuracy >= 0.90 && it->g_mean >= 0.80;
  std::string ranking;
  std::vector<ComparisonRow> sorted = e2e.rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.accuracy > b.accuracy; });
  return {ok, std::to_string(e2e.rows.size()) + " rows; denn accuracy " +
                  fmt("%.6f", it->accuracy) + " (>= 0.90), g_mean " + fmt("%.6f", it->g_mean) +
                  " (>= 0.80); best accuracy: " + sorted.front().method};
}

// Byte-compares every artifact except the manifest, whose duration differs.
bool same_artifacts(const fs::path& a, const fs::path& b, std::string& why) {
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.is_directory() || entry.path().filename() == "manifest.json") continue;
    const fs::path other = b / fs::relative(entry.path(), a);
    if (!fs::exists(other) || read_file_bytes(entry.path()) != read_file_bytes(other)) {
      why = "differs: " + fs::relative(entry.path(), a).string();
      return false;
    }
    ++compared;
  }
  why = std::to_string(compared) + " artifacts identical";
  const auto ma = nlohmann::json::parse(read_file_bytes(a / "manifest.json"));
  const auto mb = nlohmann::json::parse(read_file_bytes(b / "manifest.json"));
  for (const char* k : {"split_hash", "smote_hash", "config", "seed"}) {
    if (ma[k] != mb[k]) {
      why = std::string("manifest field differs: ") + k;
      return false;
    }
  }
  return true;
}

Outcome determinism() {
  if (e2e.rows.empty()) return {false, "end-to-end run unavailable"};
  const fs::path again = work_dir() / "compare_parallel_again";
  const fs::path serial = work_dir() / "compare_serial";
  const std::string seed = std::to_string(kDefaultSeed);
  if (cli({"compare", "--data", e2e.data.string(), "--threshold", "0.05", "--seed", seed,
           "--out-dir", again.string(), "--save-models", "--jobs", "4"}) != 0 ||
      cli({"compare", "--data", e2e.data.string(), "--threshold", "0.05", "--seed", seed,
           "--out-dir", serial.string(), "--save-models", "--serial"}) != 0) {
    return {false, "compare failed"};
  }
  std::string why_repeat, why_serial;
  const bool repeat = same_artifacts(e2e.parallel_dir, again, why_repeat);
  const bool policy = same_artifacts(e2e.parallel_dir, serial, why_serial);

  // The split and SMOTE stages in isolation.
  PipelineConfig cfg;
  cfg.threshold = 0.05;
  cfg.seed = kDefaultSeed;
  const FeatureSet raw = read_features(e2e.data);
  const PreparedData a = prepare_data(raw, cfg);
  const PreparedData b = prepare_data(raw, cfg);
  const bool stages = encode_dsef(a.train) == encode_dsef(b.train) &&
                      encode_dsef(a.test) == encode_dsef(b.test) &&
                      encode_dsef(a.balanced) == encode_dsef(b.balanced);
  return {repeat && policy && stages, "rerun: " + why_repeat + "; serial vs 4 threads: " +
                                          why_serial + "; split/SMOTE stages " +
                                          (stages ? "identical" : "DIFFER")};
}

Outcome round_trips() {
  if (e2e.rows.empty()) return {false, "end-to-end run unavailable"};
  const std::string original = read_file_bytes(e2e.data);
  const fs::path copy = work_dir() / "benchmark_copy.dsef";
  write_features(read_features(e2e.data), copy, FeatureFormat::dsef);
  const bool dsef = read_file_bytes(copy) == original;
  const fs::path csv = work_dir() / "benchmark.csv";
  write_features(read_features(e2e.data), csv, FeatureFormat::csv);
  const bool via_csv = encode_dsef(read_features(csv)) == original;

  std::size_t exact = 0;
  for (Method m : kAllMethods) {
    const fs::path path = e2e.parallel_dir / "models" / (std::string(to_string(m)) + ".model");
    const std::string bytes = read_file_bytes(path);
    const TrainedModel model = load_model(path);
    const fs::path resaved = work_dir() / "resaved.model";
    save_model(model, resaved);
    exact += read_file_bytes(resaved) == bytes && encode_model(decode_model(bytes)) == bytes;
  }
  return {dsef && via_csv && exact == kAllMethods.size(),
          std::string("DSEF read/write ") + (dsef ? "identical" : "DIFFERS") + ", via CSV " +
              (via_csv ? "identical" : "DIFFERS") + ", checkpoints bit-exact " +
              std::to_string(exact) + "/8 (1 DENN + 7 ensembles)"};
}

// Non-gating: real extracted features, when supplied.
void dataset_run() {
  const char* data = std::getenv("ENSEMBLEKIT_DSE_DATA");
  const char* threshold = std::getenv("ENSEMBLEKIT_DSE_THRESHOLD");
  if (!data || !threshold) {
    std::printf("SKIP  %-28s %8s   set ENSEMBLEKIT_DSE_DATA and ENSEMBLEKIT_DSE_THRESHOLD "
                "(non-gating)\n",
                "dataset_table_run", "-");
    return;
  }
  const fs::path dir = work_dir() / "compare_dse";
  const auto start = std::chrono::steady_clock::now();
  const int code = cli({"compare", "--data", data, "--threshold", threshold, "--out-dir",
                        dir.string()});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (code != 0) {
    std::printf("INFO  %-28s %8.2fs  compare exited %d (non-gating)\n", "dataset_table_run", secs,
                code);
    return;
  }
  const auto rows = parse_comparison_csv(read_file_bytes(dir / "comparison.csv"));
  const auto best = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.accuracy < b.accuracy;
  });
  std::printf("INFO  %-28s %8.2fs  %zu methods; best accuracy %s (%.6f) (non-gating)\n",
              "dataset_table_run", secs, rows.size(), best->method.c_str(), best->accuracy);
  std::printf("%s", comparison_csv(rows).c_str());
}

}  // namespace

int main() {
  report("gradient_correctness", gradient_correctness, 10.0);
  report("metric_identity", metric_identity, 1.0);
  report("softmax_cross_entropy", softmax_cross_entropy);
  report("smote_contract", smote_contract, 5.0);
  report("knn_oracle", knn_oracle);
  report("bagging_vote_equivalence", bagging_vote_equivalence);
  report("boosting_monotonicity", boosting_monotonicity);
  report("tree_oracle", tree_oracle);
  report("end_to_end_benchmark", end_to_end, 300.0);
  report("determinism", determinism);
  report("round_trips", round_trips);
  dataset_run();
  std::printf("%s: %d gating failure(s)\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
