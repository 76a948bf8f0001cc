#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ensemblekit/metrics.hpp"

namespace ensemblekit {

// One row of the method comparison table.
struct ComparisonRow {
  std::string method;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double g_mean = 0.0;

  bool operator==(const ComparisonRow&) const = default;
};

ComparisonRow comparison_row(std::string method, const MetricsReport& report);

// method,accuracy,precision,recall,f1,g_mean with six decimals.
std::string comparison_csv(std::span<const ComparisonRow> rows);
// Throws FormatError on a bad header or malformed row.
std::vector<ComparisonRow> parse_comparison_csv(std::string_view text);

// ,pred_0,pred_1 / true_0,a,b / true_1,c,d
std::string confusion_csv(const ConfusionMatrix& cm);
ConfusionMatrix parse_confusion_csv(std::string_view text);

// [{"method", "accuracy", "precision", "f1", "g_mean"}, ...]
std::string radar_json(std::span<const ComparisonRow> rows);

// Four axes (Accuracy, Precision, F1-Score, G-Mean) on [0,1], one polygon
// per method.
std::string radar_svg(std::span<const ComparisonRow> rows);

struct NamedConfusion {
  std::string method;
  ConfusionMatrix confusion;
};

std::string confusion_grid_svg(std::span<const NamedConfusion> items);

// Keys accuracy, precision, recall, f1, g_mean, confusion.
std::string metrics_json(const MetricsReport& report);

struct RunManifest {
  std::string command;
  std::string method;  // "all" for compare
  std::uint64_t seed = 0;
  std::string config_json = "{}";  // snapshot of the effective configuration
  std::string data_path;
  std::uint64_t data_hash = 0;
  std::uint64_t split_hash = 0;
  std::uint64_t smote_hash = 0;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;
};

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace ensemblekit
