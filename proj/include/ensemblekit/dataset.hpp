#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ensemblekit/numeric.hpp"

namespace ensemblekit {

inline constexpr int kClean = 0;
inline constexpr int kSoiled = 1;

struct FeatureRecord {
  Vector features;
  double power_loss = 0.0;  // fraction of output lost, in [0, 1]
  int label = kClean;
  std::string source_id;

  bool operator==(const FeatureRecord&) const = default;
};

struct FeatureSet {
  std::size_t dim = 0;
  bool labeled = true;  // false until labels were assigned (DSEF flag bit 0)
  std::vector<FeatureRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  std::vector<int> labels() const;

  // Throws DataError on the first record that breaks an invariant.
  void validate() const;

  bool operator==(const FeatureSet&) const = default;
};

// Row-major copy of all feature vectors.
Matrix feature_matrix(const FeatureSet& set);

// Compares everything the DSEF payload carries (dim, flags, features,
// power_loss, labels); source ids are not part of DSEF.
bool same_payload(const FeatureSet& a, const FeatureSet& b);

enum class FeatureFormat { dsef, csv };

inline constexpr std::string_view kDsefMagic = "DSEF";
inline constexpr std::uint32_t kDsefVersion = 1;
inline constexpr std::size_t kDsefHeaderBytes = 4 + 4 + 8 + 4 + 1;

// DSEF v1 encoding. Features are narrowed to float32.
std::string encode_dsef(const FeatureSet& set);
// Records read back are named "dsef:<index>".
FeatureSet decode_dsef(std::string_view bytes);

std::string encode_csv(const FeatureSet& set);
FeatureSet decode_csv(std::string_view text);

// Detects DSEF by its magic bytes, otherwise parses the CSV schema.
FeatureSet read_features(const std::filesystem::path& path);
void write_features(const FeatureSet& set, const std::filesystem::path& path,
                    FeatureFormat format);

// label := soiled when power_loss >= threshold. Requires 0 < threshold < 1.
FeatureSet binarize_labels(const FeatureSet& set, double threshold);

struct SplitConfig {
  double test_fraction = 0.20;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct Split {
  FeatureSet train;
  FeatureSet test;
};

// Per class, round(count * test_fraction) records go to the test side; both
// sides keep the original record order.
Split stratified_split(const FeatureSet& set, const SplitConfig& cfg);

std::map<int, std::size_t> class_histogram(const FeatureSet& set);

}  // namespace ensemblekit
