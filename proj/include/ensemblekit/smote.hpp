#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/numeric.hpp"
#include "ensemblekit/parallel.hpp"

namespace ensemblekit {

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

// The k points closest to points[query] in Euclidean distance, excluding the
// query itself, ordered by (distance, index). Throws ContractError when
// k > points.size() - 1 or dimensions disagree.
std::vector<std::size_t> knn_indices(std::span<const Vector> points, std::size_t query,
                                     std::size_t k);

// Squared distances from row `query` to every row of `points`. The parallel
// and serial kernels return identical values.
void squared_distances(const Matrix& points, std::size_t query, std::span<double> out,
                       ExecPolicy policy = ExecPolicy::serial);

// Where one synthetic record came from: indices into the input set and the
// interpolation weight.
struct SyntheticOrigin {
  std::size_t sample = 0;
  std::size_t neighbor = 0;
  double lambda = 0.0;
};

struct SmoteResult {
  FeatureSet balanced;
  int minority_label = 0;
  std::size_t k_used = 0;
  std::vector<SyntheticOrigin> origins;  // one per appended synthetic record
};

// Oversamples the minority class until both classes have equal counts.
// Original records come first, in input order and untouched; synthetic
// records are appended and named "synthetic:<n>". Minority samples are
// visited round-robin; each visit draws one of the sample's k nearest
// minority neighbours and lambda ~ U[0, 1).
SmoteResult smote_balance_traced(const FeatureSet& train, const SmoteConfig& cfg);

FeatureSet smote_balance(const FeatureSet& train, const SmoteConfig& cfg);

}  // namespace ensemblekit
