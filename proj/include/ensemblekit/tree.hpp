#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/numeric.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit {

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct TreeParams {
  std::size_t max_depth = 16;
  std::size_t min_samples_leaf = 2;
  std::size_t features_per_split = 0;  // 0 = all features

  bool operator==(const TreeParams&) const = default;
};

// One node of a binary tree stored in a flat array. Internal nodes route
// x[feature] <= threshold to `left`. Every node keeps the class counts of
// the training rows that reached it; regression leaves also carry `value`.
struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, 2> class_counts{0.0, 0.0};
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Classification tree grown with Gini impurity.
struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  TreeParams params;

  std::size_t leaf_index(std::span<const double> x) const;
  std::size_t depth() const;
  bool operator==(const DecisionTree&) const = default;
};

// Least-squares regression tree; used by gradient boosting.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  std::size_t leaf_index(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
  bool operator==(const RegressionTree&) const = default;
};

// 1 - sum_c p_c^2
double gini(const std::array<double, 2>& counts);

// Greedy CART. At every node a random subset of features_per_split features
// is searched (ascending index order); candidate thresholds are midpoints
// between consecutive distinct sorted values. Ties keep the lowest feature
// and then the lowest threshold. If none of the sampled features admits a
// valid split the remaining features are searched too. Growth stops on a
// pure node, at max_depth, or when no split leaves min_samples_leaf rows on
// both sides. `rows` may repeat indices (bootstrap samples).
DecisionTree tree_fit(const Matrix& x, std::span<const int> y,
                      std::span<const std::size_t> rows, const TreeParams& params,
                      Rng& rng);
DecisionTree tree_fit(const FeatureSet& train, const TreeParams& params, Rng& rng);

// Normalized class counts of the leaf x falls into.
Vector tree_predict_proba(const DecisionTree& tree, std::span<const double> x);

// Regression tree on `targets` minimizing squared error; leaf values are the
// leaf means (callers may overwrite them).
RegressionTree regression_tree_fit(const Matrix& x, std::span<const double> targets,
                                   std::span<const std::size_t> rows,
                                   const TreeParams& params, Rng& rng);

}  // namespace ensemblekit
