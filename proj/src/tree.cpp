#include "ensemblekit/tree.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <utility>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // lower is better
};

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

// Shared recursive builder. `Stats` supplies the per-node statistic and
// split score for either Gini classification or squared-error regression.
template <class Stats>
class Builder {
 public:
  Builder(const Matrix& x, const Stats& stats, const TreeParams& params, Rng& rng)
      : x_(x), stats_(stats), params_(params), rng_(rng) {
    const std::size_t d = x.cols();
    per_split_ = params.features_per_split == 0 ? d : std::min(params.features_per_split, d);
    features_.resize(d);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    stats_.describe(rows, nodes_[id]);

    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    if (depth >= params_.max_depth || rows.size() < 2 * min_leaf || stats_.pure(rows)) {
      return id;
    }
    const SplitChoice best = search(rows, min_leaf);
    if (!best.found) return id;
    assert(best.score <= stats_.node_score(rows) + 1e-9);

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    nodes_[id].feature = static_cast<std::int32_t>(best.feature);
    nodes_[id].threshold = best.threshold;
    const std::int32_t l = grow(std::move(left), depth + 1);
    nodes_[id].left = l;
    const std::int32_t r = grow(std::move(right), depth + 1);
    nodes_[id].right = r;
    return id;
  }

  SplitChoice search(const std::vector<std::size_t>& rows, std::size_t min_leaf) {
    const std::size_t d = features_.size();
    std::vector<std::size_t> order = features_;
    if (per_split_ < d) {
      // Partial Fisher-Yates: the first per_split_ entries are the sample.
      for (std::size_t i = 0; i < per_split_; ++i) {
        const std::size_t j =
            i + rng_.uniform_index(static_cast<std::uint32_t>(d - i));
        std::swap(order[i], order[j]);
      }
    }
    auto sampled_end = order.begin() + static_cast<std::ptrdiff_t>(per_split_);
    std::sort(order.begin(), sampled_end);
    std::sort(sampled_end, order.end());

    SplitChoice best;
    std::vector<std::pair<double, std::size_t>> column(rows.size());
    for (std::size_t k = 0; k < d; ++k) {
      if (k == per_split_ && best.found) break;
      const std::size_t f = order[k];
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], f), rows[i]};
      std::sort(column.begin(), column.end());
      stats_.scan(column, min_leaf, [&](std::size_t i, double score) {
        if (!best.found || score < best.score) {
          best.found = true;
          best.score = score;
          best.feature = f;
          best.threshold = midpoint(column[i].first, column[i + 1].first);
        }
      });
    }
    return best;
  }

  const Matrix& x_;
  const Stats& stats_;
  TreeParams params_;
  Rng& rng_;
  std::size_t per_split_ = 0;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;
};

class GiniStats {
 public:
  explicit GiniStats(std::span<const int> y) : y_(y) {}

  std::array<double, 2> counts(const std::vector<std::size_t>& rows) const {
    std::array<double, 2> c{0.0, 0.0};
    for (std::size_t r : rows) c[static_cast<std::size_t>(y_[r])] += 1.0;
    return c;
  }
  void describe(const std::vector<std::size_t>& rows, TreeNode& node) const {
    node.class_counts = counts(rows);
  }
  bool pure(const std::vector<std::size_t>& rows) const {
    const auto c = counts(rows);
    return c[0] == 0.0 || c[1] == 0.0;
  }
  double node_score(const std::vector<std::size_t>& rows) const { return gini(counts(rows)); }

  // Calls emit(i, weighted_gini) for every admissible cut between sorted
  // positions i and i+1.
  template <class Emit>
  void scan(const std::vector<std::pair<double, std::size_t>>& column, std::size_t min_leaf,
            Emit&& emit) const {
    const std::size_t n = column.size();
    std::array<double, 2> total{0.0, 0.0};
    for (const auto& [v, r] : column) total[static_cast<std::size_t>(y_[r])] += 1.0;
    std::array<double, 2> left{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left[static_cast<std::size_t>(y_[column[i].second])] += 1.0;
      const std::size_t n_left = i + 1;
      if (n_left < min_leaf) continue;
      if (n - n_left < min_leaf) break;
      if (!(column[i].first < column[i + 1].first)) continue;
      const std::array<double, 2> right{total[0] - left[0], total[1] - left[1]};
      const double score = (static_cast<double>(n_left) * gini(left) +
                            static_cast<double>(n - n_left) * gini(right)) /
                           static_cast<double>(n);
      emit(i, score);
    }
  }

 private:
  std::span<const int> y_;
};

class SquaredErrorStats {
 public:
  explicit SquaredErrorStats(std::span<const double> t) : t_(t) {}

  void describe(const std::vector<std::size_t>& rows, TreeNode& node) const {
    double s = 0.0;
    for (std::size_t r : rows) s += t_[r];
    node.value = rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
    node.class_counts = {static_cast<double>(rows.size()), 0.0};
  }
  bool pure(const std::vector<std::size_t>& rows) const {
    for (std::size_t r : rows) {
      if (t_[r] != t_[rows.front()]) return false;
    }
    return true;
  }
  double node_score(const std::vector<std::size_t>& rows) const {
    double s = 0.0, ss = 0.0;
    for (std::size_t r : rows) {
      s += t_[r];
      ss += t_[r] * t_[r];
    }
    return ss - s * s / static_cast<double>(rows.size());
  }

  template <class Emit>
  void scan(const std::vector<std::pair<double, std::size_t>>& column, std::size_t min_leaf,
            Emit&& emit) const {
    const std::size_t n = column.size();
    double total = 0.0, total_sq = 0.0;
    for (const auto& [v, r] : column) {
      total += t_[r];
      total_sq += t_[r] * t_[r];
    }
    double left = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double t = t_[column[i].second];
      left += t;
      left_sq += t * t;
      const std::size_t n_left = i + 1;
      if (n_left < min_leaf) continue;
      if (n - n_left < min_leaf) break;
      if (!(column[i].first < column[i + 1].first)) continue;
      const double nl = static_cast<double>(n_left);
      const double nr = static_cast<double>(n - n_left);
      const double right = total - left;
      const double right_sq = total_sq - left_sq;
      emit(i, (left_sq - left * left / nl) + (right_sq - right * right / nr));
    }
  }

 private:
  std::span<const double> t_;
};

template <class Node>
std::size_t route(const std::vector<Node>& nodes, std::span<const double> x) {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                     ? n.left
                                     : n.right);
  }
  return i;
}

void check_fit_inputs(const Matrix& x, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ContractError("tree_fit: empty training set");
  if (x.cols() == 0) throw ContractError("tree_fit: zero-dimensional features");
  for (std::size_t r : rows) {
    if (r >= x.rows()) throw ContractError("tree_fit: row index out of range");
  }
}

}  // namespace

double gini(const std::array<double, 2>& counts) {
  const double n = counts[0] + counts[1];
  if (n <= 0.0) return 0.0;
  const double p0 = counts[0] / n;
  const double p1 = counts[1] / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
  return route(nodes, x);
}

std::size_t RegressionTree::leaf_index(std::span<const double> x) const {
  return route(nodes, x);
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  // Children always have larger indices than their parent (preorder).
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

DecisionTree tree_fit(const Matrix& x, std::span<const int> y,
                      std::span<const std::size_t> rows, const TreeParams& params,
                      Rng& rng) {
  check_fit_inputs(x, rows);
  for (std::size_t r : rows) {
    if (y[r] != 0 && y[r] != 1) throw ContractError("tree_fit: labels must be 0 or 1");
  }
  GiniStats stats(y);
  Builder<GiniStats> builder(x, stats, params, rng);
  DecisionTree tree;
  tree.params = params;
  tree.nodes = builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
  return tree;
}

DecisionTree tree_fit(const FeatureSet& train, const TreeParams& params, Rng& rng) {
  if (train.empty()) throw ContractError("tree_fit: empty training set");
  const Matrix x = feature_matrix(train);
  const std::vector<int> y = train.labels();
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return tree_fit(x, y, rows, params, rng);
}

Vector tree_predict_proba(const DecisionTree& tree, std::span<const double> x) {
  const auto& counts = tree.nodes[tree.leaf_index(x)].class_counts;
  const double n = counts[0] + counts[1];
  return {counts[0] / n, counts[1] / n};
}

RegressionTree regression_tree_fit(const Matrix& x, std::span<const double> targets,
                                   std::span<const std::size_t> rows,
                                   const TreeParams& params, Rng& rng) {
  check_fit_inputs(x, rows);
  SquaredErrorStats stats(targets);
  Builder<SquaredErrorStats> builder(x, stats, params, rng);
  RegressionTree tree;
  tree.nodes = builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
  return tree;
}

}  // namespace ensemblekit
