#include "ensemblekit/smote.hpp"

#include <algorithm>
#include <numeric>

#include "ensemblekit/error.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

// Selects the k smallest (distance, index) pairs, skipping `query`.
std::vector<std::size_t> k_smallest(std::span<const double> dist, std::size_t query,
                                    std::size_t k) {
  std::vector<std::size_t> order;
  order.reserve(dist.size() - 1);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (i != query) order.push_back(i);
  }
  auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), closer);
  order.resize(k);
  return order;
}

}  // namespace

void squared_distances(const Matrix& points, std::size_t query, std::span<double> out,
                       ExecPolicy policy) {
  if (query >= points.rows() || out.size() != points.rows()) {
    throw ContractError("squared_distances: bad query index or output size");
  }
  const auto q = points.row(query);
  if (policy == ExecPolicy::parallel) {
    const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          squared_distance(points.row(static_cast<std::size_t>(i)), q);
    }
  } else {
    for (std::size_t i = 0; i < points.rows(); ++i) {
      out[i] = squared_distance(points.row(i), q);
    }
  }
}

std::vector<std::size_t> knn_indices(std::span<const Vector> points, std::size_t query,
                                     std::size_t k) {
  if (points.empty() || query >= points.size()) {
    throw ContractError("knn_indices: query index out of range");
  }
  if (k > points.size() - 1) {
    throw ContractError("knn_indices: k=" + std::to_string(k) + " exceeds the " +
                        std::to_string(points.size() - 1) + " available neighbours");
  }
  const std::size_t dim = points[query].size();
  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) throw ContractError("knn_indices: mixed dimensions");
    dist[i] = squared_distance(points[i], points[query]);
  }
  return k_smallest(dist, query, k);
}

SmoteResult smote_balance_traced(const FeatureSet& train, const SmoteConfig& cfg) {
  if (cfg.k_neighbors < 1) throw ContractError("smote: k_neighbors must be >= 1");
  const auto hist = class_histogram(train);
  const std::size_t n_clean = hist.contains(kClean) ? hist.at(kClean) : 0;
  const std::size_t n_soiled = hist.contains(kSoiled) ? hist.at(kSoiled) : 0;
  if (n_clean == 0 || n_soiled == 0) {
    throw ContractError("smote: both classes must be present in the training set");
  }

  SmoteResult result;
  result.balanced = train;
  result.minority_label = n_soiled < n_clean ? kSoiled : kClean;
  if (n_clean == n_soiled) return result;

  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.records[i].label == result.minority_label) minority.push_back(i);
  }
  const std::size_t m = minority.size();
  if (m < 2) throw ContractError("smote: the minority class needs at least 2 samples");
  result.k_used = std::min(cfg.k_neighbors, m - 1);

  Matrix points(m, train.dim);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& f = train.records[minority[i]].features;
    std::copy(f.begin(), f.end(), points.row(i).begin());
  }

  // Neighbour lists are filled lazily; the round-robin visits every minority
  // sample once per pass.
  std::vector<std::vector<std::size_t>> neighbours(m);
  std::vector<double> dist(m);

  const std::size_t needed = std::max(n_clean, n_soiled) - m;
  Rng rng(cfg.seed);
  result.balanced.records.reserve(train.size() + needed);
  result.origins.reserve(needed);
  for (std::size_t c = 0; c < needed; ++c) {
    const std::size_t local = c % m;
    if (neighbours[local].empty()) {
      squared_distances(points, local, dist, ExecPolicy::serial);
      neighbours[local] = k_smallest(dist, local, result.k_used);
    }
    const std::size_t pick =
        neighbours[local][rng.uniform_index(static_cast<std::uint32_t>(result.k_used))];
    const double lambda = rng.uniform01();

    const auto& x = train.records[minority[local]];
    const auto& n = train.records[minority[pick]];
    FeatureRecord s;
    s.features.resize(train.dim);
    for (std::size_t j = 0; j < train.dim; ++j) {
      s.features[j] = x.features[j] + lambda * (n.features[j] - x.features[j]);
    }
    s.power_loss = x.power_loss + lambda * (n.power_loss - x.power_loss);
    s.label = result.minority_label;
    s.source_id = "synthetic:" + std::to_string(c);
    result.balanced.records.push_back(std::move(s));
    result.origins.push_back({minority[local], minority[pick], lambda});
  }
  return result;
}

FeatureSet smote_balance(const FeatureSet& train, const SmoteConfig& cfg) {
  return smote_balance_traced(train, cfg).balanced;
}

}  // namespace ensemblekit
