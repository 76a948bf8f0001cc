#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/error.hpp"
#include "ensemblekit/rng.hpp"
#include "ensemblekit/smote.hpp"
#include "ensemblekit/synthetic.hpp"

using namespace ensemblekit;

namespace {

std::vector<std::size_t> brute_force_knn(const std::vector<Vector>& pts, std::size_t q,
                                         std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == q) continue;
    double d = 0.0;
    for (std::size_t j = 0; j < pts[i].size(); ++j) d += (pts[i][j] - pts[q][j]) * (pts[i][j] - pts[q][j]);
    all.push_back({d, i});
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

// Distance from p to the segment [a, b].
double segment_distance(const Vector& p, const Vector& a, const Vector& b) {
  double ab2 = 0.0, ap_ab = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    ab2 += (b[j] - a[j]) * (b[j] - a[j]);
    ap_ab += (p[j] - a[j]) * (b[j] - a[j]);
  }
  const double t = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double c = a[j] + t * (b[j] - a[j]);
    d2 += (p[j] - c) * (p[j] - c);
  }
  return std::sqrt(d2);
}

FeatureSet imbalanced(std::size_t n_major, std::size_t n_minor, std::size_t d, std::uint64_t seed) {
  FeatureSet s = synthetic::random_dataset(n_major + n_minor, d, seed);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.records[i].label = i < n_major ? kClean : kSoiled;
    s.records[i].power_loss = i < n_major ? 0.01 : 0.2 + 0.001 * static_cast<double>(i % 100);
  }
  return s;
}

}  // namespace

TEST_CASE("knn matches brute force, ties broken by index") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> pts(30, Vector(3));
    for (auto& p : pts)
      for (double& v : p) v = static_cast<double>(rng.uniform_index(4));  // many ties
    const std::size_t q = rng.uniform_index(30);
    CHECK(knn_indices(pts, q, 5) == brute_force_knn(pts, q, 5));
  }
}

TEST_CASE("knn example: collinear points") {
  const std::vector<Vector> pts = {{0.0}, {1.0}, {2.0}, {3.0}, {10.0}};
  CHECK(knn_indices(pts, 0, 2) == std::vector<std::size_t>{1, 2});
  CHECK(knn_indices(pts, 2, 2) == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(knn_indices(pts, 0, 5), ContractError);
}

TEST_CASE("squared distances: serial and parallel kernels agree exactly") {
  const FeatureSet s = synthetic::random_dataset(300, 7, 2);
  const Matrix x = feature_matrix(s);
  std::vector<double> a(300), b(300);
  for (std::size_t q : {0u, 17u, 299u}) {
    squared_distances(x, q, a, ExecPolicy::serial);
    squared_distances(x, q, b, ExecPolicy::parallel);
    CHECK(a == b);
    CHECK(a[q] == 0.0);
  }
}

TEST_CASE("smote balances, keeps originals and stays on segments") {
  const FeatureSet train = imbalanced(80, 20, 4, 3);
  const SmoteResult r = smote_balance_traced(train, SmoteConfig{5, 9});
  const auto hist = class_histogram(r.balanced);
  CHECK(hist.at(kClean) == 80);
  CHECK(hist.at(kSoiled) == 80);
  CHECK(r.minority_label == kSoiled);
  CHECK(r.k_used == 5);
  REQUIRE(r.origins.size() == 60);
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(r.balanced.records[i].features == train.records[i].features);
    CHECK(r.balanced.records[i].source_id == train.records[i].source_id);
  }
  for (std::size_t s = 0; s < r.origins.size(); ++s) {
    const auto& rec = r.balanced.records[train.size() + s];
    const auto& o = r.origins[s];
    CHECK(rec.label == kSoiled);
    CHECK(rec.source_id == "synthetic:" + std::to_string(s));
    CHECK(o.lambda >= 0.0);
    CHECK(o.lambda < 1.0);
    CHECK(train.records[o.sample].label == kSoiled);
    CHECK(train.records[o.neighbor].label == kSoiled);
    CHECK(segment_distance(rec.features, train.records[o.sample].features,
                           train.records[o.neighbor].features) < 1e-9);
  }
}

TEST_CASE("smote example: two minority points interpolate between each other") {
  FeatureSet s = imbalanced(4, 2, 2, 4);
  s.records[4].features = {0.0, 0.0};
  s.records[5].features = {1.0, 1.0};
  const SmoteResult r = smote_balance_traced(s, SmoteConfig{5, 1});
  CHECK(r.k_used == 1);
  REQUIRE(r.balanced.size() == 8);
  for (std::size_t i = 6; i < 8; ++i) {
    const auto& f = r.balanced.records[i].features;
    CHECK(f[0] == doctest::Approx(f[1]));
    CHECK(f[0] >= 0.0);
    CHECK(f[0] <= 1.0);
  }
}

TEST_CASE("smote is deterministic per seed") {
  const FeatureSet train = imbalanced(70, 30, 3, 5);
  CHECK(encode_dsef(smote_balance(train, SmoteConfig{5, 1})) ==
        encode_dsef(smote_balance(train, SmoteConfig{5, 1})));
  CHECK(encode_dsef(smote_balance(train, SmoteConfig{5, 1})) !=
        encode_dsef(smote_balance(train, SmoteConfig{5, 2})));
}

TEST_CASE("smote on already balanced data adds nothing") {
  const FeatureSet train = imbalanced(10, 10, 3, 6);
  const FeatureSet out = smote_balance(train, SmoteConfig{5, 1});
  CHECK(encode_dsef(out) == encode_dsef(train));
}

TEST_CASE("smote errors") {
  FeatureSet one_class = imbalanced(10, 0, 2, 7);
  CHECK_THROWS_AS(smote_balance(one_class, SmoteConfig{}), ContractError);
  FeatureSet single_minority = imbalanced(10, 1, 2, 8);
  CHECK_THROWS_AS(smote_balance(single_minority, SmoteConfig{}), ContractError);
}
