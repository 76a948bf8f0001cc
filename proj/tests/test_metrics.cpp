#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "ensemblekit/error.hpp"
#include "ensemblekit/metrics.hpp"
#include "ensemblekit/rng.hpp"

using namespace ensemblekit;

namespace {

ConfusionMatrix cm_of(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  ConfusionMatrix cm;
  cm.counts = {{{a, b}, {c, d}}};
  return cm;
}

}  // namespace

TEST_CASE("confusion matrix example") {
  const std::vector<int> t = {0, 0, 1, 1}, p = {0, 1, 1, 1};
  CHECK(confusion_matrix(t, p) == cm_of(1, 1, 0, 2));
  CHECK(confusion_matrix(t, t) == cm_of(2, 0, 0, 2));
  CHECK_THROWS_AS(confusion_matrix(t, std::vector<int>{0, 1}), ContractError);
  CHECK_THROWS_AS(confusion_matrix(std::vector<int>{}, std::vector<int>{}), ContractError);
  CHECK_THROWS_AS(confusion_matrix(std::vector<int>{2}, std::vector<int>{0}), ContractError);
}

TEST_CASE("weighted scores example [[1,1],[0,2]]") {
  const WeightedScores s = weighted_prf(cm_of(1, 1, 0, 2));
  CHECK(s.accuracy == 0.75);
  CHECK(s.recall_weighted == 0.75);
  CHECK(s.precision_weighted == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  // f1_0 = 2/3, f1_1 = 0.8, weights 1/2 each.
  CHECK(s.f1_weighted == doctest::Approx(0.5 * (2.0 / 3.0) + 0.5 * 0.8).epsilon(1e-15));
}

TEST_CASE("perfect predictions score 1 everywhere") {
  const MetricsReport r = evaluate(std::vector<int>{0, 1, 1, 0, 1}, std::vector<int>{0, 1, 1, 0, 1});
  CHECK(r.accuracy == 1.0);
  CHECK(r.precision_weighted == 1.0);
  CHECK(r.recall_weighted == 1.0);
  CHECK(r.f1_weighted == 1.0);
  CHECK(r.g_mean == 1.0);
}

TEST_CASE("g-mean examples") {
  CHECK(g_mean(cm_of(90, 10, 5, 95)) == doctest::Approx(std::sqrt(0.95 * 0.90)).epsilon(1e-15));
  CHECK(std::abs(g_mean(cm_of(90, 10, 5, 95)) - 0.924662) < 5e-7);
  CHECK(g_mean(cm_of(0, 10, 0, 5)) == 0.0);  // everything predicted soiled
  CHECK(g_mean(cm_of(10, 0, 0, 0)) == 0.0);  // no positives
  // precision-recall mode: precision_1 = 95/105, recall_1 = 95/100.
  CHECK(g_mean(cm_of(90, 10, 5, 95), GMeanMode::precision_recall) ==
        doctest::Approx(std::sqrt(95.0 / 105.0 * 0.95)));
}

TEST_CASE("a class never predicted gets precision 0 and f1 0") {
  const WeightedScores s = weighted_prf(cm_of(8, 0, 2, 0));
  CHECK(s.precision_weighted == doctest::Approx(0.8 * 0.8));
  CHECK(per_class_f1(cm_of(8, 0, 2, 0))[1] == 0.0);
}

TEST_CASE("properties over random label pairs") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(60);
    const double rate = rng.uniform01();
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.uniform01() < rate;
      p[i] = rng.uniform01() < 0.5 ? t[i] : 1 - t[i];
    }
    const MetricsReport r = evaluate(t, p);
    CHECK(std::abs(r.recall_weighted - r.accuracy) <= 1e-12);
    CHECK(r.confusion.total() == n);
    for (double v : {r.accuracy, r.precision_weighted, r.recall_weighted, r.f1_weighted, r.g_mean}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto f1 = per_class_f1(r.confusion);
    CHECK(r.f1_weighted >= std::min(f1[0], f1[1]) - 1e-12);
    CHECK(r.f1_weighted <= std::max(f1[0], f1[1]) + 1e-12);
    // Simultaneous permutation leaves every metric unchanged.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<int> t2(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) {
      t2[i] = t[order[i]];
      p2[i] = p[order[i]];
    }
    const MetricsReport r2 = evaluate(t2, p2);
    CHECK(r2.confusion == r.confusion);
    CHECK(r2.f1_weighted == r.f1_weighted);
    CHECK(r2.g_mean == r.g_mean);
  }
}

TEST_CASE("g-mean equals accuracy for symmetric balanced confusion") {
  for (std::uint64_t a : {1u, 5u, 40u}) {
    const ConfusionMatrix cm = cm_of(a, 50 - a, 50 - a, a);
    CHECK(g_mean(cm) == doctest::Approx(weighted_prf(cm).accuracy).epsilon(1e-15));
  }
}
