#include "ensemblekit/metrics.hpp"

#include <cmath>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ContractError("confusion_matrix: y_true and y_pred lengths differ");
  }
  if (y_true.empty()) throw ContractError("confusion_matrix: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw ContractError("confusion_matrix: labels must be 0 or 1");
    }
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

std::array<double, 2> per_class_f1(const ConfusionMatrix& cm) {
  std::array<double, 2> f1{};
  for (std::size_t c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(cm.counts[c][c]);
    const double predicted = static_cast<double>(cm.counts[0][c] + cm.counts[1][c]);
    const double actual = static_cast<double>(cm.counts[c][0] + cm.counts[c][1]);
    const double precision = ratio(tp, predicted);
    const double recall = ratio(tp, actual);
    f1[c] = ratio(2.0 * precision * recall, precision + recall);
  }
  return f1;
}

WeightedScores weighted_prf(const ConfusionMatrix& cm) {
  const double n = static_cast<double>(cm.total());
  if (n == 0.0) throw ContractError("weighted_prf: empty confusion matrix");
  const auto f1 = per_class_f1(cm);
  WeightedScores s;
  for (std::size_t c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(cm.counts[c][c]);
    const double predicted = static_cast<double>(cm.counts[0][c] + cm.counts[1][c]);
    const double actual = static_cast<double>(cm.counts[c][0] + cm.counts[c][1]);
    const double weight = actual / n;
    s.precision_weighted += weight * ratio(tp, predicted);
    s.recall_weighted += weight * ratio(tp, actual);
    s.f1_weighted += weight * f1[c];
  }
  s.accuracy = static_cast<double>(cm.counts[0][0] + cm.counts[1][1]) / n;
  return s;
}

double g_mean(const ConfusionMatrix& cm, GMeanMode mode) {
  const double tn = static_cast<double>(cm.counts[0][0]);
  const double fp = static_cast<double>(cm.counts[0][1]);
  const double fn = static_cast<double>(cm.counts[1][0]);
  const double tp = static_cast<double>(cm.counts[1][1]);
  const double sensitivity = ratio(tp, tp + fn);
  if (mode == GMeanMode::precision_recall) {
    return std::sqrt(ratio(tp, tp + fp) * sensitivity);
  }
  return std::sqrt(sensitivity * ratio(tn, tn + fp));
}

MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                       GMeanMode mode) {
  MetricsReport r;
  r.confusion = confusion_matrix(y_true, y_pred);
  const WeightedScores s = weighted_prf(r.confusion);
  r.accuracy = s.accuracy;
  r.precision_weighted = s.precision_weighted;
  r.recall_weighted = s.recall_weighted;
  r.f1_weighted = s.f1_weighted;
  r.g_mean = g_mean(r.confusion, mode);
  return r;
}

}  // namespace ensemblekit
