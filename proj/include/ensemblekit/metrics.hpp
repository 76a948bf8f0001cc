#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace ensemblekit {

// Binary confusion matrix; counts[true][predicted].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};

  std::uint64_t total() const noexcept {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

enum class GMeanMode {
  sensitivity_specificity,  // sqrt(TPR * TNR), the default
  precision_recall,         // sqrt(precision_1 * recall_1)
};

struct WeightedScores {
  double accuracy = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_weighted = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_weighted = 0.0;
  double g_mean = 0.0;
  ConfusionMatrix confusion;
};

// Throws ContractError on length mismatch, empty input or labels outside {0,1}.
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred);

// Per-class precision/recall/F1 averaged with weights true_c / N. A class
// with no predictions has precision 0; F1 is 0 when precision and recall
// are both 0. Weighted recall is identically the accuracy.
WeightedScores weighted_prf(const ConfusionMatrix& cm);

// Per-class F1 scores (index = class).
std::array<double, 2> per_class_f1(const ConfusionMatrix& cm);

// A rate whose denominator is zero counts as 0.
double g_mean(const ConfusionMatrix& cm, GMeanMode mode = GMeanMode::sensitivity_specificity);

MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                       GMeanMode mode = GMeanMode::sensitivity_specificity);

}  // namespace ensemblekit
