#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/numeric.hpp"

namespace ensemblekit {

struct LogisticRegression {
  Vector weights;
  double bias = 0.0;
  double l2 = 1e-4;

  bool operator==(const LogisticRegression&) const = default;
};

struct LogRegConfig {
  double l2 = 1e-4;
  std::size_t epochs = 300;
  double lr = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const LogRegConfig&) const = default;
};

// Mean log loss + (l2/2)||w||^2 over rows of x with labels y in {0,1}.
double logreg_objective(const LogisticRegression& model, const Matrix& x,
                        std::span<const int> y);
// Gradient of logreg_objective; grad_w has x.cols() entries.
void logreg_gradient(const LogisticRegression& model, const Matrix& x,
                     std::span<const int> y, Vector& grad_w, double& grad_b);

// Full-batch gradient descent from zero weights. Steps are taken in
// standardized coordinates (a diagonal preconditioner) with backtracking, but
// the objective minimized is the raw-feature one above and the returned
// weights apply to raw features. Deterministic; `seed` is accepted for
// interface uniformity and unused by the full-batch solver.
LogisticRegression logreg_fit(const Matrix& x, std::span<const int> y,
                              const LogRegConfig& cfg);
LogisticRegression logreg_fit(const FeatureSet& train, double l2, std::size_t epochs,
                              double lr, std::uint64_t seed);

// [1 - p, p] with p = sigmoid(w.x + b).
Vector logreg_predict_proba(const LogisticRegression& model, std::span<const double> x);

struct LinearSvm {
  Vector weights;
  double bias = 0.0;
  double c = 1.0;
  double platt_a = 0.0;
  double platt_b = 0.0;

  double decision_value(std::span<const double> x) const;
  bool operator==(const LinearSvm&) const = default;
};

struct SvmConfig {
  double c = 1.0;
  std::size_t epochs = 300;
  double lr = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const SvmConfig&) const = default;
};

// (1/2)||w||^2 + c * sum_i max(0, 1 - t_i (w.x_i + b)), t_i = +-1.
double svm_objective(const LinearSvm& model, const Matrix& x, std::span<const int> y);

// Deterministic full-batch subgradient descent (step lr/sqrt(k), best
// iterate kept) followed by Platt scaling on the training decision values.
LinearSvm svm_fit(const Matrix& x, std::span<const int> y, const SvmConfig& cfg);
LinearSvm svm_fit(const FeatureSet& train, double c, std::size_t epochs, double lr,
                  std::uint64_t seed);

// Platt's sigmoid fit (Newton with backtracking, smoothed targets) of
// P(y=1 | s) = 1 / (1 + exp(a s + b)). Returns {a, b}.
std::pair<double, double> platt_fit(std::span<const double> scores, std::span<const int> y);

// s = w.x + b; p = 1 / (1 + exp(platt_a s + platt_b)); returns [1 - p, p].
Vector svm_predict_proba(const LinearSvm& model, std::span<const double> x);

}  // namespace ensemblekit
