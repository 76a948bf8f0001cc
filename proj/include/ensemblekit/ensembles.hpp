#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/linear.hpp"
#include "ensemblekit/numeric.hpp"
#include "ensemblekit/parallel.hpp"
#include "ensemblekit/tree.hpp"

namespace ensemblekit {

// The seven decision-level baselines.
enum class EnsembleKind : std::uint8_t {
  bagging = 1,
  boosting = 2,
  voting = 3,
  cascading = 4,
  blending = 5,
  dual_bb = 6,
  dynamic = 7,
};

inline constexpr EnsembleKind kAllEnsembleKinds[] = {
    EnsembleKind::bagging,  EnsembleKind::boosting, EnsembleKind::voting,
    EnsembleKind::cascading, EnsembleKind::blending, EnsembleKind::dual_bb,
    EnsembleKind::dynamic};

std::string_view to_string(EnsembleKind kind);
// Throws ContractError for unknown names.
EnsembleKind parse_ensemble_kind(std::string_view name);

struct EnsembleConfig {
  std::size_t n_trees = 100;
  std::size_t bagging_depth = 12;
  std::size_t forest_min_samples_leaf = 1;
  std::size_t forest_features_per_split = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::size_t boosting_rounds = 100;
  std::size_t boosting_depth = 3;
  double shrinkage = 0.1;
  double blend_holdout = 0.3;
  double dynamic_threshold = 0.5;
  // Member weights for the dynamic ensemble ({forest, gbm, logreg}); empty
  // means uniform.
  std::vector<double> dynamic_weights;
  LogRegConfig logreg;
  SvmConfig svm;
  std::uint64_t seed = 0;

  void validate() const;  // throws ContractError
  bool operator==(const EnsembleConfig&) const = default;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> seeds;  // per-tree bootstrap/feature seeds

  bool operator==(const RandomForest&) const = default;
};

struct GradientBoosting {
  double f0 = 0.0;  // initial log-odds
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;

  bool operator==(const GradientBoosting&) const = default;
};

struct BaggingMembers {
  RandomForest forest;
  bool operator==(const BaggingMembers&) const = default;
};
struct BoostingMembers {
  GradientBoosting gbm;
  bool operator==(const BoostingMembers&) const = default;
};
struct VotingMembers {
  LogisticRegression logreg;
  RandomForest forest;
  LinearSvm svm;
  bool operator==(const VotingMembers&) const = default;
};
struct CascadingMembers {
  RandomForest level1;
  LogisticRegression level2;  // over [x ; level1 probabilities]
  bool operator==(const CascadingMembers&) const = default;
};
struct BlendingMembers {
  RandomForest forest;
  LogisticRegression logreg;
  LogisticRegression meta;  // over [forest probs ; logreg probs]
  double holdout = 0.3;
  bool operator==(const BlendingMembers&) const = default;
};
struct DualMembers {
  RandomForest forest;
  GradientBoosting gbm;
  bool operator==(const DualMembers&) const = default;
};
struct DynamicMembers {
  RandomForest forest;
  GradientBoosting gbm;
  LogisticRegression logreg;
  std::vector<double> weights;  // normalized, one per member
  double threshold = 0.5;
  bool operator==(const DynamicMembers&) const = default;
};

using EnsembleMembers = std::variant<BaggingMembers, BoostingMembers, VotingMembers,
                                     CascadingMembers, BlendingMembers, DualMembers,
                                     DynamicMembers>;

struct EnsembleModel {
  std::size_t input_dim = 0;
  EnsembleMembers members;

  EnsembleKind kind() const;
  bool operator==(const EnsembleModel&) const = default;
};

// ---- bagging -------------------------------------------------------------

// Draws n indices in [0, n) with replacement.
std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng);

// Tree i is grown on a bootstrap resample drawn from
// Rng(derive_seed(seed, i)), so the serial and OpenMP kernels build
// identical forests.
RandomForest fit_forest(const Matrix& x, std::span<const int> y,
                        const EnsembleConfig& cfg, std::uint64_t seed,
                        ExecPolicy policy = ExecPolicy::parallel);

// Mean of per-tree leaf distributions, trees summed in order.
Matrix forest_predict_proba(const RandomForest& forest, const Matrix& x,
                            ExecPolicy policy = ExecPolicy::parallel);

// ---- boosting ------------------------------------------------------------

// Training log loss after 0, 1, ..., rounds trees (length rounds + 1).
using LossTrace = std::vector<double>;

// Binary log-loss gradient boosting. Each round fits a least-squares tree to
// the residuals y - sigmoid(F) and sets each leaf to its Newton value
// sum(residual) / sum(p (1 - p)). A leaf value that would raise the leaf's
// training loss is halved until it does not, so the trace never increases.
GradientBoosting fit_gradient_boosting(const Matrix& x, std::span<const int> y,
                                       const EnsembleConfig& cfg, std::uint64_t seed,
                                       LossTrace* trace = nullptr);

// Raw scores F(x) = f0 + sum_t shrinkage * tree_t(x), optionally truncated to
// the first `rounds` trees.
double gbm_score(const GradientBoosting& gbm, std::span<const double> x,
                 std::optional<std::size_t> rounds = std::nullopt);
Matrix gbm_predict_proba(const GradientBoosting& gbm, const Matrix& x,
                         ExecPolicy policy = ExecPolicy::parallel);

// ---- uniform contract ----------------------------------------------------

EnsembleModel rf_fit(const FeatureSet& train, const EnsembleConfig& cfg,
                     ExecPolicy policy = ExecPolicy::parallel);
EnsembleModel gbm_fit(const FeatureSet& train, const EnsembleConfig& cfg,
                      LossTrace* trace = nullptr);

EnsembleModel ensemble_fit(EnsembleKind kind, const FeatureSet& train,
                           const EnsembleConfig& cfg,
                           ExecPolicy policy = ExecPolicy::parallel);

// The base/holdout partition blending uses: stratified, disjoint.
Split blend_partition(const FeatureSet& train, const EnsembleConfig& cfg);

// [x ; probs] for each row.
Matrix augment_with_probabilities(const Matrix& x, const Matrix& probs);

// N x 2 class probabilities under the kind's combination rule.
Matrix ensemble_predict_proba(const EnsembleModel& model, const Matrix& x,
                              ExecPolicy policy = ExecPolicy::parallel);
Matrix ensemble_predict_proba(const EnsembleModel& model, const FeatureSet& set,
                              ExecPolicy policy = ExecPolicy::parallel);

// Argmax (ties to class 0) per row.
std::vector<int> argmax_labels(const Matrix& probs);

// dynamic: label 1 iff p1 >= threshold; every other kind: argmax.
std::vector<int> decide_labels(const Matrix& probs, EnsembleKind kind,
                               double dynamic_threshold);

}  // namespace ensemblekit
