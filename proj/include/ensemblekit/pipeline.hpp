#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ensemblekit/checkpoint.hpp"
#include "ensemblekit/dataset.hpp"
#include "ensemblekit/denn.hpp"
#include "ensemblekit/ensembles.hpp"
#include "ensemblekit/metrics.hpp"
#include "ensemblekit/smote.hpp"

namespace ensemblekit {

// DENN plus the seven baselines, in reporting order.
enum class Method : std::uint8_t {
  denn,
  bagging,
  boosting,
  voting,
  cascading,
  blending,
  dual_bb,
  dynamic,
};

inline constexpr std::array<Method, 8> kAllMethods = {
    Method::denn,      Method::bagging,  Method::boosting, Method::voting,
    Method::cascading, Method::blending, Method::dual_bb,  Method::dynamic};

std::string_view to_string(Method method);
// Throws ContractError for unknown names.
Method parse_method(std::string_view name);
Method method_of(const TrainedModel& model);

struct PipelineConfig {
  double threshold = 0.0;  // required; no default soiling cut
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t smote_k = 5;
  DennConfig denn;          // input_dim and seed are filled per run
  EnsembleConfig ensemble;  // seed is filled per run
  ExecPolicy policy = ExecPolicy::parallel;
};

// Every method's seed is derived from the run seed and the method, so
// `train --method m` and `compare` build the same model for m.
std::uint64_t method_seed(std::uint64_t seed, Method method);

struct PreparedData {
  FeatureSet train;     // after the split, before SMOTE
  FeatureSet test;
  FeatureSet balanced;  // SMOTE(train)
  std::uint64_t split_hash = 0;  // fnv1a64 over DSEF(train) + DSEF(test)
  std::uint64_t smote_hash = 0;  // fnv1a64 over DSEF(balanced)
};

// binarize -> stratified split -> SMOTE on the training part only.
PreparedData prepare_data(const FeatureSet& raw, const PipelineConfig& cfg);

struct MethodFit {
  TrainedModel model;
  std::optional<TrainReport> denn_report;
};

MethodFit fit_method(Method method, const FeatureSet& train, const PipelineConfig& cfg,
                     const EpochCallback& on_epoch = {});

std::size_t model_input_dim(const TrainedModel& model);

// Throws ContractError when the set's dim differs from the model's.
Matrix model_predict_proba(const TrainedModel& model, const FeatureSet& set,
                           ExecPolicy policy = ExecPolicy::parallel);

// The method's decision rule: threshold for the dynamic ensemble, argmax
// for everything else.
std::vector<int> model_decide(const TrainedModel& model, const Matrix& probs);

MetricsReport evaluate_model(const TrainedModel& model, const FeatureSet& labeled,
                             GMeanMode mode = GMeanMode::sensitivity_specificity,
                             ExecPolicy policy = ExecPolicy::parallel);

}  // namespace ensemblekit
