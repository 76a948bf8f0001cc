#include "ensemblekit/pipeline.hpp"

#include "ensemblekit/binary_io.hpp"
#include "ensemblekit/error.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit {

namespace {

constexpr std::uint64_t kSplitStream = 0x5917;
constexpr std::uint64_t kSmoteStream = 0x5307e;
constexpr std::uint64_t kMethodStreamBase = 0xe7400;

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::denn: return "denn";
    case Method::bagging: return "bagging";
    case Method::boosting: return "boosting";
    case Method::voting: return "voting";
    case Method::cascading: return "cascading";
    case Method::blending: return "blending";
    case Method::dual_bb: return "dual_bb";
    case Method::dynamic: return "dynamic";
  }
  throw ContractError("unknown method");
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw ContractError("unknown method '" + std::string(name) + "'");
}

Method method_of(const TrainedModel& model) {
  if (std::holds_alternative<DennModel>(model)) return Method::denn;
  return parse_method(to_string(std::get<EnsembleModel>(model).kind()));
}

std::uint64_t method_seed(std::uint64_t seed, Method method) {
  return derive_seed(seed, kMethodStreamBase + static_cast<std::uint64_t>(method));
}

PreparedData prepare_data(const FeatureSet& raw, const PipelineConfig& cfg) {
  if (raw.empty()) throw ContractError("prepare_data: no records");
  const FeatureSet labeled = binarize_labels(raw, cfg.threshold);
  Split split = stratified_split(
      labeled, SplitConfig{cfg.test_fraction, derive_seed(cfg.seed, kSplitStream), true});

  PreparedData data;
  data.balanced = smote_balance(
      split.train, SmoteConfig{cfg.smote_k, derive_seed(cfg.seed, kSmoteStream)});
  data.split_hash = fnv1a64(encode_dsef(split.train) + encode_dsef(split.test));
  data.smote_hash = fnv1a64(encode_dsef(data.balanced));
  data.train = std::move(split.train);
  data.test = std::move(split.test);
  return data;
}

MethodFit fit_method(Method method, const FeatureSet& train, const PipelineConfig& cfg,
                     const EpochCallback& on_epoch) {
  const std::uint64_t seed = method_seed(cfg.seed, method);
  if (method == Method::denn) {
    DennConfig dc = cfg.denn;
    dc.input_dim = train.dim;
    dc.seed = seed;
    DennFit fit = denn_fit(train, dc, on_epoch);
    return {std::move(fit.model), std::move(fit.report)};
  }
  EnsembleConfig ec = cfg.ensemble;
  ec.seed = seed;
  return {ensemble_fit(parse_ensemble_kind(to_string(method)), train, ec, cfg.policy),
          std::nullopt};
}

std::size_t model_input_dim(const TrainedModel& model) {
  if (const auto* d = std::get_if<DennModel>(&model)) return d->config.input_dim;
  return std::get<EnsembleModel>(model).input_dim;
}

Matrix model_predict_proba(const TrainedModel& model, const FeatureSet& set,
                           ExecPolicy policy) {
  if (set.dim != model_input_dim(model)) {
    throw ContractError("data has dim " + std::to_string(set.dim) + " but the model expects " +
                        std::to_string(model_input_dim(model)));
  }
  if (const auto* d = std::get_if<DennModel>(&model)) {
    return denn_predict_proba(*d, set, policy);
  }
  return ensemble_predict_proba(std::get<EnsembleModel>(model), set, policy);
}

std::vector<int> model_decide(const TrainedModel& model, const Matrix& probs) {
  if (const auto* e = std::get_if<EnsembleModel>(&model)) {
    double threshold = 0.5;
    if (const auto* dyn = std::get_if<DynamicMembers>(&e->members)) threshold = dyn->threshold;
    return decide_labels(probs, e->kind(), threshold);
  }
  return argmax_labels(probs);
}

MetricsReport evaluate_model(const TrainedModel& model, const FeatureSet& labeled,
                             GMeanMode mode, ExecPolicy policy) {
  const Matrix probs = model_predict_proba(model, labeled, policy);
  const auto predicted = model_decide(model, probs);
  const auto truth = labeled.labels();
  return evaluate(truth, predicted, mode);
}

}  // namespace ensemblekit
