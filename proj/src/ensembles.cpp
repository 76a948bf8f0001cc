#include "ensemblekit/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensemblekit/error.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit {

namespace {

// Seed streams for the members of one ensemble.
enum MemberStream : std::uint64_t {
  kForestStream = 101,
  kGbmStream = 102,
  kBlendSplitStream = 103,
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t default_features_per_split(std::size_t d) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
}

void check_labels(std::span<const int> y, std::size_t n, bool need_both, const char* who) {
  if (n == 0) throw ContractError(std::string(who) + ": empty training set");
  if (y.size() != n) throw ContractError(std::string(who) + ": label count mismatch");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ContractError(std::string(who) + ": labels must be 0 or 1");
  }
  if (need_both && (!has0 || !has1)) {
    throw ContractError(std::string(who) + ": both classes are required");
  }
}

double log_loss(std::span<const double> scores, std::span<const int> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    total += softplus(scores[i]) - (y[i] == 1 ? scores[i] : 0.0);
  }
  return total / static_cast<double>(scores.size());
}

Matrix logreg_proba_rows(const LogisticRegression& model, const Matrix& x,
                         ExecPolicy policy) {
  Matrix out(x.rows(), 2);
  for_each_index(x.rows(), policy, [&](std::size_t i) {
    const Vector p = logreg_predict_proba(model, x.row(i));
    out(i, 0) = p[0];
    out(i, 1) = p[1];
  });
  return out;
}

Matrix svm_proba_rows(const LinearSvm& model, const Matrix& x, ExecPolicy policy) {
  Matrix out(x.rows(), 2);
  for_each_index(x.rows(), policy, [&](std::size_t i) {
    const Vector p = svm_predict_proba(model, x.row(i));
    out(i, 0) = p[0];
    out(i, 1) = p[1];
  });
  return out;
}

Matrix concat_columns(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto row = out.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), row.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), row.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

Matrix mean_of(std::initializer_list<const Matrix*> parts) {
  const Matrix& first = **parts.begin();
  Matrix out(first.rows(), first.cols());
  for (const Matrix* m : parts) {
    for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] += m->values()[k];
  }
  const double n = static_cast<double>(parts.size());
  for (double& v : out.values()) v /= n;
  return out;
}

LogRegConfig member_logreg(const EnsembleConfig& cfg, std::uint64_t stream) {
  LogRegConfig c = cfg.logreg;
  c.seed = derive_seed(cfg.seed, stream);
  return c;
}

}  // namespace

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::bagging: return "bagging";
    case EnsembleKind::boosting: return "boosting";
    case EnsembleKind::voting: return "voting";
    case EnsembleKind::cascading: return "cascading";
    case EnsembleKind::blending: return "blending";
    case EnsembleKind::dual_bb: return "dual_bb";
    case EnsembleKind::dynamic: return "dynamic";
  }
  throw ContractError("unknown ensemble kind");
}

EnsembleKind parse_ensemble_kind(std::string_view name) {
  for (EnsembleKind k : kAllEnsembleKinds) {
    if (to_string(k) == name) return k;
  }
  throw ContractError("unknown ensemble kind '" + std::string(name) + "'");
}

void EnsembleConfig::validate() const {
  if (n_trees < 1 || bagging_depth < 1 || boosting_rounds < 1 || boosting_depth < 1 ||
      forest_min_samples_leaf < 1) {
    throw ContractError("ensemble config: counts must be >= 1");
  }
  if (!(shrinkage > 0.0)) throw ContractError("ensemble config: shrinkage must be > 0");
  if (!(blend_holdout > 0.0 && blend_holdout < 1.0)) {
    throw ContractError("ensemble config: blend_holdout must lie in (0, 1)");
  }
  if (!(dynamic_threshold > 0.0 && dynamic_threshold < 1.0)) {
    throw ContractError("ensemble config: dynamic_threshold must lie in (0, 1)");
  }
  if (!dynamic_weights.empty()) {
    if (dynamic_weights.size() != 3) {
      throw ContractError("ensemble config: dynamic_weights needs 3 entries");
    }
    double total = 0.0;
    for (double w : dynamic_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ContractError("ensemble config: dynamic_weights must be >= 0");
      }
      total += w;
    }
    if (!(total > 0.0)) throw ContractError("ensemble config: dynamic_weights sum to 0");
  }
}

EnsembleKind EnsembleModel::kind() const {
  return std::visit(
      Overloaded{
          [](const BaggingMembers&) { return EnsembleKind::bagging; },
          [](const BoostingMembers&) { return EnsembleKind::boosting; },
          [](const VotingMembers&) { return EnsembleKind::voting; },
          [](const CascadingMembers&) { return EnsembleKind::cascading; },
          [](const BlendingMembers&) { return EnsembleKind::blending; },
          [](const DualMembers&) { return EnsembleKind::dual_bb; },
          [](const DynamicMembers&) { return EnsembleKind::dynamic; },
      },
      members);
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.uniform_index(static_cast<std::uint32_t>(n));
  return rows;
}

RandomForest fit_forest(const Matrix& x, std::span<const int> y, const EnsembleConfig& cfg,
                        std::uint64_t seed, ExecPolicy policy) {
  check_labels(y, x.rows(), false, "fit_forest");
  if (cfg.n_trees < 1) throw ContractError("fit_forest: n_trees must be >= 1");
  TreeParams params;
  params.max_depth = cfg.bagging_depth;
  params.min_samples_leaf = cfg.forest_min_samples_leaf;
  params.features_per_split = cfg.forest_features_per_split == 0
                                  ? default_features_per_split(x.cols())
                                  : cfg.forest_features_per_split;

  RandomForest forest;
  forest.trees.resize(cfg.n_trees);
  forest.seeds.resize(cfg.n_trees);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) forest.seeds[t] = derive_seed(seed, t);

  std::vector<std::size_t> all_rows(x.rows());
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  for_each_index(cfg.n_trees, policy, [&](std::size_t t) {
    Rng rng(forest.seeds[t]);
    if (cfg.bootstrap) {
      const auto rows = bootstrap_rows(x.rows(), rng);
      forest.trees[t] = tree_fit(x, y, rows, params, rng);
    } else {
      forest.trees[t] = tree_fit(x, y, all_rows, params, rng);
    }
  });
  return forest;
}

Matrix forest_predict_proba(const RandomForest& forest, const Matrix& x, ExecPolicy policy) {
  if (forest.trees.empty()) throw ContractError("forest_predict_proba: empty forest");
  Matrix out(x.rows(), 2);
  const double n = static_cast<double>(forest.trees.size());
  for_each_index(x.rows(), policy, [&](std::size_t i) {
    double p0 = 0.0, p1 = 0.0;
    for (const auto& tree : forest.trees) {
      const auto& c = tree.nodes[tree.leaf_index(x.row(i))].class_counts;
      const double total = c[0] + c[1];
      p0 += c[0] / total;
      p1 += c[1] / total;
    }
    out(i, 0) = p0 / n;
    out(i, 1) = p1 / n;
  });
  return out;
}

GradientBoosting fit_gradient_boosting(const Matrix& x, std::span<const int> y,
                                       const EnsembleConfig& cfg, std::uint64_t seed,
                                       LossTrace* trace) {
  check_labels(y, x.rows(), true, "gbm_fit");
  if (!(cfg.shrinkage > 0.0)) throw ContractError("gbm_fit: shrinkage must be > 0");
  const std::size_t n = x.rows();

  double positives = 0.0;
  for (int v : y) positives += v;
  const double base_rate = positives / static_cast<double>(n);

  GradientBoosting gbm;
  gbm.f0 = std::log(base_rate / (1.0 - base_rate));
  gbm.shrinkage = cfg.shrinkage;

  std::vector<double> score(n, gbm.f0);
  std::vector<double> residual(n);
  std::vector<double> candidate(n);
  double loss = log_loss(score, y);
  if (trace) trace->assign(1, loss);

  TreeParams params;
  params.max_depth = cfg.boosting_depth;
  params.min_samples_leaf = 1;
  params.features_per_split = 0;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  for (std::size_t round = 0; round < cfg.boosting_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - sigmoid(score[i]);
    Rng rng(derive_seed(seed, round));
    RegressionTree tree = regression_tree_fit(x, residual, rows, params, rng);

    std::vector<std::vector<std::size_t>> members(tree.nodes.size());
    for (std::size_t i = 0; i < n; ++i) members[tree.leaf_index(x.row(i))].push_back(i);

    for (std::size_t leaf = 0; leaf < tree.nodes.size(); ++leaf) {
      auto& node = tree.nodes[leaf];
      if (!node.is_leaf()) continue;
      const auto& in_leaf = members[leaf];
      double g = 0.0, h = 0.0, before = 0.0;
      for (std::size_t i : in_leaf) {
        const double p = sigmoid(score[i]);
        g += residual[i];
        h += p * (1.0 - p);
        before += softplus(score[i]) - (y[i] == 1 ? score[i] : 0.0);
      }
      double value = h > 0.0 ? g / h : 0.0;
      for (int halvings = 0;; ++halvings) {
        if (halvings == 60 || value == 0.0) {
          value = 0.0;
          break;
        }
        double after = 0.0;
        for (std::size_t i : in_leaf) {
          const double f = score[i] + cfg.shrinkage * value;
          after += softplus(f) - (y[i] == 1 ? f : 0.0);
        }
        if (after <= before) break;
        value *= 0.5;
      }
      node.value = value;
    }

    for (std::size_t i = 0; i < n; ++i) {
      candidate[i] = score[i] + cfg.shrinkage * tree.predict(x.row(i));
    }
    const double next_loss = log_loss(candidate, y);
    if (next_loss > loss) {
      // Only reachable through summation-order rounding; keep the round as a
      // no-op so the trace stays monotone.
      for (auto& node : tree.nodes) node.value = 0.0;
    } else {
      score.swap(candidate);
      loss = next_loss;
    }
    if (trace) trace->push_back(loss);
    gbm.trees.push_back(std::move(tree));
  }
  return gbm;
}

double gbm_score(const GradientBoosting& gbm, std::span<const double> x,
                 std::optional<std::size_t> rounds) {
  const std::size_t limit = std::min(rounds.value_or(gbm.trees.size()), gbm.trees.size());
  double f = gbm.f0;
  for (std::size_t t = 0; t < limit; ++t) f += gbm.shrinkage * gbm.trees[t].predict(x);
  return f;
}

Matrix gbm_predict_proba(const GradientBoosting& gbm, const Matrix& x, ExecPolicy policy) {
  Matrix out(x.rows(), 2);
  for_each_index(x.rows(), policy, [&](std::size_t i) {
    const double p = sigmoid(gbm_score(gbm, x.row(i)));
    out(i, 0) = 1.0 - p;
    out(i, 1) = p;
  });
  return out;
}

EnsembleModel rf_fit(const FeatureSet& train, const EnsembleConfig& cfg, ExecPolicy policy) {
  return ensemble_fit(EnsembleKind::bagging, train, cfg, policy);
}

EnsembleModel gbm_fit(const FeatureSet& train, const EnsembleConfig& cfg, LossTrace* trace) {
  cfg.validate();
  if (train.empty()) throw ContractError("gbm_fit: empty training set");
  const Matrix x = feature_matrix(train);
  const auto y = train.labels();
  EnsembleModel model;
  model.input_dim = train.dim;
  model.members =
      BoostingMembers{fit_gradient_boosting(x, y, cfg, derive_seed(cfg.seed, kGbmStream), trace)};
  return model;
}

Split blend_partition(const FeatureSet& train, const EnsembleConfig& cfg) {
  Split parts = stratified_split(
      train, SplitConfig{cfg.blend_holdout, derive_seed(cfg.seed, kBlendSplitStream), true});
  const auto hist = class_histogram(parts.test);
  if (hist.size() < 2) {
    throw ContractError("blending: holdout of " + std::to_string(parts.test.size()) +
                        " records does not contain both classes");
  }
  return parts;
}

Matrix augment_with_probabilities(const Matrix& x, const Matrix& probs) {
  if (x.rows() != probs.rows()) throw ContractError("augment: row count mismatch");
  return concat_columns(x, probs);
}

EnsembleModel ensemble_fit(EnsembleKind kind, const FeatureSet& train,
                           const EnsembleConfig& cfg, ExecPolicy policy) {
  cfg.validate();
  if (train.empty()) throw ContractError("ensemble_fit: empty training set");
  const Matrix x = feature_matrix(train);
  const auto y = train.labels();
  const std::uint64_t forest_seed = derive_seed(cfg.seed, kForestStream);
  const std::uint64_t gbm_seed = derive_seed(cfg.seed, kGbmStream);

  EnsembleModel model;
  model.input_dim = train.dim;
  switch (kind) {
    case EnsembleKind::bagging:
      check_labels(y, x.rows(), false, "bagging");
      model.members = BaggingMembers{fit_forest(x, y, cfg, forest_seed, policy)};
      break;
    case EnsembleKind::boosting:
      model.members = BoostingMembers{fit_gradient_boosting(x, y, cfg, gbm_seed)};
      break;
    case EnsembleKind::voting: {
      VotingMembers m;
      m.logreg = logreg_fit(x, y, member_logreg(cfg, 1));
      m.forest = fit_forest(x, y, cfg, forest_seed, policy);
      m.svm = svm_fit(x, y, cfg.svm);
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::cascading: {
      CascadingMembers m;
      m.level1 = fit_forest(x, y, cfg, forest_seed, policy);
      const Matrix augmented =
          augment_with_probabilities(x, forest_predict_proba(m.level1, x, policy));
      m.level2 = logreg_fit(augmented, y, member_logreg(cfg, 2));
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::blending: {
      const Split parts = blend_partition(train, cfg);
      const Matrix base_x = feature_matrix(parts.train);
      const auto base_y = parts.train.labels();
      const Matrix hold_x = feature_matrix(parts.test);
      const auto hold_y = parts.test.labels();
      BlendingMembers m;
      m.holdout = cfg.blend_holdout;
      m.forest = fit_forest(base_x, base_y, cfg, forest_seed, policy);
      m.logreg = logreg_fit(base_x, base_y, member_logreg(cfg, 1));
      const Matrix meta_x = concat_columns(forest_predict_proba(m.forest, hold_x, policy),
                                           logreg_proba_rows(m.logreg, hold_x, policy));
      m.meta = logreg_fit(meta_x, hold_y, member_logreg(cfg, 3));
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::dual_bb: {
      DualMembers m;
      m.forest = fit_forest(x, y, cfg, forest_seed, policy);
      m.gbm = fit_gradient_boosting(x, y, cfg, gbm_seed);
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::dynamic: {
      DynamicMembers m;
      m.forest = fit_forest(x, y, cfg, forest_seed, policy);
      m.gbm = fit_gradient_boosting(x, y, cfg, gbm_seed);
      m.logreg = logreg_fit(x, y, member_logreg(cfg, 1));
      m.weights = cfg.dynamic_weights.empty() ? std::vector<double>(3, 1.0)
                                              : cfg.dynamic_weights;
      const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
      for (double& w : m.weights) w /= total;
      m.threshold = cfg.dynamic_threshold;
      model.members = std::move(m);
      break;
    }
    default:
      throw ContractError("ensemble_fit: unknown ensemble kind");
  }
  return model;
}

Matrix ensemble_predict_proba(const EnsembleModel& model, const Matrix& x, ExecPolicy policy) {
  if (x.cols() != model.input_dim) {
    throw ContractError("ensemble: data dim " + std::to_string(x.cols()) +
                        " does not match model input dim " +
                        std::to_string(model.input_dim));
  }
  return std::visit(
      Overloaded{
          [&](const BaggingMembers& m) { return forest_predict_proba(m.forest, x, policy); },
          [&](const BoostingMembers& m) { return gbm_predict_proba(m.gbm, x, policy); },
          [&](const VotingMembers& m) {
            const Matrix a = logreg_proba_rows(m.logreg, x, policy);
            const Matrix b = forest_predict_proba(m.forest, x, policy);
            const Matrix c = svm_proba_rows(m.svm, x, policy);
            return mean_of({&a, &b, &c});
          },
          [&](const CascadingMembers& m) {
            const Matrix augmented =
                augment_with_probabilities(x, forest_predict_proba(m.level1, x, policy));
            return logreg_proba_rows(m.level2, augmented, policy);
          },
          [&](const BlendingMembers& m) {
            const Matrix meta_x = concat_columns(forest_predict_proba(m.forest, x, policy),
                                                 logreg_proba_rows(m.logreg, x, policy));
            return logreg_proba_rows(m.meta, meta_x, policy);
          },
          [&](const DualMembers& m) {
            const Matrix a = forest_predict_proba(m.forest, x, policy);
            const Matrix b = gbm_predict_proba(m.gbm, x, policy);
            return mean_of({&a, &b});
          },
          [&](const DynamicMembers& m) {
            const Matrix parts[] = {forest_predict_proba(m.forest, x, policy),
                                    gbm_predict_proba(m.gbm, x, policy),
                                    logreg_proba_rows(m.logreg, x, policy)};
            Matrix out(x.rows(), 2);
            for (std::size_t k = 0; k < 3; ++k) {
              for (std::size_t e = 0; e < out.size(); ++e) {
                out.values()[e] += m.weights[k] * parts[k].values()[e];
              }
            }
            return out;
          },
      },
      model.members);
}

Matrix ensemble_predict_proba(const EnsembleModel& model, const FeatureSet& set,
                              ExecPolicy policy) {
  if (set.dim != model.input_dim) {
    throw ContractError("ensemble: data dim " + std::to_string(set.dim) +
                        " does not match model input dim " +
                        std::to_string(model.input_dim));
  }
  return ensemble_predict_proba(model, feature_matrix(set), policy);
}

std::vector<int> argmax_labels(const Matrix& probs) {
  std::vector<int> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    out[i] = static_cast<int>(argmax(probs.row(i)));
  }
  return out;
}

std::vector<int> decide_labels(const Matrix& probs, EnsembleKind kind,
                               double dynamic_threshold) {
  if (kind != EnsembleKind::dynamic) return argmax_labels(probs);
  std::vector<int> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    out[i] = probs(i, 1) >= dynamic_threshold ? 1 : 0;
  }
  return out;
}

}  // namespace ensemblekit
