#include "ensemblekit/denn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

constexpr std::uint64_t kInitStream = 0x1d17;
constexpr std::uint64_t kEpochStreamBase = 0x5eed0000;

void init_layer(AffineLayer& layer, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
  for (double& w : layer.weights.values()) w = rng.uniform(-bound, bound);
}

void clear_layer(AffineLayer& layer) {
  std::fill(layer.weights.values().begin(), layer.weights.values().end(), 0.0);
  std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
}

// acc.weights += delta (outer) input; acc.bias += delta
void add_outer(AffineLayer& acc, std::span<const double> delta,
               std::span<const double> input) {
  for (std::size_t r = 0; r < delta.size(); ++r) {
    const double d = delta[r];
    acc.bias[r] += d;
    if (d == 0.0) continue;
    auto row = acc.weights.row(r);
    for (std::size_t c = 0; c < input.size(); ++c) row[c] += d * input[c];
  }
}

void scale_layer(AffineLayer& layer, double s) {
  for (double& w : layer.weights.values()) w *= s;
  for (double& b : layer.bias) b *= s;
}

void check_input(const DennModel& model, std::size_t n) {
  if (n != model.config.input_dim) {
    throw ContractError("denn: input length " + std::to_string(n) +
                        " does not match input_dim " +
                        std::to_string(model.config.input_dim));
  }
}

}  // namespace

void DennConfig::validate() const {
  if (input_dim < 2 || input_dim % 2 != 0) {
    throw ContractError("denn: input_dim must be even and >= 2, got " +
                        std::to_string(input_dim));
  }
  if (branch_width < 1) throw ContractError("denn: branch_width must be >= 1");
  if (num_classes < 2) throw ContractError("denn: num_classes must be >= 2");
  if (epochs < 1) throw ContractError("denn: epochs must be >= 1");
  if (batch_size < 1) throw ContractError("denn: batch_size must be >= 1");
  if (!(lr > 0.0) || !(eps > 0.0) || beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 ||
      beta2 >= 1.0) {
    throw ContractError("denn: Adam hyperparameters out of range");
  }
}

DennGradients::DennGradients(const DennConfig& cfg)
    : cnn_branch(cfg.branch_width, cfg.half_dim()),
      mlp_branch(cfg.branch_width, cfg.half_dim()),
      meta(cfg.num_classes, cfg.fused_width()) {}

void DennGradients::clear() {
  clear_layer(cnn_branch);
  clear_layer(mlp_branch);
  clear_layer(meta);
}

DennModel denn_init(const DennConfig& cfg, Rng& rng) {
  cfg.validate();
  DennModel model;
  model.config = cfg;
  model.cnn_branch = AffineLayer(cfg.branch_width, cfg.half_dim());
  model.mlp_branch = AffineLayer(cfg.branch_width, cfg.half_dim());
  model.meta = AffineLayer(cfg.num_classes, cfg.fused_width());
  init_layer(model.cnn_branch, rng);
  init_layer(model.mlp_branch, rng);
  init_layer(model.meta, rng);
  return model;
}

DennCache denn_forward(const DennModel& model, std::span<const double> x) {
  check_input(model, x.size());
  const auto& cfg = model.config;
  const std::size_t half = cfg.half_dim();
  const std::size_t width = cfg.branch_width;

  DennCache c;
  c.cnn_input = x.first(half);
  c.mlp_input = x.subspan(half);
  c.cnn_pre.resize(width);
  c.mlp_pre.resize(width);
  affine(model.cnn_branch.weights, c.cnn_input, model.cnn_branch.bias, c.cnn_pre);
  affine(model.mlp_branch.weights, c.mlp_input, model.mlp_branch.bias, c.mlp_pre);

  c.fused.resize(2 * width);
  for (std::size_t i = 0; i < width; ++i) {
    c.fused[i] = c.cnn_pre[i] > 0.0 ? c.cnn_pre[i] : 0.0;
    c.fused[width + i] = c.mlp_pre[i] > 0.0 ? c.mlp_pre[i] : 0.0;
  }
  c.logits.resize(cfg.num_classes);
  affine(model.meta.weights, c.fused, model.meta.bias, c.logits);
  c.probs = softmax(c.logits);
  return c;
}

double denn_accumulate_gradients(const DennModel& model, std::span<const double> x,
                                 std::size_t label, DennGradients& acc) {
  const DennCache c = denn_forward(model, x);
  const double loss = cross_entropy(c.probs, label);
  const std::size_t width = model.config.branch_width;

  // Softmax + cross-entropy: dL/dlogits = probs - onehot(label).
  Vector d_logits = c.probs;
  d_logits[label] -= 1.0;
  add_outer(acc.meta, d_logits, c.fused);

  Vector d_cnn(width, 0.0);
  Vector d_mlp(width, 0.0);
  for (std::size_t k = 0; k < d_logits.size(); ++k) {
    const auto w = model.meta.weights.row(k);
    const double d = d_logits[k];
    for (std::size_t i = 0; i < width; ++i) {
      d_cnn[i] += w[i] * d;
      d_mlp[i] += w[width + i] * d;
    }
  }
  for (std::size_t i = 0; i < width; ++i) {
    if (!(c.cnn_pre[i] > 0.0)) d_cnn[i] = 0.0;
    if (!(c.mlp_pre[i] > 0.0)) d_mlp[i] = 0.0;
  }
  add_outer(acc.cnn_branch, d_cnn, c.cnn_input);
  add_outer(acc.mlp_branch, d_mlp, c.mlp_input);
  return loss;
}

DennGradients denn_gradients(const DennModel& model, std::span<const double> x,
                             std::size_t label) {
  DennGradients g(model.config);
  denn_accumulate_gradients(model, x, label, g);
  return g;
}

double denn_loss(const DennModel& model, std::span<const double> x, std::size_t label) {
  return cross_entropy(denn_forward(model, x).probs, label);
}

DennFit denn_fit(const FeatureSet& train, const DennConfig& cfg,
                 const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw ContractError("denn_fit: empty training set");
  if (train.dim != cfg.input_dim) {
    throw ContractError("denn_fit: data dim " + std::to_string(train.dim) +
                        " does not match input_dim " + std::to_string(cfg.input_dim));
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int y = train.records[i].label;
    if (y < 0 || static_cast<std::size_t>(y) >= cfg.num_classes) {
      throw ContractError("denn_fit: label out of range at record " + std::to_string(i));
    }
  }

  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  DennFit fit{denn_init(cfg, init_rng), {}};
  DennModel& model = fit.model;
  const AdamParams adam = cfg.adam();

  AdamState s_cnn_w(model.cnn_branch.weights.size()), s_cnn_b(cfg.branch_width);
  AdamState s_mlp_w(model.mlp_branch.weights.size()), s_mlp_b(cfg.branch_width);
  AdamState s_meta_w(model.meta.weights.size()), s_meta_b(cfg.num_classes);

  DennGradients grads(cfg);
  std::vector<std::size_t> order(train.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, kEpochStreamBase + epoch));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      grads.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const auto& rec = train.records[order[i]];
        epoch_loss += denn_accumulate_gradients(
            model, rec.features, static_cast<std::size_t>(rec.label), grads);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      scale_layer(grads.cnn_branch, inv);
      scale_layer(grads.mlp_branch, inv);
      scale_layer(grads.meta, inv);

      adam_update(model.cnn_branch.weights, grads.cnn_branch.weights, s_cnn_w, adam);
      adam_update(model.cnn_branch.bias, grads.cnn_branch.bias, s_cnn_b, adam);
      adam_update(model.mlp_branch.weights, grads.mlp_branch.weights, s_mlp_w, adam);
      adam_update(model.mlp_branch.bias, grads.mlp_branch.bias, s_mlp_b, adam);
      adam_update(model.meta.weights, grads.meta.weights, s_meta_w, adam);
      adam_update(model.meta.bias, grads.meta.bias, s_meta_b, adam);
    }
    const double mean_loss = epoch_loss / static_cast<double>(train.size());
    fit.report.epoch_losses.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch + 1, mean_loss);
  }
  fit.report.adam_steps = s_meta_b.t;

  const Matrix probs = denn_predict_proba(model, train, ExecPolicy::serial);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (static_cast<int>(argmax(probs.row(i))) == train.records[i].label) ++correct;
  }
  fit.report.final_train_accuracy =
      static_cast<double>(correct) / static_cast<double>(train.size());
  return fit;
}

Matrix denn_predict_proba(const DennModel& model, const Matrix& features,
                          ExecPolicy policy) {
  check_input(model, features.cols());
  Matrix out(features.rows(), model.config.num_classes);
  for_each_index(features.rows(), policy, [&](std::size_t i) {
    const Vector probs = denn_forward(model, features.row(i)).probs;
    std::copy(probs.begin(), probs.end(), out.row(i).begin());
  });
  return out;
}

Matrix denn_predict_proba(const DennModel& model, const FeatureSet& set,
                          ExecPolicy policy) {
  check_input(model, set.dim);
  return denn_predict_proba(model, feature_matrix(set), policy);
}

}  // namespace ensemblekit
