#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ensemblekit/dataset.hpp"
#include "ensemblekit/numeric.hpp"
#include "ensemblekit/parallel.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit {

// Dual Ensemble Neural Network.
//
// The input vector x (length d, even) is cut in half. The first half feeds
// the "CNN" branch and the second half the "MLP" branch; each branch is one
// affine map followed by ReLU. The two branch outputs are concatenated into
// the fused representation (2 * branch_width wide, 256 at the defaults) and a
// final affine layer + softmax produces class probabilities. Despite their
// names, neither branch contains convolutions: both consume precomputed
// backbone features.
struct DennConfig {
  std::size_t input_dim = 0;  // must be even
  std::size_t branch_width = 128;
  std::size_t num_classes = 2;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;  // throws ContractError
  std::size_t half_dim() const noexcept { return input_dim / 2; }
  std::size_t fused_width() const noexcept { return 2 * branch_width; }
  AdamParams adam() const { return {lr, beta1, beta2, eps}; }

  bool operator==(const DennConfig&) const = default;
};

struct AffineLayer {
  Matrix weights;  // out x in
  Vector bias;     // out

  AffineLayer() = default;
  AffineLayer(std::size_t out, std::size_t in) : weights(out, in), bias(out, 0.0) {}

  bool operator==(const AffineLayer&) const = default;
};

struct DennModel {
  AffineLayer cnn_branch;  // branch_width x d/2
  AffineLayer mlp_branch;  // branch_width x d/2
  AffineLayer meta;        // num_classes x 2*branch_width
  DennConfig config;

  bool operator==(const DennModel&) const = default;
};

// Everything the backward pass needs from one forward pass.
struct DennCache {
  std::span<const double> cnn_input;
  std::span<const double> mlp_input;
  Vector cnn_pre;  // pre-activations
  Vector mlp_pre;
  Vector fused;  // [relu(cnn_pre); relu(mlp_pre)]
  Vector logits;
  Vector probs;
};

// Gradients, shaped like the model's parameter blocks.
struct DennGradients {
  AffineLayer cnn_branch;
  AffineLayer mlp_branch;
  AffineLayer meta;

  explicit DennGradients(const DennConfig& cfg);
  void clear();
};

struct TrainReport {
  std::vector<double> epoch_losses;  // mean cross-entropy per epoch
  double final_train_accuracy = 0.0;
  std::uint64_t adam_steps = 0;  // per parameter block
};

struct DennFit {
  DennModel model;
  TrainReport report;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
DennModel denn_init(const DennConfig& cfg, Rng& rng);

// The cache refers to `x`, which must outlive it.
DennCache denn_forward(const DennModel& model, std::span<const double> x);

// Exact gradients of cross_entropy(softmax(...), label). The ReLU derivative
// at 0 is taken as 0.
DennGradients denn_gradients(const DennModel& model, std::span<const double> x,
                             std::size_t label);

// Adds this sample's gradients into `acc` and returns its loss.
double denn_accumulate_gradients(const DennModel& model, std::span<const double> x,
                                 std::size_t label, DennGradients& acc);

double denn_loss(const DennModel& model, std::span<const double> x, std::size_t label);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Mini-batch Adam over cfg.epochs shuffled epochs. Epoch e shuffles with
// derive_seed(cfg.seed, 0x5eed0000 + e); the initial weights use their own
// derived stream. Single-threaded and bit-reproducible.
DennFit denn_fit(const FeatureSet& train, const DennConfig& cfg,
                 const EpochCallback& on_epoch = {});

// N x num_classes class probabilities; row i equals denn_forward on record i.
Matrix denn_predict_proba(const DennModel& model, const Matrix& features,
                          ExecPolicy policy = ExecPolicy::parallel);
Matrix denn_predict_proba(const DennModel& model, const FeatureSet& set,
                          ExecPolicy policy = ExecPolicy::parallel);

}  // namespace ensemblekit
