#include "ensemblekit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ensemblekit/error.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit::synthetic {

FeatureSet benchmark_dataset(const BenchmarkSpec& spec) {
  if (spec.records < 2 || spec.dim < 2 || spec.dim % 2 != 0 || spec.latent < 1 ||
      spec.hidden < 1 || !(spec.view_noise >= 0.0) ||
      !(spec.minority_fraction > 0.0 && spec.minority_fraction < 1.0) ||
      !(spec.threshold > 0.0 && spec.threshold < 1.0)) {
    throw ContractError("benchmark_dataset: invalid spec");
  }
  Rng rng(spec.seed);
  const std::size_t half = spec.dim / 2;
  const double inv_sqrt_latent = 1.0 / std::sqrt(static_cast<double>(spec.latent));
  auto gaussian_matrix = [&](std::size_t rows, std::size_t cols, double scale) {
    Matrix m(rows, cols);
    for (double& w : m.values()) w = rng.normal() * scale;
    return m;
  };
  const Matrix view_a = gaussian_matrix(half, spec.latent, inv_sqrt_latent);
  const Matrix view_b = gaussian_matrix(half, spec.latent, inv_sqrt_latent);
  const Matrix hidden_w = gaussian_matrix(spec.hidden, spec.latent, inv_sqrt_latent);
  Vector hidden_b(spec.hidden);
  for (double& b : hidden_b) b = 0.5 * rng.normal();
  Vector out_w(spec.hidden);
  for (double& v : out_w) v = rng.normal();
  const Vector zero_half(half, 0.0);

  FeatureSet set;
  set.dim = spec.dim;
  set.labeled = true;
  set.records.resize(spec.records);
  Vector scores(spec.records);
  Vector z(spec.latent), h(spec.hidden), va(half), vb(half);
  for (std::size_t i = 0; i < spec.records; ++i) {
    for (double& v : z) v = rng.normal();
    affine(view_a, z, zero_half, va);
    affine(view_b, z, zero_half, vb);
    auto& rec = set.records[i];
    rec.features.resize(spec.dim);
    // Round through float so the set survives DSEF storage unchanged.
    for (std::size_t j = 0; j < half; ++j) {
      rec.features[j] = static_cast<float>(va[j] + spec.view_noise * rng.normal());
    }
    for (std::size_t j = 0; j < half; ++j) {
      rec.features[half + j] = static_cast<float>(vb[j] + spec.view_noise * rng.normal());
    }
    affine(hidden_w, z, hidden_b, h);
    double s = 0.0;
    for (std::size_t k = 0; k < spec.hidden; ++k) s += out_w[k] * std::max(0.0, h[k]);
    scores[i] = s;
    rec.source_id = "bench:" + std::to_string(i);
  }

  Vector sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto n_min = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(spec.minority_fraction * static_cast<double>(spec.records))));
  const double cut = sorted[n_min - 1];
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double scale = std::max(1e-12, std::sqrt(var / static_cast<double>(scores.size())));

  for (std::size_t i = 0; i < spec.records; ++i) {
    auto& rec = set.records[i];
    rec.label = scores[i] >= cut ? kSoiled : kClean;
    rec.power_loss = rec.label == kSoiled
                         ? std::min(1.0, std::max(spec.threshold,
                                                  spec.threshold * std::exp((scores[i] - cut) / scale)))
                         : std::min(spec.threshold * std::exp((scores[i] - cut) / scale),
                                    std::nextafter(spec.threshold, 0.0));
  }
  return set;
}

FeatureSet separable_dataset(std::size_t records, std::size_t dim, double margin,
                             std::uint64_t seed, double positive_fraction) {
  if (records < 1 || dim < 1) throw ContractError("separable_dataset: empty spec");
  Rng rng(seed);
  Vector normal(dim);
  double norm = 0.0;
  for (double& w : normal) {
    w = rng.normal();
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (double& w : normal) w /= norm;

  FeatureSet set;
  set.dim = dim;
  set.labeled = true;
  set.records.resize(records);
  for (std::size_t i = 0; i < records; ++i) {
    auto& rec = set.records[i];
    rec.features.resize(dim);
    for (double& f : rec.features) f = rng.normal();
    const int label = rng.uniform01() < positive_fraction ? kSoiled : kClean;
    // Reflect onto the label's side, then push out by margin / 2.
    const double s = dot(normal, rec.features);
    const double side = label == kSoiled ? 1.0 : -1.0;
    const double shift = side * (std::abs(s) + margin / 2.0) - s;
    for (std::size_t j = 0; j < dim; ++j) {
      rec.features[j] = static_cast<float>(rec.features[j] + shift * normal[j]);
    }
    rec.label = label;
    rec.power_loss = label == kSoiled ? 0.5 : 0.0;
    rec.source_id = "separable:" + std::to_string(i);
  }
  return set;
}

FeatureSet random_dataset(std::size_t records, std::size_t dim, std::uint64_t seed,
                          double positive_rate) {
  Rng rng(seed);
  FeatureSet set;
  set.dim = dim;
  set.labeled = true;
  set.records.resize(records);
  for (std::size_t i = 0; i < records; ++i) {
    auto& rec = set.records[i];
    rec.features.resize(dim);
    for (double& f : rec.features) f = rng.normal();
    rec.label = rng.uniform01() < positive_rate ? kSoiled : kClean;
    rec.power_loss = rec.label == kSoiled ? 0.5 : 0.0;
    rec.source_id = "random:" + std::to_string(i);
  }
  return set;
}

}  // namespace ensemblekit::synthetic
