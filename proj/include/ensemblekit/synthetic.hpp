#pragma once

#include <cstddef>
#include <cstdint>

#include "ensemblekit/dataset.hpp"

namespace ensemblekit::synthetic {

// Seeded stand-in for extracted image features. Each record draws a latent
// image descriptor z ~ N(0, I_latent); the two feature halves are two noisy
// linear views of z (as if from two backbones looking at the same image).
// The soiling score s(z) = v . relu(A z + a) comes from a fixed random
// two-layer generator and the top `minority_fraction` of scores are soiled.
// power_loss encodes the score so that binarize_labels(set, threshold)
// recovers exactly these labels.
struct BenchmarkSpec {
  std::size_t records = 4000;
  std::size_t dim = 32;
  std::size_t latent = 8;
  std::size_t hidden = 16;
  double view_noise = 0.1;
  double minority_fraction = 0.2;
  double threshold = 0.05;
  std::uint64_t seed = 20240601;
};

FeatureSet benchmark_dataset(const BenchmarkSpec& spec);

// Linearly separable set: labels from a random hyperplane through the
// origin, with every point pushed to distance >= margin/2 from it. Soiled
// records get power_loss 0.5, clean ones 0.
FeatureSet separable_dataset(std::size_t records, std::size_t dim, double margin,
                             std::uint64_t seed, double positive_fraction = 0.5);

// Gaussian features with independent random labels (p(soiled) = positive_rate).
// With continuous features no two records coincide, so the set is consistent.
FeatureSet random_dataset(std::size_t records, std::size_t dim, std::uint64_t seed,
                          double positive_rate = 0.5);

}  // namespace ensemblekit::synthetic
