#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "ensemblekit/denn.hpp"
#include "ensemblekit/ensembles.hpp"

namespace ensemblekit {

// Binary checkpoints share one envelope: 4 magic bytes, u32 version, then a
// kind-specific body. All scalars are little-endian; parameters are f64.
//
//   DENN v1: config block (input_dim, branch_width, num_classes, epochs,
//            batch_size as u64; lr, beta1, beta2, eps as f64; seed u64),
//            then W_cnn, b_cnn, W_mlp, b_mlp, W_meta, b_meta, each as
//            rows u64, cols u64, rows*cols f64.
//   ENSM v1: kind tag u8, input_dim u64, then the member blobs in the
//            order the member structs declare them.
inline constexpr std::string_view kDennMagic = "DENN";
inline constexpr std::string_view kEnsembleMagic = "ENSM";
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_denn(const DennModel& model);
DennModel decode_denn(std::string_view bytes);

std::string encode_ensemble(const EnsembleModel& model);
EnsembleModel decode_ensemble(std::string_view bytes);

using TrainedModel = std::variant<DennModel, EnsembleModel>;

std::string encode_model(const TrainedModel& model);
// Dispatches on the magic bytes; throws FormatError for anything else.
TrainedModel decode_model(std::string_view bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace ensemblekit
