#include "ensemblekit/checkpoint.hpp"

#include "ensemblekit/binary_io.hpp"
#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void put_matrix(ByteWriter& w, const Matrix& m) {
  w.put_u64(m.rows());
  w.put_u64(m.cols());
  for (double v : m.values()) w.put_f64(v);
}

Matrix get_matrix(ByteReader& r) {
  const std::uint64_t rows = r.get_u64();
  const std::uint64_t cols = r.get_u64();
  if (cols != 0 && rows > r.remaining() / 8 / cols) {
    throw CorruptionError("checkpoint: matrix larger than remaining payload");
  }
  Matrix m(rows, cols);
  for (double& v : m.values()) v = r.get_f64();
  return m;
}

void put_vector(ByteWriter& w, const Vector& v) {
  w.put_u64(v.size());
  w.put_u64(1);
  for (double x : v) w.put_f64(x);
}

Vector get_vector(ByteReader& r) {
  const Matrix m = get_matrix(r);
  if (m.cols() != 1 && m.size() != 0) throw FormatError("checkpoint: expected a column vector");
  return Vector(m.values().begin(), m.values().end());
}

void put_nodes(ByteWriter& w, const std::vector<TreeNode>& nodes) {
  w.put_u64(nodes.size());
  for (const auto& n : nodes) {
    w.put_u32(static_cast<std::uint32_t>(n.feature));
    w.put_f64(n.threshold);
    w.put_u32(static_cast<std::uint32_t>(n.left));
    w.put_u32(static_cast<std::uint32_t>(n.right));
    w.put_f64(n.class_counts[0]);
    w.put_f64(n.class_counts[1]);
    w.put_f64(n.value);
  }
}

std::vector<TreeNode> get_nodes(ByteReader& r) {
  const std::uint64_t count = r.get_u64();
  constexpr std::size_t kNodeBytes = 4 + 8 + 4 + 4 + 8 + 8 + 8;
  if (count == 0 || count > r.remaining() / kNodeBytes) {
    throw CorruptionError("checkpoint: bad tree node count");
  }
  std::vector<TreeNode> nodes(count);
  for (auto& n : nodes) {
    n.feature = static_cast<std::int32_t>(r.get_u32());
    n.threshold = r.get_f64();
    n.left = static_cast<std::int32_t>(r.get_u32());
    n.right = static_cast<std::int32_t>(r.get_u32());
    n.class_counts[0] = r.get_f64();
    n.class_counts[1] = r.get_f64();
    n.value = r.get_f64();
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    const auto in_range = [&](std::int32_t c) {
      return c > static_cast<std::int32_t>(i) && static_cast<std::size_t>(c) < nodes.size();
    };
    if (!in_range(n.left) || !in_range(n.right)) {
      throw CorruptionError("checkpoint: tree child index out of range");
    }
  }
  return nodes;
}

void put_forest(ByteWriter& w, const RandomForest& f) {
  w.put_u64(f.trees.size());
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    w.put_u64(f.seeds[t]);
    const auto& p = f.trees[t].params;
    w.put_u64(p.max_depth);
    w.put_u64(p.min_samples_leaf);
    w.put_u64(p.features_per_split);
    put_nodes(w, f.trees[t].nodes);
  }
}

RandomForest get_forest(ByteReader& r) {
  const std::uint64_t count = r.get_u64();
  if (count > r.remaining()) throw CorruptionError("checkpoint: bad tree count");
  RandomForest f;
  f.trees.resize(count);
  f.seeds.resize(count);
  for (std::size_t t = 0; t < count; ++t) {
    f.seeds[t] = r.get_u64();
    auto& p = f.trees[t].params;
    p.max_depth = r.get_u64();
    p.min_samples_leaf = r.get_u64();
    p.features_per_split = r.get_u64();
    f.trees[t].nodes = get_nodes(r);
  }
  return f;
}

void put_gbm(ByteWriter& w, const GradientBoosting& g) {
  w.put_f64(g.f0);
  w.put_f64(g.shrinkage);
  w.put_u64(g.trees.size());
  for (const auto& t : g.trees) put_nodes(w, t.nodes);
}

GradientBoosting get_gbm(ByteReader& r) {
  GradientBoosting g;
  g.f0 = r.get_f64();
  g.shrinkage = r.get_f64();
  const std::uint64_t count = r.get_u64();
  if (count > r.remaining()) throw CorruptionError("checkpoint: bad tree count");
  g.trees.resize(count);
  for (auto& t : g.trees) t.nodes = get_nodes(r);
  return g;
}

void put_logreg(ByteWriter& w, const LogisticRegression& m) {
  put_vector(w, m.weights);
  w.put_f64(m.bias);
  w.put_f64(m.l2);
}

LogisticRegression get_logreg(ByteReader& r) {
  LogisticRegression m;
  m.weights = get_vector(r);
  m.bias = r.get_f64();
  m.l2 = r.get_f64();
  return m;
}

void put_svm(ByteWriter& w, const LinearSvm& m) {
  put_vector(w, m.weights);
  w.put_f64(m.bias);
  w.put_f64(m.c);
  w.put_f64(m.platt_a);
  w.put_f64(m.platt_b);
}

LinearSvm get_svm(ByteReader& r) {
  LinearSvm m;
  m.weights = get_vector(r);
  m.bias = r.get_f64();
  m.c = r.get_f64();
  m.platt_a = r.get_f64();
  m.platt_b = r.get_f64();
  return m;
}

void read_envelope(ByteReader& r, std::string_view magic) {
  if (r.remaining() < 4 || r.get_bytes(4) != magic) {
    throw FormatError("checkpoint: expected magic '" + std::string(magic) + "'");
  }
  const std::uint32_t version = r.get_u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
}

void expect_end(const ByteReader& r) {
  if (r.remaining() != 0) throw CorruptionError("checkpoint: trailing bytes");
}

void check_layer(const AffineLayer& l, std::size_t out, std::size_t in) {
  if (l.weights.rows() != out || l.weights.cols() != in || l.bias.size() != out) {
    throw FormatError("checkpoint: DENN parameter shape disagrees with its config");
  }
}

}  // namespace

std::string encode_denn(const DennModel& model) {
  const auto& c = model.config;
  ByteWriter w;
  w.put_bytes(kDennMagic);
  w.put_u32(kCheckpointVersion);
  w.put_u64(c.input_dim);
  w.put_u64(c.branch_width);
  w.put_u64(c.num_classes);
  w.put_u64(c.epochs);
  w.put_u64(c.batch_size);
  w.put_f64(c.lr);
  w.put_f64(c.beta1);
  w.put_f64(c.beta2);
  w.put_f64(c.eps);
  w.put_u64(c.seed);
  put_matrix(w, model.cnn_branch.weights);
  put_vector(w, model.cnn_branch.bias);
  put_matrix(w, model.mlp_branch.weights);
  put_vector(w, model.mlp_branch.bias);
  put_matrix(w, model.meta.weights);
  put_vector(w, model.meta.bias);
  return w.release();
}

DennModel decode_denn(std::string_view bytes) {
  ByteReader r(bytes);
  read_envelope(r, kDennMagic);
  DennModel m;
  auto& c = m.config;
  c.input_dim = r.get_u64();
  c.branch_width = r.get_u64();
  c.num_classes = r.get_u64();
  c.epochs = r.get_u64();
  c.batch_size = r.get_u64();
  c.lr = r.get_f64();
  c.beta1 = r.get_f64();
  c.beta2 = r.get_f64();
  c.eps = r.get_f64();
  c.seed = r.get_u64();
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw FormatError(std::string("checkpoint: invalid DENN config: ") + e.what());
  }
  m.cnn_branch.weights = get_matrix(r);
  m.cnn_branch.bias = get_vector(r);
  m.mlp_branch.weights = get_matrix(r);
  m.mlp_branch.bias = get_vector(r);
  m.meta.weights = get_matrix(r);
  m.meta.bias = get_vector(r);
  expect_end(r);
  check_layer(m.cnn_branch, c.branch_width, c.half_dim());
  check_layer(m.mlp_branch, c.branch_width, c.half_dim());
  check_layer(m.meta, c.num_classes, c.fused_width());
  return m;
}

std::string encode_ensemble(const EnsembleModel& model) {
  ByteWriter w;
  w.put_bytes(kEnsembleMagic);
  w.put_u32(kCheckpointVersion);
  w.put_u8(static_cast<std::uint8_t>(model.kind()));
  w.put_u64(model.input_dim);
  std::visit(Overloaded{
                 [&](const BaggingMembers& m) { put_forest(w, m.forest); },
                 [&](const BoostingMembers& m) { put_gbm(w, m.gbm); },
                 [&](const VotingMembers& m) {
                   put_logreg(w, m.logreg);
                   put_forest(w, m.forest);
                   put_svm(w, m.svm);
                 },
                 [&](const CascadingMembers& m) {
                   put_forest(w, m.level1);
                   put_logreg(w, m.level2);
                 },
                 [&](const BlendingMembers& m) {
                   put_forest(w, m.forest);
                   put_logreg(w, m.logreg);
                   put_logreg(w, m.meta);
                   w.put_f64(m.holdout);
                 },
                 [&](const DualMembers& m) {
                   put_forest(w, m.forest);
                   put_gbm(w, m.gbm);
                 },
                 [&](const DynamicMembers& m) {
                   put_forest(w, m.forest);
                   put_gbm(w, m.gbm);
                   put_logreg(w, m.logreg);
                   put_vector(w, m.weights);
                   w.put_f64(m.threshold);
                 },
             },
             model.members);
  return w.release();
}

EnsembleModel decode_ensemble(std::string_view bytes) {
  ByteReader r(bytes);
  read_envelope(r, kEnsembleMagic);
  const std::uint8_t tag = r.get_u8();
  EnsembleModel model;
  model.input_dim = r.get_u64();
  switch (static_cast<EnsembleKind>(tag)) {
    case EnsembleKind::bagging:
      model.members = BaggingMembers{get_forest(r)};
      break;
    case EnsembleKind::boosting:
      model.members = BoostingMembers{get_gbm(r)};
      break;
    case EnsembleKind::voting: {
      VotingMembers m;
      m.logreg = get_logreg(r);
      m.forest = get_forest(r);
      m.svm = get_svm(r);
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::cascading: {
      CascadingMembers m;
      m.level1 = get_forest(r);
      m.level2 = get_logreg(r);
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::blending: {
      BlendingMembers m;
      m.forest = get_forest(r);
      m.logreg = get_logreg(r);
      m.meta = get_logreg(r);
      m.holdout = r.get_f64();
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::dual_bb: {
      DualMembers m;
      m.forest = get_forest(r);
      m.gbm = get_gbm(r);
      model.members = std::move(m);
      break;
    }
    case EnsembleKind::dynamic: {
      DynamicMembers m;
      m.forest = get_forest(r);
      m.gbm = get_gbm(r);
      m.logreg = get_logreg(r);
      m.weights = get_vector(r);
      m.threshold = r.get_f64();
      model.members = std::move(m);
      break;
    }
    default:
      throw FormatError("checkpoint: unknown ensemble kind tag " + std::to_string(tag));
  }
  expect_end(r);
  return model;
}

std::string encode_model(const TrainedModel& model) {
  return std::visit(Overloaded{
                        [](const DennModel& m) { return encode_denn(m); },
                        [](const EnsembleModel& m) { return encode_ensemble(m); },
                    },
                    model);
}

TrainedModel decode_model(std::string_view bytes) {
  const auto magic = bytes.substr(0, 4);
  if (magic == kDennMagic) return decode_denn(bytes);
  if (magic == kEnsembleMagic) return decode_ensemble(bytes);
  throw FormatError("not a model checkpoint (unknown magic)");
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace ensemblekit
