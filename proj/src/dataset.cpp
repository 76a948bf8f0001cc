#include "ensemblekit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ensemblekit/binary_io.hpp"
#include "ensemblekit/error.hpp"
#include "ensemblekit/rng.hpp"

namespace ensemblekit {

namespace {

void check_record(const FeatureRecord& r, std::size_t dim, std::size_t index) {
  if (r.features.size() != dim) {
    throw DataError("feature length " + std::to_string(r.features.size()) +
                        " does not match dim " + std::to_string(dim),
                    index);
  }
  if (!all_finite(r.features)) throw DataError("non-finite feature value", index);
  if (!std::isfinite(r.power_loss) || r.power_loss < 0.0 || r.power_loss > 1.0) {
    throw DataError("power_loss outside [0, 1]", index);
  }
  if (r.label != kClean && r.label != kSoiled) {
    throw DataError("label outside {0, 1}", index);
  }
}

std::string dsef_id(std::size_t i) { return "dsef:" + std::to_string(i); }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
    field.remove_prefix(1);
  }
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
    field.remove_suffix(1);
  }
  // strtod accepts "nan"/"inf", which lets validation report them as data
  // errors rather than format errors.
  std::string owned(field);
  char* end = nullptr;
  const double v = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size()) {
    throw FormatError("csv line " + std::to_string(line_no) + ": cannot parse '" +
                      owned + "' as a number");
  }
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::vector<int> FeatureSet::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

void FeatureSet::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) check_record(records[i], dim, i);
}

Matrix feature_matrix(const FeatureSet& set) {
  Matrix m(set.size(), set.dim);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& f = set.records[i].features;
    std::copy(f.begin(), f.end(), m.row(i).begin());
  }
  return m;
}

bool same_payload(const FeatureSet& a, const FeatureSet& b) {
  if (a.dim != b.dim || a.labeled != b.labeled || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.features != y.features || x.power_loss != y.power_loss || x.label != y.label) {
      return false;
    }
  }
  return true;
}

std::string encode_dsef(const FeatureSet& set) {
  set.validate();
  ByteWriter w;
  w.put_bytes(kDsefMagic);
  w.put_u32(kDsefVersion);
  w.put_u64(set.size());
  w.put_u32(static_cast<std::uint32_t>(set.dim));
  w.put_u8(set.labeled ? 1 : 0);
  for (const auto& r : set.records) {
    w.put_f64(r.power_loss);
    w.put_u8(static_cast<std::uint8_t>(r.label));
    for (double v : r.features) w.put_f32(static_cast<float>(v));
  }
  return w.release();
}

FeatureSet decode_dsef(std::string_view bytes) {
  if (bytes.size() < kDsefMagic.size() || bytes.substr(0, 4) != kDsefMagic) {
    throw FormatError("not a DSEF file (bad magic)");
  }
  ByteReader r(bytes);
  r.get_bytes(4);
  const std::uint32_t version = r.get_u32();
  if (version != kDsefVersion) {
    throw FormatError("unsupported DSEF version " + std::to_string(version));
  }
  const std::uint64_t count = r.get_u64();
  const std::uint32_t dim = r.get_u32();
  const std::uint8_t flags = r.get_u8();
  const std::uint64_t record_bytes = 8 + 1 + 4ULL * dim;
  if (count > r.remaining() / record_bytes) {
    throw CorruptionError("truncated payload: header declares " + std::to_string(count) +
                          " records of " + std::to_string(record_bytes) + " bytes, " +
                          std::to_string(r.remaining()) + " bytes present");
  }
  if (r.remaining() != count * record_bytes) {
    throw CorruptionError("trailing bytes after last DSEF record");
  }

  FeatureSet set;
  set.dim = dim;
  set.labeled = (flags & 1u) != 0;
  set.records.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& rec = set.records[i];
    rec.power_loss = r.get_f64();
    rec.label = r.get_u8();
    rec.features.resize(dim);
    for (auto& v : rec.features) v = r.get_f32();
    rec.source_id = dsef_id(i);
    check_record(rec, dim, i);
  }
  return set;
}

std::string encode_csv(const FeatureSet& set) {
  set.validate();
  std::string out = "power_loss,label";
  for (std::size_t j = 0; j < set.dim; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& r : set.records) {
    append_double(out, r.power_loss);
    out += ',';
    out += std::to_string(r.label);
    for (double v : r.features) {
      out += ',';
      append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

FeatureSet decode_csv(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  };

  std::string_view header;
  if (!next_line(header)) throw FormatError("empty feature file");
  const auto columns = split_fields(header);
  if (columns.size() < 3 || columns[0] != "power_loss" || columns[1] != "label") {
    throw FormatError("not a DSEF file and no 'power_loss,label,f0,...' CSV header");
  }
  for (std::size_t j = 2; j < columns.size(); ++j) {
    if (columns[j] != "f" + std::to_string(j - 2)) {
      throw FormatError("csv header column " + std::to_string(j) + " should be f" +
                        std::to_string(j - 2));
    }
  }

  FeatureSet set;
  set.dim = columns.size() - 2;
  set.labeled = true;
  std::string_view line;
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != columns.size()) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(columns.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    FeatureRecord rec;
    rec.power_loss = parse_double(fields[0], line_no);
    const double label = parse_double(fields[1], line_no);
    rec.label = label == 1.0 ? kSoiled : (label == 0.0 ? kClean : -1);
    rec.features.reserve(set.dim);
    for (std::size_t j = 2; j < fields.size(); ++j) {
      rec.features.push_back(parse_double(fields[j], line_no));
    }
    const std::size_t index = set.records.size();
    rec.source_id = "csv:" + std::to_string(index);
    check_record(rec, set.dim, index);
    set.records.push_back(std::move(rec));
  }
  return set;
}

FeatureSet read_features(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == kDsefMagic) {
    return decode_dsef(bytes);
  }
  return decode_csv(bytes);
}

void write_features(const FeatureSet& set, const std::filesystem::path& path,
                    FeatureFormat format) {
  write_file_atomic(path, format == FeatureFormat::dsef ? encode_dsef(set) : encode_csv(set));
}

FeatureSet binarize_labels(const FeatureSet& set, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ContractError("binarize_labels: threshold must lie in (0, 1)");
  }
  FeatureSet out = set;
  out.labeled = true;
  for (auto& r : out.records) r.label = r.power_loss >= threshold ? kSoiled : kClean;
  return out;
}

Split stratified_split(const FeatureSet& set, const SplitConfig& cfg) {
  if (set.empty()) throw ContractError("stratified_split: empty feature set");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw ContractError("stratified_split: test_fraction must lie in (0, 1)");
  }
  Rng rng(cfg.seed);
  std::vector<char> in_test(set.size(), 0);

  auto pick = [&](std::vector<std::size_t> pool) {
    rng.shuffle(std::span<std::size_t>(pool));
    const auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(pool.size()) * cfg.test_fraction));
    for (std::size_t i = 0; i < n_test && i < pool.size(); ++i) in_test[pool[i]] = 1;
  };

  if (cfg.stratified) {
    for (int cls : {kClean, kSoiled}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.records[i].label == cls) pool.push_back(i);
      }
      if (!pool.empty()) pick(std::move(pool));
    }
  } else {
    std::vector<std::size_t> pool(set.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    pick(std::move(pool));
  }

  Split out;
  out.train.dim = out.test.dim = set.dim;
  out.train.labeled = out.test.labeled = set.labeled;
  for (std::size_t i = 0; i < set.size(); ++i) {
    (in_test[i] ? out.test : out.train).records.push_back(set.records[i]);
  }
  return out;
}

std::map<int, std::size_t> class_histogram(const FeatureSet& set) {
  std::map<int, std::size_t> counts;
  for (const auto& r : set.records) ++counts[r.label];
  return counts;
}

}  // namespace ensemblekit
