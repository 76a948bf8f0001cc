#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace ensemblekit {

// Appends little-endian scalars to a byte buffer.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  void put_f64(double v);
  void put_bytes(std::string_view raw) { bytes_.append(raw); }
  void put_string(std::string_view s);  // u32 length prefix

  const std::string& bytes() const noexcept { return bytes_; }
  std::string release() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

// Reads little-endian scalars; any read past the end throws CorruptionError.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t get_u8();
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  float get_f32();
  double get_f64();
  std::string_view get_bytes(std::size_t n);
  std::string get_string();

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  void require(std::size_t n) const;

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_file_bytes(const std::filesystem::path& path);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ensemblekit
